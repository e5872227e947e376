class AdapterError(Exception):
    """Anything wrong with a manifest, model artifact, or request."""
