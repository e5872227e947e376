"""Reference adapters for the auditor's subprocess prediction protocol."""

from oracle_adapter.errors import AdapterError
from oracle_adapter.manifest import MODES, AdapterManifest, label_mapping, load_manifest
from oracle_adapter.models import (CategoricalInput, KeywordModel, LinearModel,
                                   NumericInput, load_model)
from oracle_adapter.serve import serve

__version__ = "0.1.0"

__all__ = [
    "AdapterError", "AdapterManifest", "CategoricalInput", "KeywordModel",
    "LinearModel", "MODES", "NumericInput", "label_mapping", "load_manifest",
    "load_model", "serve", "__version__",
]
