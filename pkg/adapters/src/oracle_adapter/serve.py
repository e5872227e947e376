"""The request loop: JSON-line requests in, id-matched responses out.

Each request is ``{"id": n, "features": [...]}`` (or ``"tokens"`` for text
models); each answer is ``{"id": n, "label": "..."}`` flushed immediately,
so client batches of any size complete without buffering deadlocks. A bad
request line is reported on stderr and skipped; end of input ends the
process cleanly.
"""

from __future__ import annotations

import json
import sys

from oracle_adapter.errors import AdapterError
from oracle_adapter.manifest import AdapterManifest, label_mapping
from oracle_adapter.models import load_model


def _describe(exc: Exception) -> str:
    if isinstance(exc, KeyError):
        return f"missing field {exc}"
    return str(exc)


def serve(manifest: AdapterManifest, predictor=None, *,
          stdin=None, stdout=None, stderr=None) -> int:
    """Answer requests until end of input; returns the exit status."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    if predictor is None:
        predictor = load_model(manifest.model)
    if predictor.kind != manifest.mode:
        raise AdapterError(f"model answers {predictor.kind!r} requests but the "
                           f"manifest says mode {manifest.mode!r}")
    mapping = label_mapping(manifest, predictor.classes)

    for line_number, line in enumerate(stdin, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
            rid = doc["id"]
            label = mapping[predictor.predict(doc[manifest.mode])]
        except (AdapterError, KeyError, TypeError, ValueError) as exc:
            print(f"request line {line_number}: {_describe(exc)}",
                  file=stderr, flush=True)
            continue
        print(json.dumps({"id": rid, "label": label}), file=stdout, flush=True)
    return 0
