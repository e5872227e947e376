"""Adapter manifest: which model to serve, in what request mode, and how
model classes map to the labels the auditor compares."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from oracle_adapter.errors import AdapterError

MODES = ("features", "tokens")


@dataclass(frozen=True)
class AdapterManifest:
    model: str
    mode: str = "features"
    labels: Mapping[str, str] | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise AdapterError(f"mode must be one of {MODES}, got {self.mode!r}")


def load_manifest(path) -> AdapterManifest:
    """Read a manifest file; a relative model path resolves against it."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise AdapterError(f"cannot read manifest {path}: {exc}") from None
    except ValueError as exc:
        raise AdapterError(f"manifest {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise AdapterError(f"manifest {path} must be a JSON object")
    unknown = set(doc) - {"model", "mode", "labels"}
    if unknown:
        raise AdapterError(f"unknown manifest key(s) {sorted(unknown)}")
    if "model" not in doc:
        raise AdapterError("manifest needs a model path")

    model = Path(doc["model"])
    if not model.is_absolute():
        model = path.parent / model
    if not model.is_file():
        raise AdapterError(f"model file not found: {model}")

    labels = doc.get("labels")
    if labels is not None:
        if not isinstance(labels, dict):
            raise AdapterError("labels must map model classes to output labels")
        labels = {str(c): str(l) for c, l in labels.items()}
    return AdapterManifest(model=str(model), mode=doc.get("mode", "features"),
                           labels=labels)


def label_mapping(manifest: AdapterManifest, classes: Sequence[str]) -> dict[str, str]:
    """Class -> emitted label; identity unless the manifest overrides.
    Every model class must be covered so no prediction is unmappable."""
    if manifest.labels is None:
        return {c: c for c in classes}
    missing = [c for c in classes if c not in manifest.labels]
    if missing:
        raise AdapterError(f"label mapping missing model class(es) {missing}")
    return dict(manifest.labels)
