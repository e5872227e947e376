"""Reference predictors the adapter can serve.

Two deliberately small formats: a linear scorer over mixed tabular features
and a keyword scorer over token lists. Plugging in a real ML framework means
replacing ``load_model`` with anything that returns an object exposing
``kind`` (the request mode it answers), ``classes``, and ``predict``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from oracle_adapter.errors import AdapterError


@dataclass(frozen=True)
class CategoricalInput:
    name: str
    values: tuple[str, ...]


@dataclass(frozen=True)
class NumericInput:
    name: str
    offset: float
    scale: float


class LinearModel:
    """Per-class scores w.encode(x) + b, highest wins (ties: lowest index).
    Categoricals one-hot over their declared values; numerics are mapped
    through (v - offset) / scale."""

    kind = "features"

    def __init__(self, inputs, weights, bias, classes):
        self.inputs = tuple(inputs)
        self.weights = [tuple(float(w) for w in row) for row in weights]
        self.bias = tuple(float(b) for b in bias)
        self.classes = tuple(str(c) for c in classes)
        if len(self.classes) < 2:
            raise AdapterError("a linear model needs at least two classes")
        if len(set(self.classes)) != len(self.classes):
            raise AdapterError("duplicate class names")
        if len(self.weights) != len(self.classes) or len(self.bias) != len(self.classes):
            raise AdapterError(f"need one weight row and one bias per class "
                               f"({len(self.classes)} classes)")
        width = sum(len(i.values) if isinstance(i, CategoricalInput) else 1
                    for i in self.inputs)
        for row in self.weights:
            if len(row) != width:
                raise AdapterError(f"weight rows must have {width} entries, "
                                   f"got {len(row)}")

    def encode(self, payload) -> list[float]:
        if not isinstance(payload, list) or len(payload) != len(self.inputs):
            got = len(payload) if isinstance(payload, list) else type(payload).__name__
            raise AdapterError(f"expected {len(self.inputs)} features, got {got}")
        x: list[float] = []
        for spec, value in zip(self.inputs, payload):
            if isinstance(spec, CategoricalInput):
                if value not in spec.values:
                    raise AdapterError(f"unknown value {value!r} for {spec.name}")
                x.extend(1.0 if v == value else 0.0 for v in spec.values)
            else:
                try:
                    v = float(value)
                except (TypeError, ValueError):
                    raise AdapterError(f"{spec.name} must be numeric, "
                                       f"got {value!r}") from None
                x.append((v - spec.offset) / spec.scale)
        return x

    def predict(self, payload) -> str:
        x = self.encode(payload)
        scores = [b + sum(w * xi for w, xi in zip(row, x))
                  for row, b in zip(self.weights, self.bias)]
        best = max(range(len(scores)), key=lambda i: (scores[i], -i))
        return self.classes[best]


class KeywordModel:
    """Binary scorer over token lists: bias plus the weight of every token
    occurrence; a positive total picks the second class."""

    kind = "tokens"

    def __init__(self, weights: dict, bias: float, classes):
        self.weights = {str(t): float(w) for t, w in weights.items()}
        self.bias = float(bias)
        self.classes = tuple(str(c) for c in classes)
        if len(self.classes) != 2 or self.classes[0] == self.classes[1]:
            raise AdapterError("a keyword model needs exactly two distinct classes")

    def predict(self, payload) -> str:
        if not isinstance(payload, list):
            raise AdapterError(f"tokens payload must be a list, "
                               f"got {type(payload).__name__}")
        total = self.bias + sum(self.weights.get(str(t), 0.0) for t in payload)
        return self.classes[1] if total > 0 else self.classes[0]


def load_model(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise AdapterError(f"cannot read model {path}: {exc}") from None
    except ValueError as exc:
        raise AdapterError(f"model {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise AdapterError(f"model {path} must be a JSON object")
    kind = doc.get("kind")
    try:
        if kind == "linear":
            inputs = []
            for f in doc["features"]:
                if "values" in f:
                    inputs.append(CategoricalInput(f["name"], tuple(f["values"])))
                else:
                    scale = float(f.get("scale", 1.0))
                    if scale == 0.0:
                        raise AdapterError(f"feature {f['name']!r} has zero scale")
                    inputs.append(NumericInput(f["name"], float(f.get("offset", 0.0)),
                                               scale))
            return LinearModel(inputs, doc["weights"], doc["bias"], doc["classes"])
        if kind == "keyword":
            return KeywordModel(doc.get("weights", {}), doc.get("bias", 0.0),
                                doc["classes"])
    except KeyError as exc:
        raise AdapterError(f"model {path} missing field {exc}") from None
    raise AdapterError(f"unknown model kind {kind!r} (expected linear or keyword)")
