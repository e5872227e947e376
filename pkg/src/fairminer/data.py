"""Structured dataset model: feature schema, ingestion, and binning.

Datasets are immutable after load and safe to share across workers. The
feature matrix stores categorical values as value-list indices (as floats)
and continuous values verbatim, which is what the samplers and rule masks
operate on.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from fairminer.errors import DataError, SchemaError

CATEGORICAL = "categorical"
CONTINUOUS = "continuous"


@dataclass(frozen=True)
class FeatureSpec:
    """One input feature: its kind, domain, and sensitivity flag."""

    name: str
    kind: str
    sensitive: bool = False
    values: tuple[str, ...] | None = None
    minimum: float | None = None
    maximum: float | None = None
    integer: bool = False

    def __post_init__(self):
        if not self.name:
            raise SchemaError("feature name must be non-empty")
        if self.kind == CATEGORICAL:
            if not self.values:
                raise SchemaError(f"categorical feature {self.name!r} needs a non-empty value list")
            if len(set(self.values)) != len(self.values):
                raise SchemaError(f"categorical feature {self.name!r} has duplicate values")
        elif self.kind == CONTINUOUS:
            if self.minimum is None or self.maximum is None:
                raise SchemaError(f"continuous feature {self.name!r} needs min and max")
            if not self.minimum < self.maximum:
                raise SchemaError(f"continuous feature {self.name!r} needs min < max")
        else:
            raise SchemaError(f"unknown feature kind {self.kind!r} for {self.name!r}")

    @property
    def is_categorical(self) -> bool:
        return self.kind == CATEGORICAL

    @property
    def is_continuous(self) -> bool:
        return self.kind == CONTINUOUS

    def value_index(self, value: str) -> int:
        try:
            return self.values.index(value)
        except ValueError:
            raise DataError(f"value {value!r} not in domain of feature {self.name!r}") from None


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature specs plus the label contract.

    ``label_column`` names the label column in CSV files; ``label_names``
    fixes the label vocabulary and the output order of trained models;
    ``favorable_label`` is the prediction whose rate is compared between
    groups.
    """

    features: tuple[FeatureSpec, ...]
    label_names: tuple[str, ...]
    favorable_label: str
    label_column: str = "label"
    _index: dict = field(init=False, repr=False, compare=False, hash=False, default=None)

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise SchemaError("feature names must be unique")
        if not any(f.sensitive for f in self.features):
            raise SchemaError("at least one feature must be marked sensitive")
        if len(set(self.label_names)) != len(self.label_names) or not self.label_names:
            raise SchemaError("label_names must be non-empty and duplicate-free")
        if self.favorable_label not in self.label_names:
            raise SchemaError(
                f"favorable_label {self.favorable_label!r} is not one of {list(self.label_names)}")
        object.__setattr__(self, "_index", {f.name: i for i, f in enumerate(self.features)})

    def __len__(self) -> int:
        return len(self.features)

    def feature_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise SchemaError(f"no feature named {name!r} in schema") from None

    def feature(self, name: str) -> FeatureSpec:
        return self.features[self.feature_index(name)]

    def sensitive_features(self) -> tuple[FeatureSpec, ...]:
        return tuple(f for f in self.features if f.sensitive)

    # --- encoding between decoded tuples and the numeric feature matrix ---

    def encode_row(self, row: Sequence, rownum: int | None = None) -> list[float]:
        if len(row) != len(self.features):
            raise DataError(
                f"expected {len(self.features)} features, got {len(row)}", row=rownum)
        out = []
        for spec, value in zip(self.features, row):
            if spec.is_categorical:
                if value not in spec.values:
                    raise DataError(
                        f"value {value!r} not in domain of feature {spec.name!r}", row=rownum)
                out.append(float(spec.values.index(value)))
            else:
                try:
                    v = float(value)
                except (TypeError, ValueError):
                    raise DataError(
                        f"cannot parse {value!r} as number for feature {spec.name!r}",
                        row=rownum) from None
                if not (spec.minimum <= v <= spec.maximum):
                    raise DataError(
                        f"feature {spec.name!r} value {v} outside [{spec.minimum}, {spec.maximum}]",
                        row=rownum)
                if spec.integer and abs(v - round(v)) > 1e-9:
                    raise DataError(
                        f"feature {spec.name!r} declared integer but got {v}", row=rownum)
                out.append(v)
        return out

    def decode_row(self, vec: Sequence[float]) -> tuple:
        out = []
        for spec, x in zip(self.features, vec):
            if spec.is_categorical:
                out.append(spec.values[int(round(x))])
            elif spec.integer:
                out.append(int(round(x)))
            else:
                out.append(float(x))
        return tuple(out)

    def decode_matrix(self, matrix: np.ndarray) -> list[tuple]:
        return [self.decode_row(row) for row in matrix]


class StructuredDataset:
    """Validated structured data: decoded rows, labels, and the encoded matrix."""

    def __init__(self, schema: FeatureSchema, rows: Iterable[Sequence], labels: Iterable[str]):
        self.schema = schema
        rows = list(rows)
        labels = [str(l) for l in labels]
        if len(rows) != len(labels):
            raise DataError(f"{len(rows)} rows but {len(labels)} labels")
        encoded = np.empty((len(rows), len(schema.features)), dtype=np.float64)
        for i, row in enumerate(rows):
            encoded[i] = schema.encode_row(row, rownum=i + 1)
            if labels[i] not in schema.label_names:
                raise DataError(
                    f"label {labels[i]!r} not in {list(schema.label_names)}", row=i + 1)
        self.rows = tuple(schema.decode_row(encoded[i]) for i in range(len(rows)))
        self.labels = tuple(labels)
        self.matrix = encoded
        self.matrix.setflags(write=False)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return self.matrix[:, self.schema.feature_index(name)]


@dataclass(frozen=True)
class Binning:
    """Equal-width partition of a continuous feature's declared range.

    The range comes from the schema's [min, max], not the empirical data,
    so rules are reproducible across samples. ``edges`` has K+1 entries;
    bins are half-open [lo, hi) except the last, which is closed at max.
    """

    feature: str
    edges: tuple[float, ...]

    def __post_init__(self):
        if len(self.edges) < 3:
            raise SchemaError("a binning needs at least 2 intervals")
        widths = np.diff(self.edges)
        if not np.all(widths > 0):
            raise SchemaError("binning edges must be strictly increasing")
        mean = float(widths.mean())
        if not np.allclose(widths, mean, rtol=1e-9, atol=1e-12 * abs(self.edges[-1] - self.edges[0])):
            raise SchemaError("binning intervals must have equal width")

    @property
    def k(self) -> int:
        return len(self.edges) - 1

    def index(self, value: float) -> int:
        """Bin index of ``value``; min maps to 0, max maps to K-1."""
        i = int(np.searchsorted(self.edges, value, side="right")) - 1
        return min(max(i, 0), self.k - 1)

    def index_array(self, values: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.edges, values, side="right") - 1
        return np.clip(idx, 0, self.k - 1)


def make_binning(spec: FeatureSpec, k: int) -> Binning:
    """Divide ``spec``'s declared [min, max] range into ``k`` equal intervals."""
    if not spec.is_continuous:
        raise SchemaError(f"cannot bin non-continuous feature {spec.name!r}")
    if k < 2:
        raise SchemaError("binning needs k >= 2")
    edges = np.linspace(spec.minimum, spec.maximum, k + 1)
    return Binning(spec.name, tuple(float(e) for e in edges))


# --- schema and dataset file I/O ---


def schema_from_dict(doc: dict) -> FeatureSchema:
    try:
        features = []
        for f in doc["features"]:
            kind = f["kind"]
            features.append(FeatureSpec(
                name=f["name"],
                kind=kind,
                sensitive=bool(f.get("sensitive", False)),
                values=tuple(f["values"]) if kind == CATEGORICAL else None,
                minimum=float(f["min"]) if kind == CONTINUOUS else None,
                maximum=float(f["max"]) if kind == CONTINUOUS else None,
                integer=bool(f.get("integer", False)),
            ))
        return FeatureSchema(
            features=tuple(features),
            label_names=tuple(str(l) for l in doc["label_names"]),
            favorable_label=str(doc["favorable_label"]),
            label_column=doc.get("label", "label"),
        )
    except KeyError as exc:
        raise SchemaError(f"schema document missing field {exc}") from None


def schema_to_dict(schema: FeatureSchema) -> dict:
    features = []
    for f in schema.features:
        d = {"name": f.name, "kind": f.kind, "sensitive": f.sensitive}
        if f.is_categorical:
            d["values"] = list(f.values)
        else:
            d["min"] = f.minimum
            d["max"] = f.maximum
            d["integer"] = f.integer
        features.append(d)
    return {
        "features": features,
        "label": schema.label_column,
        "label_names": list(schema.label_names),
        "favorable_label": schema.favorable_label,
    }


def load_schema(path) -> FeatureSchema:
    with open(path, "r", encoding="utf-8") as fh:
        return schema_from_dict(json.load(fh))


def load_structured(path, schema: FeatureSchema) -> StructuredDataset:
    """Load a delimiter-separated file with a header row into a dataset.

    The header must contain every schema feature name plus the label
    column; extra columns are ignored. Errors report the 1-based data row.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        missing = [f.name for f in schema.features if f.name not in header]
        if schema.label_column not in header:
            missing.append(schema.label_column)
        if missing:
            raise SchemaError(f"{path}: header missing column(s) {missing}")
        col_of = {name: header.index(name) for name in header}
        feat_cols = [col_of[f.name] for f in schema.features]
        label_col = col_of[schema.label_column]

        rows, labels = [], []
        for rownum, record in enumerate(reader, start=1):
            if not record or all(not c.strip() for c in record):
                raise DataError("blank row", row=rownum)
            if len(record) != len(header):
                raise DataError(
                    f"expected {len(header)} cells, got {len(record)}", row=rownum)
            rows.append([record[c].strip() for c in feat_cols])
            labels.append(record[label_col].strip())
    return StructuredDataset(schema, rows, labels)


def _format_value(spec: FeatureSpec, value) -> str:
    if spec.is_categorical:
        return str(value)
    if spec.integer:
        return str(int(round(float(value))))
    return repr(float(value))


def save_structured(dataset: StructuredDataset, path, origins: Sequence[str] | None = None):
    """Write a dataset back to CSV (round-trips through ``load_structured``).

    ``origins``, when given, adds a provenance column with one entry per row
    (used for augmented training sets).
    """
    schema = dataset.schema
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = [f.name for f in schema.features] + [schema.label_column]
        if origins is not None:
            header.append("origin")
        writer.writerow(header)
        for i, (row, label) in enumerate(zip(dataset.rows, dataset.labels)):
            record = [_format_value(s, v) for s, v in zip(schema.features, row)] + [label]
            if origins is not None:
                record.append(origins[i])
            writer.writerow(record)


def dataset_equal(a: StructuredDataset, b: StructuredDataset) -> bool:
    return (a.schema == b.schema and a.labels == b.labels
            and len(a) == len(b) and np.array_equal(a.matrix, b.matrix))


def concat_datasets(base: StructuredDataset, rows: Sequence, labels: Sequence[str]) -> StructuredDataset:
    """New dataset with extra labeled rows appended (base is not modified)."""
    return StructuredDataset(base.schema, list(base.rows) + list(rows),
                             list(base.labels) + list(labels))


def split_dataset(dataset: StructuredDataset, holdout_fraction: float,
                  seed: int = 0) -> tuple[StructuredDataset, StructuredDataset]:
    """Shuffled (train, holdout) split; the holdout gets the given fraction."""
    if not 0 < holdout_fraction < 1:
        raise DataError(f"holdout fraction must be in (0, 1), got {holdout_fraction}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(dataset))
    cut = int(round(len(dataset) * holdout_fraction))
    if cut < 1 or cut >= len(dataset):
        raise DataError("split leaves an empty side")
    hold, train = order[:cut], order[cut:]
    pick = lambda idx: StructuredDataset(
        dataset.schema, [dataset.rows[i] for i in idx], [dataset.labels[i] for i in idx])
    return pick(train), pick(hold)
