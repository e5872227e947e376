"""Independent reference implementations used as test oracles.

Everything here recomputes results from first principles (per-row loops,
integer bin arithmetic, explicit enumeration) so the package's vectorized
and pruned code paths can be checked against slow-but-obvious ones.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from fairminer.data import FeatureSchema, StructuredDataset
from fairminer.rules import IntervalRule, RuleSet, TermRule, ValueSetRule

# --- stable per-row randomness (process-independent, unlike hash()) ---

_MIX = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def stable_unit(parts, seed=0) -> float:
    """Deterministic pseudo-uniform in [0, 1) from a tuple of values."""
    h = (seed * _MIX + 0x2545F4914F6CDD1D) & _MASK
    for part in parts:
        if isinstance(part, float):
            part = int(round(part * 10000))
        elif isinstance(part, str):
            part = int.from_bytes(part.encode("utf-8")[:8].ljust(8, b"\0"), "big")
        h ^= (part & _MASK)
        h = (h * _MIX) & _MASK
        h ^= h >> 29
        h = (h * 0xBF58476D1CE4E5B9) & _MASK
        h ^= h >> 32
    return (h & _MASK) / float(1 << 64)


# --- naive rule semantics (structured rows use integer bin arithmetic) ---

def naive_bin_index(value, minimum, maximum, bins) -> int:
    """Bin index via integer arithmetic; requires an integral bin width."""
    lo, hi = int(minimum), int(maximum)
    span = hi - lo
    assert span % bins == 0, "test datasets must use exact integer bin widths"
    idx = (int(value) - lo) * bins // span
    return min(idx, bins - 1)


def naive_satisfies_row(schema: FeatureSchema, row, rule) -> bool:
    if isinstance(rule, ValueSetRule):
        i = [f.name for f in schema.features].index(rule.feature)
        return row[i] in rule.values
    if isinstance(rule, IntervalRule):
        i = [f.name for f in schema.features].index(rule.feature)
        spec = schema.features[i]
        b = naive_bin_index(row[i], spec.minimum, spec.maximum,
                            rule.binning.k)
        return rule.low_bin <= b <= rule.high_bin
    raise TypeError(rule)


def naive_text_satisfies(doc_tokens, lexicon, rule: TermRule) -> bool:
    """Category containment by scanning for any term of the category."""
    toks = list(doc_tokens)
    for term in lexicon.terms(rule.category):
        words = term.split(" ")
        n = len(words)
        for start in range(len(toks) - n + 1):
            if toks[start:start + n] == words:
                return True
    return False


def naive_support_count(dataset, rule_set: RuleSet, lexicon=None) -> int:
    count = 0
    if isinstance(dataset, StructuredDataset):
        for row in dataset.rows:
            if all(naive_satisfies_row(dataset.schema, row, r)
                   for r in rule_set.rules):
                count += 1
    else:
        for doc in dataset.documents:
            toks = []
            for unit in doc.units:
                toks.extend(unit.split(" "))
            if all(naive_text_satisfies(toks, lexicon, r)
                   for r in rule_set.rules):
                count += 1
    return count


def naive_frequent(dataset, per_feature_rules, threshold, lexicon=None):
    """Brute-force product enumeration; returns {canonical key: count}.

    per_feature_rules: list of rule lists, one per feature. Skips rule sets
    that every example satisfies (the compared group would be empty).
    """
    total = len(dataset)
    out = {}
    options = [[None] + list(rules) for rules in per_feature_rules]
    for combo in itertools.product(*options):
        chosen = [r for r in combo if r is not None]
        if not chosen:
            continue
        rs = RuleSet(chosen)
        count = naive_support_count(dataset, rs, lexicon)
        if count / total >= threshold and count < total:
            out[rs.key] = count
    return out


# --- reference network forward pass (per-sample python loops) ---

def reference_mlp_forward(model, features):
    x = list(model.encode([features])[0])
    for layer in model.layers:
        w = layer.weights
        b = layer.bias
        y = []
        for o in range(w.shape[0]):
            acc = float(b[o])
            for i in range(w.shape[1]):
                acc += float(w[o, i]) * x[i]
            y.append(acc)
        if layer.activation == "relu":
            x = [max(v, 0.0) for v in y]
        elif layer.activation == "sigmoid":
            x = [1.0 / (1.0 + math.exp(-v)) for v in y]
        elif layer.activation == "softmax":
            m = max(y)
            exps = [math.exp(v - m) for v in y]
            s = sum(exps)
            x = [v / s for v in exps]
        else:
            x = y
    return x


def reference_mlp_label(model, features) -> str:
    out = reference_mlp_forward(model, features)
    if len(out) == 1:
        return model.labels[1] if out[0] > 0.5 else model.labels[0]
    best = max(range(len(out)), key=lambda i: (out[i], -i))
    return model.labels[best]


# --- random dataset builders for the equivalence oracle ---

def random_schema(rng: np.random.Generator) -> FeatureSchema:
    from fairminer.data import FeatureSpec

    n_sensitive = int(rng.integers(1, 4))
    feats = []
    for i in range(n_sensitive):
        if rng.random() < 0.5:
            n_vals = int(rng.integers(2, 5))
            feats.append(FeatureSpec(
                f"cat{i}", "categorical", sensitive=True,
                values=tuple(f"v{j}" for j in range(n_vals))))
        else:
            # spans divisible by every bin count used in tests
            feats.append(FeatureSpec(
                f"num{i}", "continuous", sensitive=True,
                minimum=0, maximum=100, integer=True))
    feats.append(FeatureSpec("free", "continuous", sensitive=False,
                             minimum=0, maximum=10, integer=True))
    return FeatureSchema(features=tuple(feats), label_names=("0", "1"),
                         favorable_label="1")


def random_dataset(rng: np.random.Generator, schema: FeatureSchema,
                   max_rows=200) -> StructuredDataset:
    n = int(rng.integers(20, max_rows + 1))
    rows = []
    for _ in range(n):
        row = []
        for spec in schema.features:
            if spec.kind == "categorical":
                row.append(str(rng.choice(spec.values)))
            else:
                row.append(int(rng.integers(int(spec.minimum),
                                            int(spec.maximum) + 1)))
        rows.append(tuple(row))
    labels = [str(rng.choice(schema.label_names)) for _ in range(n)]
    return StructuredDataset(schema, rows, labels)
