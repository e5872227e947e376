"""Interpretable rules over sensitive features, and frequent-set mining.

A rule constrains one sensitive feature (value subset, contiguous bin
range, or term containment); a rule set is a conjunction with at most one
rule per feature. Mining enumerates candidates levelwise with
anti-monotone pruning and keeps those whose support meets the threshold,
which matches naive enumeration exactly but skips most of the lattice.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence, Union

import numpy as np

from fairminer import _core
from fairminer.data import Binning, FeatureSchema, FeatureSpec, StructuredDataset, make_binning
from fairminer.errors import DataError, RuleError
from fairminer.text import Lexicon, TextDataset

log = logging.getLogger(__name__)

MODE_UNION = "union"
MODE_SINGLE_BIN = "single-bin"


@dataclass(frozen=True)
class ValueSetRule:
    """Categorical membership: feature's value lies in ``values``."""

    feature: str
    values: tuple[str, ...]

    def __post_init__(self):
        if not self.values:
            raise RuleError(f"value rule on {self.feature!r} needs at least one value")
        ordered = tuple(sorted(self.values))
        if len(set(ordered)) != len(ordered):
            raise RuleError(f"value rule on {self.feature!r} repeats a value")
        object.__setattr__(self, "values", ordered)


@dataclass(frozen=True)
class IntervalRule:
    """Continuous containment: feature's bin index lies in [low_bin, high_bin]."""

    feature: str
    low_bin: int
    high_bin: int
    binning: Binning

    def __post_init__(self):
        if self.binning.feature != self.feature:
            raise RuleError(f"interval rule on {self.feature!r} uses a binning "
                            f"for {self.binning.feature!r}")
        if not 0 <= self.low_bin <= self.high_bin <= self.binning.k - 1:
            raise RuleError(f"interval rule on {self.feature!r} has bin range "
                            f"[{self.low_bin}, {self.high_bin}] outside 0..{self.binning.k - 1}")
        if self.low_bin == 0 and self.high_bin == self.binning.k - 1:
            raise RuleError(f"interval rule on {self.feature!r} covers the full "
                            "range; its complement group would be empty")

    @property
    def low_value(self) -> float:
        return self.binning.edges[self.low_bin]

    @property
    def high_value(self) -> float:
        return self.binning.edges[self.high_bin + 1]


@dataclass(frozen=True)
class TermRule:
    """Text containment: for grouping, the document mentions any term of
    ``category``; ``term`` is the specific replacement target."""

    category: str
    term: str

    def __post_init__(self):
        if not self.term:
            raise RuleError(f"term rule on {self.category!r} needs a term")


Rule = Union[ValueSetRule, IntervalRule, TermRule]


def rule_feature(rule: Rule) -> str:
    """The sensitive feature (or term category) a rule constrains."""
    return rule.category if isinstance(rule, TermRule) else rule.feature


def rule_key(rule: Rule):
    if isinstance(rule, ValueSetRule):
        return (rule.feature, "categorical", rule.values)
    if isinstance(rule, IntervalRule):
        return (rule.feature, "interval", (rule.low_bin, rule.high_bin))
    return (rule.category, "term", (rule.term,))


class RuleSet:
    """Non-empty conjunction of rules, at most one per feature/category.

    Rules are kept in canonical order, so equal conjunctions compare and
    hash equal regardless of construction order.
    """

    __slots__ = ("rules",)

    def __init__(self, rules: Iterable[Rule]):
        rules = tuple(sorted(rules, key=rule_key))
        if not rules:
            raise RuleError("rule set must contain at least one rule")
        seen = set()
        for rule in rules:
            feat = rule_feature(rule)
            if feat in seen:
                raise RuleError(f"rule set has two rules on {feat!r}")
            seen.add(feat)
        self.rules = rules

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __eq__(self, other) -> bool:
        return isinstance(other, RuleSet) and self.rules == other.rules

    def __hash__(self) -> int:
        return hash(self.rules)

    def __repr__(self) -> str:
        return f"RuleSet({render_rule_set(self)})"

    @property
    def key(self):
        """Sort key giving a total, deterministic order over rule sets."""
        return tuple(rule_key(r) for r in self.rules)

    def features(self) -> tuple[str, ...]:
        return tuple(rule_feature(r) for r in self.rules)


# --- predicate evaluation ---


def validate_rule(rule: Rule, context: Union[FeatureSchema, Lexicon]):
    """Check a rule against the schema or lexicon it will be applied to."""
    if isinstance(rule, TermRule):
        if not isinstance(context, Lexicon):
            raise RuleError("term rules require a lexicon")
        if rule.term not in context:
            raise RuleError(f"term {rule.term!r} is not in the lexicon")
        if context.category_of[rule.term] != rule.category:
            raise RuleError(f"term {rule.term!r} belongs to category "
                            f"{context.category_of[rule.term]!r}, not {rule.category!r}")
        return
    if not isinstance(context, FeatureSchema):
        raise RuleError("feature rules require a schema")
    spec = context.feature(rule.feature)
    if not spec.sensitive:
        raise RuleError(f"feature {rule.feature!r} is not marked sensitive")
    if isinstance(rule, ValueSetRule):
        if not spec.is_categorical:
            raise RuleError(f"value rule on non-categorical feature {rule.feature!r}")
        extra = set(rule.values) - set(spec.values)
        if extra:
            raise RuleError(f"rule values {sorted(extra)} not in domain of {rule.feature!r}")
        if len(rule.values) >= len(spec.values):
            raise RuleError(f"value rule on {rule.feature!r} covers the whole domain; "
                            "its complement group would be empty")
    else:
        if not spec.is_continuous:
            raise RuleError(f"interval rule on non-continuous feature {rule.feature!r}")


def satisfies(rule: Rule, sample, context: Union[FeatureSchema, Lexicon]) -> bool:
    """Whether one sample belongs to the rule's group.

    Structured samples are decoded feature tuples under a schema. Text
    samples are token sequences under a lexicon, and membership is category
    level: containing any term of the rule's category counts.
    """
    if isinstance(rule, ValueSetRule):
        return sample[context.feature_index(rule.feature)] in rule.values
    if isinstance(rule, IntervalRule):
        value = float(sample[context.feature_index(rule.feature)])
        return rule.low_bin <= rule.binning.index(value) <= rule.high_bin
    units = context.segment([str(t).lower() for t in sample])
    return rule.category in context.categories_in(units)


def contains_exact_term(rule: TermRule, sample, lexicon: Lexicon) -> bool:
    """Whether a token sequence contains the rule's own term (not just its
    category). This is the sampler-facing predicate."""
    units = lexicon.segment([str(t).lower() for t in sample])
    return rule.term in units


def satisfies_all(rule_set: RuleSet, sample, context) -> bool:
    return all(satisfies(rule, sample, context) for rule in rule_set)


def rule_mask(rule: Rule, dataset) -> np.ndarray:
    """Boolean group-membership vector of a rule over a whole dataset."""
    if isinstance(rule, TermRule):
        return np.fromiter((rule.category in doc.categories for doc in dataset.documents),
                           dtype=bool, count=len(dataset))
    column = dataset.column(rule.feature)
    if isinstance(rule, ValueSetRule):
        spec = dataset.schema.feature(rule.feature)
        codes = np.array([spec.values.index(v) for v in rule.values], dtype=np.float64)
        return np.isin(column, codes)
    idx = rule.binning.index_array(column)
    return (idx >= rule.low_bin) & (idx <= rule.high_bin)


def rule_set_mask(rule_set: RuleSet, dataset) -> np.ndarray:
    mask = rule_mask(rule_set.rules[0], dataset)
    for rule in rule_set.rules[1:]:
        mask &= rule_mask(rule, dataset)
    return mask


# --- support ---


@dataclass(frozen=True)
class SupportResult:
    rule_set: RuleSet
    satisfying_count: int
    total: int

    @property
    def support(self) -> float:
        return self.satisfying_count / self.total


def support(dataset, rule_set: RuleSet) -> SupportResult:
    """Exact fraction of dataset samples that satisfy every rule."""
    if len(dataset) == 0:
        raise DataError("cannot compute support on an empty dataset")
    count = int(np.count_nonzero(rule_set_mask(rule_set, dataset)))
    return SupportResult(rule_set, count, len(dataset))


# --- per-feature rule enumeration ---


def categorical_rules(spec: FeatureSpec) -> list[ValueSetRule]:
    """All non-empty proper subsets of the value list, 2^|L| - 2 rules."""
    n = len(spec.values)
    out = []
    for bits in range(1, (1 << n) - 1):
        subset = tuple(spec.values[i] for i in range(n) if bits >> i & 1)
        out.append(ValueSetRule(spec.name, subset))
    return out


def interval_rules(spec: FeatureSpec, binning: Binning, mode: str = MODE_UNION) -> list[IntervalRule]:
    """Bin-range rules: every contiguous range except the full one in union
    mode (K(K+1)/2 - 1 rules), or the K single bins in single-bin mode."""
    k = binning.k
    if mode == MODE_SINGLE_BIN:
        return [IntervalRule(spec.name, i, i, binning) for i in range(k)]
    if mode != MODE_UNION:
        raise RuleError(f"unknown interval mode {mode!r}")
    out = []
    for lo in range(k):
        for hi in range(lo, k):
            if lo == 0 and hi == k - 1:
                continue
            out.append(IntervalRule(spec.name, lo, hi, binning))
    return out


def term_rules(lexicon: Lexicon, category: str) -> list[TermRule]:
    return [TermRule(category, term) for term in lexicon.terms(category)]


def single_feature_rules(spec_or_category, *, binning: Binning | None = None,
                         num_bins: int = 10, mode: str = MODE_UNION,
                         lexicon: Lexicon | None = None) -> list[Rule]:
    """Every rule a single sensitive feature (or term category) induces."""
    if isinstance(spec_or_category, str):
        if lexicon is None:
            raise RuleError("enumerating term rules requires a lexicon")
        return term_rules(lexicon, spec_or_category)
    spec = spec_or_category
    if not spec.sensitive:
        raise RuleError(f"feature {spec.name!r} is not marked sensitive")
    if spec.is_categorical:
        return categorical_rules(spec)
    if binning is None:
        binning = make_binning(spec, num_bins)
    return interval_rules(spec, binning, mode)


def count_single_feature_rules(*, num_values: int | None = None,
                               num_bins: int | None = None,
                               mode: str = MODE_UNION) -> int:
    """Closed-form rule counts matching the enumerators above."""
    if (num_values is None) == (num_bins is None):
        raise RuleError("pass exactly one of num_values / num_bins")
    if num_values is not None:
        return 2 ** num_values - 2
    if mode == MODE_SINGLE_BIN:
        return num_bins
    return num_bins * (num_bins + 1) // 2 - 1


def count_candidate_rule_sets(rules_per_feature: Sequence[int]) -> int:
    """Candidate conjunctions over per-feature rule counts: each feature
    contributes one of its rules or nothing, minus the empty choice."""
    return prod(n + 1 for n in rules_per_feature) - 1


def candidate_count(dataset, *, mode: str = MODE_UNION, num_bins: int = 10,
                    max_rules_per_feature: int | None = None) -> int:
    """How many rule sets mining would consider before support filtering."""
    tables = _rule_table(dataset, mode, num_bins, max_rules_per_feature)
    return count_candidate_rule_sets([len(t) for t in tables])


# --- frequent rule-set mining ---


def _rule_table(dataset, mode: str, num_bins: int,
                max_rules_per_feature: int | None) -> list[list[Rule]]:
    """Per sensitive feature (or category), its full rule list, in schema
    (or lexicon) order. Features with no possible rule contribute nothing."""
    tables = []
    if isinstance(dataset, TextDataset):
        for category in dataset.lexicon.categories:
            tables.append(term_rules(dataset.lexicon, category))
    else:
        for spec in dataset.schema.sensitive_features():
            if spec.is_categorical and len(spec.values) < 2:
                continue
            tables.append(single_feature_rules(spec, num_bins=num_bins, mode=mode))
    tables = [rules for rules in tables if rules]
    for rules in tables:
        if max_rules_per_feature is not None and len(rules) > max_rules_per_feature:
            raise RuleError(
                f"feature {rule_feature(rules[0])!r} induces {len(rules)} rules, above "
                f"the cap of {max_rules_per_feature}; reduce its domain, the bin count, "
                "or raise max_rules_per_feature")
    return tables


def frequent_rule_sets(dataset, support_threshold: float, *, mode: str = MODE_UNION,
                       num_bins: int = 10, max_rules_per_set: int | None = None,
                       max_rules_per_feature: int | None = None) -> list[RuleSet]:
    """All rule sets with support >= threshold and a non-empty complement.

    Levelwise search: a set is only extended if every subset one rule
    smaller was frequent, which is sound because adding a rule can never
    increase support. Sets covering the whole dataset stay in the lattice
    (their extensions may still be valid) but are not emitted, since a
    group with an empty complement cannot be scored.
    """
    if not 0 < support_threshold < 1:
        raise RuleError(f"support threshold must be in (0, 1), got {support_threshold}")
    if len(dataset) == 0:
        raise DataError("cannot mine an empty dataset")
    tables = _rule_table(dataset, mode, num_bins, max_rules_per_feature)
    if not tables:
        return []

    total = len(dataset)
    # Items are (feature_position, rule_position); packed masks drive counting.
    item_rule: dict[tuple[int, int], Rule] = {}
    item_mask: dict[tuple[int, int], np.ndarray] = {}
    for fi, rules in enumerate(tables):
        for ri, rule in enumerate(rules):
            item = (fi, ri)
            item_rule[item] = rule
            item_mask[item] = _core.pack_mask(rule_mask(rule, dataset))

    emitted: list[RuleSet] = []
    skipped_full = 0

    def consider(items: tuple, count: int):
        nonlocal skipped_full
        if count < total:
            emitted.append(RuleSet(item_rule[i] for i in items))
        else:
            skipped_full += 1

    frontier: dict[tuple, np.ndarray] = {}
    for item, mask in item_mask.items():
        count = _core.and_popcount(mask[np.newaxis, :])
        if count / total >= support_threshold:
            frontier[(item,)] = mask
            consider((item,), count)

    size = 1
    while frontier and (max_rules_per_set is None or size < max_rules_per_set):
        ordered = sorted(frontier)
        next_frontier: dict[tuple, np.ndarray] = {}
        for a_pos, a in enumerate(ordered):
            for b in ordered[a_pos + 1:]:
                if a[:-1] != b[:-1]:
                    break
                if b[-1][0] == a[-1][0]:
                    continue
                items = a + (b[-1],)
                # a and b are two of the size-k subsets; check the others.
                if size > 1 and any(
                        items[:i] + items[i + 1:] not in frontier for i in range(size - 1)):
                    continue
                out = np.empty_like(frontier[a])
                count = _core.and_into(frontier[a], item_mask[b[-1]], out)
                if count / total >= support_threshold:
                    next_frontier[items] = out
                    consider(items, count)
        frontier = next_frontier
        size += 1

    if skipped_full:
        log.warning("skipped %d frequent rule set(s) whose complement group is "
                    "empty in the dataset", skipped_full)
    emitted.sort(key=lambda rs: rs.key)
    return emitted


# --- serialization and rendering ---


def _fmt_number(x: float) -> str:
    if float(x) == int(x):
        return str(int(x))
    return f"{x:g}"


def render_rule(rule: Rule) -> str:
    if isinstance(rule, ValueSetRule):
        if len(rule.values) == 1:
            return f"{rule.feature}={rule.values[0]}"
        return f"{rule.feature}∈{{{','.join(rule.values)}}}"
    if isinstance(rule, IntervalRule):
        lo, hi = _fmt_number(rule.low_value), _fmt_number(rule.high_value)
        if rule.low_bin == 0:
            return f"{rule.feature}<{hi}"
        if rule.high_bin == rule.binning.k - 1:
            return f"{rule.feature}≥{lo}"
        return f"{lo}≤{rule.feature}<{hi}"
    return f'{rule.category}:"{rule.term}"'


def render_rule_set(rule_set: RuleSet) -> str:
    return " ∧ ".join(render_rule(r) for r in rule_set)


def rule_to_dict(rule: Rule) -> dict:
    if isinstance(rule, ValueSetRule):
        return {"feature": rule.feature, "kind": "categorical", "values": list(rule.values)}
    if isinstance(rule, IntervalRule):
        return {"feature": rule.feature, "kind": "interval",
                "low_bin": rule.low_bin, "high_bin": rule.high_bin,
                "bins": rule.binning.k,
                "lo": rule.low_value, "hi": rule.high_value}
    return {"category": rule.category, "kind": "term", "term": rule.term}


def rule_from_dict(doc: dict, context: Union[FeatureSchema, Lexicon]) -> Rule:
    try:
        kind = doc["kind"]
        if kind == "categorical":
            rule = ValueSetRule(doc["feature"], tuple(doc["values"]))
        elif kind == "interval":
            spec = context.feature(doc["feature"])
            binning = make_binning(spec, int(doc["bins"]))
            rule = IntervalRule(doc["feature"], int(doc["low_bin"]),
                                int(doc["high_bin"]), binning)
        elif kind == "term":
            rule = TermRule(doc["category"], doc["term"])
        else:
            raise RuleError(f"unknown rule kind {kind!r}")
    except KeyError as exc:
        raise RuleError(f"rule document missing field {exc}") from None
    validate_rule(rule, context)
    return rule


def rule_set_to_list(rule_set: RuleSet) -> list[dict]:
    return [rule_to_dict(r) for r in rule_set]


def rule_set_from_list(docs: Sequence[dict], context) -> RuleSet:
    return RuleSet(rule_from_dict(d, context) for d in docs)


def rule_set_digest(rule_set: RuleSet) -> int:
    """Stable 64-bit fingerprint of a rule set's canonical JSON form; used
    to give every (rule set, side) pair its own random stream."""
    blob = json.dumps(rule_set_to_list(rule_set), sort_keys=True,
                      separators=(",", ":")).encode("utf-8")
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big")
