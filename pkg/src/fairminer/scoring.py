"""Group fairness scoring by adaptive paired sampling.

One sample per side per iteration; after enough pairs, the favorable-label
rates and their normal-approximation margins are checked, and sampling
stops once the summed margin is small enough. The estimate's error is at
most that sum with confidence equal to the product of the per-side
confidence levels. Blocks are an internal batching detail: the stopping
point is decided per sample inside each block, so results are identical to
a one-at-a-time loop.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from fairminer.errors import ConfigError, OracleError, SamplingError, ScoringError
from fairminer.rules import RuleSet, rule_set_from_list, rule_set_to_list
from fairminer.sampling import COMPLEMENT_SIDE, GROUP_SIDE, SamplerConfig, make_sampler
from fairminer.text import TextDataset


@dataclass(frozen=True)
class ScorerConfig:
    """Stopping rule parameters.

    Convergence is only checked strictly after ``min_samples`` pairs, and
    sampling always stops at ``max_samples``. ``block_size`` trades loop
    overhead for batch size without affecting estimates, but it does select
    which random stream positions are consumed, so it is part of the
    reproducibility contract.
    """

    min_samples: int = 1000
    error_threshold: float = 0.05
    z_value: float = 1.96
    confidence_level: float = 0.95
    max_samples: int = 200_000
    block_size: int = 256

    def __post_init__(self):
        if not 0 < self.error_threshold < 1:
            raise ConfigError(f"error_threshold must be in (0, 1), got {self.error_threshold}")
        if self.z_value <= 0:
            raise ConfigError("z_value must be positive")
        if not 0 < self.confidence_level < 1:
            raise ConfigError("confidence_level must be in (0, 1)")
        if self.min_samples < 1:
            raise ConfigError("min_samples must be at least 1")
        if self.max_samples < self.min_samples:
            raise ConfigError("max_samples must be at least min_samples")
        if self.block_size < 1:
            raise ConfigError("block_size must be at least 1")


def margin(rate: float, count: int, z_value: float = 1.96) -> float:
    """Half-width of the normal-approximation interval for a rate estimate."""
    if not 0 <= rate <= 1:
        raise ScoringError(f"rate must be in [0, 1], got {rate}")
    if count < 1:
        raise ScoringError(f"count must be at least 1, got {count}")
    return z_value * math.sqrt(rate * (1.0 - rate) / count)


@dataclass(frozen=True)
class FairnessReport:
    """Scored comparison of one subgroup against its complement.

    All derived fields are exact functions of the counts, so a report can
    be re-checked from ``favorable_group``, ``favorable_rest``, and
    ``samples_per_side`` alone.
    """

    rule_set: RuleSet | None
    favorable_label: str | None
    favorable_group: int
    favorable_rest: int
    samples_per_side: int
    rate_group: float
    rate_rest: float
    score: float
    margin_group: float
    margin_rest: float
    margin: float
    confidence: float
    converged: bool

    def to_dict(self) -> dict:
        doc = {
            "favorable_label": self.favorable_label,
            "favorable_group": self.favorable_group,
            "favorable_rest": self.favorable_rest,
            "samples_per_side": self.samples_per_side,
            "rate_group": self.rate_group,
            "rate_rest": self.rate_rest,
            "score": self.score,
            "margin_group": self.margin_group,
            "margin_rest": self.margin_rest,
            "margin": self.margin,
            "confidence": self.confidence,
            "converged": self.converged,
        }
        if self.rule_set is not None:
            doc["rule_set"] = rule_set_to_list(self.rule_set)
        return doc

    @staticmethod
    def from_dict(doc: dict, context=None) -> "FairnessReport":
        rule_set = None
        if "rule_set" in doc and context is not None:
            rule_set = rule_set_from_list(doc["rule_set"], context)
        return FairnessReport(
            rule_set=rule_set,
            favorable_label=doc.get("favorable_label"),
            favorable_group=int(doc["favorable_group"]),
            favorable_rest=int(doc["favorable_rest"]),
            samples_per_side=int(doc["samples_per_side"]),
            rate_group=float(doc["rate_group"]),
            rate_rest=float(doc["rate_rest"]),
            score=float(doc["score"]),
            margin_group=float(doc["margin_group"]),
            margin_rest=float(doc["margin_rest"]),
            margin=float(doc["margin"]),
            confidence=float(doc["confidence"]),
            converged=bool(doc["converged"]),
        )


def report_from_counts(favorable_group: int, favorable_rest: int,
                       samples_per_side: int, config: ScorerConfig | None = None,
                       rule_set: RuleSet | None = None,
                       favorable_label: str | None = None) -> FairnessReport:
    """Build the full report arithmetic from raw counts.

    This is the single place the score, margins, confidence, and the
    converged flag are derived, for both the adaptive loop and direct
    recomputation.
    """
    if config is None:
        config = ScorerConfig()
    if samples_per_side < 1:
        raise ScoringError("samples_per_side must be at least 1")
    for name, k in (("favorable_group", favorable_group),
                    ("favorable_rest", favorable_rest)):
        if not 0 <= k <= samples_per_side:
            raise ScoringError(f"{name}={k} outside [0, {samples_per_side}]")
    rate_group = favorable_group / samples_per_side
    rate_rest = favorable_rest / samples_per_side
    margin_group = margin(rate_group, samples_per_side, config.z_value)
    margin_rest = margin(rate_rest, samples_per_side, config.z_value)
    total_margin = margin_group + margin_rest
    return FairnessReport(
        rule_set=rule_set,
        favorable_label=favorable_label,
        favorable_group=favorable_group,
        favorable_rest=favorable_rest,
        samples_per_side=samples_per_side,
        rate_group=rate_group,
        rate_rest=rate_rest,
        score=abs(rate_group - rate_rest),
        margin_group=margin_group,
        margin_rest=margin_rest,
        margin=total_margin,
        confidence=config.confidence_level * config.confidence_level,
        converged=(total_margin <= config.error_threshold
                   and samples_per_side > config.min_samples),
    )


PairSource = Callable[[int], tuple[np.ndarray, np.ndarray]]


def estimate_rate_difference(pair_source: PairSource, config: ScorerConfig,
                             rule_set: RuleSet | None = None,
                             favorable_label: str | None = None) -> FairnessReport:
    """Adaptive loop over any paired hit source.

    ``pair_source(n)`` returns two boolean arrays of length n: favorable
    hits for the group side and for the complement side of the next n
    iterations. Stopping is evaluated at every individual pair, so block
    requests never overshoot the one-at-a-time stopping point.
    """
    favorable_group = 0
    favorable_rest = 0
    num = 0
    while num < config.max_samples:
        n = min(config.block_size, config.max_samples - num)
        group_hits, rest_hits = pair_source(n)
        cum_group = np.cumsum(group_hits)
        cum_rest = np.cumsum(rest_hits)
        nums = num + np.arange(1, n + 1)
        rate_group = (favorable_group + cum_group) / nums
        rate_rest = (favorable_rest + cum_rest) / nums
        eps = (config.z_value * np.sqrt(rate_group * (1.0 - rate_group) / nums)
               + config.z_value * np.sqrt(rate_rest * (1.0 - rate_rest) / nums))
        stoppable = (nums > config.min_samples) & (eps <= config.error_threshold)
        if stoppable.any():
            stop = int(np.argmax(stoppable))
            favorable_group += int(cum_group[stop])
            favorable_rest += int(cum_rest[stop])
            num = int(nums[stop])
            break
        favorable_group += int(cum_group[-1])
        favorable_rest += int(cum_rest[-1])
        num = int(nums[-1])
    return report_from_counts(favorable_group, favorable_rest, num, config,
                              rule_set=rule_set, favorable_label=favorable_label)


def _dataset_favorable_label(dataset) -> str | None:
    if isinstance(dataset, TextDataset):
        return dataset.favorable_label
    return dataset.schema.favorable_label


def group_fairness_score(oracle, dataset, rule_set: RuleSet,
                         sampler_config: SamplerConfig,
                         scorer_config: ScorerConfig,
                         favorable_label: str | None = None) -> FairnessReport:
    """Estimate how differently the oracle favors a rule set's group.

    Samples are generated fresh on both sides each iteration; the dataset
    only supplies seeds. Raises if either side has no seed row, or with
    progress context if the oracle fails mid-run.
    """
    if favorable_label is None:
        favorable_label = _dataset_favorable_label(dataset)
    if favorable_label is None:
        raise ScoringError("no favorable label: pass favorable_label or set it "
                           "on the dataset")
    sampler = make_sampler(dataset, rule_set, sampler_config)
    for side in (GROUP_SIDE, COMPLEMENT_SIDE):
        if sampler.seeds_on(side) == 0:
            raise SamplingError(f"no dataset row on the {side} side of {rule_set!r}")
    progress = {"num": 0}

    def pair_source(n: int):
        group_samples = sampler.sample_decoded(GROUP_SIDE, n)
        rest_samples = sampler.sample_decoded(COMPLEMENT_SIDE, n)
        try:
            group_labels = oracle.predict_batch(group_samples)
            rest_labels = oracle.predict_batch(rest_samples)
        except OracleError as exc:
            raise ScoringError(
                f"oracle failed after {progress['num']} samples per side "
                f"on {rule_set!r}: {exc}") from exc
        progress["num"] += n
        hits_group = np.fromiter((l == favorable_label for l in group_labels),
                                 dtype=bool, count=n)
        hits_rest = np.fromiter((l == favorable_label for l in rest_labels),
                                dtype=bool, count=n)
        return hits_group, hits_rest

    return estimate_rate_difference(pair_source, scorer_config,
                                    rule_set=rule_set,
                                    favorable_label=favorable_label)


def score_rule_sets(oracle, dataset, rule_sets: Sequence[RuleSet],
                    sampler_config: SamplerConfig, scorer_config: ScorerConfig,
                    favorable_label: str | None = None,
                    jobs: int = 1) -> list[FairnessReport]:
    """Score many rule sets, optionally on a thread pool.

    Each rule set owns independent sample streams, so the reports are
    identical whatever the worker count or schedule.
    """

    def one(rule_set: RuleSet) -> FairnessReport:
        return group_fairness_score(oracle, dataset, rule_set, sampler_config,
                                    scorer_config, favorable_label)

    if jobs <= 1 or len(rule_sets) <= 1:
        return [one(rs) for rs in rule_sets]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, rule_sets))


@dataclass(frozen=True)
class RankedFindings:
    """Scored rule sets in rank order.

    ``ranking`` is every report, highest score first (ties broken by the
    rule set's canonical order); ``flagged`` keeps those strictly above the
    tolerance; ``findings`` is the reported head of the flagged list.
    """

    ranking: tuple[FairnessReport, ...]
    flagged: tuple[FairnessReport, ...]
    findings: tuple[FairnessReport, ...]
    score_threshold: float
    top_k: int


def rank_rule_sets(reports: Sequence[FairnessReport], score_threshold: float = 0.05,
                   top_k: int = 3) -> RankedFindings:
    if score_threshold <= 0:
        raise ConfigError("score_threshold must be positive")
    if top_k < 1:
        raise ConfigError("top_k must be at least 1")
    ranking = tuple(sorted(
        reports, key=lambda r: (-r.score, r.rule_set.key if r.rule_set else ())))
    flagged = tuple(r for r in ranking if r.score > score_threshold)
    return RankedFindings(ranking=ranking, flagged=flagged,
                          findings=flagged[:top_k],
                          score_threshold=score_threshold, top_k=top_k)


def recheck_report(report: FairnessReport, config: ScorerConfig | None = None) -> FairnessReport:
    """Recompute every derived field from the report's raw counts."""
    rebuilt = report_from_counts(report.favorable_group, report.favorable_rest,
                                 report.samples_per_side, config,
                                 rule_set=report.rule_set,
                                 favorable_label=report.favorable_label)
    return replace(rebuilt, converged=report.converged) if config is None else rebuilt
