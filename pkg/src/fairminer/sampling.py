"""Group-conditioned sample generation.

Structured samples are dataset seed rows with a tiny perturbation on one
uniformly chosen non-sensitive numeric feature; sensitive features are
never touched, so a sample's group membership is exactly its seed's. Text
samples on the group side rewrite every sensitive term to the rule's term
of the same category; the complement side draws non-member documents
unchanged.

Every (rule set, side) pair owns an independent random stream derived from
the configured seed and the rule set's fingerprint, so results do not
depend on which worker scores which rule set, or in what order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fairminer import _core
from fairminer.data import StructuredDataset
from fairminer.errors import SamplingError
from fairminer.rules import RuleSet, TermRule, rule_set_digest, rule_set_mask
from fairminer.text import TextDataset

GROUP_SIDE = "group"
COMPLEMENT_SIDE = "complement"
_SIDE_CODE = {GROUP_SIDE: 0, COMPLEMENT_SIDE: 1}


@dataclass(frozen=True)
class SamplerConfig:
    """Perturbation step sizes and the base random seed."""

    integer_step: float = 1.0
    decimal_step: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.integer_step <= 0 or self.decimal_step <= 0:
            raise SamplingError("perturbation steps must be positive")


def _side_rng(config: SamplerConfig, rule_set: RuleSet, side: str) -> np.random.Generator:
    return np.random.default_rng([config.seed, rule_set_digest(rule_set),
                                  _SIDE_CODE[side]])


class StructuredSampler:
    """Seed-plus-perturbation generator over a structured dataset.

    Draw order within a block is fixed (seed rows, then target features,
    then directions), so a given (seed, rule set, side) always yields the
    same stream for a given block-size schedule.
    """

    def __init__(self, dataset: StructuredDataset, rule_set: RuleSet,
                 config: SamplerConfig):
        self.dataset = dataset
        self.schema = dataset.schema
        self.rule_set = rule_set
        self.config = config
        member = rule_set_mask(rule_set, dataset)
        self._seed_rows = {
            GROUP_SIDE: np.flatnonzero(member),
            COMPLEMENT_SIDE: np.flatnonzero(~member),
        }
        self._rng = {side: _side_rng(config, rule_set, side)
                     for side in (GROUP_SIDE, COMPLEMENT_SIDE)}
        # Perturbation targets: non-sensitive numeric features only. The
        # perturbation formula is additive, so categoricals are excluded.
        self._targets = []
        for i, spec in enumerate(self.schema.features):
            if spec.sensitive or not spec.is_continuous:
                continue
            step = config.integer_step if spec.integer else config.decimal_step
            self._targets.append((i, step, spec.minimum, spec.maximum))

    def seeds_on(self, side: str) -> int:
        return len(self._seed_rows[side])

    def sample_block(self, side: str, count: int,
                     return_seeds: bool = False) -> np.ndarray:
        """``count`` encoded samples on one side, seeds drawn with replacement."""
        rows = self._seed_rows[side]
        if len(rows) == 0:
            raise SamplingError(
                f"no dataset row on the {side} side of {self.rule_set!r}")
        rng = self._rng[side]
        seeds = rows[rng.integers(0, len(rows), size=count)]
        block = self.dataset.matrix[seeds]
        if self._targets:
            picks = rng.integers(0, len(self._targets), size=count)
            signs = rng.integers(0, 2, size=count) * 2.0 - 1.0
            for t, (col, step, lo, hi) in enumerate(self._targets):
                deltas = np.where(picks == t, signs * step, 0.0)
                _core.perturb_block(block, col, deltas, lo, hi)
        if return_seeds:
            return block, seeds
        return block

    def sample_decoded(self, side: str, count: int) -> list[tuple]:
        return self.schema.decode_matrix(self.sample_block(side, count))


def sample_structured(dataset: StructuredDataset, rule_set: RuleSet,
                      config: SamplerConfig, side: str = GROUP_SIDE) -> tuple:
    """One decoded sample on the requested side (one-shot convenience)."""
    return StructuredSampler(dataset, rule_set, config).sample_decoded(side, 1)[0]


class TextSampler:
    """Term-replacement generator over a text dataset.

    Group-side samples start from a document that mentions every rule
    category and rewrite each sensitive-term unit to its rule's term, so
    the output contains every rule term verbatim. Complement-side samples
    are unmodified draws from documents outside the group.
    """

    def __init__(self, dataset: TextDataset, rule_set: RuleSet, config: SamplerConfig):
        for rule in rule_set:
            if not isinstance(rule, TermRule):
                raise SamplingError(
                    "text sampling needs term rules, got a rule on "
                    f"{rule.feature!r}")
        self.dataset = dataset
        self.lexicon = dataset.lexicon
        self.rule_set = rule_set
        self.config = config
        self._replacement = {rule.category: rule.term for rule in rule_set}
        member = rule_set_mask(rule_set, dataset)
        self._seed_docs = {
            GROUP_SIDE: np.flatnonzero(member),
            COMPLEMENT_SIDE: np.flatnonzero(~member),
        }
        self._rng = {side: _side_rng(config, rule_set, side)
                     for side in (GROUP_SIDE, COMPLEMENT_SIDE)}

    def seeds_on(self, side: str) -> int:
        return len(self._seed_docs[side])

    def _rewrite(self, units: tuple[str, ...]) -> tuple[str, ...]:
        tokens: list[str] = []
        for unit in units:
            category = self.lexicon.category_of.get(unit)
            replacement = self._replacement.get(category) if category else None
            tokens.extend((replacement or unit).split(" "))
        return tuple(tokens)

    def sample_block(self, side: str, count: int,
                     return_seeds: bool = False) -> list[tuple[str, ...]]:
        docs = self._seed_docs[side]
        if len(docs) == 0:
            raise SamplingError(
                f"no document on the {side} side of {self.rule_set!r}")
        rng = self._rng[side]
        seeds = docs[rng.integers(0, len(docs), size=count)]
        if side == GROUP_SIDE:
            out = [self._rewrite(self.dataset.documents[i].units) for i in seeds]
        else:
            out = [tuple(" ".join(self.dataset.documents[i].units).split(" "))
                   for i in seeds]
        if return_seeds:
            return out, seeds
        return out

    def sample_decoded(self, side: str, count: int) -> list[tuple[str, ...]]:
        return self.sample_block(side, count)


def sample_text(dataset: TextDataset, rule_set: RuleSet, config: SamplerConfig,
                count: int = 1) -> list[tuple[str, ...]]:
    """Group-side replacement samples (one-shot convenience)."""
    return TextSampler(dataset, rule_set, config).sample_block(GROUP_SIDE, count)


def sample_text_complement(dataset: TextDataset, rule_set: RuleSet,
                           config: SamplerConfig, count: int = 1) -> list[tuple[str, ...]]:
    """Unmodified draws from documents outside the group."""
    return TextSampler(dataset, rule_set, config).sample_block(COMPLEMENT_SIDE, count)


def make_sampler(dataset, rule_set: RuleSet, config: SamplerConfig):
    if isinstance(dataset, TextDataset):
        return TextSampler(dataset, rule_set, config)
    return StructuredSampler(dataset, rule_set, config)
