"""Discrimination mitigation by counter-labeled augmentation and retraining.

The flagged group is flooded with generated members that the original
model itself predicts with the label opposite to the group's prevailing
prediction; those samples, labeled by that prediction (not by any ground
truth), are appended to the training set and the network is retrained from
its original weights. Rounds grow the augmentation geometrically and the
best round within the accuracy budget wins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from fairminer.data import StructuredDataset, concat_datasets
from fairminer.errors import MitigationError
from fairminer.oracle import MlpLayer, MlpModel, default_encoding
from fairminer.rules import RuleSet
from fairminer.sampling import GROUP_SIDE, SamplerConfig, make_sampler
from fairminer.scoring import FairnessReport, ScorerConfig, group_fairness_score
from fairminer.text import TextDataset


@dataclass(frozen=True)
class TrainerConfig:
    """Minibatch gradient descent settings for the built-in network."""

    hidden: tuple[int, ...] = (16, 8)
    learning_rate: float = 0.1
    momentum: float = 0.9
    epochs: int = 30
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size < 1 or self.epochs < 0:
            raise MitigationError("trainer needs learning_rate > 0, batch_size >= 1, "
                                  "epochs >= 0")
        if not 0 <= self.momentum < 1:
            raise MitigationError("momentum must be in [0, 1)")


@dataclass(frozen=True)
class MitigationConfig:
    start_count: int = 50
    max_fraction: float = 0.10
    growth: float = 2.0
    accuracy_drop_budget: float = 0.02
    attempt_factor: int = 200
    trainer: TrainerConfig = field(default_factory=TrainerConfig)

    def __post_init__(self):
        if not 0 < self.max_fraction <= 1:
            raise MitigationError("max_fraction must be in (0, 1]")
        if self.start_count < 1:
            raise MitigationError("start_count must be at least 1")
        if self.growth <= 1:
            raise MitigationError("growth must be above 1")
        if self.accuracy_drop_budget < 0:
            raise MitigationError("accuracy_drop_budget cannot be negative")


@dataclass(frozen=True)
class TrainResult:
    model: MlpModel
    train_accuracy: float


def _init_model(schema, hidden: tuple[int, ...], rng: np.random.Generator) -> MlpModel:
    encoding = default_encoding(schema)
    dims = [sum(e.width for e in encoding), *hidden, len(schema.label_names)]
    layers = []
    for i in range(len(dims) - 1):
        fan_in, fan_out = dims[i], dims[i + 1]
        scale = math.sqrt(2.0 / fan_in)
        weights = rng.normal(0.0, scale, size=(fan_out, fan_in))
        activation = "relu" if i < len(dims) - 2 else "softmax"
        layers.append(MlpLayer(weights, np.zeros(fan_out), activation))
    return MlpModel(encoding, layers, schema.label_names)


def train_mlp(dataset: StructuredDataset, config: TrainerConfig,
              initial: MlpModel | None = None) -> TrainResult:
    """Fit the built-in network with momentum SGD on cross-entropy.

    Deterministic under the config seed: initialization (when ``initial``
    is not given) and epoch shuffles come from one stream. Hidden layers
    are relu, the output is a softmax over the schema's labels.
    """
    if len(dataset) == 0:
        raise MitigationError("cannot train on an empty dataset")
    schema = dataset.schema
    rng = np.random.default_rng(config.seed)
    model = initial.copy() if initial is not None else _init_model(schema, config.hidden, rng)
    if model.layers[-1].activation != "softmax":
        raise MitigationError("trainer requires a softmax output layer")
    if any(l.activation != "relu" for l in model.layers[:-1]):
        raise MitigationError("trainer requires relu hidden layers")

    inputs = model.encode(dataset.rows)
    label_index = {l: i for i, l in enumerate(model.labels)}
    targets = np.zeros((len(dataset), len(model.labels)))
    targets[np.arange(len(dataset)), [label_index[l] for l in dataset.labels]] = 1.0

    velocity = [(np.zeros_like(l.weights), np.zeros_like(l.bias)) for l in model.layers]
    for epoch in range(config.epochs):
        order = rng.permutation(len(dataset))
        for start in range(0, len(dataset), config.batch_size):
            batch = order[start:start + config.batch_size]
            x, y = inputs[batch], targets[batch]
            # Forward, keeping pre/post activations for the backward pass.
            acts = [x]
            for layer in model.layers:
                z = acts[-1] @ layer.weights.T + layer.bias
                acts.append(np.maximum(z, 0.0) if layer.activation == "relu" else z)
            logits = acts[-1]
            shifted = logits - logits.max(axis=1, keepdims=True)
            probs = np.exp(shifted)
            probs /= probs.sum(axis=1, keepdims=True)
            loss = -np.mean(np.log(np.clip((probs * y).sum(axis=1), 1e-12, None)))
            if not np.isfinite(loss):
                raise MitigationError(
                    f"non-finite loss at epoch {epoch}, batch {start // config.batch_size}")
            delta = (probs - y) / len(batch)
            for li in range(len(model.layers) - 1, -1, -1):
                layer = model.layers[li]
                grad_w = delta.T @ acts[li]
                grad_b = delta.sum(axis=0)
                if li > 0:
                    delta = delta @ layer.weights
                    delta = delta * (acts[li] > 0.0)
                vw, vb = velocity[li]
                vw *= config.momentum
                vw -= config.learning_rate * grad_w
                vb *= config.momentum
                vb -= config.learning_rate * grad_b
                layer.weights = layer.weights + vw
                layer.bias = layer.bias + vb
    return TrainResult(model, accuracy(model, dataset))


def accuracy(oracle, dataset) -> float:
    rows = dataset.rows if isinstance(dataset, StructuredDataset) else [
        tuple(" ".join(d.units).split(" ")) for d in dataset.documents]
    predictions = oracle.predict_batch(rows)
    hits = sum(p == l for p, l in zip(predictions, dataset.labels))
    return hits / len(dataset)


def generate_counter_samples(oracle, dataset, rule_set: RuleSet, target_label: str,
                             count: int, sampler_config: SamplerConfig,
                             attempt_budget: int | None = None,
                             attempt_factor: int = 200) -> list:
    """Group-side samples the (original) oracle predicts as ``target_label``.

    Returns exactly ``count`` samples or raises, reporting how many the
    attempt budget yielded. Every returned sample satisfies the rule set by
    construction.
    """
    if count < 1:
        raise MitigationError("count must be at least 1")
    if attempt_budget is None:
        attempt_budget = max(attempt_factor * count, 2000)
    sampler = make_sampler(dataset, rule_set, sampler_config)
    kept: list = []
    attempts = 0
    while len(kept) < count and attempts < attempt_budget:
        n = min(512, attempt_budget - attempts)
        samples = sampler.sample_decoded(GROUP_SIDE, n)
        labels = oracle.predict_batch(samples)
        kept.extend(s for s, l in zip(samples, labels) if l == target_label)
        attempts += n
    if len(kept) < count:
        raise MitigationError(
            f"found only {len(kept)} of {count} counter samples within "
            f"{attempt_budget} attempts; the group may already be predicted "
            f"almost uniformly")
    return kept[:count]


def counter_target_label(report: FairnessReport, label_names) -> str:
    """The label to flood the group with: the favorable one if the group is
    under-favored, otherwise the other (binary) label."""
    if len(label_names) != 2:
        raise MitigationError("mitigation needs a binary label set")
    favorable = report.favorable_label
    if favorable not in label_names:
        raise MitigationError(f"report's favorable label {favorable!r} "
                              f"not in {list(label_names)}")
    other = label_names[0] if label_names[1] == favorable else label_names[1]
    return favorable if report.rate_group < report.rate_rest else other


@dataclass(frozen=True)
class MitigationRound:
    count: int
    score: float
    accuracy: float
    report: FairnessReport


@dataclass(frozen=True)
class MitigationResult:
    model: MlpModel
    before: FairnessReport
    after: FairnessReport
    accuracy_before: float
    accuracy_after: float
    target_label: str | None
    chosen_count: int | None
    succeeded: bool
    rounds: tuple[MitigationRound, ...]


def _augmentation_counts(config: MitigationConfig, dataset_size: int) -> list[int]:
    cap = int(config.max_fraction * dataset_size)
    if cap < 1:
        raise MitigationError("max_fraction yields zero augmentation samples")
    counts = []
    c = min(config.start_count, cap)
    while c < cap:
        counts.append(c)
        c = min(int(math.ceil(c * config.growth)), cap)
    counts.append(cap)
    return counts


def mitigate(model: MlpModel, dataset: StructuredDataset, worst: FairnessReport,
             sampler_config: SamplerConfig, scorer_config: ScorerConfig,
             config: MitigationConfig,
             eval_dataset: StructuredDataset | None = None) -> MitigationResult:
    """Reduce the worst finding's score within an accuracy budget.

    Each round generates a larger counter-labeled augmentation, retrains
    from the original weights, and rescores the same rule set with the
    retrained model as the oracle. The round with the lowest score whose
    accuracy drop stays within budget wins; if none qualifies, the original
    model comes back unchanged with the rounds as diagnostics.
    """
    if worst.rule_set is None:
        raise MitigationError("the report to mitigate carries no rule set")
    if eval_dataset is None:
        eval_dataset = dataset
    accuracy_before = accuracy(model, eval_dataset)
    base = MitigationResult(
        model=model, before=worst, after=worst,
        accuracy_before=accuracy_before, accuracy_after=accuracy_before,
        target_label=None, chosen_count=None, succeeded=True, rounds=())
    if worst.score == 0:
        return base

    target = counter_target_label(worst, dataset.schema.label_names)
    rounds: list[MitigationRound] = []
    kept_models: list[MlpModel] = []
    for index, count in enumerate(_augmentation_counts(config, len(dataset))):
        round_sampler = replace(sampler_config, seed=sampler_config.seed + index + 1)
        counter = generate_counter_samples(
            model, dataset, worst.rule_set, target, count, round_sampler,
            attempt_factor=config.attempt_factor)
        augmented = concat_datasets(dataset, counter, [target] * count)
        trained = train_mlp(augmented, config.trainer, initial=model).model
        report = group_fairness_score(trained, dataset, worst.rule_set,
                                      sampler_config, scorer_config,
                                      worst.favorable_label)
        rounds.append(MitigationRound(count, report.score,
                                      accuracy(trained, eval_dataset), report))
        kept_models.append(trained)

    eligible = [i for i, r in enumerate(rounds)
                if accuracy_before - r.accuracy <= config.accuracy_drop_budget]
    if not eligible:
        return replace(base, target_label=target, succeeded=False,
                       rounds=tuple(rounds))
    best = min(eligible, key=lambda i: (rounds[i].score, rounds[i].count))
    return MitigationResult(
        model=kept_models[best], before=worst, after=rounds[best].report,
        accuracy_before=accuracy_before, accuracy_after=rounds[best].accuracy,
        target_label=target, chosen_count=rounds[best].count, succeeded=True,
        rounds=tuple(rounds))


def augment_text_corpus(oracle, dataset: TextDataset, rule_set: RuleSet,
                        target_label: str, count: int,
                        sampler_config: SamplerConfig, path,
                        attempt_factor: int = 200) -> int:
    """Write the original corpus plus counter-labeled replacement documents.

    Text models retrain outside this toolkit, so mitigation for text stops
    at emitting the augmented TSV (label, text, origin). Returns the number
    of augmented documents written.
    """
    counter = generate_counter_samples(oracle, dataset, rule_set, target_label,
                                       count, sampler_config,
                                       attempt_factor=attempt_factor)
    with open(path, "w", encoding="utf-8") as fh:
        for doc, label in zip(dataset.documents, dataset.labels):
            # tabs and newlines in the raw text would break the TSV framing
            text = " ".join(doc.text.split())
            fh.write(f"{label}\t{text}\toriginal\n")
        for tokens in counter:
            fh.write(f"{target_label}\t{' '.join(tokens)}\taugmented\n")
    return len(counter)
