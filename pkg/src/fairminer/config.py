"""Audit configuration: one self-describing JSON document.

Every section maps onto one module's config dataclass; unknown keys are
rejected so typos fail loudly instead of silently running defaults. Any
field can be overridden from the command line.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from fairminer.errors import ConfigError
from fairminer.mitigation import MitigationConfig, TrainerConfig
from fairminer.rules import MODE_SINGLE_BIN, MODE_UNION
from fairminer.sampling import SamplerConfig
from fairminer.scoring import ScorerConfig

LEXICON_ENV = "FAIRMINER_LEXICON"


@dataclass(frozen=True)
class DataConfig:
    path: str
    kind: str = "structured"
    schema: str | None = None
    lexicon: str | None = None
    label_names: tuple[str, ...] | None = None
    favorable_label: str | None = None

    def __post_init__(self):
        if self.kind not in ("structured", "text"):
            raise ConfigError(f"data kind must be structured or text, got {self.kind!r}")
        if self.kind == "structured" and not self.schema:
            raise ConfigError("structured data needs a schema file")
        if self.kind == "text" and not self.favorable_label:
            raise ConfigError("text data needs favorable_label")


@dataclass(frozen=True)
class OracleConfig:
    mlp: str | None = None
    command: tuple[str, ...] | None = None
    timeout: float = 30.0

    def __post_init__(self):
        if (self.mlp is None) == (self.command is None):
            raise ConfigError("oracle needs exactly one of: mlp file, command")
        if self.timeout <= 0:
            raise ConfigError("oracle timeout must be positive")


@dataclass(frozen=True)
class RuleConfig:
    support_threshold: float = 0.05
    num_bins: int = 10
    mode: str = MODE_UNION
    max_rules_per_set: int | None = None
    max_rules_per_feature: int | None = None

    def __post_init__(self):
        if not 0 < self.support_threshold < 1:
            raise ConfigError("support_threshold must be in (0, 1)")
        if self.num_bins < 2:
            raise ConfigError("num_bins must be at least 2")
        if self.mode not in (MODE_UNION, MODE_SINGLE_BIN):
            raise ConfigError(f"rule mode must be {MODE_UNION!r} or {MODE_SINGLE_BIN!r}")


@dataclass(frozen=True)
class ReportConfig:
    score_threshold: float = 0.05
    top_k: int = 3
    include_timings: bool = False

    def __post_init__(self):
        if self.score_threshold <= 0:
            raise ConfigError("score_threshold must be positive")
        if self.top_k < 1:
            raise ConfigError("top_k must be at least 1")


@dataclass(frozen=True)
class AuditConfig:
    data: DataConfig
    oracle: OracleConfig
    rules: RuleConfig = field(default_factory=RuleConfig)
    scorer: ScorerConfig = field(default_factory=ScorerConfig)
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    report: ReportConfig = field(default_factory=ReportConfig)
    mitigation: MitigationConfig | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")


def _build(cls, doc: dict, section: str):
    if not isinstance(doc, dict):
        raise ConfigError(f"config section {section!r} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in config section {section!r}")
    coerced = {}
    for f in fields(cls):
        if f.name not in doc:
            continue
        value = doc[f.name]
        if isinstance(value, list):
            value = tuple(value)
        coerced[f.name] = value
    try:
        return cls(**coerced)
    except TypeError as exc:
        raise ConfigError(f"config section {section!r}: {exc}") from None


def audit_config_from_dict(doc: dict, base_dir: Path | None = None) -> AuditConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    known = {"data", "oracle", "rules", "scorer", "sampler", "report",
             "mitigation", "jobs"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown top-level config key(s) {sorted(unknown)}")
    if "data" not in doc or "oracle" not in doc:
        raise ConfigError("config needs data and oracle sections")

    data = _build(DataConfig, doc["data"], "data")
    if data.kind == "text" and data.lexicon is None:
        env_lexicon = os.environ.get(LEXICON_ENV)
        if env_lexicon:
            data = _build(DataConfig, {**doc["data"], "lexicon": env_lexicon}, "data")

    mitigation = None
    if doc.get("mitigation") is not None:
        mdoc = dict(doc["mitigation"])
        trainer = _build(TrainerConfig, mdoc.pop("trainer", {}), "mitigation.trainer")
        mitigation = _build(MitigationConfig, {**mdoc, "trainer": trainer}, "mitigation")

    config = AuditConfig(
        data=data,
        oracle=_build(OracleConfig, doc["oracle"], "oracle"),
        rules=_build(RuleConfig, doc.get("rules", {}), "rules"),
        scorer=_build(ScorerConfig, doc.get("scorer", {}), "scorer"),
        sampler=_build(SamplerConfig, doc.get("sampler", {}), "sampler"),
        report=_build(ReportConfig, doc.get("report", {}), "report"),
        mitigation=mitigation,
        jobs=int(doc.get("jobs", 1)),
    )
    if base_dir is not None:
        config = _resolve_paths(config, base_dir)
    _check_files(config)
    return config


def _resolve(base_dir: Path, path: str | None) -> str | None:
    if path is None:
        return None
    p = Path(path)
    return str(p if p.is_absolute() else base_dir / p)


def _resolve_paths(config: AuditConfig, base_dir: Path) -> AuditConfig:
    from dataclasses import replace
    data = replace(config.data,
                   path=_resolve(base_dir, config.data.path),
                   schema=_resolve(base_dir, config.data.schema),
                   lexicon=_resolve(base_dir, config.data.lexicon))
    oracle = config.oracle
    if oracle.mlp is not None:
        oracle = replace(oracle, mlp=_resolve(base_dir, oracle.mlp))
    return replace(config, data=data, oracle=oracle)


def _check_files(config: AuditConfig):
    for label, path in (("data file", config.data.path),
                        ("schema file", config.data.schema),
                        ("lexicon file", config.data.lexicon),
                        ("model file", config.oracle.mlp)):
        if path is not None and not Path(path).is_file():
            raise ConfigError(f"{label} not found: {path}")


def load_audit_config(path) -> AuditConfig:
    """Read a config file; relative data/model paths resolve against it."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return audit_config_from_dict(doc, base_dir=path.parent)
