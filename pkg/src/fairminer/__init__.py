"""Black-box group-fairness testing for classifiers.

Mine interpretable rule sets over sensitive features, estimate how
differently a model treats each induced subgroup (with an explicit error
bound on the estimate), rank the findings, and optionally mitigate the
worst one by counter-labeled augmentation and retraining.
"""

from fairminer.config import AuditConfig, load_audit_config
from fairminer.data import (Binning, FeatureSchema, FeatureSpec, StructuredDataset,
                            load_schema, load_structured, make_binning, save_structured,
                            split_dataset)
from fairminer.errors import (ConfigError, DataError, FairminerError, MitigationError,
                              OracleError, RuleError, SamplingError, SchemaError,
                              ScoringError)
from fairminer.mitigation import (MitigationConfig, MitigationResult, TrainerConfig,
                                  accuracy, generate_counter_samples, mitigate,
                                  train_mlp)
from fairminer.oracle import (FunctionOracle, MlpModel, PredictionOracle,
                              SubprocessOracle, load_mlp, mlp_predict, save_mlp)
from fairminer.report import AuditReport, render_markdown
from fairminer.rules import (IntervalRule, Rule, RuleSet, SupportResult, TermRule,
                             ValueSetRule, frequent_rule_sets, render_rule_set,
                             rule_set_from_list, rule_set_to_list, satisfies, support)
from fairminer.sampling import (SamplerConfig, StructuredSampler, TextSampler,
                                sample_structured, sample_text, sample_text_complement)
from fairminer.scoring import (FairnessReport, RankedFindings, ScorerConfig,
                               group_fairness_score, margin, rank_rule_sets,
                               report_from_counts, score_rule_sets)
from fairminer.text import Lexicon, TextDataset, default_lexicon, load_lexicon, load_text

__version__ = "0.1.0"

__all__ = [
    "AuditConfig", "AuditReport", "Binning", "ConfigError", "DataError",
    "FairminerError", "FairnessReport", "FeatureSchema", "FeatureSpec",
    "FunctionOracle", "IntervalRule", "Lexicon", "MitigationConfig",
    "MitigationError", "MitigationResult", "MlpModel", "OracleError",
    "PredictionOracle", "RankedFindings", "Rule", "RuleError", "RuleSet",
    "SamplerConfig", "SamplingError", "SchemaError", "ScorerConfig",
    "ScoringError", "StructuredDataset", "StructuredSampler", "SubprocessOracle",
    "SupportResult", "TermRule", "TextDataset", "TextSampler", "TrainerConfig",
    "ValueSetRule", "accuracy", "default_lexicon", "frequent_rule_sets",
    "generate_counter_samples", "group_fairness_score", "load_audit_config",
    "load_lexicon", "load_mlp", "load_schema", "load_structured", "load_text",
    "make_binning", "margin", "mitigate", "mlp_predict", "rank_rule_sets",
    "render_markdown", "render_rule_set", "report_from_counts",
    "rule_set_from_list", "rule_set_to_list", "sample_structured", "sample_text",
    "sample_text_complement", "satisfies", "save_mlp", "save_structured",
    "score_rule_sets", "split_dataset", "support", "train_mlp",
]
