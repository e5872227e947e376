"""Command-line pipeline: mine rule sets, score them, rank, mitigate.

Exit status is 0 whenever the requested phases complete, whether or not
discrimination was found; toolkit errors print to stderr and exit 1.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
import time
from dataclasses import replace

from fairminer.config import AuditConfig, load_audit_config
from fairminer.data import load_schema, load_structured
from fairminer.errors import ConfigError, FairminerError
from fairminer.mitigation import counter_target_label, mitigate, augment_text_corpus
from fairminer.oracle import SubprocessOracle, load_mlp, save_mlp
from fairminer.report import AuditReport, render_markdown
from fairminer.rules import (candidate_count, frequent_rule_sets, render_rule_set,
                             rule_set_from_list, rule_set_to_list, support)
from fairminer.sampling import COMPLEMENT_SIDE, GROUP_SIDE, make_sampler
from fairminer.scoring import rank_rule_sets, score_rule_sets
from fairminer.text import TextDataset, default_lexicon, load_lexicon, load_text


def _load_dataset(config: AuditConfig):
    if config.data.kind == "structured":
        schema = load_schema(config.data.schema)
        return load_structured(config.data.path, schema), schema
    lexicon = (load_lexicon(config.data.lexicon) if config.data.lexicon
               else default_lexicon())
    dataset = load_text(config.data.path, lexicon,
                        label_names=config.data.label_names,
                        favorable_label=config.data.favorable_label)
    return dataset, lexicon


def _open_oracle(config: AuditConfig, stack: contextlib.ExitStack):
    if config.oracle.mlp is not None:
        return load_mlp(config.oracle.mlp)
    mode = "tokens" if config.data.kind == "text" else "features"
    return stack.enter_context(SubprocessOracle(
        config.oracle.command, mode=mode, timeout=config.oracle.timeout))


class _Phase:
    """Times a pipeline phase and prefixes its errors with the phase name."""

    def __init__(self, name: str, timings: dict):
        self.name = name
        self.timings = timings

    def __enter__(self):
        self._start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.timings[self.name] = time.perf_counter() - self._start
        if exc is not None and isinstance(exc, FairminerError):
            raise type(exc)(f"{self.name} phase: {exc}") from exc
        return False


def run_audit(config: AuditConfig) -> AuditReport:
    """Execute mine -> score -> rank and assemble the report."""
    timings: dict = {}
    total_start = time.perf_counter()
    with _Phase("load", timings):
        dataset, _ = _load_dataset(config)
    with _Phase("mine", timings):
        candidates = candidate_count(
            dataset, mode=config.rules.mode, num_bins=config.rules.num_bins,
            max_rules_per_feature=config.rules.max_rules_per_feature)
        frequent = frequent_rule_sets(
            dataset, config.rules.support_threshold, mode=config.rules.mode,
            num_bins=config.rules.num_bins,
            max_rules_per_set=config.rules.max_rules_per_set,
            max_rules_per_feature=config.rules.max_rules_per_feature)
    with _Phase("score", timings), contextlib.ExitStack() as stack:
        oracle = _open_oracle(config, stack)
        reports = score_rule_sets(oracle, dataset, frequent, config.sampler,
                                  config.scorer, jobs=config.jobs)
    findings = rank_rule_sets(reports, config.report.score_threshold,
                              config.report.top_k)
    timings["total"] = time.perf_counter() - total_start
    favorable = (dataset.schema.favorable_label
                 if not isinstance(dataset, TextDataset)
                 else dataset.favorable_label)
    return AuditReport(findings=findings, favorable_label=favorable,
                       candidate_count=candidates, frequent_count=len(frequent),
                       scored_count=len(reports), timings=timings)


def _emit(text: str, output: str | None):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render_audit(report: AuditReport, config: AuditConfig, fmt: str) -> str:
    if fmt == "json":
        doc = report.to_dict(include_timings=config.report.include_timings)
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    return render_markdown(report)


def _cmd_audit(args) -> int:
    config = _load_config(args)
    report = run_audit(config)
    _emit(_render_audit(report, config, args.format), args.output)
    return 0


def _cmd_rules(args) -> int:
    config = _load_config(args)
    dataset, _ = _load_dataset(config)
    frequent = frequent_rule_sets(
        dataset, config.rules.support_threshold, mode=config.rules.mode,
        num_bins=config.rules.num_bins,
        max_rules_per_set=config.rules.max_rules_per_set,
        max_rules_per_feature=config.rules.max_rules_per_feature)
    results = [support(dataset, rs) for rs in frequent]
    if args.format == "json":
        doc = [{"rules": rule_set_to_list(r.rule_set), "rule": render_rule_set(r.rule_set),
                "support": r.support, "satisfying": r.satisfying_count,
                "total": r.total} for r in results]
        _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.output)
    else:
        lines = ["| rule set | support |", "|---|---|"]
        lines += [f"| {render_rule_set(r.rule_set)} | {r.support:.4f} |" for r in results]
        _emit("\n".join(lines) + "\n", args.output)
    return 0


def _cmd_sample(args) -> int:
    config = _load_config(args)
    dataset, context = _load_dataset(config)
    rule_set = rule_set_from_list(json.loads(args.rules), context)
    sampler = make_sampler(dataset, rule_set, config.sampler)
    side = GROUP_SIDE if args.side == "group" else COMPLEMENT_SIDE
    samples = sampler.sample_decoded(side, args.count)
    lines = [json.dumps({"side": side, "sample": list(s)}) for s in samples]
    _emit("\n".join(lines) + "\n", args.output)
    return 0


def _cmd_mitigate(args) -> int:
    config = _load_config(args)
    if config.mitigation is None:
        raise ConfigError("config has no mitigation section")
    report = run_audit(config)
    if not report.findings.flagged:
        sys.stdout.write("nothing to mitigate: no rule set above the score threshold\n")
        return 0
    worst = report.findings.flagged[0]
    dataset, context = _load_dataset(config)

    if isinstance(dataset, TextDataset):
        if not args.corpus_out:
            raise ConfigError("text mitigation needs --corpus-out")
        with contextlib.ExitStack() as stack:
            oracle = _open_oracle(config, stack)
            target = counter_target_label(worst, dataset.label_names)
            count = max(config.mitigation.start_count,
                        int(config.mitigation.max_fraction * len(dataset)))
            written = augment_text_corpus(
                oracle, dataset, worst.rule_set, target, count, config.sampler,
                args.corpus_out, attempt_factor=config.mitigation.attempt_factor)
        sys.stdout.write(f"wrote {written} augmented documents to {args.corpus_out}\n")
        return 0

    if config.oracle.mlp is None:
        raise ConfigError("retraining needs the built-in mlp oracle; external "
                          "oracles only support --corpus-out on text data")
    model = load_mlp(config.oracle.mlp)
    result = mitigate(model, dataset, worst, config.sampler, config.scorer,
                      config.mitigation)
    if args.model_out:
        save_mlp(result.model, args.model_out)
    status = "ok" if result.succeeded else "no round met the accuracy budget"
    sys.stdout.write(
        f"{status}: score {result.before.score:.4f} -> {result.after.score:.4f}, "
        f"accuracy {result.accuracy_before:.4f} -> {result.accuracy_after:.4f}, "
        f"augmented {result.chosen_count or 0} samples "
        f"({render_rule_set(worst.rule_set)})\n")
    return 0


def _load_config(args) -> AuditConfig:
    config = load_audit_config(args.config)
    overrides = {}
    if getattr(args, "jobs", None) is not None:
        overrides["jobs"] = args.jobs
    if overrides:
        config = replace(config, **overrides)
    if getattr(args, "support_threshold", None) is not None:
        config = replace(config, rules=replace(
            config.rules, support_threshold=args.support_threshold))
    if getattr(args, "num_bins", None) is not None:
        config = replace(config, rules=replace(config.rules, num_bins=args.num_bins))
    if getattr(args, "rule_mode", None) is not None:
        config = replace(config, rules=replace(config.rules, mode=args.rule_mode))
    if getattr(args, "error_threshold", None) is not None:
        config = replace(config, scorer=replace(
            config.scorer, error_threshold=args.error_threshold))
    if getattr(args, "max_samples", None) is not None:
        config = replace(config, scorer=replace(config.scorer, max_samples=args.max_samples))
    if getattr(args, "seed", None) is not None:
        config = replace(config, sampler=replace(config.sampler, seed=args.seed))
    if getattr(args, "score_threshold", None) is not None:
        config = replace(config, report=replace(
            config.report, score_threshold=args.score_threshold))
    if getattr(args, "top_k", None) is not None:
        config = replace(config, report=replace(config.report, top_k=args.top_k))
    if getattr(args, "timings", False):
        config = replace(config, report=replace(config.report, include_timings=True))
    return config


def _add_common(parser: argparse.ArgumentParser, with_scoring: bool = True):
    parser.add_argument("--config", required=True, help="audit config JSON")
    parser.add_argument("--output", help="write result here instead of stdout")
    parser.add_argument("--support-threshold", type=float, dest="support_threshold")
    parser.add_argument("--num-bins", type=int, dest="num_bins")
    parser.add_argument("--rule-mode", choices=["union", "single-bin"], dest="rule_mode")
    parser.add_argument("--seed", type=int)
    if with_scoring:
        parser.add_argument("--jobs", type=int)
        parser.add_argument("--error-threshold", type=float, dest="error_threshold")
        parser.add_argument("--max-samples", type=int, dest="max_samples")
        parser.add_argument("--score-threshold", type=float, dest="score_threshold")
        parser.add_argument("--top-k", type=int, dest="top_k")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairminer",
        description="Mine subgroups over sensitive features and measure how "
                    "differently a black-box model treats them.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_audit = sub.add_parser("audit", help="mine, score, and rank rule sets")
    _add_common(p_audit)
    p_audit.add_argument("--format", choices=["json", "markdown"], default="markdown")
    p_audit.add_argument("--timings", action="store_true",
                         help="include wall times in JSON output")
    p_audit.set_defaults(fn=_cmd_audit)

    p_rules = sub.add_parser("rules", help="dump frequent rule sets only")
    _add_common(p_rules, with_scoring=False)
    p_rules.add_argument("--format", choices=["json", "markdown"], default="json")
    p_rules.set_defaults(fn=_cmd_rules)

    p_sample = sub.add_parser("sample", help="debug: dump generated samples")
    _add_common(p_sample, with_scoring=False)
    p_sample.add_argument("--rules", required=True,
                          help="rule set as a JSON list of rule objects")
    p_sample.add_argument("--side", choices=["group", "complement"], default="group")
    p_sample.add_argument("--count", type=int, default=10)
    p_sample.set_defaults(fn=_cmd_sample)

    p_mit = sub.add_parser("mitigate", help="audit, then mitigate the worst finding")
    _add_common(p_mit)
    p_mit.add_argument("--model-out", help="write the retrained model here")
    p_mit.add_argument("--corpus-out", help="write the augmented text corpus here")
    p_mit.set_defaults(fn=_cmd_mitigate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except FairminerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
