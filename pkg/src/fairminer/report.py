"""Audit report assembly and rendering.

JSON is the lossless form: with timings excluded (the default) it is
byte-identical across runs of the same config and seeds. Markdown mirrors
the classic rule-set/score/rates table layout.
"""

from __future__ import annotations

from dataclasses import dataclass

from fairminer.errors import ConfigError
from fairminer.scoring import FairnessReport, RankedFindings, rank_rule_sets
from fairminer.rules import render_rule_set


@dataclass(frozen=True)
class AuditReport:
    """Everything one audit produced: ranked scores plus phase bookkeeping."""

    findings: RankedFindings
    favorable_label: str
    candidate_count: int
    frequent_count: int
    scored_count: int
    timings: dict

    def to_dict(self, include_timings: bool = False) -> dict:
        def entry(report: FairnessReport) -> dict:
            doc = report.to_dict()
            if report.rule_set is not None:
                doc["rule"] = render_rule_set(report.rule_set)
            return doc

        doc = {
            "favorable_label": self.favorable_label,
            "counts": {
                "candidates": self.candidate_count,
                "frequent": self.frequent_count,
                "scored": self.scored_count,
            },
            "score_threshold": self.findings.score_threshold,
            "top_k": self.findings.top_k,
            "flagged_count": len(self.findings.flagged),
            "ranking": [entry(r) for r in self.findings.ranking],
            "findings": [entry(r) for r in self.findings.findings],
        }
        if include_timings:
            doc["timings"] = {k: round(v, 3) for k, v in self.timings.items()}
        return doc

    @staticmethod
    def from_dict(doc: dict, context) -> "AuditReport":
        try:
            reports = [FairnessReport.from_dict(d, context) for d in doc["ranking"]]
            findings = rank_rule_sets(reports, doc["score_threshold"], doc["top_k"])
            return AuditReport(
                findings=findings,
                favorable_label=doc["favorable_label"],
                candidate_count=int(doc["counts"]["candidates"]),
                frequent_count=int(doc["counts"]["frequent"]),
                scored_count=int(doc["counts"]["scored"]),
                timings=dict(doc.get("timings", {})),
            )
        except KeyError as exc:
            raise ConfigError(f"report document missing field {exc}") from None


def _pct(x: float) -> str:
    return f"{100.0 * x:.1f}%"


def _table(reports) -> list[str]:
    lines = [
        "| rule set | fairness score | (group rate, rest rate) |",
        "|---|---|---|",
    ]
    for r in reports:
        rule = render_rule_set(r.rule_set) if r.rule_set is not None else "-"
        lines.append(f"| {rule} | {_pct(r.score)} | ({_pct(r.rate_group)}, "
                     f"{_pct(r.rate_rest)}) |")
    return lines


def render_markdown(report: AuditReport, include_timings: bool = True) -> str:
    f = report.findings
    lines = ["# fairness audit", ""]
    lines.append(f"- favorable label: {report.favorable_label}")
    lines.append(f"- rule sets: {report.candidate_count} candidates, "
                 f"{report.frequent_count} frequent, {report.scored_count} scored")
    lines.append(f"- score threshold: {f.score_threshold}, flagged: {len(f.flagged)}")
    if f.ranking:
        lines.append(f"- samples per side: "
                     f"{min(r.samples_per_side for r in f.ranking)}"
                     f"..{max(r.samples_per_side for r in f.ranking)}, "
                     f"confidence {f.ranking[0].confidence:g}")
    if include_timings and report.timings:
        spent = ", ".join(f"{k} {v:.2f}s" for k, v in report.timings.items())
        lines.append(f"- time: {spent}")
    lines.append("")
    if f.findings:
        lines.append(f"## findings (top {f.top_k} above threshold)")
        lines.append("")
        lines.extend(_table(f.findings))
        lines.append("")
    else:
        lines.append("## findings")
        lines.append("")
        lines.append("none above the score threshold")
        lines.append("")
    lines.append("## full ranking")
    lines.append("")
    lines.extend(_table(f.ranking))
    return "\n".join(lines) + "\n"
