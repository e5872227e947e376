import json

import pytest

from fairminer.report import AuditReport, render_markdown
from fairminer.rules import RuleSet, ValueSetRule
from fairminer.scoring import rank_rule_sets, report_from_counts


def make_audit_report():
    male = RuleSet([ValueSetRule("gender", ("male",))])
    blue = RuleSet([ValueSetRule("race", ("blue",))])
    reports = [
        report_from_counts(299, 97, 1000, rule_set=male, favorable_label="1"),
        report_from_counts(140, 120, 1000, rule_set=blue, favorable_label="1"),
    ]
    ranked = rank_rule_sets(reports, score_threshold=0.05, top_k=3)
    return AuditReport(findings=ranked, favorable_label="1",
                       candidate_count=197, frequent_count=12, scored_count=2,
                       timings={"load": 0.01, "mine": 0.2, "score": 1.5,
                                "total": 1.71})


def test_markdown_percentages_row():
    text = render_markdown(make_audit_report())
    assert "| gender=male | 20.2% | (29.9%, 9.7%) |" in text
    assert "| race∈{blue} |" not in text  # single values render as equality
    assert "| race=blue | 2.0% | (14.0%, 12.0%) |" in text


def test_markdown_structure():
    text = render_markdown(make_audit_report())
    assert text.startswith("# fairness audit")
    assert "- favorable label: 1" in text
    assert "197 candidates" in text
    assert "## findings" in text
    assert "## full ranking" in text
    assert "time:" in text
    bare = render_markdown(make_audit_report(), include_timings=False)
    assert "time:" not in bare


def test_markdown_no_findings():
    male = RuleSet([ValueSetRule("gender", ("male",))])
    reports = [report_from_counts(500, 490, 1000, rule_set=male,
                                  favorable_label="1")]
    ranked = rank_rule_sets(reports, score_threshold=0.05)
    audit = AuditReport(findings=ranked, favorable_label="1",
                        candidate_count=2, frequent_count=1, scored_count=1,
                        timings={})
    text = render_markdown(audit)
    assert "none above the score threshold" in text
    assert "## full ranking" in text


def test_json_roundtrip(demographic_schema):
    audit = make_audit_report()
    doc = audit.to_dict()
    again = AuditReport.from_dict(doc, demographic_schema)
    assert again.findings.ranking == audit.findings.ranking
    assert again.findings.findings == audit.findings.findings
    assert again.favorable_label == audit.favorable_label
    assert again.candidate_count == audit.candidate_count
    # rendered rule strings ride along for report consumers
    assert doc["ranking"][0]["rule"] == "gender=male"
    assert doc["flagged_count"] == 1  # 0.02 sits below the 0.05 threshold


def test_json_excludes_timings_by_default():
    audit = make_audit_report()
    assert "timings" not in audit.to_dict()
    with_timings = audit.to_dict(include_timings=True)
    assert with_timings["timings"]["total"] == 1.71
    # identical reports serialize to identical bytes
    a = json.dumps(make_audit_report().to_dict(), sort_keys=True)
    b = json.dumps(make_audit_report().to_dict(), sort_keys=True)
    assert a == b
