"""Exact-match baseline and the detection-rate benchmark.

The baseline models the widely deployed exact-match approach: lowercase
everything, strip trailing corporate suffixes ("Inc.", "LLC", ...), trim
trailing ".0" version segments, then demand exact equality in the same
four retrieval tiers.  No fuzzy scoring, no bracket/remark/architecture
cleanup.  ``run_comparison`` runs it side by side with the enhanced
pipeline and reports per-strategy detection rates, where a strategy
detects a record when its match carries at least one applicable CVE.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Mapping, Sequence

from .catalog import Catalog
from .cvemap import VulnerabilityFinding, cves_for_cpe
from .errors import UnsupportedFormatError
from .matching import match_software
from .model import MatchConfig, SanitizedSoftware, SoftwareRecord
from .sanitize import DEFAULT_CORPORATE_STOPWORDS, DEFAULT_RULES, SanitizerRules

BASELINE_STRATEGY = "baseline"
ENHANCED_STRATEGY = "enhanced"

BASELINE_SUFFIXES = frozenset(DEFAULT_CORPORATE_STOPWORDS)

_TRAILING_JUNK = " ,.;"


@dataclass(frozen=True)
class StrategyStats:
    detected: int
    total: int
    rate: Fraction | None


@dataclass(frozen=True)
class AppOutcome:
    name: str
    version: str
    detected_by: frozenset[str]


@dataclass(frozen=True)
class DetectionReport:
    per_strategy: Mapping[str, StrategyStats]
    per_app: tuple[AppOutcome, ...]
    improvement_rate: Fraction | None


def baseline_clean_text(text: str) -> str:
    """Lowercase and iteratively drop trailing corporate-suffix tokens."""
    text = text.lower().strip()
    while True:
        text = text.rstrip(_TRAILING_JUNK)
        tokens = text.split()
        if not tokens:
            return ""
        if tokens[-1] in BASELINE_SUFFIXES:
            text = " ".join(tokens[:-1])
            continue
        return text


def baseline_clean_version(version: str) -> str:
    """Lowercase and trim trailing ".0" segments ("8.0.22.0" to "8.0.22")."""
    text = version.strip().lower()
    while text.endswith(".0"):
        text = text[: -len(".0")]
    return text


def baseline_match(record: SoftwareRecord, catalog: Catalog) -> str | None:
    """Lowest-weight exact tier hit for the baseline-cleaned record, if any."""
    s = SanitizedSoftware(
        name=baseline_clean_text(record.raw_name),
        vendor=baseline_clean_text(record.raw_vendor),
        version=baseline_clean_version(record.raw_version),
        origin=record,
    )
    if not s.name:
        return None
    candidates = catalog.exact_candidates(s)
    if not candidates:
        return None
    return candidates[0].entry.cpe_string


def _detects(cpe_string: str | None, catalog: Catalog) -> bool:
    return cpe_string is not None and bool(cves_for_cpe(cpe_string, catalog))


def run_comparison(
    inventory: Sequence[SoftwareRecord],
    catalog: Catalog,
    rules: SanitizerRules = DEFAULT_RULES,
    config: MatchConfig | None = None,
) -> DetectionReport:
    """Run both strategies over the inventory and tabulate detection rates."""
    outcomes = []
    detected = {BASELINE_STRATEGY: 0, ENHANCED_STRATEGY: 0}
    for record in inventory:
        found = set()
        if _detects(baseline_match(record, catalog), catalog):
            found.add(BASELINE_STRATEGY)
        result = match_software(record, catalog, rules, config)
        matched = result.matched.cpe_string if result.matched is not None else None
        if _detects(matched, catalog):
            found.add(ENHANCED_STRATEGY)
        for name in found:
            detected[name] += 1
        outcomes.append(
            AppOutcome(
                name=record.raw_name,
                version=record.raw_version,
                detected_by=frozenset(found),
            )
        )
    total = len(outcomes)
    per_strategy = {
        name: StrategyStats(
            detected=count,
            total=total,
            rate=Fraction(count, total) if total else None,
        )
        for name, count in detected.items()
    }
    baseline_rate = per_strategy[BASELINE_STRATEGY].rate
    enhanced_rate = per_strategy[ENHANCED_STRATEGY].rate
    improvement = None
    if baseline_rate and enhanced_rate is not None:
        improvement = (enhanced_rate - baseline_rate) / baseline_rate * 100
    return DetectionReport(
        per_strategy=per_strategy,
        per_app=tuple(outcomes),
        improvement_rate=improvement,
    )


def two_decimals(value: Fraction) -> str:
    """Render an exact rational with two decimals, deterministically."""
    quotient = Decimal(value.numerator) / Decimal(value.denominator)
    return str(quotient.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _json_bytes(report: DetectionReport, findings: Sequence[VulnerabilityFinding]) -> bytes:
    payload = {
        "findings": [
            {
                "record_id": finding.software.record_id,
                "software": finding.software.raw_name,
                "version": finding.software.raw_version,
                "vendor": finding.software.raw_vendor,
                "cpe": finding.cpe_string,
                "cves": [
                    {
                        "cve_id": hit.cve_id,
                        "severity": hit.severity.value,
                        "cvss": hit.cvss_score,
                        "description": hit.description,
                    }
                    for hit in finding.cves
                ],
            }
            for finding in findings
        ],
        "report": {
            "per_strategy": {
                name: {
                    "detected": stats.detected,
                    "total": stats.total,
                    "rate_percent": (
                        two_decimals(stats.rate * 100) if stats.rate is not None else None
                    ),
                }
                for name, stats in report.per_strategy.items()
            },
            "per_app": [
                {
                    "name": outcome.name,
                    "version": outcome.version,
                    "detected_by": sorted(outcome.detected_by),
                }
                for outcome in report.per_app
            ],
            "improvement_rate_percent": (
                two_decimals(report.improvement_rate)
                if report.improvement_rate is not None
                else None
            ),
        },
    }
    return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8")


def _csv_bytes(findings: Sequence[VulnerabilityFinding]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["software", "version", "cpe", "cve_id", "severity", "cvss"])
    for finding in findings:
        for hit in finding.cves:
            writer.writerow(
                [
                    finding.software.raw_name,
                    finding.software.raw_version,
                    finding.cpe_string,
                    hit.cve_id,
                    hit.severity.value,
                    "" if hit.cvss_score is None else hit.cvss_score,
                ]
            )
    return buffer.getvalue().encode("utf-8")


def _table_bytes(report: DetectionReport) -> bytes:
    strategies = sorted(report.per_strategy)
    header = ["Application", "Version", *strategies]
    body = [
        [outcome.name, outcome.version,
         *("Yes" if name in outcome.detected_by else "" for name in strategies)]
        for outcome in report.per_app
    ]
    totals = ["Total Detected", "",
              *(str(report.per_strategy[name].detected) for name in strategies)]
    rates = ["Detection Rate", ""]
    for name in strategies:
        rate = report.per_strategy[name].rate
        rates.append(two_decimals(rate * 100) + "%" if rate is not None else "-")
    table = [header, *body, totals, rates]
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]

    def render(row: list[str]) -> str:
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()

    rule = "  ".join("-" * width for width in widths)
    lines = [render(header), rule]
    lines.extend(render(row) for row in body)
    lines.append(rule)
    lines.append(render(totals))
    lines.append(render(rates))
    if report.improvement_rate is not None:
        lines.append(f"Improvement over baseline: {two_decimals(report.improvement_rate)}%")
    return ("\n".join(lines) + "\n").encode("utf-8")


def emit_report(
    report: DetectionReport,
    findings: Sequence[VulnerabilityFinding],
    format_name: str,
) -> bytes:
    """Serialize deterministically; identical inputs yield identical bytes."""
    if format_name == "json":
        return _json_bytes(report, findings)
    if format_name == "csv":
        return _csv_bytes(findings)
    if format_name in ("table", "text-table"):
        return _table_bytes(report)
    raise UnsupportedFormatError(f"unsupported report format: {format_name!r}")
