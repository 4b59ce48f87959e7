"""Mapping matched CPE identifiers to applicable CVE records.

A CVE applies to a CPE when at least one of its criteria does.  A
criterion names a pattern (whose attributes may be ANY) plus optional
version bounds; bounds are evaluated with a segment-wise version order so
"5.4.5.0124" and "5.4.5.124" compare equal and "5.20" sorts below "5.21".
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .catalog import Catalog
from .cpe import CpeWfn, Logical, parse_cpe23
from .model import CpeCriterion, MatchResult, Severity, SoftwareRecord, VersionBound

_SEGMENT_RUNS = re.compile(r"\d+|[a-zA-Z]+")

_SECONDARY_ATTRIBUTES = (
    "update",
    "edition",
    "language",
    "sw_edition",
    "target_sw",
    "target_hw",
    "other",
)


def _version_key(version: str) -> tuple[tuple[int, int | str], ...]:
    """Comparable form: maximal digit runs as integers, letter runs as text.

    Numeric segments order before alphabetic ones at the same position, and
    a version that is a strict segment-prefix of another orders below it.
    """
    key: list[tuple[int, int | str]] = []
    for run in _SEGMENT_RUNS.findall(version):
        if run.isdigit():
            key.append((0, int(run)))
        else:
            key.append((1, run.lower()))
    return tuple(key)


def version_compare(a: str, b: str) -> int:
    """-1, 0, or 1 as ``a`` orders below, equal to, or above ``b``."""
    key_a, key_b = _version_key(a), _version_key(b)
    return (key_a > key_b) - (key_a < key_b)


def _attribute_matches(pattern_value: str | Logical, cpe_value: str | Logical) -> bool:
    if pattern_value is Logical.ANY:
        return True
    return pattern_value == cpe_value


def _version_in_bounds(cpe_version: str | Logical, start: VersionBound | None,
                       end: VersionBound | None) -> bool:
    if start is None and end is None:
        return True
    if not isinstance(cpe_version, str):
        # Bounds constrain a concrete version; a logical value has none.
        return False
    if start is not None:
        order = version_compare(cpe_version, start.value)
        if order < 0 or (order == 0 and not start.inclusive):
            return False
    if end is not None:
        order = version_compare(cpe_version, end.value)
        if order > 0 or (order == 0 and not end.inclusive):
            return False
    return True


def criterion_applies(criterion: CpeCriterion, cpe: CpeWfn) -> bool:
    """Whether one CVE criterion covers the given attribute set."""
    if not criterion.vulnerable:
        return False
    pattern = criterion.pattern
    if not (
        _attribute_matches(pattern.part, cpe.part)
        and _attribute_matches(pattern.vendor, cpe.vendor)
        and _attribute_matches(pattern.product, cpe.product)
    ):
        return False
    if pattern.version is Logical.ANY:
        if not _version_in_bounds(cpe.version, criterion.version_start, criterion.version_end):
            return False
    elif pattern.version != cpe.version:
        return False
    return all(
        _attribute_matches(getattr(pattern, name), getattr(cpe, name))
        for name in _SECONDARY_ATTRIBUTES
    )


@dataclass(frozen=True)
class CveHit:
    """One CVE found to apply to a matched CPE."""

    cve_id: str
    severity: Severity
    cvss_score: float | None
    description: str


@dataclass(frozen=True)
class VulnerabilityFinding:
    """A software record, the CPE it matched, and the CVEs that apply."""

    software: SoftwareRecord
    cpe_string: str
    cves: tuple[CveHit, ...]

    def __post_init__(self) -> None:
        if not self.cves:
            raise ValueError("a finding requires at least one CVE")
        ids = [hit.cve_id for hit in self.cves]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate CVE ids within a finding")


def _hit_sort_key(hit: CveHit) -> tuple[bool, float, str]:
    return (hit.cvss_score is None, -(hit.cvss_score or 0.0), hit.cve_id)


def cves_for_cpe(cpe_string: str, catalog: Catalog) -> list[CveHit]:
    """All CVEs with at least one applying criterion, highest CVSS first
    (unscored last), ties by CVE id."""
    cpe = parse_cpe23(cpe_string)
    hits = []
    for record in catalog.candidate_cves(cpe.vendor, cpe.product):
        if any(criterion_applies(criterion, cpe) for criterion in record.criteria):
            hits.append(
                CveHit(
                    cve_id=record.cve_id,
                    severity=record.severity,
                    cvss_score=record.cvss_score,
                    description=record.description,
                )
            )
    hits.sort(key=_hit_sort_key)
    return hits


def build_findings(results: Iterable[MatchResult], catalog: Catalog) -> list[VulnerabilityFinding]:
    """One finding per matched record with a non-empty CVE list."""
    findings = []
    for result in results:
        if result.matched is None:
            continue
        hits = cves_for_cpe(result.matched.cpe_string, catalog)
        if hits:
            findings.append(
                VulnerabilityFinding(
                    software=result.software,
                    cpe_string=result.matched.cpe_string,
                    cves=tuple(hits),
                )
            )
    return findings
