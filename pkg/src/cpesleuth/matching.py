"""Similarity scoring and best-match selection over tiered candidates.

The pipeline is: sanitize the record, pull the weighted candidate union
from the catalog, score every candidate against the sanitized name, and
keep the best scorer that clears its tier's threshold.  Scores are exact
rationals so threshold comparisons never depend on float rounding.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .catalog import Catalog
from .errors import EmptyAfterSanitizeError
from .model import (
    CpeEntry,
    MatchCandidate,
    MatchConfig,
    MatchedCpe,
    MatchResult,
    SanitizedSoftware,
    SoftwareRecord,
    TraceEntry,
)
from .sanitize import DEFAULT_RULES, SanitizerRules, sanitize_record


def _lcs_length(a: str, b: str) -> int:
    # Two-row dynamic program; rows run over the shorter string.
    if not a or not b:
        return 0
    if len(b) > len(a):
        a, b = b, a
    previous = [0] * (len(b) + 1)
    for ch in a:
        current = [0]
        for j, other in enumerate(b, start=1):
            if ch == other:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def similarity(a: str, b: str) -> Fraction:
    """Normalized indel similarity, 100 * 2 * LCS(a, b) / (|a| + |b|).

    Exact rational in [0, 100].  Two empty strings count as identical
    (100); exactly one empty string shares nothing (0).
    """
    if not a and not b:
        return Fraction(100)
    if not a or not b:
        return Fraction(0)
    return Fraction(200 * _lcs_length(a, b), len(a) + len(b))


def score_entry(name: str, entry: CpeEntry) -> Fraction:
    """A candidate scores on whichever of title or product it resembles more."""
    return max(similarity(name, entry.title_norm), similarity(name, entry.product_norm))


def score_candidates(
    s: SanitizedSoftware,
    candidates: Iterable[MatchCandidate],
    config: MatchConfig | None = None,
) -> tuple[TraceEntry, ...]:
    """Score each candidate and mark whether it clears its tier threshold."""
    if config is None:
        config = MatchConfig()
    trace = []
    for candidate in candidates:
        score = score_entry(s.name, candidate.entry)
        trace.append(
            TraceEntry(
                cpe_string=candidate.entry.cpe_string,
                weight=candidate.weight,
                score=score,
                passed_threshold=score >= config.thresholds[candidate.weight],
                deprecated=candidate.entry.deprecated,
            )
        )
    return tuple(trace)


def select_best(trace: Sequence[TraceEntry]) -> MatchedCpe | None:
    """Highest passing score wins; ties fall to the lower weight, then to
    non-deprecated entries, then to the lexicographically smallest string."""
    passing = [t for t in trace if t.passed_threshold]
    if not passing:
        return None
    best = min(passing, key=lambda t: (-t.score, t.weight, t.deprecated, t.cpe_string))
    return MatchedCpe(cpe_string=best.cpe_string, score=best.score, weight=best.weight)


def match_software(
    record: SoftwareRecord,
    catalog: Catalog,
    rules: SanitizerRules = DEFAULT_RULES,
    config: MatchConfig | None = None,
) -> MatchResult:
    """Run the full pipeline for one record.

    A name that sanitizes to nothing cannot be matched; the result carries
    the reason instead of a trace.
    """
    if config is None:
        config = MatchConfig()
    try:
        s = sanitize_record(record, rules)
    except EmptyAfterSanitizeError as exc:
        return MatchResult(software=record, matched=None, trace=(), error=str(exc))
    candidates = catalog.union_candidates(s, include_deprecated=config.include_deprecated)
    trace = score_candidates(s, candidates, config)
    return MatchResult(software=record, matched=select_best(trace), trace=trace)


def match_inventory(
    records: Iterable[SoftwareRecord],
    catalog: Catalog,
    rules: SanitizerRules = DEFAULT_RULES,
    config: MatchConfig | None = None,
) -> list[MatchResult]:
    return [match_software(record, catalog, rules, config) for record in records]
