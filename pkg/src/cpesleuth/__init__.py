"""Map installed-software inventories to CPE 2.3 identifiers and known CVEs.

The pipeline: sanitize noisy inventory strings, retrieve dictionary
candidates through four weighted tiers, pick the best candidate by
normalized indel similarity against per-tier thresholds, then map the
matched identifier to applicable CVE records.  A deliberately exact-match
baseline is included for detection-rate comparisons.
"""

from __future__ import annotations

from .catalog import Catalog
from .compare import (
    BASELINE_STRATEGY,
    ENHANCED_STRATEGY,
    DetectionReport,
    baseline_match,
    emit_report,
    run_comparison,
)
from .cpe import CpeWfn, Logical, format_cpe23, parse_cpe23
from .cvemap import (
    CveHit,
    VulnerabilityFinding,
    build_findings,
    criterion_applies,
    cves_for_cpe,
    version_compare,
)
from .errors import (
    BadComponentCountError,
    BadEscapeError,
    BadPartError,
    BadPrefixError,
    CatalogError,
    CpeParseError,
    CpeSleuthError,
    DuplicateIdError,
    EmptyAfterSanitizeError,
    EmptyNameError,
    FeedParseError,
    UnsupportedFormatError,
)
from .ingest import SourceDescriptor, load_cpe_dictionary, load_cves, load_inventory
from .matching import match_inventory, match_software, select_best, similarity
from .model import (
    CpeCriterion,
    CpeEntry,
    CveRecord,
    MatchConfig,
    MatchResult,
    SanitizedSoftware,
    Severity,
    SoftwareRecord,
)
from .sanitize import (
    SanitizerRules,
    load_rules,
    sanitize_name,
    sanitize_record,
    sanitize_vendor,
    sanitize_version,
)

__version__ = "0.1.0"

__all__ = [
    "BASELINE_STRATEGY",
    "BadComponentCountError",
    "BadEscapeError",
    "BadPartError",
    "BadPrefixError",
    "Catalog",
    "CatalogError",
    "CpeCriterion",
    "CpeEntry",
    "CpeParseError",
    "CpeSleuthError",
    "CpeWfn",
    "CveHit",
    "CveRecord",
    "DetectionReport",
    "DuplicateIdError",
    "ENHANCED_STRATEGY",
    "EmptyAfterSanitizeError",
    "EmptyNameError",
    "FeedParseError",
    "Logical",
    "MatchConfig",
    "MatchResult",
    "SanitizedSoftware",
    "SanitizerRules",
    "Severity",
    "SoftwareRecord",
    "SourceDescriptor",
    "UnsupportedFormatError",
    "VulnerabilityFinding",
    "baseline_match",
    "build_findings",
    "criterion_applies",
    "cves_for_cpe",
    "emit_report",
    "format_cpe23",
    "load_cpe_dictionary",
    "load_cves",
    "load_inventory",
    "load_rules",
    "match_inventory",
    "match_software",
    "parse_cpe23",
    "run_comparison",
    "sanitize_name",
    "sanitize_record",
    "sanitize_vendor",
    "sanitize_version",
    "select_best",
    "similarity",
    "version_compare",
]
