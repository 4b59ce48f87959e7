"""Core domain types: inventory records, catalog entries, match results."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

from .cpe import CpeWfn, Logical, format_cpe23
from .errors import DuplicateIdError, EmptyNameError

TIER_WEIGHTS = (1, 2, 3, 4)

# Per-tier minimum similarity scores. Tier 1 is the strictest retrieval
# path and carries the highest bar; each looser tier is slightly reduced.
DEFAULT_THRESHOLDS: Mapping[int, Fraction] = {
    1: Fraction(70),
    2: Fraction(67),
    3: Fraction(64),
    4: Fraction(60),
}


class Severity(Enum):
    NONE = "NONE"
    LOW = "LOW"
    MEDIUM = "MEDIUM"
    HIGH = "HIGH"
    CRITICAL = "CRITICAL"
    UNKNOWN = "UNKNOWN"

    @classmethod
    def from_score(cls, score: float | None) -> "Severity":
        """Map a numeric CVSS base score onto the v3 severity bands."""
        if score is None:
            return cls.UNKNOWN
        if score < 0 or score > 10:
            return cls.UNKNOWN
        if score == 0:
            return cls.NONE
        if score < 4.0:
            return cls.LOW
        if score < 7.0:
            return cls.MEDIUM
        if score < 9.0:
            return cls.HIGH
        return cls.CRITICAL

    @classmethod
    def normalize(cls, text: str | None) -> "Severity":
        if not text:
            return cls.UNKNOWN
        try:
            return cls[text.strip().upper()]
        except KeyError:
            return cls.UNKNOWN


@dataclass(frozen=True)
class SoftwareRecord:
    """One installed-software row as reported by an inventory agent."""

    record_id: int
    raw_name: str
    raw_version: str = ""
    raw_vendor: str = ""
    source_host: str = ""


@dataclass(frozen=True)
class SanitizedSoftware:
    """The cleaned view of a record used for retrieval and scoring."""

    name: str
    vendor: str
    version: str
    origin: SoftwareRecord


@dataclass(frozen=True)
class CpeEntry:
    """A dictionary entry: the 11 CPE attributes plus derived search fields.

    ``title_norm`` and ``product_norm`` are derived once at ingest so that
    retrieval compares like against like: both are lowercase, with the
    entry's version literal dropped from the title and underscores in the
    product opened into spaces.
    """

    attrs: CpeWfn
    title: str
    title_norm: str
    product_norm: str
    deprecated: bool
    cpe_string: str

    @property
    def part(self) -> str | Logical:
        return self.attrs.part

    @property
    def vendor(self) -> str | Logical:
        return self.attrs.vendor

    @property
    def product(self) -> str | Logical:
        return self.attrs.product

    @property
    def version(self) -> str | Logical:
        return self.attrs.version


@dataclass(frozen=True)
class MatchCandidate:
    entry: CpeEntry
    weight: int


@dataclass(frozen=True)
class TraceEntry:
    """One scored candidate, kept for explainability."""

    cpe_string: str
    weight: int
    score: Fraction
    passed_threshold: bool
    deprecated: bool = False


@dataclass(frozen=True)
class MatchedCpe:
    cpe_string: str
    score: Fraction
    weight: int


@dataclass(frozen=True)
class MatchResult:
    software: SoftwareRecord
    matched: MatchedCpe | None
    trace: tuple[TraceEntry, ...] = ()
    error: str | None = None


@dataclass(frozen=True)
class VersionBound:
    value: str
    inclusive: bool


@dataclass(frozen=True)
class CpeCriterion:
    """An applicability pattern attached to a CVE.

    ``pattern`` attributes may be ANY; a literal pattern version pins an
    exact version while an ANY version delegates to the start/end bounds.
    """

    pattern: CpeWfn
    vulnerable: bool = True
    version_start: VersionBound | None = None
    version_end: VersionBound | None = None


_CVE_ID_DIGITS = 4


def _valid_cve_id(cve_id: str) -> bool:
    parts = cve_id.split("-")
    if len(parts) != 3 or parts[0] != "CVE":
        return False
    year, seq = parts[1], parts[2]
    return year.isdigit() and len(year) == _CVE_ID_DIGITS and seq.isdigit() and len(seq) >= 4


@dataclass(frozen=True)
class CveRecord:
    cve_id: str
    description: str = ""
    severity: Severity = Severity.UNKNOWN
    cvss_score: float | None = None
    criteria: tuple[CpeCriterion, ...] = ()

    def __post_init__(self) -> None:
        if not _valid_cve_id(self.cve_id):
            raise ValueError(f"malformed CVE id: {self.cve_id!r}")


@dataclass(frozen=True)
class MatchConfig:
    """Tunables of the matching stage.

    thresholds maps tier weight (1..4) to the minimum similarity score a
    candidate retrieved at that tier must reach; deprecated dictionary
    entries are excluded from retrieval unless include_deprecated is set.
    """

    thresholds: Mapping[int, Fraction] = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    include_deprecated: bool = False

    def __post_init__(self) -> None:
        for weight in TIER_WEIGHTS:
            if weight not in self.thresholds:
                raise ValueError(f"missing threshold for tier weight {weight}")
            value = self.thresholds[weight]
            if not 0 <= value <= 100:
                raise ValueError(f"threshold for weight {weight} outside [0, 100]: {value}")

    @classmethod
    def with_thresholds(
        cls,
        w1: float | Fraction | None = None,
        w2: float | Fraction | None = None,
        w3: float | Fraction | None = None,
        w4: float | Fraction | None = None,
        include_deprecated: bool = False,
    ) -> "MatchConfig":
        """Build a config overriding only the given per-tier thresholds."""
        thresholds = dict(DEFAULT_THRESHOLDS)
        for weight, value in zip(TIER_WEIGHTS, (w1, w2, w3, w4)):
            if value is not None:
                thresholds[weight] = Fraction(str(value)) if not isinstance(value, Fraction) else value
        return cls(thresholds=thresholds, include_deprecated=include_deprecated)


def build_entry(attrs: CpeWfn, title: str, *, deprecated: bool = False,
                title_norm: str, product_norm: str) -> CpeEntry:
    """Assemble a CpeEntry with its canonical string form precomputed."""
    return CpeEntry(
        attrs=attrs,
        title=title,
        title_norm=title_norm,
        product_norm=product_norm,
        deprecated=deprecated,
        cpe_string=format_cpe23(attrs),
    )


def validate_record(record: SoftwareRecord) -> SoftwareRecord:
    """Reject records whose name is empty or whitespace-only."""
    if not record.raw_name.strip():
        raise EmptyNameError(f"record {record.record_id} has an empty name")
    return record


def validate_snapshot(records: Sequence[SoftwareRecord]) -> Sequence[SoftwareRecord]:
    """Validate every record and reject record_id collisions in a snapshot."""
    seen: set[int] = set()
    for record in records:
        validate_record(record)
        if record.record_id in seen:
            raise DuplicateIdError(f"record_id {record.record_id} appears more than once")
        seen.add(record.record_id)
    return records
