"""Persistent catalog of CPE entries, CVE records, and inventory snapshots.

Storage is a single embedded SQLite file (or ``:memory:``).  Query-side
lookups never run SQL: a snapshot of all entries is loaded once and the
three retrieval indexes (title_norm, (product_norm, vendor), version) are
rebuilt in memory, so lookup results depend only on stored entries.
Writes invalidate the snapshot; the next query rebuilds it.

Retrieval tiers, strictest first:

====  =========================================================
 1    title_norm, vendor, and version all equal
 2    product_norm, vendor, and version all equal
 3    version equal, title/product prefix-related (relaxed)
 4    title_norm and version equal (vendor-free fallback)
====  =========================================================

Tiers 1 and 2 are skipped when the sanitized vendor is empty.  Tier 3's
relaxation is configurable: ``tier3_mode="both"`` (default) requires the
title relation and the product prefix together; ``"any"`` accepts either,
which also lets a bare product-name equality through and is therefore
prone to vendor aliasing.
"""

from __future__ import annotations

import logging
import sqlite3
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .cpe import parse_cpe23
from .errors import CatalogError
from .model import (
    CpeCriterion,
    CpeEntry,
    CveRecord,
    MatchCandidate,
    SanitizedSoftware,
    Severity,
    SoftwareRecord,
    VersionBound,
    build_entry,
)
from .sanitize import vendor_key

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

TIER3_BOTH = "both"
TIER3_ANY = "any"

_SCHEMA = """
CREATE TABLE IF NOT EXISTS meta (
    key TEXT PRIMARY KEY,
    value TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS cpe (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    cpe_string TEXT NOT NULL UNIQUE,
    title TEXT NOT NULL DEFAULT '',
    title_norm TEXT NOT NULL DEFAULT '',
    product_norm TEXT NOT NULL DEFAULT '',
    deprecated INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS nvd_cves (
    cve_id TEXT PRIMARY KEY,
    description TEXT NOT NULL DEFAULT '',
    severity TEXT NOT NULL DEFAULT 'UNKNOWN',
    cvss_score REAL
);
CREATE TABLE IF NOT EXISTS cve_criteria (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    cve_id TEXT NOT NULL,
    pattern TEXT NOT NULL,
    vulnerable INTEGER NOT NULL DEFAULT 1,
    version_start TEXT,
    version_start_inclusive INTEGER,
    version_end TEXT,
    version_end_inclusive INTEGER
);
CREATE INDEX IF NOT EXISTS idx_criteria_cve ON cve_criteria (cve_id);
CREATE TABLE IF NOT EXISTS programs (
    record_id INTEGER PRIMARY KEY,
    raw_name TEXT NOT NULL,
    raw_version TEXT NOT NULL DEFAULT '',
    raw_vendor TEXT NOT NULL DEFAULT '',
    source_host TEXT NOT NULL DEFAULT ''
);
CREATE TABLE IF NOT EXISTS sources (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    kind TEXT NOT NULL,
    format TEXT NOT NULL,
    uri_or_path TEXT NOT NULL,
    fetched_at TEXT NOT NULL,
    loaded INTEGER NOT NULL
);
"""


class _Snapshot:
    """Immutable query view: all entries plus the three retrieval indexes."""

    def __init__(self, entries: Sequence[CpeEntry], cves: Sequence[CveRecord],
                 inventory: Sequence[SoftwareRecord]):
        self.entries = tuple(entries)
        self.cves = tuple(cves)
        self.inventory = tuple(inventory)
        self.by_title: dict[str, list[int]] = {}
        self.by_product_vendor: dict[tuple[str, object], list[int]] = {}
        self.by_version: dict[object, list[int]] = {}
        for i, entry in enumerate(self.entries):
            self.by_title.setdefault(entry.title_norm, []).append(i)
            self.by_product_vendor.setdefault((entry.product_norm, entry.vendor), []).append(i)
            self.by_version.setdefault(entry.version, []).append(i)
        # Criteria whose vendor and product are both literal can be bucketed;
        # anything with an ANY side must be checked against every query.
        self.cves_by_vendor_product: dict[tuple[str, str], list[int]] = {}
        self.cves_wildcard: list[int] = []
        for i, cve in enumerate(self.cves):
            buckets: set[tuple[str, str]] = set()
            wildcard = False
            for criterion in cve.criteria:
                vendor = criterion.pattern.vendor
                product = criterion.pattern.product
                if isinstance(vendor, str) and isinstance(product, str):
                    buckets.add((vendor, product))
                else:
                    wildcard = True
            for key in buckets:
                self.cves_by_vendor_product.setdefault(key, []).append(i)
            if wildcard:
                self.cves_wildcard.append(i)


def _title_relation(title_norm: str, name: str) -> bool:
    # Prefix containment in either direction; empty strings never relate.
    if not title_norm or not name:
        return False
    return title_norm.startswith(name) or name.startswith(title_norm)


def _product_relation(product_norm: str, name: str) -> bool:
    if not product_norm or not name:
        return False
    return product_norm.startswith(name)


class Catalog:
    """Open (creating if necessary) the catalog stored at ``path``."""

    def __init__(self, path: str | Path = ":memory:"):
        self.path = str(path)
        try:
            self._conn = sqlite3.connect(self.path)
        except sqlite3.Error as exc:
            raise CatalogError(f"cannot open catalog at {self.path}: {exc}") from exc
        self._conn.executescript(_SCHEMA)
        row = self._conn.execute("SELECT value FROM meta WHERE key = 'schema_version'").fetchone()
        if row is None:
            self._conn.execute(
                "INSERT INTO meta (key, value) VALUES ('schema_version', ?)",
                (str(SCHEMA_VERSION),),
            )
            self._conn.commit()
        elif int(row[0]) != SCHEMA_VERSION:
            self._conn.close()
            raise CatalogError(
                f"catalog {self.path} has schema version {row[0]}, expected {SCHEMA_VERSION}"
            )
        self._snapshot: _Snapshot | None = None

    def close(self) -> None:
        self._conn.close()

    def __enter__(self) -> "Catalog":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    # -- write side ---------------------------------------------------------

    def upsert_cpe_entries(self, entries: Iterable[CpeEntry]) -> int:
        """Insert entries, keyed by their full attribute tuple; returns new count."""
        new = 0
        for entry in entries:
            cursor = self._conn.execute(
                "INSERT OR IGNORE INTO cpe (cpe_string, title, title_norm, product_norm, deprecated)"
                " VALUES (?, ?, ?, ?, ?)",
                (entry.cpe_string, entry.title, entry.title_norm,
                 entry.product_norm, int(entry.deprecated)),
            )
            new += cursor.rowcount
        self._conn.commit()
        self._snapshot = None
        return new

    def upsert_cves(self, records: Iterable[CveRecord]) -> int:
        """Insert or replace CVE records by id; returns count of new ids."""
        new = 0
        for record in records:
            existed = self._conn.execute(
                "SELECT 1 FROM nvd_cves WHERE cve_id = ?", (record.cve_id,)
            ).fetchone()
            self._conn.execute(
                "INSERT OR REPLACE INTO nvd_cves (cve_id, description, severity, cvss_score)"
                " VALUES (?, ?, ?, ?)",
                (record.cve_id, record.description, record.severity.value, record.cvss_score),
            )
            self._conn.execute("DELETE FROM cve_criteria WHERE cve_id = ?", (record.cve_id,))
            for criterion in record.criteria:
                from .cpe import format_cpe23

                start = criterion.version_start
                end = criterion.version_end
                self._conn.execute(
                    "INSERT INTO cve_criteria (cve_id, pattern, vulnerable, version_start,"
                    " version_start_inclusive, version_end, version_end_inclusive)"
                    " VALUES (?, ?, ?, ?, ?, ?, ?)",
                    (
                        record.cve_id,
                        format_cpe23(criterion.pattern),
                        int(criterion.vulnerable),
                        start.value if start else None,
                        int(start.inclusive) if start else None,
                        end.value if end else None,
                        int(end.inclusive) if end else None,
                    ),
                )
            if not existed:
                new += 1
        self._conn.commit()
        self._snapshot = None
        return new

    def replace_inventory(self, records: Iterable[SoftwareRecord]) -> int:
        self._conn.execute("DELETE FROM programs")
        count = 0
        for record in records:
            self._conn.execute(
                "INSERT INTO programs (record_id, raw_name, raw_version, raw_vendor, source_host)"
                " VALUES (?, ?, ?, ?, ?)",
                (record.record_id, record.raw_name, record.raw_version,
                 record.raw_vendor, record.source_host),
            )
            count += 1
        self._conn.commit()
        self._snapshot = None
        return count

    def record_source(self, kind: str, format_name: str, uri_or_path: str,
                      fetched_at: str, loaded: int) -> None:
        self._conn.execute(
            "INSERT INTO sources (kind, format, uri_or_path, fetched_at, loaded)"
            " VALUES (?, ?, ?, ?, ?)",
            (kind, format_name, uri_or_path, fetched_at, loaded),
        )
        self._conn.commit()

    def compact(self) -> None:
        """Rebuild derived fields and persistent structures in place."""
        from .sanitize import derive_product_norm, derive_title_norm

        rows = self._conn.execute("SELECT id, cpe_string, title FROM cpe").fetchall()
        for row_id, cpe_string, title in rows:
            attrs = parse_cpe23(cpe_string)
            self._conn.execute(
                "UPDATE cpe SET title_norm = ?, product_norm = ? WHERE id = ?",
                (derive_title_norm(title, attrs), derive_product_norm(attrs), row_id),
            )
        self._conn.commit()
        self._conn.execute("VACUUM")
        self._snapshot = None

    # -- read side ----------------------------------------------------------

    def _load_snapshot(self) -> _Snapshot:
        if self._snapshot is not None:
            return self._snapshot
        entries = []
        for cpe_string, title, title_norm, product_norm, deprecated in self._conn.execute(
            "SELECT cpe_string, title, title_norm, product_norm, deprecated FROM cpe ORDER BY id"
        ):
            entries.append(
                build_entry(
                    parse_cpe23(cpe_string),
                    title,
                    deprecated=bool(deprecated),
                    title_norm=title_norm,
                    product_norm=product_norm,
                )
            )
        criteria_by_cve: dict[str, list[CpeCriterion]] = {}
        for cve_id, pattern, vulnerable, vs, vsi, ve, vei in self._conn.execute(
            "SELECT cve_id, pattern, vulnerable, version_start, version_start_inclusive,"
            " version_end, version_end_inclusive FROM cve_criteria ORDER BY id"
        ):
            criteria_by_cve.setdefault(cve_id, []).append(
                CpeCriterion(
                    pattern=parse_cpe23(pattern),
                    vulnerable=bool(vulnerable),
                    version_start=VersionBound(vs, bool(vsi)) if vs is not None else None,
                    version_end=VersionBound(ve, bool(vei)) if ve is not None else None,
                )
            )
        cves = []
        for cve_id, description, severity, cvss_score in self._conn.execute(
            "SELECT cve_id, description, severity, cvss_score FROM nvd_cves ORDER BY cve_id"
        ):
            cves.append(
                CveRecord(
                    cve_id=cve_id,
                    description=description,
                    severity=Severity.normalize(severity),
                    cvss_score=cvss_score,
                    criteria=tuple(criteria_by_cve.get(cve_id, ())),
                )
            )
        inventory = [
            SoftwareRecord(record_id=rid, raw_name=name, raw_version=version,
                           raw_vendor=vendor, source_host=host)
            for rid, name, version, vendor, host in self._conn.execute(
                "SELECT record_id, raw_name, raw_version, raw_vendor, source_host"
                " FROM programs ORDER BY record_id"
            )
        ]
        self._snapshot = _Snapshot(entries, cves, inventory)
        return self._snapshot

    def entries(self) -> tuple[CpeEntry, ...]:
        return self._load_snapshot().entries

    def cve_records(self) -> tuple[CveRecord, ...]:
        return self._load_snapshot().cves

    def inventory(self) -> list[SoftwareRecord]:
        return list(self._load_snapshot().inventory)

    def sources(self) -> list[tuple[str, str, str, str, int]]:
        return [
            tuple(row)
            for row in self._conn.execute(
                "SELECT kind, format, uri_or_path, fetched_at, loaded FROM sources ORDER BY id"
            )
        ]

    def candidate_cves(self, vendor: object, product: object) -> list[CveRecord]:
        """CVEs whose criteria could name this vendor/product, plus wildcards."""
        snapshot = self._load_snapshot()
        indexes: list[int] = []
        if isinstance(vendor, str) and isinstance(product, str):
            indexes.extend(snapshot.cves_by_vendor_product.get((vendor, product), ()))
        indexes.extend(snapshot.cves_wildcard)
        return [snapshot.cves[i] for i in sorted(set(indexes))]

    def tier_candidates(self, s: SanitizedSoftware, tier: int, *,
                        relaxed: bool = True, tier3_mode: str = TIER3_BOTH) -> list[CpeEntry]:
        """Entries satisfying one tier predicate, in stored order.

        ``relaxed=False`` turns tier 3's prefix relations into equalities,
        which is the exact-match baseline behavior.
        """
        snapshot = self._load_snapshot()
        name, version = s.name, s.version
        key = vendor_key(s.vendor)
        if tier == 1:
            if not s.vendor:
                return []
            rows = snapshot.by_title.get(name, ())
            return [
                snapshot.entries[i]
                for i in rows
                if snapshot.entries[i].vendor == key and snapshot.entries[i].version == version
            ]
        if tier == 2:
            if not s.vendor:
                return []
            rows = snapshot.by_product_vendor.get((name, key), ())
            return [snapshot.entries[i] for i in rows if snapshot.entries[i].version == version]
        if tier == 3:
            rows = snapshot.by_version.get(version, ())
            picked = []
            for i in rows:
                entry = snapshot.entries[i]
                if relaxed:
                    title_ok = _title_relation(entry.title_norm, name)
                    product_ok = _product_relation(entry.product_norm, name)
                else:
                    title_ok = entry.title_norm == name
                    product_ok = entry.product_norm == name
                if tier3_mode == TIER3_ANY:
                    if title_ok or product_ok:
                        picked.append(entry)
                elif title_ok and product_ok:
                    picked.append(entry)
            return picked
        if tier == 4:
            rows = snapshot.by_title.get(name, ())
            return [snapshot.entries[i] for i in rows if snapshot.entries[i].version == version]
        raise ValueError(f"tier must be 1..4, got {tier}")

    def union_candidates(self, s: SanitizedSoftware, *, include_deprecated: bool = False,
                         tier3_mode: str = TIER3_BOTH) -> list[MatchCandidate]:
        """Union over tiers 1-4, each entry kept at its lowest matching weight,
        ordered by weight then cpe_string."""
        seen: dict[str, MatchCandidate] = {}
        for weight in (1, 2, 3, 4):
            for entry in self.tier_candidates(s, weight, tier3_mode=tier3_mode):
                if entry.deprecated and not include_deprecated:
                    continue
                if entry.cpe_string not in seen:
                    seen[entry.cpe_string] = MatchCandidate(entry=entry, weight=weight)
        return sorted(seen.values(), key=lambda c: (c.weight, c.entry.cpe_string))

    def exact_candidates(self, s: SanitizedSoftware, *, include_deprecated: bool = False,
                         tier3_mode: str = TIER3_BOTH) -> list[MatchCandidate]:
        """The baseline's view: same four tiers, all relations exact."""
        seen: dict[str, MatchCandidate] = {}
        for weight in (1, 2, 3, 4):
            for entry in self.tier_candidates(s, weight, relaxed=False, tier3_mode=tier3_mode):
                if entry.deprecated and not include_deprecated:
                    continue
                if entry.cpe_string not in seen:
                    seen[entry.cpe_string] = MatchCandidate(entry=entry, weight=weight)
        return sorted(seen.values(), key=lambda c: (c.weight, c.entry.cpe_string))


def iter_tiers() -> Iterator[int]:
    return iter((1, 2, 3, 4))
