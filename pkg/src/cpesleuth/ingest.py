"""Feed ingestion: CPE dictionary, CVE data, and inventory snapshots.

Three source kinds feed the catalog, each with an official format and a
newline-delimited JSON fixture format so desk-scale tests never need the
multi-hundred-megabyte feeds:

- ``cpe_dictionary``: the official dictionary XML (parsed streaming) or
  jsonl records ``{"title", "cpe23", "deprecated"?}``.
- ``cve_feed``: NVD API 2.0 JSON or jsonl records
  ``{"cve_id", "description", "severity", "cvss", "criteria": [...]}``.
- ``inventory``: the osquery ``programs`` table dump (a JSON array of
  ``{"name", "version", "publisher"}`` rows) or one such object per line.

Ingestion reads local files only; fetching feeds to disk is a separate,
documented step so I/O failures never masquerade as parse failures.
"""

from __future__ import annotations

import json
import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterator

from .catalog import Catalog
from .cpe import parse_cpe23
from .errors import CpeParseError, FeedParseError, UnsupportedFormatError
from .model import (
    CpeCriterion,
    CpeEntry,
    CveRecord,
    Severity,
    SoftwareRecord,
    VersionBound,
    build_entry,
)
from .sanitize import derive_product_norm, derive_title_norm

logger = logging.getLogger(__name__)

KIND_FORMATS: dict[str, tuple[str, ...]] = {
    "cpe_dictionary": ("official_xml", "jsonl"),
    "cve_feed": ("nvd_json", "jsonl"),
    "inventory": ("osquery_json", "jsonl"),
}

_DICT_NS = "{http://cpe.mitre.org/dictionary/2.0}"
_EXT_NS = "{http://scap.nist.gov/schema/cpe-extension/2.3}"
_XML_LANG = "{http://www.w3.org/XML/1998/namespace}lang"


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class SourceDescriptor:
    """What to load and how; the format must be legal for the kind."""

    kind: str
    format: str
    uri_or_path: str
    fetched_at: str = field(default_factory=_utc_now)

    def __post_init__(self) -> None:
        legal = KIND_FORMATS.get(self.kind)
        if legal is None:
            raise UnsupportedFormatError(
                f"unknown source kind {self.kind!r}; expected one of {', '.join(KIND_FORMATS)}"
            )
        if self.format not in legal:
            raise UnsupportedFormatError(
                f"format {self.format!r} is not valid for kind {self.kind!r};"
                f" expected one of {', '.join(legal)}"
            )


def _require_kind(src: SourceDescriptor, kind: str) -> None:
    if src.kind != kind:
        raise ValueError(f"expected a {kind} source, got kind {src.kind!r}")


def _iter_jsonl(path: str) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as handle:
        for line_no, raw_line in enumerate(handle, start=1):
            line = raw_line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FeedParseError(f"bad JSON: {exc.msg}", path=path, line=line_no) from exc
            if not isinstance(record, dict):
                raise FeedParseError("record is not a JSON object", path=path, line=line_no)
            yield line_no, record


def _entry_from_parts(title: str, cpe23: str, deprecated: bool, *,
                      path: str, line: int | None) -> CpeEntry:
    try:
        attrs = parse_cpe23(cpe23)
    except CpeParseError as exc:
        raise FeedParseError(str(exc), path=path, line=line) from exc
    return build_entry(
        attrs,
        title,
        deprecated=deprecated,
        title_norm=derive_title_norm(title, attrs),
        product_norm=derive_product_norm(attrs),
    )


def _pick_title(item: ET.Element) -> str:
    titles = item.findall(_DICT_NS + "title")
    for title in titles:
        lang = title.get(_XML_LANG, "")
        if lang.lower().startswith("en"):
            return title.text or ""
    if titles:
        return titles[0].text or ""
    return ""


def _iter_dictionary_xml(path: str) -> Iterator[CpeEntry]:
    # Streaming parse: each cpe-item is converted and discarded so the
    # official multi-GB dictionary never lives in memory at once.
    try:
        for _event, elem in ET.iterparse(path, events=("end",)):
            if elem.tag != _DICT_NS + "cpe-item":
                continue
            cpe23_item = elem.find(_EXT_NS + "cpe23-item")
            name = cpe23_item.get("name") if cpe23_item is not None else None
            if name:
                deprecated = elem.get("deprecated", "false").lower() == "true"
                yield _entry_from_parts(_pick_title(elem), name, deprecated,
                                        path=path, line=None)
            elem.clear()
    except ET.ParseError as exc:
        line = exc.position[0] if exc.position else None
        raise FeedParseError(f"bad XML: {exc}", path=path, line=line) from exc


def _iter_dictionary(src: SourceDescriptor) -> Iterator[CpeEntry]:
    if src.format == "official_xml":
        yield from _iter_dictionary_xml(src.uri_or_path)
        return
    for line_no, record in _iter_jsonl(src.uri_or_path):
        cpe23 = record.get("cpe23")
        if not isinstance(cpe23, str):
            raise FeedParseError('missing "cpe23" field', path=src.uri_or_path, line=line_no)
        title = record.get("title", "")
        if not isinstance(title, str):
            raise FeedParseError('"title" must be text', path=src.uri_or_path, line=line_no)
        yield _entry_from_parts(title, cpe23, bool(record.get("deprecated", False)),
                                path=src.uri_or_path, line=line_no)


def load_cpe_dictionary(catalog: Catalog, src: SourceDescriptor) -> int:
    """Parse and upsert dictionary entries; returns the number read."""
    _require_kind(src, "cpe_dictionary")
    entries = list(_iter_dictionary(src))
    catalog.upsert_cpe_entries(entries)
    catalog.record_source(src.kind, src.format, src.uri_or_path, src.fetched_at, len(entries))
    logger.info("loaded %d dictionary entries from %s", len(entries), src.uri_or_path)
    return len(entries)


def _version_bound(data: dict, including_key: str, excluding_key: str) -> VersionBound | None:
    if data.get(including_key) is not None:
        return VersionBound(str(data[including_key]), inclusive=True)
    if data.get(excluding_key) is not None:
        return VersionBound(str(data[excluding_key]), inclusive=False)
    return None


def _criterion_from_match(match: dict, *, path: str, line: int | None) -> CpeCriterion:
    criteria_string = match.get("criteria")
    if not isinstance(criteria_string, str):
        raise FeedParseError("cpeMatch entry has no criteria string", path=path, line=line)
    try:
        pattern = parse_cpe23(criteria_string)
    except CpeParseError as exc:
        raise FeedParseError(str(exc), path=path, line=line) from exc
    return CpeCriterion(
        pattern=pattern,
        vulnerable=bool(match.get("vulnerable", True)),
        version_start=_version_bound(match, "versionStartIncluding", "versionStartExcluding"),
        version_end=_version_bound(match, "versionEndIncluding", "versionEndExcluding"),
    )


def _severity_of(severity_text: object, score: object) -> Severity:
    if isinstance(severity_text, str) and severity_text.strip():
        return Severity.normalize(severity_text)
    return Severity.from_score(score if isinstance(score, (int, float)) else None)


def _cve_from_nvd(cve: dict, *, path: str) -> CveRecord:
    description = ""
    for item in cve.get("descriptions") or ():
        if isinstance(item, dict) and item.get("lang") == "en":
            description = str(item.get("value", ""))
            break
    metrics = cve.get("metrics") or {}
    score: float | None = None
    severity_text: str | None = None
    for key in ("cvssMetricV31", "cvssMetricV30"):
        items = metrics.get(key)
        if items:
            data = items[0].get("cvssData") or {}
            score = data.get("baseScore")
            severity_text = data.get("baseSeverity")
            break
    else:
        items = metrics.get("cvssMetricV2")
        if items:
            data = items[0].get("cvssData") or {}
            score = data.get("baseScore")
            severity_text = items[0].get("baseSeverity")
    criteria = []
    for config in cve.get("configurations") or ():
        if not isinstance(config, dict):
            continue
        for node in config.get("nodes") or ():
            if not isinstance(node, dict):
                continue
            for match in node.get("cpeMatch") or ():
                if isinstance(match, dict):
                    criteria.append(_criterion_from_match(match, path=path, line=None))
    try:
        return CveRecord(
            cve_id=str(cve.get("id", "")),
            description=description,
            severity=_severity_of(severity_text, score),
            cvss_score=float(score) if score is not None else None,
            criteria=tuple(criteria),
        )
    except ValueError as exc:
        raise FeedParseError(str(exc), path=path) from exc


def _iter_cves_nvd(path: str) -> Iterator[CveRecord]:
    with open(path, encoding="utf-8") as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FeedParseError(f"bad JSON: {exc.msg}", path=path, line=exc.lineno) from exc
    vulnerabilities = payload.get("vulnerabilities") if isinstance(payload, dict) else None
    if not isinstance(vulnerabilities, list):
        raise FeedParseError('missing "vulnerabilities" array', path=path)
    for index, wrapper in enumerate(vulnerabilities):
        cve = wrapper.get("cve") if isinstance(wrapper, dict) else None
        if not isinstance(cve, dict):
            raise FeedParseError(f"vulnerability {index} has no cve object", path=path)
        yield _cve_from_nvd(cve, path=path)


def _cve_from_jsonl(record: dict, *, path: str, line: int) -> CveRecord:
    criteria = []
    for item in record.get("criteria") or ():
        if not isinstance(item, dict):
            raise FeedParseError("criterion is not a JSON object", path=path, line=line)
        match = dict(item)
        cpe23 = match.pop("cpe23", None)
        if not isinstance(cpe23, str):
            raise FeedParseError("criterion missing cpe23", path=path, line=line)
        match["criteria"] = cpe23
        criteria.append(_criterion_from_match(match, path=path, line=line))
    score = record.get("cvss")
    try:
        return CveRecord(
            cve_id=str(record.get("cve_id", "")),
            description=str(record.get("description", "")),
            severity=_severity_of(record.get("severity"), score),
            cvss_score=float(score) if score is not None else None,
            criteria=tuple(criteria),
        )
    except ValueError as exc:
        raise FeedParseError(str(exc), path=path, line=line) from exc


def load_cves(catalog: Catalog, src: SourceDescriptor) -> int:
    """Parse and upsert CVE records; returns the number read."""
    _require_kind(src, "cve_feed")
    if src.format == "nvd_json":
        records = list(_iter_cves_nvd(src.uri_or_path))
    else:
        records = [
            _cve_from_jsonl(record, path=src.uri_or_path, line=line_no)
            for line_no, record in _iter_jsonl(src.uri_or_path)
        ]
    catalog.upsert_cves(records)
    catalog.record_source(src.kind, src.format, src.uri_or_path, src.fetched_at, len(records))
    logger.info("loaded %d CVE records from %s", len(records), src.uri_or_path)
    return len(records)


def load_inventory(src: SourceDescriptor) -> list[SoftwareRecord]:
    """Read an inventory snapshot; rows with empty names are skipped."""
    _require_kind(src, "inventory")
    path = src.uri_or_path
    if src.format == "osquery_json":
        with open(path, encoding="utf-8") as handle:
            try:
                rows = json.load(handle)
            except json.JSONDecodeError as exc:
                raise FeedParseError(f"bad JSON: {exc.msg}", path=path, line=exc.lineno) from exc
        if not isinstance(rows, list):
            raise FeedParseError("inventory must be a JSON array of rows", path=path)
        numbered = list(enumerate(rows, start=1))
    else:
        numbered = list(_iter_jsonl(path))
    records = []
    skipped = 0
    for line_no, row in numbered:
        if not isinstance(row, dict):
            raise FeedParseError("inventory row is not a JSON object", path=path, line=line_no)
        name = str(row.get("name") or "")
        if not name.strip():
            skipped += 1
            continue
        records.append(
            SoftwareRecord(
                record_id=len(records) + 1,
                raw_name=name,
                raw_version=str(row.get("version") or ""),
                raw_vendor=str(row.get("publisher") or ""),
                source_host=str(row.get("host") or ""),
            )
        )
    if skipped:
        logger.warning("skipped %d inventory rows with empty names in %s", skipped, path)
    return records


def store_inventory(catalog: Catalog, src: SourceDescriptor) -> int:
    """Load an inventory snapshot and persist it, replacing the previous one."""
    records = load_inventory(src)
    count = catalog.replace_inventory(records)
    catalog.record_source(src.kind, src.format, src.uri_or_path, src.fetched_at, count)
    return count
