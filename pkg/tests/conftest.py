from __future__ import annotations

from pathlib import Path

import pytest

from cpesleuth import Catalog, SourceDescriptor
from cpesleuth.ingest import load_cpe_dictionary, load_cves, load_inventory
from cpesleuth.model import SoftwareRecord

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def load_fixture_set(name: str) -> tuple[Catalog, list[SoftwareRecord]]:
    base = FIXTURES / name
    catalog = Catalog(":memory:")
    load_cpe_dictionary(catalog, SourceDescriptor(
        kind="cpe_dictionary", format="jsonl",
        uri_or_path=str(base / "cpe_dictionary.jsonl")))
    load_cves(catalog, SourceDescriptor(
        kind="cve_feed", format="jsonl", uri_or_path=str(base / "cves.jsonl")))
    inventory = load_inventory(SourceDescriptor(
        kind="inventory", format="osquery_json",
        uri_or_path=str(base / "inventory.json")))
    return catalog, inventory


@pytest.fixture()
def set1() -> tuple[Catalog, list[SoftwareRecord]]:
    catalog, inventory = load_fixture_set("set1")
    yield catalog, inventory
    catalog.close()


@pytest.fixture()
def set2() -> tuple[Catalog, list[SoftwareRecord]]:
    catalog, inventory = load_fixture_set("set2")
    yield catalog, inventory
    catalog.close()
