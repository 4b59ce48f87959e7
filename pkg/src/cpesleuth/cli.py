"""Command-line surface: ingest feeds, match, map, benchmark, report.

The catalog location is resolved from ``--catalog``, then the
``CPESLEUTH_DATA`` environment variable, then a per-user data directory.
Writes to the catalog are serialized through a sibling lock file.  Exit
codes: 0 on success, 1 on any runtime error, 2 on usage errors.
"""

from __future__ import annotations

import functools
import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator

import click
from filelock import FileLock

from .catalog import Catalog
from .compare import emit_report, run_comparison, two_decimals
from .cvemap import build_findings
from .errors import CpeSleuthError
from .ingest import (
    SourceDescriptor,
    load_cpe_dictionary,
    load_cves,
    load_inventory,
    store_inventory,
)
from .matching import match_inventory, match_software
from .model import MatchConfig, MatchResult
from .sanitize import DEFAULT_RULES, SanitizerRules, load_rules, sanitize_record


@dataclass
class CliConfig:
    catalog_path: Path
    match_config: MatchConfig
    rules: SanitizerRules
    output_format: str = "json"


def _default_catalog_path() -> Path:
    env = os.environ.get("XDG_DATA_HOME")
    base = Path(env) if env else Path.home() / ".local" / "share"
    return base / "cpesleuth" / "catalog.sqlite"


def _reports_errors(func: Callable[..., object]) -> Callable[..., object]:
    @functools.wraps(func)
    def wrapper(*args: object, **kwargs: object) -> object:
        try:
            return func(*args, **kwargs)
        except (CpeSleuthError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


@contextmanager
def _catalog(cfg: CliConfig) -> Iterator[Catalog]:
    cfg.catalog_path.parent.mkdir(parents=True, exist_ok=True)
    catalog = Catalog(cfg.catalog_path)
    try:
        yield catalog
    finally:
        catalog.close()


@contextmanager
def _locked_catalog(cfg: CliConfig) -> Iterator[Catalog]:
    # Single writer per catalog; readers go through _catalog.
    cfg.catalog_path.parent.mkdir(parents=True, exist_ok=True)
    with FileLock(str(cfg.catalog_path) + ".lock"):
        catalog = Catalog(cfg.catalog_path)
        try:
            yield catalog
        finally:
            catalog.close()


@click.group()
@click.option(
    "--catalog",
    "catalog_path",
    type=click.Path(dir_okay=False, path_type=Path),
    envvar="CPESLEUTH_DATA",
    default=None,
    help="Catalog database file (default: $CPESLEUTH_DATA, then the user data directory).",
)
@click.option("--threshold-w1", type=float, default=None,
              help="Similarity threshold for tier weight 1 (default 70).")
@click.option("--threshold-w2", type=float, default=None,
              help="Similarity threshold for tier weight 2 (default 67).")
@click.option("--threshold-w3", type=float, default=None,
              help="Similarity threshold for tier weight 3 (default 64).")
@click.option("--threshold-w4", type=float, default=None,
              help="Similarity threshold for tier weight 4 (default 60).")
@click.option("--include-deprecated", is_flag=True,
              help="Let deprecated dictionary entries compete in matching.")
@click.option("--rules", "rules_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Sanitizer token-list file overriding the defaults.")
@click.pass_context
def main(
    ctx: click.Context,
    catalog_path: Path | None,
    threshold_w1: float | None,
    threshold_w2: float | None,
    threshold_w3: float | None,
    threshold_w4: float | None,
    include_deprecated: bool,
    rules_path: str | None,
) -> None:
    """Map installed software to CPE identifiers and known CVEs."""
    try:
        config = MatchConfig.with_thresholds(
            threshold_w1, threshold_w2, threshold_w3, threshold_w4,
            include_deprecated=include_deprecated,
        )
        rules = load_rules(rules_path) if rules_path else DEFAULT_RULES
    except (CpeSleuthError, ValueError) as exc:
        raise click.UsageError(str(exc)) from exc
    ctx.obj = CliConfig(
        catalog_path=catalog_path or _default_catalog_path(),
        match_config=config,
        rules=rules,
    )


@main.group()
def ingest() -> None:
    """Load a feed or snapshot into the catalog."""


@ingest.command("cpe")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "format_name", type=click.Choice(["jsonl", "official_xml"]),
              default="jsonl", show_default=True)
@click.pass_obj
@_reports_errors
def ingest_cpe(cfg: CliConfig, input_path: str, format_name: str) -> None:
    """Load CPE dictionary entries."""
    src = SourceDescriptor(kind="cpe_dictionary", format=format_name, uri_or_path=input_path)
    with _locked_catalog(cfg) as catalog:
        count = load_cpe_dictionary(catalog, src)
    click.echo(f"loaded {count} dictionary entries")


@ingest.command("cve")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "format_name", type=click.Choice(["jsonl", "nvd_json"]),
              default="jsonl", show_default=True)
@click.pass_obj
@_reports_errors
def ingest_cve(cfg: CliConfig, input_path: str, format_name: str) -> None:
    """Load CVE records."""
    src = SourceDescriptor(kind="cve_feed", format=format_name, uri_or_path=input_path)
    with _locked_catalog(cfg) as catalog:
        count = load_cves(catalog, src)
    click.echo(f"loaded {count} CVE records")


@ingest.command("inventory")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "format_name", type=click.Choice(["osquery_json", "jsonl"]),
              default="osquery_json", show_default=True)
@click.pass_obj
@_reports_errors
def ingest_inventory(cfg: CliConfig, input_path: str, format_name: str) -> None:
    """Load an inventory snapshot, replacing the stored one."""
    src = SourceDescriptor(kind="inventory", format=format_name, uri_or_path=input_path)
    with _locked_catalog(cfg) as catalog:
        count = store_inventory(catalog, src)
    click.echo(f"loaded {count} inventory records")


def _print_result(cfg: CliConfig, result: MatchResult, explain: bool) -> None:
    record = result.software
    label = f"{record.raw_name} {record.raw_version}".strip()
    if result.matched is not None:
        matched = result.matched
        click.echo(
            f"{label} -> {matched.cpe_string}"
            f" (score {two_decimals(matched.score)}, weight {matched.weight})"
        )
    elif result.error is not None:
        click.echo(f"{label} -> no match ({result.error})")
    else:
        click.echo(f"{label} -> no match")
    if not explain:
        return
    if result.error is None:
        s = sanitize_record(record, cfg.rules)
        click.echo(f"  sanitized name: {s.name}")
        click.echo(f"  sanitized vendor: {s.vendor}")
        click.echo(f"  sanitized version: {s.version}")
    for trace in result.trace:
        status = "pass" if trace.passed_threshold else "fail"
        click.echo(
            f"  candidate {trace.cpe_string} weight {trace.weight}"
            f" score {two_decimals(trace.score)} {status}"
        )


@main.command()
@click.option("--inventory", "inventory_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Inventory snapshot to store before matching.")
@click.option("--format", "format_name", type=click.Choice(["osquery_json", "jsonl"]),
              default="osquery_json", show_default=True)
@click.option("--explain", is_flag=True,
              help="Print sanitized fields and every scored candidate.")
@click.pass_obj
@_reports_errors
def match(cfg: CliConfig, inventory_path: str | None, format_name: str, explain: bool) -> None:
    """Match inventory records to CPE identifiers."""
    if inventory_path is not None:
        src = SourceDescriptor(kind="inventory", format=format_name, uri_or_path=inventory_path)
        with _locked_catalog(cfg) as catalog:
            store_inventory(catalog, src)
    with _catalog(cfg) as catalog:
        for record in catalog.inventory():
            result = match_software(record, catalog, cfg.rules, cfg.match_config)
            _print_result(cfg, result, explain)


@main.command("map")
@click.pass_obj
@_reports_errors
def map_cves(cfg: CliConfig) -> None:
    """List applicable CVEs for each matched inventory record."""
    with _catalog(cfg) as catalog:
        results = match_inventory(catalog.inventory(), catalog, cfg.rules, cfg.match_config)
        findings = build_findings(results, catalog)
        for finding in findings:
            record = finding.software
            ids = ", ".join(hit.cve_id for hit in finding.cves)
            label = f"{record.raw_name} {record.raw_version}".strip()
            click.echo(f"{label} -> {finding.cpe_string}: {ids}")
        click.echo(f"{len(findings)} vulnerable of {len(results)} records")


def _emit(payload: bytes, out_path: str | None) -> None:
    if out_path is None:
        click.echo(payload.decode("utf-8"), nl=False)
        return
    Path(out_path).write_bytes(payload)
    click.echo(f"wrote {out_path}")


def _render_report(cfg: CliConfig, format_name: str) -> bytes:
    with _catalog(cfg) as catalog:
        inventory = catalog.inventory()
        report = run_comparison(inventory, catalog, cfg.rules, cfg.match_config)
        results = match_inventory(inventory, catalog, cfg.rules, cfg.match_config)
        findings = build_findings(results, catalog)
        return emit_report(report, findings, format_name)


@main.command()
@click.option("--format", "format_name", type=click.Choice(["json", "csv", "table"]),
              default="table", show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.pass_obj
@_reports_errors
def scan(cfg: CliConfig, format_name: str, out_path: str | None) -> None:
    """Match, map, and report over the stored inventory in one pass."""
    _emit(_render_report(cfg, format_name), out_path)


@main.command()
@click.option("--format", "format_name", type=click.Choice(["json", "csv", "table"]),
              default="json", show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.pass_obj
@_reports_errors
def report(cfg: CliConfig, format_name: str, out_path: str | None) -> None:
    """Serialize findings and detection rates for the stored inventory."""
    cfg.output_format = format_name
    _emit(_render_report(cfg, format_name), out_path)


@main.command()
@click.option("--fixtures", "fixtures_dir", required=True,
              type=click.Path(exists=True, file_okay=False),
              help="Directory with cpe_dictionary.jsonl, cves.jsonl, inventory.json.")
@click.pass_obj
@_reports_errors
def bench(cfg: CliConfig, fixtures_dir: str) -> None:
    """Run both strategies over a fixture directory (in-memory catalog)."""
    base = Path(fixtures_dir)
    with Catalog(":memory:") as catalog:
        load_cpe_dictionary(catalog, SourceDescriptor(
            kind="cpe_dictionary", format="jsonl",
            uri_or_path=str(base / "cpe_dictionary.jsonl")))
        load_cves(catalog, SourceDescriptor(
            kind="cve_feed", format="jsonl", uri_or_path=str(base / "cves.jsonl")))
        inventory = load_inventory(SourceDescriptor(
            kind="inventory", format="osquery_json",
            uri_or_path=str(base / "inventory.json")))
        report_data = run_comparison(inventory, catalog, cfg.rules, cfg.match_config)
        click.echo(emit_report(report_data, [], "table").decode("utf-8"), nl=False)


@main.command()
@click.pass_obj
@_reports_errors
def compact(cfg: CliConfig) -> None:
    """Rebuild derived fields and reclaim space in the catalog file."""
    with _locked_catalog(cfg) as catalog:
        catalog.compact()
    click.echo("catalog compacted")


if __name__ == "__main__":
    main()
