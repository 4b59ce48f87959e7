from __future__ import annotations

from fractions import Fraction

import pytest

from cpesleuth.cpe import parse_cpe23
from cpesleuth.errors import DuplicateIdError, EmptyNameError
from cpesleuth.model import (
    DEFAULT_THRESHOLDS,
    TIER_WEIGHTS,
    CveRecord,
    MatchConfig,
    Severity,
    SoftwareRecord,
    build_entry,
    validate_record,
    validate_snapshot,
)


class TestSeverityFromScore:
    @pytest.mark.parametrize(
        ("score", "expected"),
        [
            (None, Severity.UNKNOWN),
            (-0.1, Severity.UNKNOWN),
            (10.1, Severity.UNKNOWN),
            (0.0, Severity.NONE),
            (0.1, Severity.LOW),
            (3.9, Severity.LOW),
            (4.0, Severity.MEDIUM),
            (6.9, Severity.MEDIUM),
            (7.0, Severity.HIGH),
            (8.9, Severity.HIGH),
            (9.0, Severity.CRITICAL),
            (10.0, Severity.CRITICAL),
        ],
    )
    def test_band_edges(self, score: float | None, expected: Severity) -> None:
        assert Severity.from_score(score) is expected


class TestSeverityNormalize:
    def test_exact_names(self) -> None:
        for member in Severity:
            assert Severity.normalize(member.value) is member

    def test_case_and_whitespace(self) -> None:
        assert Severity.normalize(" high ") is Severity.HIGH
        assert Severity.normalize("critical") is Severity.CRITICAL

    def test_unknown_inputs(self) -> None:
        assert Severity.normalize(None) is Severity.UNKNOWN
        assert Severity.normalize("") is Severity.UNKNOWN
        assert Severity.normalize("SEVERE") is Severity.UNKNOWN


class TestCveRecord:
    def test_valid_ids(self) -> None:
        CveRecord(cve_id="CVE-2018-20250")
        CveRecord(cve_id="CVE-1999-0001")
        CveRecord(cve_id="CVE-2021-3456789")

    @pytest.mark.parametrize(
        "bad",
        ["cve-2018-20250", "CVE-18-20250", "CVE-2018-1", "CVE-2018", "2018-20250", ""],
    )
    def test_malformed_ids_rejected(self, bad: str) -> None:
        with pytest.raises(ValueError):
            CveRecord(cve_id=bad)


class TestMatchConfig:
    def test_defaults(self) -> None:
        config = MatchConfig()
        assert dict(config.thresholds) == dict(DEFAULT_THRESHOLDS)
        assert config.include_deprecated is False
        assert DEFAULT_THRESHOLDS[1] == Fraction(70)
        assert DEFAULT_THRESHOLDS[4] == Fraction(60)

    def test_with_thresholds_partial_override(self) -> None:
        config = MatchConfig.with_thresholds(w2=65.5, include_deprecated=True)
        assert config.thresholds[1] == Fraction(70)
        assert config.thresholds[2] == Fraction("65.5")
        assert config.include_deprecated is True

    def test_float_override_is_exact(self) -> None:
        config = MatchConfig.with_thresholds(w1=66.7)
        assert config.thresholds[1] == Fraction(667, 10)

    def test_missing_weight_rejected(self) -> None:
        with pytest.raises(ValueError):
            MatchConfig(thresholds={1: Fraction(70)})

    def test_out_of_range_rejected(self) -> None:
        bad = dict(DEFAULT_THRESHOLDS)
        bad[3] = Fraction(101)
        with pytest.raises(ValueError):
            MatchConfig(thresholds=bad)

    def test_tier_weights_are_one_through_four(self) -> None:
        assert TIER_WEIGHTS == (1, 2, 3, 4)


class TestBuildEntry:
    def test_computes_canonical_string(self) -> None:
        attrs = parse_cpe23("cpe:2.3:a:rarlab:winrar:5.40:*:*:*:*:*:*:*")
        entry = build_entry(
            attrs,
            "WinRAR 5.40",
            title_norm="winrar",
            product_norm="winrar",
        )
        assert entry.cpe_string == "cpe:2.3:a:rarlab:winrar:5.40:*:*:*:*:*:*:*"
        assert entry.vendor == "rarlab"
        assert entry.product == "winrar"
        assert entry.version == "5.40"
        assert entry.deprecated is False


class TestValidation:
    def test_empty_name_rejected(self) -> None:
        with pytest.raises(EmptyNameError):
            validate_record(SoftwareRecord(record_id=1, raw_name="   "))

    def test_valid_record_returned(self) -> None:
        record = SoftwareRecord(record_id=1, raw_name="VLC")
        assert validate_record(record) is record

    def test_duplicate_ids_rejected(self) -> None:
        records = [
            SoftwareRecord(record_id=1, raw_name="VLC"),
            SoftwareRecord(record_id=1, raw_name="WinRAR"),
        ]
        with pytest.raises(DuplicateIdError):
            validate_snapshot(records)

    def test_snapshot_passes_through(self) -> None:
        records = [
            SoftwareRecord(record_id=1, raw_name="VLC"),
            SoftwareRecord(record_id=2, raw_name="WinRAR"),
        ]
        assert validate_snapshot(records) is records
