from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache

from cpesleuth.catalog import Catalog
from cpesleuth.cpe import CpeWfn, Logical
from cpesleuth.matching import (
    match_inventory,
    match_software,
    score_candidates,
    score_entry,
    select_best,
    similarity,
)
from cpesleuth.model import (
    MatchConfig,
    SanitizedSoftware,
    SoftwareRecord,
    TraceEntry,
    build_entry,
)
from cpesleuth.sanitize import derive_product_norm, derive_title_norm

_ORIGIN = SoftwareRecord(record_id=0, raw_name="placeholder")


def make_entry(vendor: str, product: str, version: str, title: str,
               *, deprecated: bool = False):
    attrs = CpeWfn("a", vendor, product, version, *(Logical.ANY,) * 7)
    return build_entry(
        attrs, title, deprecated=deprecated,
        title_norm=derive_title_norm(title, attrs),
        product_norm=derive_product_norm(attrs),
    )


def lcs_oracle(a: str, b: str) -> int:
    @lru_cache(maxsize=None)
    def rec(i: int, j: int) -> int:
        if i == 0 or j == 0:
            return 0
        if a[i - 1] == b[j - 1]:
            return rec(i - 1, j - 1) + 1
        return max(rec(i - 1, j), rec(i, j - 1))

    return rec(len(a), len(b))


def similarity_oracle(a: str, b: str) -> Fraction:
    if not a and not b:
        return Fraction(100)
    if not a or not b:
        return Fraction(0)
    return Fraction(200 * lcs_oracle(a, b), len(a) + len(b))


class TestSimilarity:
    def test_known_values(self) -> None:
        assert similarity("open vpn", "openvpn") == Fraction(280, 3)
        assert similarity("microsoft corp", "microsoft corporation") == Fraction(80)
        assert similarity("winrar", "rarlab winrar") == Fraction(1200, 19)

    def test_empty_edge_cases(self) -> None:
        assert similarity("", "") == Fraction(100)
        assert similarity("vlc", "") == Fraction(0)
        assert similarity("", "vlc") == Fraction(0)

    def test_identity_scores_hundred(self) -> None:
        assert similarity("openvpn", "openvpn") == Fraction(100)

    def test_disjoint_scores_zero(self) -> None:
        assert similarity("abc", "xyz") == Fraction(0)

    def test_symmetry_bounds_and_oracle_agreement(self) -> None:
        rng = random.Random(9090)
        alphabet = "ab .x"
        for _ in range(1_000):
            a = "".join(rng.choices(alphabet, k=rng.randint(0, 12)))
            b = "".join(rng.choices(alphabet, k=rng.randint(0, 12)))
            got = similarity(a, b)
            assert got == similarity(b, a)
            assert Fraction(0) <= got <= Fraction(100)
            assert got == similarity_oracle(a, b)
            if got == Fraction(100):
                assert a == b


class TestScoring:
    def test_score_entry_takes_better_of_title_and_product(self) -> None:
        entry = make_entry("adobe", "acrobat", "5.0", "Adobe Acrobat 5.0")
        assert entry.title_norm == "adobe acrobat"
        assert entry.product_norm == "acrobat"
        assert score_entry("acrobat", entry) == Fraction(100)
        assert score_entry("adobe acrobat", entry) == Fraction(100)

    def test_threshold_boundary_is_inclusive(self) -> None:
        # LCS("aaaaaaabbb", "aaaaaaaccc") = 7, so the score is exactly 70.
        entry = make_entry("v", "aaaaaaaccc", "1.0", "aaaaaaaccc 1.0")
        s = SanitizedSoftware(name="aaaaaaabbb", vendor="v", version="1.0",
                              origin=_ORIGIN)
        from cpesleuth.model import MatchCandidate

        (trace,) = score_candidates(s, [MatchCandidate(entry=entry, weight=1)])
        assert trace.score == Fraction(70)
        assert trace.passed_threshold is True

        config = MatchConfig.with_thresholds(w1=70.01)
        (strict,) = score_candidates(
            s, [MatchCandidate(entry=entry, weight=1)], config)
        assert strict.passed_threshold is False

    def test_tier_thresholds_come_from_config(self) -> None:
        entry = make_entry("v", "aaaaaaaccc", "1.0", "aaaaaaaccc 1.0")
        s = SanitizedSoftware(name="aaaaaaabbb", vendor="v", version="1.0",
                              origin=_ORIGIN)
        from cpesleuth.model import MatchCandidate

        for weight, expected in ((1, True), (2, True), (3, True), (4, True)):
            (trace,) = score_candidates(
                s, [MatchCandidate(entry=entry, weight=weight)])
            assert trace.passed_threshold is expected
        # Tier 4's default bar is 60; a 64-scoring pair passes there but
        # fails tier 1's 70.
        low = make_entry("v", "aaaaaaaccccc", "1.0", "aaaaaaaccccc 1.0")
        s2 = SanitizedSoftware(name="aaaaaaabbbbb", vendor="v", version="1.0",
                               origin=_ORIGIN)
        assert score_entry(s2.name, low) == Fraction(1400, 24)
        (t1,) = score_candidates(s2, [MatchCandidate(entry=low, weight=1)])
        (t4,) = score_candidates(s2, [MatchCandidate(entry=low, weight=4)])
        assert t1.passed_threshold is False
        assert t4.passed_threshold is False
        assert Fraction(1400, 24) < Fraction(60)


class TestSelectBest:
    def trace(self, cpe: str, weight: int, score: Fraction,
              passed: bool = True, deprecated: bool = False) -> TraceEntry:
        return TraceEntry(cpe_string=cpe, weight=weight, score=score,
                          passed_threshold=passed, deprecated=deprecated)

    def test_highest_score_wins(self) -> None:
        best = select_best([
            self.trace("cpe:a", 1, Fraction(80)),
            self.trace("cpe:b", 4, Fraction(95)),
        ])
        assert best.cpe_string == "cpe:b"
        assert best.score == Fraction(95)
        assert best.weight == 4

    def test_tie_falls_to_lower_weight(self) -> None:
        best = select_best([
            self.trace("cpe:high", 3, Fraction(90)),
            self.trace("cpe:low", 1, Fraction(90)),
        ])
        assert best.cpe_string == "cpe:low"
        assert best.weight == 1

    def test_tie_prefers_non_deprecated(self) -> None:
        best = select_best([
            self.trace("cpe:dep", 1, Fraction(90), deprecated=True),
            self.trace("cpe:live", 1, Fraction(90)),
        ])
        assert best.cpe_string == "cpe:live"

    def test_final_tie_takes_smallest_string(self) -> None:
        best = select_best([
            self.trace("cpe:bbb", 1, Fraction(90)),
            self.trace("cpe:aaa", 1, Fraction(90)),
        ])
        assert best.cpe_string == "cpe:aaa"

    def test_failing_entries_never_selected(self) -> None:
        assert select_best([
            self.trace("cpe:fail", 1, Fraction(99), passed=False),
        ]) is None
        assert select_best([]) is None

    def test_result_stable_under_permutation(self) -> None:
        rng = random.Random(31337)
        scores = [Fraction(90), Fraction(90), Fraction(85), Fraction(70)]
        traces = [
            self.trace(f"cpe:{i}", (i % 4) + 1, score)
            for i, score in enumerate(scores)
        ]
        expected = select_best(traces)
        for _ in range(50):
            shuffled = traces[:]
            rng.shuffle(shuffled)
            assert select_best(shuffled) == expected


class TestMatchSoftware:
    def test_exact_name_match_is_tier1_hundred(self, set2) -> None:
        catalog, _ = set2
        record = SoftwareRecord(
            record_id=1,
            raw_name="OpenVPN",
            raw_version="2.4.11-I062.win10",
            raw_vendor="OpenVPN Technologies, Inc.",
        )
        result = match_software(record, catalog)
        assert result.matched is not None
        assert result.matched.cpe_string == (
            "cpe:2.3:a:openvpn:openvpn:2.4.11:*:*:*:*:*:*:*"
        )
        assert result.matched.score == Fraction(100)
        assert result.matched.weight == 1

    def test_real_dictionary_entry_does_not_false_positive(self, set1) -> None:
        catalog, _ = set1
        record = SoftwareRecord(
            record_id=99,
            raw_name="WinRAR 5.20 (32-bit)",
            raw_version="5.20",
            raw_vendor="win.rar GmbH",
        )
        result = match_software(record, catalog)
        assert result.matched is None

    def test_empty_catalog_gives_empty_trace(self) -> None:
        with Catalog(":memory:") as empty:
            record = SoftwareRecord(record_id=1, raw_name="VLC", raw_version="1.0")
            result = match_software(record, empty)
            assert result.matched is None
            assert result.trace == ()
            assert result.error is None

    def test_unsanitizable_name_reports_error(self, set1) -> None:
        catalog, _ = set1
        record = SoftwareRecord(record_id=1, raw_name="(((", raw_version="1.0")
        result = match_software(record, catalog)
        assert result.matched is None
        assert result.trace == ()
        assert result.error is not None
        assert "(((" in result.error

    def test_match_inventory_is_deterministic(self, set2) -> None:
        catalog, inventory = set2
        first = match_inventory(inventory, catalog)
        second = match_inventory(inventory, catalog)
        assert first == second

    def test_raising_thresholds_never_creates_matches(self, set2) -> None:
        catalog, inventory = set2
        lenient = MatchConfig.with_thresholds(w1=0, w2=0, w3=0, w4=0)
        strict = MatchConfig.with_thresholds(w1=90, w2=90, w3=90, w4=90)
        by_default = match_inventory(inventory, catalog)
        by_lenient = match_inventory(inventory, catalog, config=lenient)
        by_strict = match_inventory(inventory, catalog, config=strict)
        for default_r, lenient_r, strict_r in zip(by_default, by_lenient, by_strict):
            if default_r.matched is not None:
                assert lenient_r.matched is not None
            if strict_r.matched is not None:
                assert default_r.matched is not None
