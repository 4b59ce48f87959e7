from __future__ import annotations

import random

import pytest

from cpesleuth.cpe import (
    ATTRIBUTE_NAMES,
    PREFIX,
    CpeWfn,
    Logical,
    format_cpe23,
    parse_cpe23,
)
from cpesleuth.errors import (
    BadComponentCountError,
    BadEscapeError,
    BadPartError,
    BadPrefixError,
    CpeParseError,
)

WINRAR = "cpe:2.3:a:rarlab:winrar:5.40:*:*:*:*:*:*:*"


def count_unescaped_colons(s: str) -> int:
    count = 0
    i = 0
    while i < len(s):
        if s[i] == "\\":
            i += 2
            continue
        if s[i] == ":":
            count += 1
        i += 1
    return count


def test_parse_simple_application() -> None:
    wfn = parse_cpe23(WINRAR)
    assert wfn.part == "a"
    assert wfn.vendor == "rarlab"
    assert wfn.product == "winrar"
    assert wfn.version == "5.40"
    assert wfn.update is Logical.ANY
    assert wfn.other is Logical.ANY


def test_parse_na_and_any_mix() -> None:
    wfn = parse_cpe23("cpe:2.3:o:microsoft:windows:-:*:*:*:*:*:*:*")
    assert wfn.version is Logical.NA
    assert wfn.update is Logical.ANY


def test_parse_lowercases_input() -> None:
    wfn = parse_cpe23("CPE:2.3:A:RARLab:WinRAR:5.40:*:*:*:*:*:*:*")
    assert wfn.vendor == "rarlab"
    assert wfn.product == "winrar"
    assert format_cpe23(wfn) == WINRAR


def test_parse_escaped_colon_in_vendor() -> None:
    wfn = parse_cpe23("cpe:2.3:a:acme\\:inc:tool:1.0:*:*:*:*:*:*:*")
    assert wfn.vendor == "acme:inc"
    assert format_cpe23(wfn) == "cpe:2.3:a:acme\\:inc:tool:1.0:*:*:*:*:*:*:*"


def test_parse_escaped_plus_is_canonically_unescaped() -> None:
    wfn = parse_cpe23(
        "cpe:2.3:a:notepad-plus-plus:notepad\\+\\+:6.6.8:*:*:*:*:*:*:*"
    )
    assert wfn.product == "notepad++"
    canonical = format_cpe23(wfn)
    assert canonical == "cpe:2.3:a:notepad-plus-plus:notepad++:6.6.8:*:*:*:*:*:*:*"
    assert parse_cpe23(canonical) == wfn


def test_format_escapes_literal_hyphen_value() -> None:
    wfn = parse_cpe23(WINRAR)
    hyphen = CpeWfn(*(("a",) + ("-",) + wfn.values()[2:]))
    rendered = format_cpe23(hyphen)
    assert ":\\-:" in rendered
    assert parse_cpe23(rendered).vendor == "-"


def test_bad_prefix() -> None:
    with pytest.raises(BadPrefixError):
        parse_cpe23("cpe:/a:rarlab:winrar:5.40")
    with pytest.raises(BadPrefixError):
        parse_cpe23("not a cpe at all")


def test_bad_component_count() -> None:
    with pytest.raises(BadComponentCountError):
        parse_cpe23("cpe:2.3:a:rarlab:winrar:5.40")
    with pytest.raises(BadComponentCountError):
        parse_cpe23(WINRAR + ":extra")


def test_bad_part() -> None:
    with pytest.raises(BadPartError):
        parse_cpe23("cpe:2.3:x:rarlab:winrar:5.40:*:*:*:*:*:*:*")
    with pytest.raises(BadPartError):
        parse_cpe23("cpe:2.3:*:rarlab:winrar:5.40:*:*:*:*:*:*:*")


def test_bad_escape_at_end() -> None:
    with pytest.raises(BadEscapeError):
        parse_cpe23(WINRAR[:-1] + "\\")


def test_error_hierarchy() -> None:
    for exc_type in (
        BadPrefixError,
        BadComponentCountError,
        BadPartError,
        BadEscapeError,
    ):
        assert issubclass(exc_type, CpeParseError)


def random_wfn(rng: random.Random) -> CpeWfn:
    plain = "abcdefghijklmnopqrstuvwxyz0123456789._-"
    special = ":*?\\"
    values: list[str | Logical] = [rng.choice(("a", "h", "o"))]
    for _ in ATTRIBUTE_NAMES[1:]:
        roll = rng.random()
        if roll < 0.25:
            values.append(Logical.ANY)
        elif roll < 0.35:
            values.append(Logical.NA)
        elif roll < 0.40:
            values.append("-")
        else:
            length = rng.randint(1, 8)
            chars = []
            for _ in range(length):
                if rng.random() < 0.2:
                    chars.append(rng.choice(special))
                else:
                    chars.append(rng.choice(plain))
            values.append("".join(chars))
    return CpeWfn(*values)


def test_round_trip_random_attribute_sets() -> None:
    rng = random.Random(1923)
    for _ in range(2_000):
        wfn = random_wfn(rng)
        rendered = format_cpe23(wfn)
        assert parse_cpe23(rendered) == wfn
        assert format_cpe23(parse_cpe23(rendered)) == rendered
        assert count_unescaped_colons(rendered) == 12
        assert rendered == rendered.lower()
        assert rendered.startswith(PREFIX)


def test_values_ordering_matches_attribute_names() -> None:
    wfn = parse_cpe23(WINRAR)
    values = wfn.values()
    assert len(values) == len(ATTRIBUTE_NAMES)
    assert values[0] == wfn.part
    assert values[3] == wfn.version
    assert values[10] == wfn.other
