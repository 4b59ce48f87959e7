"""Codec for the CPE 2.3 formatted-string binding.

A formatted string is the literal prefix ``cpe:2.3:`` followed by 11
colon-separated attributes::

    part : vendor : product : version : update : edition : language
         : sw_edition : target_sw : target_hw : other

Within an attribute, ``*`` denotes the logical value ANY and ``-`` denotes
NA.  A backslash escapes the next character, so literal colons, asterisks,
and hyphens can appear inside values (``acme\\:inc``).  Attribute values are
lowercased at parse time; formatting always emits the canonical lowercase
form, so ``format_cpe23(parse_cpe23(s))`` is stable and parsing a formatted
string recovers the exact attribute set.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from enum import Enum

from .errors import (
    BadComponentCountError,
    BadEscapeError,
    BadPartError,
    BadPrefixError,
)

PREFIX = "cpe:2.3:"

ATTRIBUTE_NAMES = (
    "part",
    "vendor",
    "product",
    "version",
    "update",
    "edition",
    "language",
    "sw_edition",
    "target_sw",
    "target_hw",
    "other",
)

VALID_PARTS = ("a", "h", "o")


class Logical(Enum):
    """Logical attribute values of the CPE model."""

    ANY = "*"
    NA = "-"


@dataclass(frozen=True)
class CpeWfn:
    """An 11-attribute CPE name. Each field is a literal string, ANY, or NA."""

    part: str
    vendor: str | Logical
    product: str | Logical
    version: str | Logical
    update: str | Logical
    edition: str | Logical
    language: str | Logical
    sw_edition: str | Logical
    target_sw: str | Logical
    target_hw: str | Logical
    other: str | Logical

    def values(self) -> tuple[str | Logical, ...]:
        return tuple(getattr(self, f.name) for f in fields(self))


def _split_components(s: str) -> list[str]:
    """Split on unescaped colons; backslash escapes the following character."""
    parts: list[str] = []
    current: list[str] = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch == "\\":
            if i + 1 >= len(s):
                raise BadEscapeError(f"truncated escape at end of {s!r}")
            current.append(ch)
            current.append(s[i + 1])
            i += 2
            continue
        if ch == ":":
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
        i += 1
    parts.append("".join(current))
    return parts


def _unescape(component: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(component):
        ch = component[i]
        if ch == "\\":
            # _split_components guarantees a character follows
            out.append(component[i + 1])
            i += 2
            continue
        out.append(ch)
        i += 1
    return "".join(out)


def _escape(value: str) -> str:
    # Colon and backslash would corrupt the component structure; a bare
    # asterisk or question mark would read back as a wildcard, and a bare
    # hyphen as NA.
    escaped = []
    for ch in value:
        if ch in ("\\", ":", "*", "?"):
            escaped.append("\\" + ch)
        else:
            escaped.append(ch)
    out = "".join(escaped)
    if value == "-":
        return "\\-"
    return out


def parse_cpe23(s: str) -> CpeWfn:
    """Parse a CPE 2.3 formatted string into its 11 attribute values.

    Raises BadPrefixError, BadComponentCountError, BadPartError, or
    BadEscapeError on malformed input.
    """
    lowered = s.lower()
    if not lowered.startswith(PREFIX):
        raise BadPrefixError(f"expected prefix {PREFIX!r}: {s!r}")
    body = lowered[len(PREFIX):]
    components = _split_components(body)
    if len(components) != len(ATTRIBUTE_NAMES):
        raise BadComponentCountError(
            f"expected {len(ATTRIBUTE_NAMES)} components, got {len(components)}: {s!r}"
        )
    values: list[str | Logical] = []
    for component in components:
        if component == "*":
            values.append(Logical.ANY)
        elif component == "-":
            values.append(Logical.NA)
        else:
            values.append(_unescape(component))
    if values[0] not in VALID_PARTS:
        raise BadPartError(f"part must be one of {VALID_PARTS}: {s!r}")
    return CpeWfn(*values)


def format_cpe23(wfn: CpeWfn) -> str:
    """Render the canonical lowercase formatted string for an attribute set."""
    components = []
    for value in wfn.values():
        if value is Logical.ANY:
            components.append("*")
        elif value is Logical.NA:
            components.append("-")
        else:
            components.append(_escape(str(value).lower()))
    return PREFIX + ":".join(components)
