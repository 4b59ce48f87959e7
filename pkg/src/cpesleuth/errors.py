"""Exception types shared across the package."""

from __future__ import annotations


class CpeSleuthError(Exception):
    """Base class for all errors raised by this package."""


class EmptyNameError(CpeSleuthError):
    """An inventory record has an empty or whitespace-only name."""


class DuplicateIdError(CpeSleuthError):
    """Two records in the same inventory snapshot share a record_id."""


class EmptyAfterSanitizeError(CpeSleuthError):
    """Sanitization removed every character of a software name."""

    def __init__(self, raw: str):
        super().__init__(f"name is empty after sanitization: {raw!r}")
        self.raw = raw


class CpeParseError(CpeSleuthError):
    """A string is not a well-formed CPE 2.3 formatted string."""


class BadPrefixError(CpeParseError):
    """The string does not start with the literal prefix ``cpe:2.3:``."""


class BadComponentCountError(CpeParseError):
    """The string does not contain exactly 11 attribute components."""


class BadPartError(CpeParseError):
    """The part attribute is not one of ``a``, ``h``, ``o``."""


class BadEscapeError(CpeParseError):
    """A backslash escape is truncated or malformed."""


class FeedParseError(CpeSleuthError):
    """An input feed could not be parsed.

    Carries the source path and, when known, the offending line or record
    number so the failure can be located in large feeds.
    """

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        locus = ""
        if path is not None:
            locus = f" ({path}" + (f", line {line}" if line is not None else "") + ")"
        super().__init__(message + locus)
        self.path = path
        self.line = line


class UnsupportedFormatError(CpeSleuthError):
    """A source or output format name is not recognized."""


class CatalogError(CpeSleuthError):
    """The catalog store is missing, locked, or has an incompatible schema."""
