"""Normalization of raw inventory names, vendors, and versions.

Inventory agents report noisy strings: architecture tags, marketing
remarks, corporate suffixes, embedded version numbers.  The functions here
reduce them to the canonical lowercase forms that retrieval and scoring
operate on.  All three sanitizers are idempotent and emit only characters
from ``[a-z0-9 .+_-]``.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

from .cpe import CpeWfn
from .errors import EmptyAfterSanitizeError, FeedParseError
from .model import SanitizedSoftware, SoftwareRecord

DEFAULT_CORPORATE_STOPWORDS = (
    "technologies",
    "technology",
    "inc",
    "incorporated",
    "llc",
    "ltd",
    "limited",
    "corp",
    "corporation",
    "gmbh",
    "co",
    "company",
    "software",
    "foundation",
)

DEFAULT_ARCH_TOKENS = (
    "x86",
    "x64",
    "32-bit",
    "64-bit",
    "32bit",
    "64bit",
    "i386",
    "i686",
    "amd64",
    "arm64",
    "win32",
    "win64",
)

DEFAULT_CHANNEL_TOKENS = (
    "alpha",
    "beta",
    "rc",
    "preview",
    "nightly",
)

# Standalone language tags ("en", "en-us").  A bare two-letter wildcard
# would also delete product words like "vm", so the codes are explicit.
DEFAULT_LOCALE_PATTERN = (
    r"^(en|fr|de|es|it|pt|ru|ja|zh|ko|nl|sv|no|da|fi|pl|tr|cs|hu|el|he|ar|th)(-[a-z]{2})?$"
)


@dataclass(frozen=True)
class SanitizerRules:
    """Token lists driving the name/vendor sanitizers.  All tokens lowercase."""

    corporate_stopwords: tuple[str, ...] = DEFAULT_CORPORATE_STOPWORDS
    arch_tokens: tuple[str, ...] = DEFAULT_ARCH_TOKENS
    channel_tokens: tuple[str, ...] = DEFAULT_CHANNEL_TOKENS
    locale_pattern: str = DEFAULT_LOCALE_PATTERN

    def __post_init__(self) -> None:
        for name in ("corporate_stopwords", "arch_tokens", "channel_tokens"):
            tokens = getattr(self, name)
            if not tokens:
                raise ValueError(f"{name} must not be empty")
            if any(t != t.lower() for t in tokens):
                raise ValueError(f"{name} entries must be lowercase")

    @property
    def locale_re(self) -> re.Pattern[str]:
        return _compiled(self.locale_pattern)

    @property
    def channel_re(self) -> re.Pattern[str]:
        alternatives = "|".join(re.escape(t) for t in self.channel_tokens)
        return _compiled(rf"^({alternatives})\d*$")


_COMPILED_CACHE: dict[str, re.Pattern[str]] = {}


def _compiled(pattern: str) -> re.Pattern[str]:
    try:
        return _COMPILED_CACHE[pattern]
    except KeyError:
        compiled = re.compile(pattern)
        _COMPILED_CACHE[pattern] = compiled
        return compiled


DEFAULT_RULES = SanitizerRules()

_RULE_SECTIONS = ("corporate_stopwords", "arch_tokens", "channel_tokens", "locale_pattern")

_BRACKETED = re.compile(r"\([^()]*\)|\[[^\[\]]*\]|\{[^{}]*\}")
_NAME_DISALLOWED = re.compile(r"[^a-z0-9 .+_-]+")
_VENDOR_DISALLOWED = re.compile(r"[^a-z0-9 .]+")
_VERSION_SHAPED = re.compile(r"^\d+(\.\d+)*$")
_TRAILING_PUNCT = re.compile(r"[._-]+$")
_TRAILING_PLUS_RUN = re.compile(r"\++$")
_LEADING_V = re.compile(r"^[vV](?=\d)")
_VERSION_SEPARATORS = re.compile(r"([-_+\s]+)")


def load_rules(path: str) -> SanitizerRules:
    """Read rules from a sectioned plain-text file.

    Sections are introduced by ``[section_name]`` headers; each following
    non-blank, non-comment line is one token.  ``[locale_pattern]`` holds a
    single regular expression instead of a token list.  Sections that are
    absent keep their compiled-in defaults.
    """
    collected: dict[str, list[str]] = {}
    section: str | None = None
    with open(path, encoding="utf-8") as handle:
        for line_no, raw_line in enumerate(handle, start=1):
            line = raw_line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                if section not in _RULE_SECTIONS:
                    raise FeedParseError(
                        f"unknown rules section {section!r}", path=path, line=line_no
                    )
                collected.setdefault(section, [])
                continue
            if section is None:
                raise FeedParseError("token outside any section", path=path, line=line_no)
            collected[section].append(line.lower())
    kwargs: dict[str, object] = {}
    for name in ("corporate_stopwords", "arch_tokens", "channel_tokens"):
        if name in collected:
            kwargs[name] = tuple(collected[name])
    if "locale_pattern" in collected:
        lines = collected["locale_pattern"]
        if len(lines) != 1:
            raise FeedParseError(
                "locale_pattern section must contain exactly one pattern", path=path
            )
        try:
            re.compile(lines[0])
        except re.error as exc:
            raise FeedParseError(f"bad locale pattern: {exc}", path=path) from exc
        kwargs["locale_pattern"] = lines[0]
    return SanitizerRules(**kwargs)  # type: ignore[arg-type]


def _delete_bracketed(text: str) -> str:
    previous = None
    while previous != text:
        previous = text
        text = _BRACKETED.sub(" ", text)
    return text


def _clean_token(token: str) -> str:
    """Trim punctuation from token edges.

    Internal hyphens, dots, plus signs, and underscores stay ("7-zip",
    "win.rar").  A trailing plus run stays only when anchored to an
    alphanumeric ("notepad++", "c++"); dangling punctuation is dropped.
    """
    while True:
        before = token
        token = token.lstrip(".+_-")
        token = _TRAILING_PUNCT.sub("", token)
        run = _TRAILING_PLUS_RUN.search(token)
        if run:
            head = token[: run.start()]
            if not head or not head[-1].isalnum():
                token = head
        if token == before:
            return token


def _normalize_name_chars(text: str) -> list[str]:
    text = _NAME_DISALLOWED.sub(" ", text)
    tokens = []
    for raw_token in text.split():
        token = _clean_token(raw_token)
        if token:
            tokens.append(token)
    return tokens


def sanitize_name(raw: str, rules: SanitizerRules = DEFAULT_RULES) -> str:
    """Reduce a raw program name to its canonical matching form.

    Applies, in order: Unicode compatibility normalization and lowercasing;
    deletion of parenthesized/bracketed content; deletion of the remark
    after the first " - "; deletion of a ".app" suffix; punctuation cleanup
    (everything but internal hyphens/dots/plus/underscores); deletion of
    standalone architecture, locale, channel ("beta1", "rc2"), and
    version-shaped tokens; deletion of corporate stopword tokens; whitespace
    collapsing.  Punctuation is normalized before the token filters run so
    a second pass sees the same tokens and the function is idempotent.

    Raises EmptyAfterSanitizeError when nothing survives.
    """
    text = unicodedata.normalize("NFKC", raw).lower()
    text = _delete_bracketed(text)
    text = text.split(" - ", 1)[0]
    text = text.strip()
    while text.endswith(".app"):
        text = text[: -len(".app")].strip()
    tokens = _normalize_name_chars(text)
    locale_re = rules.locale_re
    channel_re = rules.channel_re
    arch = set(rules.arch_tokens)
    kept = [
        t
        for t in tokens
        if t not in arch
        and not locale_re.match(t)
        and not channel_re.match(t)
        and not _VERSION_SHAPED.match(t)
    ]
    stopwords = set(rules.corporate_stopwords)
    kept = [t for t in kept if t not in stopwords]
    result = " ".join(kept)
    if not result:
        raise EmptyAfterSanitizeError(raw)
    return result


def sanitize_vendor(raw: str, rules: SanitizerRules = DEFAULT_RULES) -> str:
    """Canonicalize a publisher string; empty input stays empty.

    Lowercases, removes punctuation except internal dots, drops corporate
    stopword tokens, and collapses whitespace, so "Microsoft Corp." and
    "Microsoft Corporation" both become "microsoft".
    """
    text = unicodedata.normalize("NFKC", raw).lower()
    text = _VENDOR_DISALLOWED.sub(" ", text)
    stopwords = set(rules.corporate_stopwords)
    tokens = []
    for raw_token in text.split():
        token = raw_token.strip(".")
        if token and token not in stopwords:
            tokens.append(token)
    return " ".join(tokens)


def sanitize_version(raw: str) -> str:
    """Reduce a raw version to its comparable core; empty input stays empty.

    Trims, deletes parenthesized content, strips one leading "v" before a
    digit, and truncates at the first separator that introduces a
    non-numeric suffix: "2.4.11-I602-Win10" keeps only "2.4.11" while a
    purely numeric dash-suffix like "1.0-2" survives.  Whitespace always
    truncates, so results never contain spaces.  Trailing ".0" segments are
    preserved.  The "v" strip runs after paren deletion so a prefix exposed
    by it is still removed and the function stays idempotent.
    """
    text = unicodedata.normalize("NFKC", raw).strip()
    if not text:
        return ""
    text = _delete_bracketed(text)
    text = text.replace("(", " ").replace(")", " ").strip()
    text = _LEADING_V.sub("", text)
    parts = _VERSION_SEPARATORS.split(text)
    pieces = [parts[0]]
    for i in range(1, len(parts) - 1, 2):
        separator, segment = parts[i], parts[i + 1]
        if any(ch.isspace() for ch in separator):
            break
        if not _VERSION_SHAPED.match(segment):
            break
        pieces.append(separator + segment)
    return "".join(pieces).lower()


def sanitize_record(record: SoftwareRecord, rules: SanitizerRules = DEFAULT_RULES) -> SanitizedSoftware:
    """Sanitize all three fields of a record, keeping a link to the original."""
    return SanitizedSoftware(
        name=sanitize_name(record.raw_name, rules),
        vendor=sanitize_vendor(record.raw_vendor, rules),
        version=sanitize_version(record.raw_version),
        origin=record,
    )


def vendor_key(vendor: str) -> str:
    """Canonicalize a sanitized vendor for comparison against CPE vendor values."""
    return vendor.replace(" ", "_")


def derive_title_norm(title: str, attrs: CpeWfn) -> str:
    """Comparable form of a dictionary title.

    Lowercases, applies the same punctuation cleanup as name sanitization,
    and removes any token equal to the entry's own version (checked both
    before and after cleanup), so titles like "WinRAR 5.40" compare on the
    name part alone.
    """
    text = unicodedata.normalize("NFKC", title).lower()
    version = attrs.version if isinstance(attrs.version, str) else None
    tokens = []
    for raw_token in text.split():
        if version is not None and raw_token == version:
            continue
        for piece in _NAME_DISALLOWED.sub(" ", raw_token).split():
            token = _clean_token(piece)
            if token and token != version:
                tokens.append(token)
    return " ".join(tokens)


def derive_product_norm(attrs: CpeWfn) -> str:
    """Product attribute with underscores as spaces; logical values yield ""."""
    product = attrs.product
    if not isinstance(product, str):
        return ""
    return product.replace("_", " ")
