"""Canonical rational tokens shared by the on-disk text formats.

Every format in this package is line oriented, UTF-8, LF endings, no
trailing whitespace, and stores rationals as `p/q` in lowest terms with
q >= 2, or as a bare integer.  Writers emit exactly this form and readers
reject anything else, which is what makes round trips byte-stable.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

from .errors import FormatError

_INT_RE = re.compile(r"-?(0|[1-9][0-9]*)$")
_FRAC_RE = re.compile(r"(-?(?:0|[1-9][0-9]*))/([1-9][0-9]*)$")


def format_rational(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(token: str) -> Fraction:
    """Parse a canonical rational token, rejecting unreduced or exotic forms."""
    if _INT_RE.match(token):
        return Fraction(int(token))
    m = _FRAC_RE.match(token)
    if m is None:
        raise FormatError(f"not a canonical rational token: {token!r}")
    num, den = int(m.group(1)), int(m.group(2))
    if den == 1 or math.gcd(num, den) != 1:
        raise FormatError(f"rational token not in lowest terms: {token!r}")
    return Fraction(num, den)


def parse_int(token: str, what: str) -> int:
    if not _INT_RE.match(token):
        raise FormatError(f"bad {what}: {token!r}")
    return int(token)


def split_lines(text: str, what: str) -> list[str]:
    """Split canonical LF-terminated text into lines, validating shape."""
    if text and not text.endswith("\n"):
        raise FormatError(f"{what}: missing trailing newline")
    if "\r" in text:
        raise FormatError(f"{what}: CR characters are not allowed")
    lines = text.split("\n")[:-1]
    for i, line in enumerate(lines):
        if line != line.strip() or "  " in line:
            raise FormatError(f"{what}: non-canonical whitespace on line {i + 1}")
    return lines
