"""Strict "p/q" parsing, formatting, and float-free coercion helpers.

Every quantity in this package is an exact rational; floats are rejected at
the boundary rather than silently converted.
"""

from __future__ import annotations

import re
from fractions import Fraction

_RATIONAL_RE = re.compile(r"^[+-]?\d+(?:/[1-9]\d*)?$")


def parse_rational(text: str) -> Fraction:
    """Parse "p" or "p/q" with q > 0; anything else (floats included) is rejected."""
    cleaned = text.strip()
    if not _RATIONAL_RE.match(cleaned):
        raise ValueError(f"not a rational literal: {text!r}")
    return Fraction(cleaned)


def format_rational(value: Fraction) -> str:
    """Render reduced "p/q", or a bare "p" when the denominator is 1."""
    return str(Fraction(value))


def exact(value) -> Fraction:
    """Coerce an int, Fraction, or "p/q" string to Fraction. Floats raise TypeError."""
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"exact rational required, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")
