"""Parsing and formatting of exact rationals as "p/q" strings."""

from __future__ import annotations

from fractions import Fraction

from .errors import InvalidRationalError


def parse_rational(text: str) -> Fraction:
    """Parse "p/q" (or a plain integer "p") into an exact Fraction."""
    s = text.strip()
    try:
        if "/" in s:
            num_s, den_s = s.split("/", 1)
            num, den = int(num_s), int(den_s)
            if den == 0:
                raise InvalidRationalError(f"zero denominator in rational {text!r}")
            return Fraction(num, den)
        return Fraction(int(s))
    except InvalidRationalError:
        raise
    except (ValueError, TypeError) as exc:
        raise InvalidRationalError(f"malformed rational {text!r}") from exc


def format_rational(value: Fraction) -> str:
    """Render a Fraction as "p/q" (integers stay bare, e.g. "3")."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"
