"""Money formatting.

The library computes in exact integer/rational cents; dollars exist only for
display.  Display rounding is half-up (half away from zero), which keeps
values like 12.5 cents rendering as 0.13 rather than the 0.12 that banker's
rounding would give.
"""

from __future__ import annotations

from fractions import Fraction

Cents = Fraction | int


def round_cents(cents: Cents) -> int:
    """Round exact cents to an integer, halves away from zero."""
    f = Fraction(cents)
    if f >= 0:
        return (2 * f.numerator + f.denominator) // (2 * f.denominator)
    return -((-2 * f.numerator + f.denominator) // (2 * f.denominator))


def dollars(cents: Cents) -> str:
    """Format cents as a 2-decimal dollar string, e.g. 12.5 -> "0.13"."""
    whole = round_cents(cents)
    sign = "-" if whole < 0 else ""
    whole = abs(whole)
    return f"{sign}{whole // 100}.{whole % 100:02d}"


def signed_dollars(cents: Cents) -> str:
    """Like dollars() but with an explicit leading + for nonnegative amounts."""
    text = dollars(cents)
    return text if text.startswith("-") else "+" + text


def exact_dollars(cents: Cents) -> str:
    """Exact rational dollar amount, e.g. Fraction(1387, 128) cents -> "1387/12800"."""
    return str(Fraction(cents) / 100)
