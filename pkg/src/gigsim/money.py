"""Exact money arithmetic.

All budgets, bids, prices and rewards are exact rationals quantized to
cents, so equality comparisons (bid ties, normalized-bid checks) are
deterministic and trace serialization round-trips losslessly.
"""
from __future__ import annotations

from decimal import Decimal
from fractions import Fraction

Money = Fraction

CENT = Fraction(1, 100)


def to_money(value: int | float | str | Fraction | Decimal) -> Money:
    """Convert a config/wire value to exact money, quantized to cents."""
    if isinstance(value, Fraction):
        return quantize_cents(value)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # round() on the float keeps e.g. 7.2 -> 720 cents, not 719
        return Fraction(round(value * 100), 100)
    return quantize_cents(Fraction(Decimal(str(value).strip())))


def quantize_cents(value: Fraction) -> Money:
    """Round an exact rational to the nearest cent, half away from zero."""
    cents = value * 100
    if cents.denominator == 1:
        return Fraction(cents.numerator, 100)
    if cents >= 0:
        whole = (2 * cents.numerator + cents.denominator) // (2 * cents.denominator)
    else:
        whole = -((-2 * cents.numerator + cents.denominator) // (2 * cents.denominator))
    return Fraction(whole, 100)


def format_money(value: Money) -> str:
    """Fixed two-decimal display, e.g. Fraction(36, 5) -> '7.20'."""
    cents = value * 100
    if cents.denominator != 1:
        value = quantize_cents(value)
        cents = value * 100
    sign = "-" if cents.numerator < 0 else ""
    units, rem = divmod(abs(cents.numerator), 100)
    return f"{sign}{units}.{rem:02d}"


def parse_money(text: str) -> Money:
    """Inverse of :func:`format_money`."""
    return to_money(text)
