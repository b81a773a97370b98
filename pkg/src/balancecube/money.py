"""Exact fixed-point money arithmetic.

All monetary values are stored as signed integers in minor units (cents,
scale 2). Floats never touch stored amounts; conversions round half-even
exactly once, via integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

MINOR_SCALE = 2
MINOR_PER_UNIT = 10**MINOR_SCALE

RATE_SCALE = 6
RATE_ONE = 10**RATE_SCALE  # exchange rates carry exactly 6 fractional digits


@dataclass(frozen=True, slots=True)
class MoneyMinor:
    """An exact amount in minor units of one currency."""

    amount_minor: int
    currency_code: str

    def __post_init__(self) -> None:
        if not isinstance(self.amount_minor, int):
            raise TypeError("amount_minor must be an int of minor units")

    def __str__(self) -> str:
        return f"{format_minor(self.amount_minor)} {self.currency_code}"


def parse_amount(text: str) -> int:
    """Parse decimal text like ``-1234.56`` into minor units.

    Accepts an optional sign, a dot separator and at most 2 fractional
    digits. Raises ValueError on anything else (grouping characters,
    exponents, extra precision, empty input).
    """
    s = text.strip()
    if not s:
        raise ValueError("empty amount")
    sign = 1
    if s[0] in "+-":
        if s[0] == "-":
            sign = -1
        s = s[1:]
    if not s:
        raise ValueError(f"bad amount: {text!r}")
    whole, dot, frac = s.partition(".")
    if dot and not frac:
        raise ValueError(f"bad amount: {text!r}")
    if not whole and not frac:
        raise ValueError(f"bad amount: {text!r}")
    whole = whole or "0"
    if not whole.isascii() or not whole.isdigit():
        raise ValueError(f"bad amount: {text!r}")
    if frac:
        if not frac.isascii() or not frac.isdigit():
            raise ValueError(f"bad amount: {text!r}")
        if len(frac) > MINOR_SCALE:
            raise ValueError(f"amount has more than {MINOR_SCALE} decimals: {text!r}")
        frac = frac.ljust(MINOR_SCALE, "0")
    else:
        frac = "0" * MINOR_SCALE
    return sign * (int(whole) * MINOR_PER_UNIT + int(frac))


def format_minor(amount_minor: int, decimal_sep: str = ".") -> str:
    """Render minor units as a scale-2 decimal string, e.g. 9000 -> ``90.00``."""
    sign = "-" if amount_minor < 0 else ""
    units, cents = divmod(abs(amount_minor), MINOR_PER_UNIT)
    return f"{sign}{units}{decimal_sep}{cents:02d}"


def parse_rate(text: str) -> int:
    """Parse an exchange rate into integer micro-units (6 fractional digits).

    ``0.905550`` -> 905550. Up to 6 decimals are accepted and padded;
    more are rejected rather than silently rounded.
    """
    s = text.strip()
    if not s or s[0] in "+-" and len(s) == 1:
        raise ValueError(f"bad rate: {text!r}")
    negative = s.startswith("-")
    if negative:
        raise ValueError(f"rate must be positive: {text!r}")
    if s.startswith("+"):
        s = s[1:]
    whole, dot, frac = s.partition(".")
    whole = whole or "0"
    if not whole.isascii() or not whole.isdigit():
        raise ValueError(f"bad rate: {text!r}")
    if dot:
        if not frac or not frac.isascii() or not frac.isdigit():
            raise ValueError(f"bad rate: {text!r}")
        if len(frac) > RATE_SCALE:
            raise ValueError(f"rate has more than {RATE_SCALE} decimals: {text!r}")
        frac = frac.ljust(RATE_SCALE, "0")
    else:
        frac = "0" * RATE_SCALE
    micro = int(whole) * RATE_ONE + int(frac)
    if micro <= 0:
        raise ValueError(f"rate must be positive: {text!r}")
    return micro


def format_rate(rate_micro: int) -> str:
    units, frac = divmod(rate_micro, RATE_ONE)
    return f"{units}.{frac:06d}"


def div_round_half_even(numerator: int, denominator: int) -> int:
    """Integer division rounded half to even (banker's rounding).

    Exact for any int numerator; denominator must be positive. Python's
    floor divmod keeps the remainder non-negative, so the tie correction
    works identically for negative numerators.
    """
    if denominator <= 0:
        raise ValueError("denominator must be positive")
    q, r = divmod(numerator, denominator)
    twice = 2 * r
    if twice > denominator or (twice == denominator and q % 2 != 0):
        q += 1
    return q


def convert_minor(amount_minor: int, rate_micro: int) -> int:
    """Apply a 6-digit rate to a minor amount, rounding half-even once."""
    return div_round_half_even(amount_minor * rate_micro, RATE_ONE)
