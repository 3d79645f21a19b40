from __future__ import annotations

from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import Annotated, Any

from pydantic import BeforeValidator, PlainSerializer


def to_fraction(value: Any) -> Fraction:
    """
    Read a number exactly.

    - Fraction / int: taken as is
    - str: decimal ("-0.805", "1e-3") or fraction ("3/16")
    - float: shortest decimal reading (0.1 -> 1/10, not the binary value)
    """
    if isinstance(value, bool):
        raise TypeError(f"not a number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError(f"not a finite number: {value!r}")
        return Fraction(repr(value))
    if isinstance(value, Decimal):
        return Fraction(value)
    if isinstance(value, str):
        txt = value.strip()
        if not txt:
            raise ValueError("empty numeric string")
        return Fraction(txt)
    raise TypeError(f"not a number: {value!r}")


def _is_terminating(q: Fraction) -> bool:
    d = q.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    return d == 1


def exact_str(q: Fraction) -> str:
    """Decimal string when the expansion terminates, otherwise ``p/q``."""
    if q.denominator == 1:
        return str(q.numerator)
    if not _is_terminating(q):
        return f"{q.numerator}/{q.denominator}"
    with localcontext() as ctx:
        ctx.prec = 200
        text = format(Decimal(q.numerator) / Decimal(q.denominator), "f")
    return text


def round_half_even(q: Fraction, digits: int) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = 100
        exact = Decimal(q.numerator) / Decimal(q.denominator)
        return exact.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_EVEN)


def format_number(q: Fraction, *, precision: int = 3, exact: bool = False) -> str:
    """Render a reported value: half-even decimal by default, exact under ``exact``."""
    if exact:
        return exact_str(q)
    text = format(round_half_even(q, precision), "f")
    if text.startswith("-") and Decimal(text) == 0:
        text = text[1:]
    return text


def fraction_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


# Exact rational field for pydantic models: accepts numbers or numeric strings,
# serializes back to a string that parses to the same value.
Rational = Annotated[
    Fraction,
    BeforeValidator(to_fraction),
    PlainSerializer(exact_str, return_type=str),
]
