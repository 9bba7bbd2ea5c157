"""Exact scalars.

All real quantities are :class:`fractions.Fraction`. Unbounded domain ends use
the float sentinels ``INF``/``NEG_INF``, which compare correctly against
fractions.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Union

INF = math.inf
NEG_INF = -math.inf

Bound = Union[Fraction, float]


def to_scalar(value) -> Fraction:
    """Coerce ``value`` to a Fraction without going through binary floats.

    Accepts Fractions, ints and strings such as ``"3/10"``, ``"-7"`` or ``"0.25"``.
    Python floats are rejected because they silently carry rounding error.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot build an exact scalar from {type(value).__name__} {value!r}")


def parse_bound(value) -> Bound:
    """Like :func:`to_scalar` but also understands ``"inf"``/``"-inf"``."""
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity"):
        return INF
    if isinstance(value, str) and value.strip().lower() in ("-inf", "-infinity"):
        return NEG_INF
    if isinstance(value, float) and math.isinf(value):
        return value
    return to_scalar(value)


def fmt(q: Bound) -> str:
    """Render an exact scalar as ``"p/q"`` (always with a denominator)."""
    if isinstance(q, float):
        if q == INF:
            return "inf"
        if q == NEG_INF:
            return "-inf"
        raise TypeError("finite floats are never serialized as exact scalars")
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def frac_part(q: Fraction) -> Fraction:
    """Representative of ``q`` modulo 1 in ``[0, 1)``."""
    return q - math.floor(q)


def bit_size(q: Fraction) -> int:
    return abs(q.numerator).bit_length() + q.denominator.bit_length()
