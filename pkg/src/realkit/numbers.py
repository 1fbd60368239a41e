"""Exact rational parsing, formatting and guarded square roots.

All instance files carry numbers as decimal strings ("0.25") or fraction
strings ("1/3"); they are stored as `fractions.Fraction` so that strict
comparisons (d <= t versus d > t) never depend on binary rounding.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

from .errors import InvalidInstance

Rational = Fraction
Number = Union[int, float, Fraction]

INF = math.inf


def parse_rational(value, where: str = "value") -> Fraction:
    """Parse a decimal or fraction string (or int) to an exact Fraction.

    Bare floats are rejected: instance files must use strings to keep
    exactness explicit.
    """
    if isinstance(value, bool):
        raise InvalidInstance(f"{where}: expected a number string, got a bool")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise InvalidInstance(
            f"{where}: floats are not accepted in instance files; "
            f"write the number as a decimal string"
        )
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInstance(f"{where}: cannot parse {value!r} as a rational") from exc
    raise InvalidInstance(f"{where}: cannot parse {type(value).__name__} as a rational")


def format_rational(x) -> str:
    """Format exactly: terminating decimal when possible, else 'p/q'."""
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    if isinstance(x, float):
        x = Fraction(x)
    x = Fraction(x)
    num, den = x.numerator, x.denominator
    if den == 1:
        return str(num)
    # denominator 2^a * 5^b terminates in base 10
    d = den
    twos = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    fives = 0
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{num}/{den}"
    digits = max(twos, fives)
    scaled = num * 10**digits // den
    sign = "-" if scaled < 0 else ""
    s = str(abs(scaled)).rjust(digits + 1, "0")
    return f"{sign}{s[:-digits]}.{s[-digits:]}" if digits else f"{sign}{s}"


def to_float(x) -> float:
    if isinstance(x, Fraction):
        return x.numerator / x.denominator
    return float(x)


def sqrt_interval(x: Fraction, bits: int = 96) -> tuple[Fraction, Fraction]:
    """Enclosing interval [lo, hi] for sqrt(x), width below 2**-bits relative.

    Used where a Euclidean norm of rational points is irrational; verdicts
    are drawn only when the whole interval lies on one side of the bound.
    """
    if x < 0:
        raise ValueError("sqrt of negative rational")
    if x == 0:
        return Fraction(0), Fraction(0)
    p, q = x.numerator, x.denominator
    # sqrt(p/q) = isqrt(p*q*4^k) / (q*2^k) up to one ulp; exact on squares
    scale = 1 << bits
    n = p * q * scale * scale
    r = math.isqrt(n)
    if r * r == n:
        exact = Fraction(r, q * scale)
        return exact, exact
    lo = Fraction(r, q * scale)
    hi = Fraction(r + 1, q * scale)
    return lo, hi


def norm_sq(point: tuple[Fraction, ...], other: tuple[Fraction, ...] | None = None) -> Fraction:
    """Squared Euclidean distance between rational points (exact)."""
    if other is None:
        return sum((c * c for c in point), Fraction(0))
    if len(point) != len(other):
        raise InvalidInstance("points of different dimension")
    return sum(((a - b) * (a - b) for a, b in zip(point, other)), Fraction(0))


def pow_neg_half_d(sq: Fraction, d: int) -> tuple:
    """Interval for sq**(-d/2), i.e. ||.||^{-d} given the squared norm.

    Exact single value (lo == hi) when d is even; a tight enclosure when d
    is odd. sq == 0 maps to +inf.
    """
    if sq < 0:
        raise ValueError("negative squared norm")
    if sq == 0:
        return (INF, INF)
    if d % 2 == 0:
        v = sq ** (-(d // 2))
        return (v, v)
    lo, hi = sqrt_interval(sq**d)
    return (1 / hi, 1 / lo)


def compare_rational_to_sqrt(q: Fraction, s_sq: Fraction) -> int:
    """Sign of (q - sqrt(s_sq)) computed exactly: -1, 0 or +1."""
    if s_sq < 0:
        raise ValueError("negative radicand")
    if q < 0:
        return 0 if (q == 0 and s_sq == 0) else -1
    left = q * q
    if left == s_sq:
        return 0
    return 1 if left > s_sq else -1
