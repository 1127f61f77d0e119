"""Fixed-point rationals on the grid 2**-bits, and exact-ish logarithms.

All model arithmetic in this package is exact (Fraction).  Logarithms are
irrational, so log-odds coefficients are rounded once, deterministically, to
the nearest multiple of 2**-bits (ties to even).  Everything downstream of
that single rounding is again exact rational arithmetic.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath

from .errors import InputError

DEFAULT_GRID_BITS = 64


def quantize(x: Fraction, bits: int = DEFAULT_GRID_BITS) -> Fraction:
    """Round x to the nearest multiple of 2**-bits, ties to even."""
    scale = 1 << bits
    return Fraction(round(x * scale), scale)


def _log_prec(x: Fraction, bits: int) -> int:
    magnitude = x.numerator.bit_length() + x.denominator.bit_length()
    return bits + 96 + magnitude.bit_length()


def log_fixed(x: Fraction, bits: int = DEFAULT_GRID_BITS) -> Fraction:
    """Natural log of a positive rational, rounded to the 2**-bits grid.

    The working precision leaves ~90 guard bits beyond the grid, so the
    result is the correctly rounded grid value for any input this package
    produces (odds ratios of bounded-denominator CPT entries).
    """
    if x <= 0:
        raise InputError(f"log of non-positive value {x}")
    if x == 1:
        return Fraction(0)
    with mpmath.workprec(_log_prec(x, bits)):
        v = mpmath.log(mpmath.mpf(x.numerator)) - mpmath.log(mpmath.mpf(x.denominator))
        j = int(mpmath.nint(mpmath.ldexp(v, bits)))
    return Fraction(j, 1 << bits)


def log_units(x: Fraction, step: Fraction) -> int:
    """Nearest integer to log(x)/step for positive rational x and step."""
    if x <= 0:
        raise InputError(f"log of non-positive value {x}")
    if x == 1:
        return 0
    prec = _log_prec(x, max(step.denominator.bit_length(), 64))
    with mpmath.workprec(prec):
        v = mpmath.log(mpmath.mpf(x.numerator)) - mpmath.log(mpmath.mpf(x.denominator))
        q = v * mpmath.mpf(step.denominator) / mpmath.mpf(step.numerator)
        return int(mpmath.nint(q))


def exp_of(value: Fraction, prec: int = 160) -> mpmath.mpf:
    """exp(value) as an mpf at the given working precision."""
    with mpmath.workprec(prec):
        return mpmath.exp(mpmath.mpf(value.numerator) / mpmath.mpf(value.denominator))


def quantize_mpf(v, bits: int = DEFAULT_GRID_BITS) -> Fraction:
    """Round an mpf to the nearest multiple of 2**-bits."""
    with mpmath.workprec(mpmath.mp.prec + 16):
        j = int(mpmath.nint(mpmath.ldexp(v, bits)))
    return Fraction(j, 1 << bits)


def decimal_str(x: Fraction, bits: int = DEFAULT_GRID_BITS) -> str:
    """Exact decimal string for x, quantizing first if x is not terminating.

    Grid fractions (denominator a power of two) always terminate, so values
    produced by this package round-trip exactly through this encoding.
    """
    den = x.denominator
    twos = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    fives = 0
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        x = quantize(x, bits)
        return decimal_str(x, bits)
    digits = max(twos, fives)
    scaled = x.numerator * 10**digits // x.denominator
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    whole, frac = divmod(scaled, 10**digits)
    if digits == 0 or frac == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{str(frac).zfill(digits).rstrip('0')}"


def parse_fraction(text: str) -> Fraction:
    """Parse a decimal or num/den string into a Fraction."""
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"cannot parse rational from {text!r}") from exc
