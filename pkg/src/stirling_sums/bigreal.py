"""Precision plumbing: conversions between exact rationals and mpmath floats.

All floating-point work in this package goes through mpmath with an explicit
working precision in bits.  Exact quantities are `fractions.Fraction`; they are
converted to floats once, as late as possible.
"""
from __future__ import annotations

import math
import threading
from fractions import Fraction

from mpmath import mp, mpf, mpc

DEFAULT_PREC_BITS = 256

# mpmath's mp context holds one process-global precision; concurrent workprec
# blocks would corrupt each other, so every precision-sensitive entry point
# serializes on this reentrant lock.  Safety, not parallel speedup, is the
# concurrency contract.
PRECISION_LOCK = threading.RLock()


def locked_workprec(fn):
    """Decorator: run fn under PRECISION_LOCK."""
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with PRECISION_LOCK:
            return fn(*args, **kwargs)
    return wrapper


def to_mpf(value, prec_bits: int | None = None):
    """Convert Fraction/int/str/mpf to an mpf at the given precision.

    Fractions are converted as numerator/denominator so the only rounding is
    the final division.
    """
    with mp.workprec(prec_bits or mp.prec):
        if isinstance(value, Fraction):
            return mpf(value.numerator) / mpf(value.denominator)
        if isinstance(value, (mpf, mpc)):
            return value
        return mpf(value)


def parse_real(text: str) -> Fraction:
    """Parse a decimal string into an exact Fraction. Raises ValueError."""
    return Fraction(text.strip())


def parse_real_or_complex(text: str):
    """Parse `--m` style input: a decimal, or `RE+IMi` / `RE-IMi` literal.

    Returns a Fraction for real input, an (re, im) Fraction pair for complex.
    """
    s = text.strip().replace(" ", "")
    if s.endswith(("i", "I", "j", "J")):
        body = s[:-1]
        # split at the last +/- that is not the leading sign or an exponent sign
        for pos in range(len(body) - 1, 0, -1):
            if body[pos] in "+-" and body[pos - 1] not in "eE":
                re_part, im_part = body[:pos], body[pos:]
                if im_part in ("+", "-"):
                    im_part += "1"
                return (Fraction(re_part), Fraction(im_part))
        im_part = body if body not in ("", "+", "-") else body + "1"
        return (Fraction(0), Fraction(im_part))
    return Fraction(s)


def emit_digits(prec_bits: int) -> int:
    """Number of decimal digits emitted for a value computed at prec_bits.

    floor(prec_bits * log10(2)) - 2: never prints digits beyond guarantee.
    """
    return max(4, math.floor(prec_bits * math.log10(2)) - 2)


def format_decimal(value, prec_bits: int) -> str:
    """Render an mpf/mpc as a decimal string at the emission precision."""
    digits = emit_digits(prec_bits)
    with mp.workprec(prec_bits + 8):
        if isinstance(value, mpc) or (hasattr(value, "imag") and value.imag != 0):
            re = mp.nstr(value.real, digits, strip_zeros=False)
            im = mp.nstr(value.imag, digits, strip_zeros=False)
            sign = "+" if value.imag >= 0 else "-"
            return f"{re}{sign}{im.lstrip('-')}i"
        return mp.nstr(value, digits, strip_zeros=False)
