"""FresnelS and the cosine integral, plus the two slowly convergent displays.

Both special functions use a Maclaurin series below a switch point and the
standard asymptotic expansion above it, truncated at the smallest term.  The
switch points are chosen so the two branches overlap at better than 1e-20:
z_switch = 8 for FresnelS (asymptotic floor ~ e^{-pi z^2 / 2}) and 48 for the
cosine integral (floor ~ e^{-z}; the naive crossover at 20 only reaches ~1e-9).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, factorial

from mpmath import mp, mpf, log, sqrt, sin, cos, pi as mp_pi

from .bigreal import locked_workprec, to_mpf
from .constants import euler_gamma
from .engine import FormulaResult, Status

FRESNEL_Z_SWITCH = 8.0
COSINT_Z_SWITCH = 48.0


class SpecialFunctionError(ValueError):
    pass


@dataclass
class SlowSeriesRequest:
    formula: str                      # sqrt_fresnel | harmonic_cosint
    x: Fraction
    outer_terms: int = 1000
    precision_bits: int = 128

    def __post_init__(self):
        if self.formula not in ("sqrt_fresnel", "harmonic_cosint"):
            raise SpecialFunctionError(f"unknown slow formula: {self.formula}")
        if self.outer_terms < 1:
            raise SpecialFunctionError("outer_terms must be >= 1")
        if not isinstance(self.x, Fraction):
            self.x = Fraction(self.x)
        if self.x <= 0:
            raise SpecialFunctionError("x must be positive")


@locked_workprec
def fresnel_s(z, precision_bits: int = 128):
    """S(z) = int_0^z sin(pi t^2 / 2) dt, z >= 0."""
    zf = float(z)
    if zf < 0:
        raise SpecialFunctionError("fresnel_s requires z >= 0")
    if zf <= FRESNEL_Z_SWITCH:
        # series terms reach ~ e^{pi z^2 / 2} before decaying; pad for it
        pad = int(ceil(2.27 * zf * zf)) + 32
        with mp.workprec(precision_bits + pad):
            zv = to_mpf(z)
            u = mp_pi * zv**2 / 2
            total = mpf(0)
            term_pow = zv * u          # (pi/2) z^3
            n = 0
            while True:
                term = (-1) ** n * term_pow / (factorial(2 * n + 1) * (4 * n + 3))
                total += term
                if abs(term) < mpf(2) ** (-(precision_bits + 16)) * max(mpf(1), abs(total)):
                    break
                n += 1
                term_pow = term_pow * u * u
        with mp.workprec(precision_bits):
            return +total
    with mp.workprec(precision_bits + 32):
        zv = to_mpf(z)
        u = mp_pi * zv**2
        # f ~ (1/(pi z)) sum (-1)^n (4n-1)!!/u^{2n},
        # g ~ (1/(pi z)) sum (-1)^n (4n+1)!!/u^{2n+1}
        f = mpf(0)
        g = mpf(0)
        lead = 1 / (mp_pi * zv)
        cf = lead
        cg = lead / u
        n = 0
        prev = None
        while True:
            tf = (-1) ** n * _dfact(4 * n - 1) * cf
            tg = (-1) ** n * _dfact(4 * n + 1) * cg
            size = abs(tf) + abs(tg)
            if prev is not None and size > prev:
                break
            f += tf
            g += tg
            if size < mpf(2) ** (-(precision_bits + 16)) * lead:
                break
            prev = size
            cf /= u**2
            cg /= u**2
            n += 1
        arg = u / 2
        val = mpf(1) / 2 - f * cos(arg) - g * sin(arg)
    with mp.workprec(precision_bits):
        return +val


def _dfact(n: int) -> int:
    if n <= 0:
        return 1
    r = 1
    while n > 1:
        r *= n
        n -= 2
    return r


@locked_workprec
def cos_integral(z, precision_bits: int = 128):
    """Ci(z) = gamma + log z + int_0^z (cos t - 1)/t dt, z > 0."""
    zf = float(z)
    if zf <= 0:
        raise SpecialFunctionError("cos_integral requires z > 0")
    if zf <= COSINT_Z_SWITCH:
        pad = int(ceil(1.45 * zf)) + 32
        with mp.workprec(precision_bits + pad):
            zv = to_mpf(z)
            total = euler_gamma(precision_bits + pad) + log(zv)
            z2 = zv * zv
            term = mpf(1)
            n = 1
            while True:
                term = term * z2 / ((2 * n - 1) * (2 * n))
                inc = (-1) ** n * term / (2 * n)
                total += inc
                if abs(inc) < mpf(2) ** (-(precision_bits + 16)) * max(mpf(1), abs(total)):
                    break
                n += 1
        with mp.workprec(precision_bits):
            return +total
    with mp.workprec(precision_bits + 32):
        zv = to_mpf(z)
        f = mpf(0)
        g = mpf(0)
        cf = 1 / zv
        cg = 1 / zv**2
        n = 0
        prev = None
        while True:
            tf = (-1) ** n * mpf(factorial(2 * n)) * cf
            tg = (-1) ** n * mpf(factorial(2 * n + 1)) * cg
            size = abs(tf) + abs(tg)
            if prev is not None and size > prev:
                break
            f += tf
            g += tg
            if size < mpf(2) ** (-(precision_bits + 16)):
                break
            prev = size
            cf /= zv**2
            cg /= zv**2
            n += 1
        val = f * sin(zv) - g * cos(zv)
    with mp.workprec(precision_bits):
        return +val


def tail_bound(formula: str, x: Fraction, outer_terms: int) -> float:
    """Analytic bound on the omitted outer tail (documented, conservative).

    sqrt_fresnel: |S| <= 0.78 and sum_{k>K} k^{-3/2} <= 2/sqrt(K), giving
    0.78/(pi sqrt(K)).  harmonic_cosint: Ci(z) = sin(z)/z + O(1/z^2); the
    sin(2 pi k x)/k tail is Abel-bounded by 1/(K |sin(pi x)|) and vanishes
    identically when x is an integer or half-integer, and the 1/z^2 part
    contributes 4/((2 pi x)^2 K).
    """
    import math
    k = outer_terms
    if formula == "sqrt_fresnel":
        return 0.78 / math.pi / math.sqrt(k)
    x = Fraction(x)
    bound = 4.0 / (2 * math.pi * float(x)) ** 2 / k
    if x.denominator not in (1, 2):
        s = abs(math.sin(math.pi * float(x)))
        bound += 2.0 / (math.pi * float(x) * k * max(s, 1e-12))
    return bound


@locked_workprec
def evaluate_slow(req: SlowSeriesRequest) -> FormulaResult:
    """Evaluate the two slowly convergent displays by literal outer truncation.

    No convergence acceleration is applied; the error estimate is the first
    omitted outer term.
    """
    prec = req.precision_bits + 32
    with mp.workprec(prec):
        x = to_mpf(req.x)
        t = req.x - floor(req.x)
        mags = []
        if req.formula == "sqrt_fresnel":
            b1 = to_mpf(Fraction(t) - Fraction(1, 2))
            total = mpf(2) / 3 * x ** mpf("1.5") - sqrt(x) * b1
            sx = sqrt(x)
            for k in range(1, req.outer_terms + 1):
                term = -fresnel_s(2 * sqrt(mpf(k)) * sx, prec) / (2 * mp_pi * mpf(k) ** mpf("1.5"))
                total += term
                mags.append(abs(term))
            omitted = abs(fresnel_s(2 * sqrt(mpf(req.outer_terms + 1)) * sx, prec)
                          / (2 * mp_pi * mpf(req.outer_terms + 1) ** mpf("1.5")))
        else:
            total = log(x) + euler_gamma(prec)
            for k in range(1, req.outer_terms + 1):
                term = 2 * cos_integral(2 * mp_pi * k * x, prec)
                total += term
                mags.append(abs(term))
            omitted = abs(2 * cos_integral(2 * mp_pi * (req.outer_terms + 1) * x, prec))
    with mp.workprec(req.precision_bits):
        return FormulaResult(value=+total, orders_used=len(mags),
                             term_magnitudes=[+m for m in mags],
                             error_estimate=+omitted,
                             status=Status.MAX_ORDER_REACHED)
