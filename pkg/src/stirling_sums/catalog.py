"""The formula catalog: every summation display, individually addressable.

Each formula is

    sum-side(x)  =  closed(x, {x})  +  sum_over_series prefactor * factorial-series

and is evaluated through the Weniger engine.  Factorial series of this kind
converge polynomially, like k^-(x+const), so the evaluator shifts the argument
to x+j (an integer shift keeps {x} unchanged), evaluates there, and subtracts
the j direct summands; errors then fall below adaptive tolerances within the
default order budget.  Geometric families instead move the argument *toward* a
small evaluation point, where their inner coefficients x^l log(a)^l stay
tractable.  `shift=0` evaluates the raw display (used by convergence studies).

Inner sums are exact rationals whenever the coefficient weights are rational
(all Bernoulli/Euler-polynomial families, and Faulhaber with rational m).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial, floor
from typing import Callable, Optional

from mpmath import mp, mpf, mpc, log, sqrt, exp, e as mp_e, pi as mp_pi

from .bigreal import locked_workprec, to_mpf
from .combinatorics import (
    RationalPolynomial,
    bernoulli_polynomial,
    bernoulli_poly_at,
    euler_polynomial,
    euler_poly_at,
    double_factorial_odd,
    generalized_binomial,
    shared_stirling_table,
)
from .constants import (
    euler_gamma,
    eta_neg_int_exact,
    stieltjes_1,
    zeta_em,
    zeta_neg_int_exact,
    zeta_prime,
)
from .engine import (
    CoefficientSeries,
    FactorialSeriesTerm,
    FormulaResult,
    Status,
    TruncationPolicy,
    adaptive_truncate,
    weniger_transform,
)


class ParameterError(ValueError):
    pass


class CapabilityError(ValueError):
    pass


# ---------------------------------------------------------------------------
# identifiers and requests
# ---------------------------------------------------------------------------

FAMILY_ORDER = [
    # power-sum, logarithmic and alternating families
    "harmonic", "zeta2", "zeta3", "sqrt", "k_sqrt", "k2_sqrt", "inv_sqrt",
    "zeta_3_2", "zeta_5_2", "faulhaber_ext", "faulhaber_int", "log_factorial",
    "k_log_k", "logk_over_k", "logk_over_k2", "log_squared", "gregory_leibniz",
    "alt_harmonic",
    # finite, geometric, special and slow families
    "alt_faulhaber_finite", "alt_faulhaber_gen", "geometric_stirling",
    "alt_geometric_stirling", "geometric_em", "alt_geometric_em",
    "exp_geometric", "self_counting", "sqrt_fresnel", "harmonic_cosint",
]

VARIANT_COUNT = {
    "harmonic": 2, "zeta2": 2, "zeta3": 2, "sqrt": 3, "k_sqrt": 3, "k2_sqrt": 3,
    "inv_sqrt": 2, "zeta_3_2": 2, "zeta_5_2": 2, "faulhaber_ext": 3,
    "faulhaber_int": 3, "log_factorial": 3, "k_log_k": 2, "logk_over_k": 1,
    "logk_over_k2": 1, "log_squared": 1, "gregory_leibniz": 1, "alt_harmonic": 1,
    "alt_faulhaber_finite": 1, "alt_faulhaber_gen": 1, "geometric_stirling": 1,
    "alt_geometric_stirling": 1, "geometric_em": 1, "alt_geometric_em": 1,
    "exp_geometric": 1, "self_counting": 1, "sqrt_fresnel": 1, "harmonic_cosint": 1,
}

NEEDS_M = {"faulhaber_ext", "faulhaber_int", "alt_faulhaber_finite", "alt_faulhaber_gen"}
NEEDS_A = {"geometric_stirling", "alt_geometric_stirling", "geometric_em", "alt_geometric_em"}
SLOW_FAMILIES = {"sqrt_fresnel", "harmonic_cosint"}
GEOMETRIC_STIRLING = {"geometric_stirling", "alt_geometric_stirling"}
EM_SERIES_FAMILIES = {"geometric_em", "alt_geometric_em", "exp_geometric"}
# families whose display is a Weniger factorial series
STIRLING_SERIES_FAMILIES = [
    f for f in FAMILY_ORDER
    if f not in SLOW_FAMILIES | EM_SERIES_FAMILIES | {"self_counting", "alt_faulhaber_finite"}
]


@dataclass(frozen=True)
class FormulaId:
    family: str
    variant: int = 1

    def __post_init__(self):
        if self.family not in VARIANT_COUNT:
            raise ParameterError(f"unknown formula family: {self.family}")
        if not (1 <= self.variant <= VARIANT_COUNT[self.family]):
            raise ParameterError(
                f"{self.family} has variants 1..{VARIANT_COUNT[self.family]}, got {self.variant}")

    def __str__(self):
        return f"{self.family}.v{self.variant}"

    @classmethod
    def parse(cls, text: str) -> "FormulaId":
        text = text.strip()
        if "." in text:
            fam, _, v = text.partition(".")
            if not v.startswith("v"):
                raise ParameterError(f"bad formula id: {text!r} (want family.vN)")
            try:
                return cls(fam, int(v[1:]))
            except ValueError as exc:
                raise ParameterError(f"bad formula id: {text!r}") from exc
        return cls(text, 1)


def all_formula_ids() -> list[FormulaId]:
    out = []
    for fam in FAMILY_ORDER:
        for v in range(1, VARIANT_COUNT[fam] + 1):
            out.append(FormulaId(fam, v))
    return out


@dataclass
class EvalRequest:
    formula: FormulaId
    x: Fraction
    m: object = None                     # Fraction, float/mpf, (re, im) pair, or mpc
    a: Optional[Fraction] = None
    precision_bits: int = 256
    policy: Optional[TruncationPolicy] = None
    shift: Optional[int] = None          # None = automatic, 0 = raw display
    outer_terms: int = 1000              # slow formulas only

    def __post_init__(self):
        if not isinstance(self.x, Fraction):
            self.x = Fraction(self.x)
        if self.x <= 0:
            raise ParameterError("x must be positive")
        fam = self.formula.family
        if fam in NEEDS_M:
            if self.m is None:
                raise ParameterError(f"{fam} requires the exponent parameter m")
            if isinstance(self.m, tuple):
                re, im = self.m
                self.m = Fraction(re) if im == 0 else mpc(to_mpf(Fraction(re)), to_mpf(Fraction(im)))
            if isinstance(self.m, (int, float)) and not isinstance(self.m, bool):
                self.m = Fraction(self.m)
            if not isinstance(self.m, mpc) and Fraction(self.m) == -1:
                raise ParameterError("m must not equal -1")
            if fam == "alt_faulhaber_finite":
                if isinstance(self.m, mpc) or Fraction(self.m).denominator != 1 or self.m < 0:
                    raise ParameterError("alt_faulhaber_finite requires integer m >= 0")
            if fam in ("faulhaber_ext", "faulhaber_int") and self.formula.variant == 3:
                if isinstance(self.m, mpc):
                    raise CapabilityError("the floor/ceiling Faulhaber variant needs real m")
                if self.m < -1:
                    # floor(m+1) < 0 would ask for negative-order Bernoulli
                    # polynomials; the display is only well-formed for m > -1
                    raise ParameterError("the floor/ceiling Faulhaber variant needs m > -1")
        elif self.m is not None:
            raise ParameterError(f"{fam} takes no exponent parameter")
        if fam in NEEDS_A:
            if self.a is None:
                raise ParameterError(f"{fam} requires the base parameter a")
            self.a = Fraction(self.a)
            if self.a <= 0:
                raise ParameterError("a must be positive (real a^x needs log a real)")
            if fam in ("geometric_stirling", "geometric_em") and self.a == 1:
                raise ParameterError("a must not equal 1")
            if fam == "alt_geometric_em" and self.a == 1:
                raise ParameterError("a = 1 is outside the alternating EM display (log(a)^-1 term)")
            if fam in ("geometric_em", "alt_geometric_em"):
                import math as _math
                if not (_math.exp(-2 * _math.pi) < float(self.a) < _math.exp(2 * _math.pi)):
                    raise ParameterError("EM geometric forms need exp(-2 pi) < a < exp(2 pi)")
        elif self.a is not None:
            raise ParameterError(f"{fam} takes no base parameter")
        if fam in ("faulhaber_int",) and self.x.denominator != 1:
            raise ParameterError("faulhaber_int is the integer-argument family; x must be an integer")
        if self.outer_terms < 1:
            raise ParameterError("outer_terms must be >= 1")


# ---------------------------------------------------------------------------
# evaluation context
# ---------------------------------------------------------------------------

@dataclass
class _Ctx:
    x: object               # mpf of the (shifted) argument
    t: Fraction              # fractional part {x}
    floor_x: int
    prec: int               # working precision in bits
    m: object = None
    a: Optional[Fraction] = None

    def const_zeta(self, s):
        return zeta_em(s, self.prec)

    @property
    def log_x(self):
        return log(self.x)

    @property
    def sqrt_x(self):
        return sqrt(self.x)

    @property
    def parity(self):
        return mpf((-1) ** self.floor_x)

    def bern(self, n: int):
        return to_mpf(bernoulli_poly_at(n, self.t))

    def m_mpf(self):
        if isinstance(self.m, Fraction):
            return to_mpf(self.m)
        return self.m

    def pow_x(self, expo):
        if isinstance(expo, mpc):
            return self.x ** expo
        return self.x ** to_mpf(expo)


@dataclass
class _Series:
    outer: int                               # +1 for (-1)^k, -1 for (-1)^{k+1}
    prefactor: Callable[[_Ctx], object]
    denom: str                               # 'x' | 'x+1' | '2x+1'
    start: int
    coeff: Callable[[_Ctx], Callable[[int], object]]   # l -> Fraction | mpf | mpc
    exact: bool = True


@dataclass
class _Family:
    description: str
    constants: list[str]
    lhs_start: int                            # brute-force start index
    closed: Optional[Callable[[_Ctx, int], object]] = None      # (ctx, variant)
    series: Optional[Callable[[_Ctx, int], list[_Series]]] = None
    shift_mode: str = "stirling"              # stirling | geometric | none
    summand_exact: Optional[Callable[[int, EvalRequest], Optional[Fraction]]] = None
    summand_float: Optional[Callable[[int, EvalRequest, int], object]] = None


def _w_dfact(offset: int, pow2: int, fact_shift: int):
    """weights (2l+offset)!! / (2^(l+pow2) (l+fact_shift)!) as exact Fractions"""
    def w(l: int) -> Fraction:
        return (double_factorial_odd(2 * l + offset)
                / (Fraction(2) ** (l + pow2)) / factorial(l + fact_shift))
    return w


def _bern_series(weight: Callable[[int], Fraction], shift: int):
    """coefficient builder: a_l = weight(l) * B_{l+shift}({x})"""
    def build(ctx: _Ctx):
        t = ctx.t
        def a(l: int) -> Fraction:
            w = weight(l)
            return w * bernoulli_poly_at(l + shift, t) if w else Fraction(0)
        return a
    return build


def _euler_series(weight: Callable[[int], Fraction], shift: int = 0):
    def build(ctx: _Ctx):
        t = ctx.t
        def a(l: int) -> Fraction:
            w = weight(l)
            return w * euler_poly_at(l + shift, t) if w else Fraction(0)
        return a
    return build


_half = Fraction(1, 2)

# numerator-polynomial metadata: family -> variant -> (outer, kind, shift, weight, start)
_NUMERATOR_META: dict[str, dict[int, tuple]] = {}


def _register_numer(family, variant, outer, kind, shift, weight, start=1):
    _NUMERATOR_META.setdefault(family, {})[variant] = (outer, kind, shift, weight, start)


# ---------------------------------------------------------------------------
# family definitions
# ---------------------------------------------------------------------------

FAMILIES: dict[str, _Family] = {}


def _def_family(name, **kw):
    FAMILIES[name] = _Family(**kw)


# -- harmonic ---------------------------------------------------------------

def _harmonic_closed(ctx, v):
    base = ctx.log_x + euler_gamma(ctx.prec)
    if v == 1:
        base -= ctx.bern(1) / ctx.x
    return base


def _harmonic_series(ctx, v):
    if v == 1:
        return [_Series(-1, lambda c: mpf(1), "x", 1,
                        _bern_series(lambda l: Fraction(1, l + 1), 1))]
    return [_Series(-1, lambda c: mpf(1), "x+1", 1,
                    _bern_series(lambda l: Fraction(1, l), 0))]


_def_family("harmonic", description="partial sums of the harmonic series",
            constants=["euler_gamma"], lhs_start=1,
            closed=_harmonic_closed, series=_harmonic_series,
            summand_exact=lambda k, r: Fraction(1, k))
_register_numer("harmonic", 1, -1, "B", 1, lambda l: Fraction(1, l + 1))
_register_numer("harmonic", 2, -1, "B", 0, lambda l: Fraction(1, l))


# -- zeta2 / zeta3 ----------------------------------------------------------

def _zeta2_closed(ctx, v):
    base = ctx.const_zeta(2) - 1 / ctx.x
    if v == 1:
        base -= ctx.bern(1) / ctx.x**2
    return base


def _zeta2_series(ctx, v):
    if v == 1:
        return [_Series(-1, lambda c: 1 / c.x, "x", 1,
                        _bern_series(lambda l: Fraction(1), 1))]
    return [_Series(-1, lambda c: mpf(1), "x", 1,
                    _bern_series(lambda l: Fraction(1), 0))]


_def_family("zeta2", description="partial sums of zeta(2)",
            constants=["zeta(2)"], lhs_start=1,
            closed=_zeta2_closed, series=_zeta2_series,
            summand_exact=lambda k, r: Fraction(1, k * k))
_register_numer("zeta2", 1, -1, "B", 1, lambda l: Fraction(1))
_register_numer("zeta2", 2, -1, "B", 0, lambda l: Fraction(1))


def _zeta3_closed(ctx, v):
    base = ctx.const_zeta(3) - 1 / (2 * ctx.x**2)
    if v == 1:
        base -= ctx.bern(1) / ctx.x**3
    return base


def _zeta3_series(ctx, v):
    if v == 1:
        return [_Series(-1, lambda c: 1 / (2 * c.x**2), "x", 1,
                        _bern_series(lambda l: Fraction(l + 2), 1))]
    return [_Series(-1, lambda c: 1 / (2 * c.x), "x", 1,
                    _bern_series(lambda l: Fraction(l + 1), 0))]


_def_family("zeta3", description="partial sums of zeta(3)",
            constants=["zeta(3)"], lhs_start=1,
            closed=_zeta3_closed, series=_zeta3_series,
            summand_exact=lambda k, r: Fraction(1, k**3))
_register_numer("zeta3", 1, -1, "B", 1, lambda l: Fraction(l + 2))
_register_numer("zeta3", 2, -1, "B", 0, lambda l: Fraction(l + 1))


# -- square-root families ----------------------------------------------------

def _sqrt_closed(ctx, v):
    base = mpf(2) / 3 * ctx.pow_x(Fraction(3, 2)) - ctx.const_zeta(Fraction(3, 2)) / (4 * mp_pi)
    if v in (1, 2):
        base -= ctx.sqrt_x * ctx.bern(1)
    if v == 2:
        base += ctx.bern(2) / (4 * ctx.sqrt_x)
    return base


def _sqrt_series(ctx, v):
    if v == 1:
        return [_Series(+1, lambda c: c.sqrt_x, "x+1", 1,
                        _bern_series(_w_dfact(-3, 0, 1), 1))]
    if v == 2:
        return [_Series(+1, lambda c: 1 / c.sqrt_x, "x+1", 1,
                        _bern_series(_w_dfact(-1, 1, 2), 2))]
    return [_Series(+1, lambda c: c.x * c.sqrt_x, "x+1", 1,
                    _bern_series(_w_dfact(-5, -1, 0), 0))]


_def_family("sqrt", description="sum of square roots",
            constants=["zeta(3/2)", "pi"], lhs_start=0,
            closed=_sqrt_closed, series=_sqrt_series,
            summand_float=lambda k, r, prec: sqrt(mpf(k)))
_register_numer("sqrt", 1, +1, "B", 1, _w_dfact(-3, 0, 1))
_register_numer("sqrt", 2, +1, "B", 2, _w_dfact(-1, 1, 2))
_register_numer("sqrt", 3, +1, "B", 0, _w_dfact(-5, -1, 0))


def _k_sqrt_closed(ctx, v):
    base = (mpf(2) / 5 * ctx.pow_x(Fraction(5, 2))
            - 3 * ctx.const_zeta(Fraction(5, 2)) / (16 * mp_pi**2))
    if v in (1, 2):
        base -= ctx.pow_x(Fraction(3, 2)) * ctx.bern(1)
    if v == 2:
        # B3 coefficient 1/(8 sqrt x): the k=3 Euler-Maclaurin term of t^{3/2}
        base += mpf(3) / 4 * ctx.sqrt_x * ctx.bern(2) - ctx.bern(3) / (8 * ctx.sqrt_x)
    return base


def _k_sqrt_series(ctx, v):
    if v == 1:
        return [_Series(-1, lambda c: mpf(3) / 2 * c.pow_x(Fraction(3, 2)), "x+1", 1,
                        _bern_series(_w_dfact(-5, -1, 1), 1))]
    if v == 2:
        return [_Series(-1, lambda c: mpf(3) / 2 / c.sqrt_x, "x+1", 1,
                        _bern_series(_w_dfact(-1, 1, 3), 3))]
    return [_Series(-1, lambda c: mpf(3) / 2 * c.pow_x(Fraction(5, 2)), "x+1", 1,
                    _bern_series(_w_dfact(-7, -2, 0), 0))]


_def_family("k_sqrt", description="partial sums of zeta(-3/2): sum of k*sqrt(k)",
            constants=["zeta(5/2)", "pi"], lhs_start=0,
            closed=_k_sqrt_closed, series=_k_sqrt_series,
            summand_float=lambda k, r, prec: mpf(k) * sqrt(mpf(k)))
_register_numer("k_sqrt", 1, -1, "B", 1, _w_dfact(-5, -1, 1))
_register_numer("k_sqrt", 2, -1, "B", 3, _w_dfact(-1, 1, 3))
_register_numer("k_sqrt", 3, -1, "B", 0, _w_dfact(-7, -2, 0))


def _k2_sqrt_closed(ctx, v):
    base = (mpf(2) / 7 * ctx.pow_x(Fraction(7, 2))
            + 15 * ctx.const_zeta(Fraction(7, 2)) / (64 * mp_pi**3))
    if v in (1, 2):
        base -= ctx.pow_x(Fraction(5, 2)) * ctx.bern(1)
    if v == 2:
        base += (mpf(5) / 4 * ctx.pow_x(Fraction(3, 2)) * ctx.bern(2)
                 - mpf(5) / 8 * ctx.sqrt_x * ctx.bern(3)
                 + 5 * ctx.bern(4) / (64 * ctx.sqrt_x))
    return base


def _k2_sqrt_series(ctx, v):
    if v == 1:
        return [_Series(+1, lambda c: mpf(15) / 4 * c.pow_x(Fraction(5, 2)), "x+1", 1,
                        _bern_series(_w_dfact(-7, -2, 1), 1))]
    if v == 2:
        return [_Series(+1, lambda c: mpf(15) / 4 / c.sqrt_x, "x+1", 1,
                        _bern_series(_w_dfact(-1, 1, 4), 4))]
    return [_Series(+1, lambda c: mpf(15) / 4 * c.pow_x(Fraction(7, 2)), "x+1", 1,
                    _bern_series(_w_dfact(-9, -3, 0), 0))]


_def_family("k2_sqrt", description="partial sums of zeta(-5/2): sum of k^2*sqrt(k)",
            constants=["zeta(7/2)", "pi"], lhs_start=0,
            closed=_k2_sqrt_closed, series=_k2_sqrt_series,
            summand_float=lambda k, r, prec: mpf(k) ** 2 * sqrt(mpf(k)))
_register_numer("k2_sqrt", 1, +1, "B", 1, _w_dfact(-7, -2, 1))
_register_numer("k2_sqrt", 2, +1, "B", 4, _w_dfact(-1, 1, 4))
_register_numer("k2_sqrt", 3, +1, "B", 0, _w_dfact(-9, -3, 0))


def _inv_sqrt_closed(ctx, v):
    base = 2 * ctx.sqrt_x + ctx.const_zeta(_half)
    if v == 1:
        base -= ctx.bern(1) / ctx.sqrt_x
    return base


def _inv_sqrt_series(ctx, v):
    if v == 1:
        return [_Series(-1, lambda c: 1 / c.sqrt_x, "x+1", 1,
                        _bern_series(_w_dfact(-1, 0, 1), 1))]
    return [_Series(-1, lambda c: c.sqrt_x, "x+1", 1,
                    _bern_series(_w_dfact(-3, -1, 0), 0))]


_def_family("inv_sqrt", description="sum of inverse square roots",
            constants=["zeta(1/2)"], lhs_start=1,
            closed=_inv_sqrt_closed, series=_inv_sqrt_series,
            summand_float=lambda k, r, prec: 1 / sqrt(mpf(k)))
_register_numer("inv_sqrt", 1, -1, "B", 1, _w_dfact(-1, 0, 1))
_register_numer("inv_sqrt", 2, -1, "B", 0, _w_dfact(-3, -1, 0))


def _zeta32_closed(ctx, v):
    base = ctx.const_zeta(Fraction(3, 2)) - 2 / ctx.sqrt_x
    if v == 1:
        base -= ctx.bern(1) / ctx.pow_x(Fraction(3, 2))
    return base


def _zeta32_series(ctx, v):
    if v == 1:
        return [_Series(-1, lambda c: 2 / c.sqrt_x, "x", 1,
                        _bern_series(_w_dfact(+1, 1, 1), 1))]
    return [_Series(-1, lambda c: 2 / c.sqrt_x, "x+1", 1,
                    _bern_series(_w_dfact(-1, 0, 0), 0))]


_def_family("zeta_3_2", description="partial sums of zeta(3/2)",
            constants=["zeta(3/2)"], lhs_start=1,
            closed=_zeta32_closed, series=_zeta32_series,
            summand_float=lambda k, r, prec: 1 / (mpf(k) * sqrt(mpf(k))))
_register_numer("zeta_3_2", 1, -1, "B", 1, _w_dfact(+1, 1, 1))
_register_numer("zeta_3_2", 2, -1, "B", 0, _w_dfact(-1, 0, 0))


def _zeta52_closed(ctx, v):
    base = ctx.const_zeta(Fraction(5, 2)) - 2 / (3 * ctx.pow_x(Fraction(3, 2)))
    if v == 1:
        base -= ctx.bern(1) / ctx.pow_x(Fraction(5, 2))
    return base


def _zeta52_series(ctx, v):
    if v == 1:
        return [_Series(-1, lambda c: 4 / (3 * c.pow_x(Fraction(3, 2))), "x", 1,
                        _bern_series(_w_dfact(+3, 2, 1), 1))]
    return [_Series(-1, lambda c: 4 / (3 * c.sqrt_x), "x", 1,
                    _bern_series(_w_dfact(+1, 1, 0), 0))]


_def_family("zeta_5_2", description="partial sums of zeta(5/2)",
            constants=["zeta(5/2)"], lhs_start=1,
            closed=_zeta52_closed, series=_zeta52_series,
            summand_float=lambda k, r, prec: 1 / (mpf(k) ** 2 * sqrt(mpf(k))))
_register_numer("zeta_5_2", 1, -1, "B", 1, _w_dfact(+3, 2, 1))
_register_numer("zeta_5_2", 2, -1, "B", 0, _w_dfact(+1, 1, 0))


# -- Faulhaber families -------------------------------------------------------

def _zeta_neg_m(ctx):
    m = ctx.m
    if isinstance(m, Fraction) and m.denominator == 1 and m >= 0:
        return to_mpf(zeta_neg_int_exact(int(m)))
    if isinstance(m, Fraction):
        return zeta_em(-m, ctx.prec)
    return zeta_em(-m, ctx.prec)


def _faulhaber_binom(m, upper_shift: int):
    """l -> C(m+1, l+upper_shift); exact for rational m."""
    if isinstance(m, Fraction):
        return lambda l: generalized_binomial(m + 1, l + upper_shift)
    return lambda l: generalized_binomial(m + 1, l + upper_shift)


def _faulhaber_q(m: Fraction) -> int:
    # index shift of the third display; floor(m+1)+1 makes integer m terminate
    return floor(m + 1) + 1


def _faulhaber_closed(ctx, v):
    m = ctx.m
    mv = ctx.m_mpf()
    base = ctx.pow_x(m + 1) / (mv + 1) + _zeta_neg_m(ctx)
    if v == 2:
        base -= ctx.pow_x(m) * ctx.bern(1)
    if v == 3:
        extra = mpf(0)
        for k in range(1, floor(m + 1) + 1):
            extra += ((-1) ** k * to_mpf(generalized_binomial(m + 1, k))
                      * ctx.bern(k) * ctx.pow_x(m - k + 1))
        base += extra / (mv + 1)
    return base


def _faulhaber_series(ctx, v):
    m = ctx.m
    exact = isinstance(m, Fraction)
    bin_ = _faulhaber_binom(m, 0)
    if v == 1:
        def coeff(c):
            t = c.t
            def a(l):
                b = bin_(l)
                if not b:
                    return Fraction(0) if exact else mpf(0)
                val = (-1) ** l * b
                bp = bernoulli_poly_at(l, t)
                return val * bp if exact else val * to_mpf(bp)
            return a
        return [_Series(+1, lambda c: c.pow_x(m + 1) / (c.m_mpf() + 1), "x+1", 1, coeff, exact)]
    if v == 2:
        bin1 = _faulhaber_binom(m, 1)
        def coeff2(c):
            t = c.t
            def a(l):
                b = bin1(l)
                if not b:
                    return Fraction(0) if exact else mpf(0)
                val = (-1) ** l * b
                bp = bernoulli_poly_at(l + 1, t)
                return val * bp if exact else val * to_mpf(bp)
            return a
        return [_Series(-1, lambda c: c.pow_x(m) / (c.m_mpf() + 1), "x+1", 1, coeff2, exact)]
    q = _faulhaber_q(m)
    binq = _faulhaber_binom(m, q - 1)
    def coeff3(c):
        t = c.t
        def a(l):
            b = binq(l)
            if not b:
                return Fraction(0) if exact else mpf(0)
            val = (-1) ** l * b
            bp = bernoulli_poly_at(l + q - 1, t)
            return val * bp if exact else val * to_mpf(bp)
        return a
    return [_Series(-1, lambda c: mpf((-1) ** q) * c.pow_x(m - q + 2) / (c.m_mpf() + 1),
                    "x+1", 1, coeff3, exact)]


def _faulhaber_summand_exact(k, req):
    m = req.m
    if isinstance(m, Fraction) and m.denominator == 1:
        return Fraction(k) ** int(m)
    return None


def _faulhaber_summand_float(k, req, prec):
    m = req.m
    if isinstance(m, mpc):
        return mpc(k) ** m
    return mpf(k) ** to_mpf(m)


_def_family("faulhaber_ext", description="extended generalized Faulhaber formula, real x, complex m != -1",
            constants=["zeta(-m)"], lhs_start=1,
            closed=_faulhaber_closed, series=_faulhaber_series,
            summand_exact=_faulhaber_summand_exact, summand_float=_faulhaber_summand_float)

_def_family("faulhaber_int", description="generalized Faulhaber formula at integer arguments",
            constants=["zeta(-m)"], lhs_start=1,
            closed=_faulhaber_closed, series=_faulhaber_series,
            summand_exact=_faulhaber_summand_exact, summand_float=_faulhaber_summand_float)


# -- logarithmic families -----------------------------------------------------

def _log_factorial_closed(ctx, v):
    base = (ctx.x * ctx.log_x - ctx.x + log(2 * mp_pi) / 2 - ctx.log_x * ctx.bern(1))
    if v == 2:
        base += ctx.bern(2) / (2 * ctx.x)
    return base


def _log_factorial_series(ctx, v):
    if v == 1:
        return [_Series(+1, lambda c: mpf(1), "x+1", 1,
                        _bern_series(lambda l: Fraction(1, l * (l + 1)), 1))]
    if v == 2:
        return [_Series(+1, lambda c: mpf(1), "x", 1,
                        _bern_series(lambda l: Fraction(1, (l + 1) * (l + 2)), 2))]
    return [_Series(+1, lambda c: c.x, "x+1", 1,
                    _bern_series(lambda l: Fraction(1, l * (l - 1)) if l >= 2 else Fraction(0), 0))]


_def_family("log_factorial", description="convergent Stirling's formula: sum of log k",
            constants=["log_two_pi"], lhs_start=1,
            closed=_log_factorial_closed, series=_log_factorial_series,
            summand_float=lambda k, r, prec: log(mpf(k)))
_register_numer("log_factorial", 1, +1, "B", 1, lambda l: Fraction(1, l * (l + 1)))
_register_numer("log_factorial", 2, +1, "B", 2, lambda l: Fraction(1, (l + 1) * (l + 2)))
_register_numer("log_factorial", 3, +1, "B", 0,
                lambda l: Fraction(1, l * (l - 1)) if l >= 2 else Fraction(0))


def _k_log_k_closed(ctx, v):
    # the k=2 correction of t log t carries derivative log x + 1, giving the
    # closed term (log x + 1) B2({x})/2
    base = (ctx.x**2 * ctx.log_x / 2 - ctx.x**2 / 4 - zeta_prime(Fraction(-1), ctx.prec)
            - ctx.x * ctx.log_x * ctx.bern(1) + (ctx.log_x + 1) * ctx.bern(2) / 2)
    if v == 2:
        base -= ctx.bern(3) / (6 * ctx.x)
    return base


def _k_log_k_series(ctx, v):
    if v == 1:
        return [_Series(-1, lambda c: mpf(1), "x+1", 1,
                        _bern_series(lambda l: Fraction(1, l * (l + 1) * (l + 2)), 2))]
    return [_Series(-1, lambda c: mpf(1), "x", 1,
                    _bern_series(lambda l: Fraction(1, (l + 1) * (l + 2) * (l + 3)), 3))]


_def_family("k_log_k", description="sum of k log k (Glaisher-type)",
            constants=["zeta_prime(-1)"], lhs_start=1,
            closed=_k_log_k_closed, series=_k_log_k_series,
            summand_float=lambda k, r, prec: mpf(k) * log(mpf(k)))
_register_numer("k_log_k", 1, -1, "B", 2, lambda l: Fraction(1, l * (l + 1) * (l + 2)))
_register_numer("k_log_k", 2, -1, "B", 3, lambda l: Fraction(1, (l + 1) * (l + 2) * (l + 3)))


def stirling_column_two(l: int) -> int:
    """S_{l+1}^{(1)}(2): the log-family inner factor."""
    return shared_stirling_table(max(l + 1, 8)).value(l + 1, 2)


def log_weight_harmonic(l: int) -> Fraction:
    """sum_{m=0}^{l-1} (m+1)/(l-m), the third-log-family inner weight."""
    return sum((Fraction(m + 1, l - m) for m in range(l)), Fraction(0))


def _logk_over_k_closed(ctx, v):
    return (ctx.log_x**2 / 2 + stieltjes_1(ctx.prec) - ctx.log_x / ctx.x * ctx.bern(1))


def _logk_over_k_series(ctx, v):
    # sign pattern from the Euler-Maclaurin derivation of f = log t / t
    # (derivatives ((-1)^j j! log t + S_{j+1}(2)) / t^{j+1})
    return [
        _Series(-1, lambda c: mpf(1), "x", 1,
                _bern_series(lambda l: Fraction((-1) ** l * stirling_column_two(l),
                                                factorial(l + 1)), 1)),
        _Series(-1, lambda c: c.log_x, "x", 1,
                _bern_series(lambda l: Fraction(1, l + 1), 1)),
    ]


_def_family("logk_over_k", description="sum of log k / k",
            constants=["stieltjes_1"], lhs_start=1,
            closed=_logk_over_k_closed, series=_logk_over_k_series,
            summand_float=lambda k, r, prec: log(mpf(k)) / k)


def _logk_over_k2_closed(ctx, v):
    return (-zeta_prime(Fraction(2), ctx.prec) - ctx.log_x / ctx.x - 1 / ctx.x
            - ctx.log_x / ctx.x**2 * ctx.bern(1))


def _logk_over_k2_series(ctx, v):
    return [
        _Series(+1, lambda c: 1 / c.x, "x", 1,
                _bern_series(lambda l: log_weight_harmonic(l) / (l + 1), 1)),
        _Series(-1, lambda c: c.log_x / c.x, "x", 1,
                _bern_series(lambda l: Fraction(1), 1)),
    ]


_def_family("logk_over_k2", description="sum of log k / k^2",
            constants=["zeta_prime(2)"], lhs_start=1,
            closed=_logk_over_k2_closed, series=_logk_over_k2_series,
            summand_float=lambda k, r, prec: log(mpf(k)) / mpf(k) ** 2)


def _log_squared_closed(ctx, v):
    g = euler_gamma(ctx.prec)
    return (ctx.x * ctx.log_x**2 - 2 * ctx.x * ctx.log_x + 2 * ctx.x
            + g**2 / 2 - mp_pi**2 / 24 - log(2 * mp_pi) ** 2 / 2 + stieltjes_1(ctx.prec)
            - ctx.log_x**2 * ctx.bern(1) + ctx.log_x / ctx.x * ctx.bern(2))


def _log_squared_series(ctx, v):
    return [
        _Series(+1, lambda c: mpf(2), "x", 1,
                _bern_series(lambda l: Fraction((-1) ** l * stirling_column_two(l),
                                                factorial(l + 2)), 2)),
        _Series(+1, lambda c: 2 * c.log_x, "x", 1,
                _bern_series(lambda l: Fraction(1, (l + 1) * (l + 2)), 2)),
    ]


_def_family("log_squared", description="sum of log^2 k",
            constants=["euler_gamma", "stieltjes_1", "pi", "log_two_pi"], lhs_start=1,
            closed=_log_squared_closed, series=_log_squared_series,
            summand_float=lambda k, r, prec: log(mpf(k)) ** 2)


# -- alternating Euler-polynomial families ------------------------------------

def _gregory_closed(ctx, v):
    return mp_pi / 4


def _gregory_series(ctx, v):
    return [_Series(+1, lambda c: c.parity / 2, "2x+1", 0,
                    _euler_series(lambda l: Fraction(2) ** l))]


_def_family("gregory_leibniz", description="partial sums of the Gregory-Leibniz series",
            constants=["pi"], lhs_start=0,
            closed=_gregory_closed, series=_gregory_series,
            summand_exact=lambda k, r: Fraction((-1) ** k, 2 * k + 1))
_register_numer("gregory_leibniz", 1, +1, "E", 0, lambda l: Fraction(2) ** l, 0)


def _alt_harmonic_closed(ctx, v):
    return log(mpf(2))


def _alt_harmonic_series(ctx, v):
    return [_Series(-1, lambda c: c.parity / 2, "x", 0,
                    _euler_series(lambda l: Fraction(1)))]


_def_family("alt_harmonic", description="partial sums of the alternating harmonic series",
            constants=["log_two"], lhs_start=1,
            closed=_alt_harmonic_closed, series=_alt_harmonic_series,
            summand_exact=lambda k, r: Fraction((-1) ** (k + 1), k))
_register_numer("alt_harmonic", 1, -1, "E", 0, lambda l: Fraction(1), 0)


def _alt_faulhaber_gen_closed(ctx, v):
    m = ctx.m
    if isinstance(m, Fraction) and m.denominator == 1 and m >= 0:
        return to_mpf(eta_neg_int_exact(int(m)))
    mv = ctx.m_mpf()
    two_pow = mpc(2) ** (1 + mv) if isinstance(mv, mpc) else mpf(2) ** (1 + mv)
    return (1 - two_pow) * zeta_em(-m, ctx.prec)


def _alt_faulhaber_gen_series(ctx, v):
    m = ctx.m
    exact = isinstance(m, Fraction)
    def coeff(c):
        t = c.t
        def a(l):
            b = generalized_binomial(m + 1, l + 1)
            if not b:
                return Fraction(0) if exact else mpf(0)
            val = (-1) ** l * (l + 1) * b
            ep = euler_poly_at(l, t)
            return val * ep if exact else val * to_mpf(ep)
        return a
    return [_Series(-1, lambda c: c.parity * c.pow_x(m) / (2 * (c.m_mpf() + 1)),
                    "x+1", 0, coeff, exact)]


def _alt_summand_exact(k, req):
    m = req.m
    if isinstance(m, Fraction) and m.denominator == 1:
        return Fraction((-1) ** (k + 1)) * Fraction(k) ** int(m)
    return None


def _alt_summand_float(k, req, prec):
    m = req.m
    base = mpc(k) ** m if isinstance(m, mpc) else mpf(k) ** to_mpf(m)
    return (-1) ** (k + 1) * base


_def_family("alt_faulhaber_gen", description="extended generalized alternating Faulhaber formula",
            constants=["eta(-m)"], lhs_start=1,
            closed=_alt_faulhaber_gen_closed, series=_alt_faulhaber_gen_series,
            summand_exact=_alt_summand_exact, summand_float=_alt_summand_float)

_def_family("alt_faulhaber_finite", description="extended alternating Faulhaber formula (finite, integer m)",
            constants=["eta(-m)"], lhs_start=1, shift_mode="none",
            summand_exact=_alt_summand_exact, summand_float=_alt_summand_float)


# -- geometric families --------------------------------------------------------

def _geom_closed(ctx, v):
    a = to_mpf(ctx.a, ctx.prec)
    return a ** ctx.x / log(a) + 1 / (1 - a)


def _geom_series(ctx, v):
    a = to_mpf(ctx.a, ctx.prec)
    la = log(a)
    def coeff(c):
        t = c.t
        def al(l):
            return ((-1) ** l * la ** (l - 1) / factorial(l)
                    * to_mpf(bernoulli_poly_at(l, t)) * c.x ** l)
        return al
    return [_Series(+1, lambda c: a ** c.x, "x+1", 1, coeff, exact=False)]


def _geom_summand_exact(k, req):
    return req.a ** k


_def_family("geometric_stirling", description="geometric sum via Stirling series",
            constants=[], lhs_start=0, shift_mode="geometric",
            closed=_geom_closed, series=_geom_series,
            summand_exact=_geom_summand_exact)


def _alt_geom_closed(ctx, v):
    a = to_mpf(ctx.a, ctx.prec)
    return 1 / (1 + a)


def _alt_geom_series(ctx, v):
    a = to_mpf(ctx.a, ctx.prec)
    la = log(a)
    def coeff(c):
        t = c.t
        def al(l):
            return ((-1) ** l * la ** l / factorial(l)
                    * to_mpf(euler_poly_at(l, t)) * c.x ** l)
        return al
    return [_Series(+1, lambda c: c.parity * a ** c.x / 2, "x+1", 0, coeff, exact=False)]


def _alt_geom_summand_exact(k, req):
    return Fraction(-1) ** k * req.a ** k


_def_family("alt_geometric_stirling", description="alternating geometric sum via Stirling series",
            constants=[], lhs_start=0, shift_mode="geometric",
            closed=_alt_geom_closed, series=_alt_geom_series,
            summand_exact=_alt_geom_summand_exact)

_def_family("geometric_em", description="geometric sum, Euler-Maclaurin form",
            constants=[], lhs_start=0, shift_mode="none",
            summand_exact=_geom_summand_exact)

_def_family("alt_geometric_em", description="alternating geometric sum, Euler-Maclaurin form",
            constants=[], lhs_start=0, shift_mode="none",
            summand_exact=_alt_geom_summand_exact)

_def_family("exp_geometric", description="sum of e^k, exponential Euler-Maclaurin form",
            constants=[], lhs_start=0, shift_mode="none",
            summand_float=lambda k, r, prec: exp(mpf(k)))


def _self_counting_term(k: int) -> int:
    # a_k = floor(1/2 + sqrt(2k)) = (1 + isqrt(8k)) // 2
    import math as _math
    return (1 + _math.isqrt(8 * k)) // 2


_def_family("self_counting", description="sum of the self-counting sequence 1,2,2,3,3,3,...",
            constants=[], lhs_start=1, shift_mode="none",
            summand_exact=lambda k, r: Fraction(_self_counting_term(k)))

_def_family("sqrt_fresnel", description="slowly convergent square-root sum via FresnelS",
            constants=["pi"], lhs_start=0, shift_mode="none",
            summand_float=lambda k, r, prec: sqrt(mpf(k)))

_def_family("harmonic_cosint", description="slowly convergent harmonic sum via CosIntegral",
            constants=["euler_gamma"], lhs_start=1,
            shift_mode="none", summand_exact=lambda k, r: Fraction(1, k))


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _default_policy(req: EvalRequest, x_eff: float | None = None) -> TruncationPolicy:
    fam = req.formula.family
    if req.policy is not None:
        return req.policy
    if fam in GEOMETRIC_STIRLING:
        # term magnitudes rise (with a deep interior valley) until the inner
        # Stirling mixing peaks near k ~ e * x_eff * |log a|; forbid the
        # adaptive stop before that region has passed
        import math as _math
        xe = x_eff if x_eff is not None else max(float(req.x), 48.5)
        floor_orders = int(_math.ceil(3.3 * xe * abs(_math.log(float(req.a))))) + 24
        return TruncationPolicy(mode="adaptive", tolerance=Fraction(1, 10**30),
                                max_order=max(512, floor_orders + 64),
                                divergence_guard=10**6, min_orders=floor_orders)
    if fam in EM_SERIES_FAMILIES:
        return TruncationPolicy(mode="adaptive", tolerance=Fraction(1, 10**30),
                                max_order=256, divergence_guard=8)
    return TruncationPolicy(mode="adaptive", tolerance=Fraction(1, 10**30),
                            max_order=64, divergence_guard=3)


def _shift_for(req: EvalRequest, policy: TruncationPolicy) -> int:
    if req.shift is not None:
        return req.shift
    fam = FAMILIES[req.formula.family]
    n0 = floor(req.x)
    if fam.shift_mode == "stirling":
        target = min(max(72, policy.max_order + 8), 256)
        return max(0, target - n0)
    if fam.shift_mode == "geometric":
        return 48 - n0
    return 0


def _working_prec(req: EvalRequest, shift: int) -> int:
    import math as _math
    pad = 96
    fam = req.formula.family
    x_eff = float(req.x) + shift
    if fam in NEEDS_M and req.m is not None:
        re_m = abs(req.m.real) if isinstance(req.m, mpc) else abs(float(req.m))
        pad += int(_math.ceil((re_m + 1) * _math.log2(x_eff + 2))) + 32
    if fam in GEOMETRIC_STIRLING:
        la2 = abs(_math.log2(float(req.a)))
        pad += int(_math.ceil(abs(shift) * la2)) + 192
    if fam in EM_SERIES_FAMILIES or fam == "exp_geometric":
        scale = float(req.x) * (abs(_math.log2(float(req.a))) if req.a else 1.45)
        pad += int(_math.ceil(scale / 4)) + 32
    return req.precision_bits + pad


def _prefactor_adjusted(policy: TruncationPolicy, prefactor, prec: int) -> TruncationPolicy:
    """Tolerance is judged on the bare series; divide it by the prefactor
    magnitude so the stop criterion reflects the series' final contribution."""
    apref = abs(prefactor)
    if policy.mode != "adaptive" or apref <= 1:
        return policy
    tol = to_mpf(policy.tolerance) / apref
    floor_tol = mpf(2) ** (-(prec - 16))
    return TruncationPolicy(mode=policy.mode, tolerance=max(tol, floor_tol),
                            max_order=policy.max_order, fixed_order=policy.fixed_order,
                            divergence_guard=policy.divergence_guard,
                            min_orders=policy.min_orders)


def _summand(req: EvalRequest, k: int, prec: int):
    fam = FAMILIES[req.formula.family]
    if fam.summand_exact is not None:
        v = fam.summand_exact(k, req)
        if v is not None:
            return v
    return fam.summand_float(k, req, prec)


def _correction(req: EvalRequest, shift: int, prec: int):
    """sum of the direct summands between x and x + shift, exact where possible."""
    n0 = floor(req.x)
    ks = range(n0 + 1, n0 + shift + 1) if shift >= 0 else range(n0 + shift + 1, n0 + 1)
    exact_acc = Fraction(0)
    float_acc = mpf(0)
    exact = True
    for k in ks:
        v = _summand(req, k, prec)
        if isinstance(v, Fraction) and exact:
            exact_acc += v
        else:
            exact = False
            float_acc += v if not isinstance(v, Fraction) else to_mpf(v)
    total = to_mpf(exact_acc) + float_acc
    return total if shift >= 0 else -total


def _em_series_result(req: EvalRequest, ctx: _Ctx, policy: TruncationPolicy):
    """Plain Euler-Maclaurin geometric forms: closed + prefactor * sum_k c_k."""
    fam = req.formula.family
    t = ctx.t
    if fam == "exp_geometric":
        a_val = mp_e
        la = mpf(1)
        closed = exp(ctx.x) + 1 / (1 - mp_e)
        prefactor = exp(ctx.x)
        k0 = 1
    elif fam == "geometric_em":
        a_val = to_mpf(req.a, ctx.prec)
        la = log(a_val)
        closed = a_val ** ctx.x / la + 1 / (1 - a_val)
        prefactor = a_val ** ctx.x
        k0 = 1
    else:  # alt_geometric_em
        a_val = to_mpf(req.a, ctx.prec)
        la = log(a_val)
        closed = 1 / (1 + a_val)
        prefactor = ctx.parity * a_val ** ctx.x * (a_val - 1) / (a_val + 1)
        k0 = 0

    def terms():
        for k in range(k0, policy.max_order + 2):
            c = to_mpf(bernoulli_poly_at(k, t)) / factorial(k)
            val = (-1) ** k * la ** (k - 1) * c
            yield FactorialSeriesTerm(k=k, numerator=c, denominator=mpf(1), value=val)

    res = adaptive_truncate(terms(), _prefactor_adjusted(policy, prefactor, ctx.prec))
    return closed, prefactor, res


def _alt_faulhaber_finite_value(req: EvalRequest, ctx: _Ctx):
    """Finite Euler-polynomial display; exact in rationals, error_estimate 0."""
    m = int(req.m)
    t = ctx.t
    x = req.x + (ctx.floor_x - floor(req.x))  # shifted rational argument
    acc = Fraction(0)
    for k in range(0, m + 1):
        term = (Fraction((-1) ** (k + 1) * (k + 1))
                * generalized_binomial(Fraction(m + 1), k + 1)
                * euler_poly_at(k, t) * x ** (m - k))
        acc += term
    value = (eta_neg_int_exact(m)
             + Fraction((-1) ** ctx.floor_x, 2 * (m + 1)) * acc)
    return value


def _self_counting_value(req: EvalRequest, prec: int):
    import math as _math
    with mp.workprec(prec):
        x = to_mpf(req.x)
        t = req.x - floor(req.x)
        disc = 8 * req.x + 1
        s = sqrt(to_mpf(disc))
        u_arg = s / 2 - mpf(1) / 2
        # exact fractional part when 8x+1 is a perfect rational square
        num, den = disc.numerator, disc.denominator
        rn, rd = _math.isqrt(num), _math.isqrt(den)
        if rn * rn == num and rd * rd == den:
            u_frac = Fraction(rn, rd) / 2 - Fraction(1, 2)
            u = u_frac - floor(u_frac)
            bu = lambda n: to_mpf(bernoulli_poly_at(n, u))
        else:
            uf = u_arg - mp.floor(u_arg)
            bu = lambda n: bernoulli_polynomial(n).eval_mpf(uf)
        b1t = to_mpf(bernoulli_poly_at(1, t))
        value = (x * s / 3 - 5 * s / 24 - s / 2 * b1t + bu(1) * b1t
                 + bu(1) / 2 - s / 4 * bu(2) + bu(3) / 6)
        return +value


@locked_workprec
def evaluate(req: EvalRequest) -> FormulaResult:
    """Evaluate the selected display; returns the universal evaluation receipt."""
    fam_name = req.formula.family
    fam = FAMILIES[fam_name]
    if fam_name in SLOW_FAMILIES:
        from .special import SlowSeriesRequest, evaluate_slow
        return evaluate_slow(SlowSeriesRequest(
            formula=fam_name, x=req.x, outer_terms=req.outer_terms,
            precision_bits=req.precision_bits))

    if fam.shift_mode == "geometric":
        provisional = req.shift if req.shift is not None else 48 - floor(req.x)
        policy = _default_policy(req, x_eff=float(req.x) + provisional)
    else:
        policy = _default_policy(req)
    shift = _shift_for(req, policy)
    prec = _working_prec(req, shift)

    with mp.workprec(prec):
        if fam_name == "self_counting":
            value = _self_counting_value(req, prec)
            with mp.workprec(req.precision_bits):
                return FormulaResult(value=+value, orders_used=0, term_magnitudes=[],
                                     error_estimate=mpf(0), status=Status.CONVERGED)

        x_sh = req.x + shift
        ctx = _Ctx(x=to_mpf(x_sh), t=x_sh - floor(x_sh), floor_x=floor(x_sh),
                   prec=prec, m=req.m, a=req.a)

        if fam_name == "alt_faulhaber_finite":
            exact = _alt_faulhaber_finite_value(req, ctx)
            value = to_mpf(exact) - _correction(req, shift, prec)
            with mp.workprec(req.precision_bits):
                return FormulaResult(value=+value, orders_used=0, term_magnitudes=[],
                                     error_estimate=mpf(0), status=Status.CONVERGED)

        if fam_name in EM_SERIES_FAMILIES:
            closed, prefactor, res = _em_series_result(req, ctx, policy)
            value = closed + prefactor * res.value - _correction(req, shift, prec)
            with mp.workprec(req.precision_bits):
                return FormulaResult(
                    value=+value, orders_used=res.orders_used,
                    term_magnitudes=[+(abs(prefactor) * m) for m in res.term_magnitudes],
                    error_estimate=+(abs(prefactor) * res.error_estimate),
                    status=res.status)

        # Stirling-series families
        closed = fam.closed(ctx, req.formula.variant)
        table = shared_stirling_table(policy.max_order + 1)
        value = closed
        combined_mags: list = []
        error_estimate = mpf(0)
        status = Status.CONVERGED
        orders = 0
        for spec in fam.series(ctx, req.formula.variant):
            base = 2 * ctx.x + 1 if spec.denom == "2x+1" else ctx.x
            mode = "x" if spec.denom == "2x+1" else spec.denom
            series = CoefficientSeries(coefficient_at=_freeze(spec.coeff(ctx)),
                                       start_index=spec.start, exact=spec.exact)
            pref = spec.prefactor(ctx)
            res = weniger_transform(series, base, table,
                                    _prefactor_adjusted(policy, pref, prec),
                                    denominator_shift=mode)
            value += spec.outer * pref * res.value
            apref = abs(pref)
            for i, mmag in enumerate(res.term_magnitudes):
                scaled = apref * mmag
                if i < len(combined_mags):
                    combined_mags[i] += scaled
                else:
                    combined_mags.append(scaled)
            error_estimate += apref * res.error_estimate
            orders = max(orders, res.orders_used)
            status = _worst_status(status, res.status)

        value -= _correction(req, shift, prec)

    with mp.workprec(req.precision_bits):
        return FormulaResult(value=+value, orders_used=orders,
                             term_magnitudes=[+m for m in combined_mags[:orders]] +
                                             [mpf(0)] * max(0, orders - len(combined_mags)),
                             error_estimate=+error_estimate, status=status)


def _freeze(fn):
    def wrapped(l, _x):
        return fn(l)
    return wrapped


def _worst_status(a: Status, b: Status) -> Status:
    order = [Status.CONVERGED, Status.MAX_ORDER_REACHED, Status.DIVERGENCE_GUARD_TRIPPED]
    return max(a, b, key=order.index)


@locked_workprec
def evaluate_partials(req: EvalRequest, max_order: int):
    """Closed-plus-correction base and per-order signed term increments.

    Used by convergence studies: partial_k = base + sum_{j <= k} increment_j.
    Applies the same shift policy as `evaluate` unless req.shift is set.
    """
    fam_name = req.formula.family
    fam = FAMILIES[fam_name]
    if fam_name in SLOW_FAMILIES | EM_SERIES_FAMILIES | {"self_counting", "alt_faulhaber_finite"}:
        raise CapabilityError(f"{fam_name} has no Stirling-series order ladder")
    policy = TruncationPolicy(mode="fixed", fixed_order=max_order, max_order=max_order)
    shift = _shift_for(req, policy) if req.shift is None else req.shift
    prec = _working_prec(req, shift)
    with mp.workprec(prec):
        x_sh = req.x + shift
        ctx = _Ctx(x=to_mpf(x_sh), t=x_sh - floor(x_sh), floor_x=floor(x_sh),
                   prec=prec, m=req.m, a=req.a)
        base = fam.closed(ctx, req.formula.variant) - _correction(req, shift, prec)
        table = shared_stirling_table(max_order + 1)
        increments = [mpf(0)] * (max_order + 1)
        from .engine import weniger_terms
        for spec in fam.series(ctx, req.formula.variant):
            xb = 2 * ctx.x + 1 if spec.denom == "2x+1" else ctx.x
            mode = "x" if spec.denom == "2x+1" else spec.denom
            series = CoefficientSeries(coefficient_at=_freeze(spec.coeff(ctx)),
                                       start_index=spec.start, exact=spec.exact)
            pref = spec.outer * spec.prefactor(ctx)
            for term in weniger_terms(series, xb, table, max_order, mode):
                if term.k > max_order:
                    break
                increments[term.k] += pref * term.value
        return +base, [+v for v in increments]


# ---------------------------------------------------------------------------
# numerator polynomials and inner-sum operations
# ---------------------------------------------------------------------------

def numerator_polynomial(formula: FormulaId, k: int) -> RationalPolynomial:
    """The exact polynomial in t = {x} multiplying the order-k denominator,
    exactly as displayed (outer and inner signs included)."""
    if k < 1:
        raise ParameterError("order k must be >= 1")
    meta = _NUMERATOR_META.get(formula.family, {}).get(formula.variant)
    if meta is None:
        raise CapabilityError(
            f"{formula} has no parameter-free polynomial inner sum")
    outer, kind, shift, weight, start = meta
    table = shared_stirling_table(max(k, 8))
    poly = RationalPolynomial([0])
    for l in range(start, k + 1):
        w = weight(l)
        if not w:
            continue
        base = (bernoulli_polynomial(l + shift) if kind == "B" else euler_polynomial(l + shift))
        poly = poly + base.scale(Fraction((-1) ** (k + l)) * outer * table.value(k, l) * w)
    return poly


def faulhaber_inner_sum(m, k: int, l_shift: int, t: Fraction):
    """Inner coefficient sum of the extended Faulhaber displays:
    sum_l C(m+1, l + l_shift) S_k(l) B_{l + l_shift}({x}); exact for rational m."""
    if k < 1:
        raise ParameterError("order k must be >= 1")
    if isinstance(m, mpc):
        q = None
    else:
        m = Fraction(m)
        q = _faulhaber_q(m) - 1
    if l_shift not in (0, 1) and (q is None or l_shift != q):
        if isinstance(m, mpc):
            raise CapabilityError("the floor/ceiling inner sum needs real m")
        raise ParameterError(f"l_shift must be 0, 1 or {q}")
    table = shared_stirling_table(max(k, 8))
    exact = isinstance(m, Fraction)
    acc = Fraction(0) if exact else mpc(0)
    for l in range(1, k + 1):
        b = generalized_binomial((m + 1) if exact else m + 1, l + l_shift)
        if not b:
            continue
        bp = bernoulli_poly_at(l + l_shift, t)
        acc += b * table.value(k, l) * (bp if exact else to_mpf(bp))
    return acc


def log_family_inner_sum(family: FormulaId | str, k: int, t: Fraction, log_x):
    """Order-k inner sum of the two-part logarithmic displays: the log-free
    part plus log_x times the log part, rational parts exact."""
    name = family.family if isinstance(family, FormulaId) else family
    if name not in ("logk_over_k", "logk_over_k2", "log_squared"):
        raise CapabilityError(f"{name} is not a two-part logarithmic family")
    if k < 1:
        raise ParameterError("order k must be >= 1")
    table = shared_stirling_table(max(k + 1, 8))
    plain = Fraction(0)
    logged = Fraction(0)
    for l in range(1, k + 1):
        s = table.value(k, l)
        if name == "logk_over_k":
            plain += Fraction((-1) ** l * stirling_column_two(l), factorial(l + 1)) * s \
                * bernoulli_poly_at(l + 1, t)
            logged += Fraction(1, l + 1) * s * bernoulli_poly_at(l + 1, t)
        elif name == "logk_over_k2":
            plain += log_weight_harmonic(l) / (l + 1) * s * bernoulli_poly_at(l + 1, t)
            logged += Fraction(1) * s * bernoulli_poly_at(l + 1, t)
        else:
            plain += Fraction((-1) ** l * stirling_column_two(l), factorial(l + 2)) * s \
                * bernoulli_poly_at(l + 2, t)
            logged += Fraction(1, (l + 1) * (l + 2)) * s * bernoulli_poly_at(l + 2, t)
    return to_mpf(plain) + log_x * to_mpf(logged)


# ---------------------------------------------------------------------------
# listing
# ---------------------------------------------------------------------------

def list_formulas() -> list[dict]:
    """Machine-readable catalog, stable-ordered by paper item."""
    out = []
    for fid in all_formula_ids():
        fam = FAMILIES[fid.family]
        params = {}
        if fid.family in NEEDS_M:
            params["m"] = ("integer >= 0" if fid.family == "alt_faulhaber_finite"
                           else "real (variant 3) or complex" if fid.family in
                           ("faulhaber_ext", "faulhaber_int") else "complex")
        if fid.family in NEEDS_A:
            dom = "a > 0, a != 1" if fid.family in ("geometric_stirling", "geometric_em",
                                                    "alt_geometric_em") else "a > 0"
            if fid.family in ("geometric_em", "alt_geometric_em"):
                dom += ", exp(-2 pi) < a < exp(2 pi)"
            params["a"] = dom
        if fid.family in SLOW_FAMILIES:
            params["outer_terms"] = "positive integer"
        out.append({
            "formula": str(fid),
            "item": f"{FAMILY_ORDER.index(fid.family) + 1:02d}",
            "description": fam.description,
            "params": params,
            "constants": fam.constants,
            "slow": fid.family in SLOW_FAMILIES,
        })
    return out
