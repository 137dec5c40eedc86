"""Series engines: extended Euler-Maclaurin and Boole summation in finite form
with remainder integrals, the generalized Weniger transformation to factorial
series, and the adaptive truncation controller.

The Weniger transform implemented here is

    sum_{l>=s} a_l(x) / x^{l+1}
        = sum_{k>=s} (-1)^k [ sum_{l=s}^{k} (-1)^l S_k(l) a_l(x) ] / D_k

with s = series.start_index (0 or 1), S the signed Stirling numbers of the
first kind, and D_k either (x)_{k+1} = x(x+1)...(x+k) or (x+1)_k, selected by
`denominator_shift`.  Inner sums are evaluated in exact rational arithmetic
whenever the coefficient series is exact, and rounded once per order.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, floor
from typing import Callable, Iterable, Iterator

from mpmath import mp, mpf, quad, log

from .bigreal import locked_workprec, to_mpf
from .combinatorics import (
    StirlingTable,
    bernoulli_number,
    bernoulli_polynomial,
    euler_polynomial,
)


class EngineError(ValueError):
    pass


class Status(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ORDER_REACHED = "max_order_reached"
    DIVERGENCE_GUARD_TRIPPED = "divergence_guard_tripped"

    def __str__(self):
        return self.value


@dataclass
class TruncationPolicy:
    """fixed mode consumes exactly fixed_order terms; adaptive mode stops when
    |term_k| < tolerance * max(1, |partial sum|).

    min_orders delays the adaptive stop: geometric-family term magnitudes pass
    through a deep valley before their Stirling-mixing peak, and stopping
    inside the valley would return garbage marked converged.
    """
    mode: str = "adaptive"              # "adaptive" | "fixed"
    tolerance: Fraction | float = Fraction(1, 10**30)
    max_order: int = 64
    fixed_order: int = 16
    divergence_guard: int = 3
    min_orders: int = 1

    def __post_init__(self):
        if self.max_order < 1:
            raise EngineError("max_order must be >= 1")
        if self.mode not in ("adaptive", "fixed"):
            raise EngineError(f"unknown truncation mode: {self.mode}")
        if self.mode == "adaptive" and not self.tolerance > 0:
            raise EngineError("adaptive mode needs a positive tolerance")


@dataclass
class FormulaResult:
    """Evaluation receipt: value, orders, per-term magnitudes, error estimate."""
    value: object
    orders_used: int
    term_magnitudes: list = field(default_factory=list)
    error_estimate: object = mpf(0)
    status: Status = Status.CONVERGED

    def __post_init__(self):
        if len(self.term_magnitudes) != self.orders_used:
            raise EngineError("term_magnitudes must have exactly orders_used entries")


@dataclass
class FactorialSeriesTerm:
    k: int
    numerator: object        # inner sum, already signed with (-1)^l
    denominator: object      # (x)_{k+1} or (x+1)_k
    value: object            # (-1)^k * numerator / denominator


@dataclass
class CoefficientSeries:
    """Coefficient sequence l -> a_l(x) feeding the transform.

    coefficient_at must be deterministic; exact=True promises Fraction output,
    which routes the inner sums through exact arithmetic.
    """
    coefficient_at: Callable[[int, object], object]
    start_index: int = 1
    exact: bool = False

    def __post_init__(self):
        if self.start_index not in (0, 1):
            raise EngineError("start_index must be 0 or 1")


def adaptive_truncate(terms: Iterable[FactorialSeriesTerm],
                      policy: TruncationPolicy) -> FormulaResult:
    """Consume a factorial-series term stream under the policy.

    Adaptive mode stops after two consecutive nonzero sub-tolerance terms (the
    second is the omitted one and sets the error estimate).  Exact-zero terms
    arise from vanishing odd Bernoulli/Euler values and neither stop the
    stream nor feed the divergence guard, which trips after
    `divergence_guard` consecutive strictly increasing nonzero magnitudes.
    """
    total = mpf(0)
    mags: list = []
    prev_mag = None
    growing = 0
    below = 0
    zero_run = 0
    status = Status.MAX_ORDER_REACHED
    error_estimate = mpf(0)
    it = iter(terms)
    budget = policy.fixed_order if policy.mode == "fixed" else policy.max_order
    tol = to_mpf(policy.tolerance) if policy.mode == "adaptive" else None

    for term in it:
        mag = abs(term.value)
        if policy.mode == "adaptive" and mag != 0:
            zero_run = 0
            if mag < tol * max(mpf(1), abs(total)):
                below += 1
                if below >= 2 and len(mags) >= policy.min_orders:
                    status = Status.CONVERGED
                    error_estimate = mag
                    break
            else:
                below = 0
            if prev_mag is not None and mag > prev_mag:
                growing += 1
                if growing >= policy.divergence_guard:
                    status = Status.DIVERGENCE_GUARD_TRIPPED
                    error_estimate = mag
                    break
            else:
                growing = 0
            prev_mag = mag
        elif policy.mode == "adaptive":
            zero_run += 1
        total += term.value
        mags.append(mag)
        if policy.mode == "adaptive" and zero_run >= 6 and total == 0:
            # degenerate all-zero stream: exactly zero, nothing omitted
            status = Status.CONVERGED
            error_estimate = mpf(0)
            break
        if len(mags) >= budget:
            status = Status.CONVERGED if policy.mode == "fixed" else Status.MAX_ORDER_REACHED
            nxt = next(it, None)
            error_estimate = abs(nxt.value) if nxt is not None else mag
            break
    else:
        # stream exhausted (finite series): converged with nothing omitted
        status = Status.CONVERGED
        error_estimate = mpf(0)

    return FormulaResult(value=total, orders_used=len(mags), term_magnitudes=mags,
                         error_estimate=error_estimate, status=status)


def weniger_terms(series: CoefficientSeries, x, stirling: StirlingTable,
                  max_order: int, denominator_shift: str = "x") -> Iterator[FactorialSeriesTerm]:
    """Yield factorial-series terms of the transform in increasing k.

    Exact inner sums are rounded once, on division by the denominator.
    """
    if denominator_shift not in ("x", "x+1"):
        raise EngineError("denominator_shift must be 'x' or 'x+1'")
    s = series.start_index
    coeffs: dict[int, object] = {}
    denom = x if denominator_shift == "x" else mpf(1)
    for i in range(1, s + 1):
        denom = denom * (x + i)
    for k in range(s, max_order + 2):      # +1 order of lookahead for estimates
        row = stirling.row(k)
        if series.exact:
            inner_exact = Fraction(0)
            for l in range(s, k + 1):
                a = coeffs.get(l)
                if a is None:
                    a = series.coefficient_at(l, x)
                    coeffs[l] = a
                if a:
                    inner_exact += (-1) ** l * row[l] * a
            inner = to_mpf(inner_exact)
        else:
            inner = mpf(0)
            for l in range(s, k + 1):
                a = coeffs.get(l)
                if a is None:
                    a = series.coefficient_at(l, x)
                    coeffs[l] = a
                if a:
                    inner += (-1) ** l * row[l] * a
        yield FactorialSeriesTerm(k=k, numerator=inner, denominator=denom,
                                  value=(-1) ** k * inner / denom)
        denom = denom * (x + k + 1)


def weniger_transform(series: CoefficientSeries, x, stirling: StirlingTable,
                      policy: TruncationPolicy, denominator_shift: str = "x") -> FormulaResult:
    """Evaluate the generalized Weniger transformation under a policy."""
    budget = policy.fixed_order if policy.mode == "fixed" else policy.max_order
    if budget > stirling.max_k - 1:
        raise EngineError(
            f"policy needs {budget + 1} Stirling rows but table holds {stirling.max_k}")
    terms = weniger_terms(series, x, stirling, budget, denominator_shift)
    return adaptive_truncate(terms, policy)


# ---------------------------------------------------------------------------
# Smooth functions for the two summation engines
# ---------------------------------------------------------------------------

class SmoothFunction:
    """A function with derivatives of all needed orders and an antiderivative."""

    def value(self, t):
        return self.derivative(0, t)

    def derivative(self, order: int, t):
        raise NotImplementedError

    def antiderivative(self, t):
        raise NotImplementedError


class PowerFunction(SmoothFunction):
    """f(t) = t^alpha, alpha rational (covers 1/t, 1/t^2, sqrt t, t^2, ...)."""

    def __init__(self, alpha):
        self.alpha = Fraction(alpha)

    def derivative(self, order, t):
        coef = Fraction(1)
        for i in range(order):
            coef *= (self.alpha - i)
        if coef == 0:
            return mpf(0)
        expo = self.alpha - order
        return to_mpf(coef) * t ** to_mpf(expo)

    def antiderivative(self, t):
        if self.alpha == -1:
            return log(t)
        e = self.alpha + 1
        return t ** to_mpf(e) / to_mpf(e)


class LogFunction(SmoothFunction):
    """f(t) = log t;  f^{(j)}(t) = (-1)^{j-1} (j-1)! t^{-j}."""

    def derivative(self, order, t):
        if order == 0:
            return log(t)
        return mpf((-1) ** (order - 1) * factorial(order - 1)) * t ** (-order)

    def antiderivative(self, t):
        return t * log(t) - t


class AffinePower(SmoothFunction):
    """f(t) = (c t + d)^alpha; used e.g. for 1/(2t+1)."""

    def __init__(self, c, d, alpha):
        self.c = Fraction(c)
        self.d = Fraction(d)
        self.alpha = Fraction(alpha)

    def derivative(self, order, t):
        coef = Fraction(1)
        for i in range(order):
            coef *= (self.alpha - i)
        if coef == 0:
            return mpf(0)
        coef *= self.c**order
        base = to_mpf(self.c) * t + to_mpf(self.d)
        return to_mpf(coef) * base ** to_mpf(self.alpha - order)

    def antiderivative(self, t):
        base = to_mpf(self.c) * t + to_mpf(self.d)
        if self.alpha == -1:
            return log(base) / to_mpf(self.c)
        e = self.alpha + 1
        return base ** to_mpf(e) / to_mpf(e * self.c)


class ConstantFunction(SmoothFunction):
    def __init__(self, value=1):
        self._v = Fraction(value)

    def derivative(self, order, t):
        return to_mpf(self._v) if order == 0 else mpf(0)

    def antiderivative(self, t):
        return to_mpf(self._v) * t


# ---------------------------------------------------------------------------
# Finite summation engines
# ---------------------------------------------------------------------------

def _integer_panels(x):
    """Split [1, x] at every interior integer; B_m({t}) is smooth per panel."""
    n = int(floor(x))
    edges = [mpf(1)]
    for j in range(2, n + 1):
        edges.append(mpf(j))
    if x > n:
        edges.append(x)
    panels = [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]
    return panels


@locked_workprec
def euler_maclaurin_finite(f: SmoothFunction, x, m: int, quadrature_tolerance,
                           prec_bits: int = 256):
    """sum_{k=1}^{floor(x)} f(k), reconstructed from the finite Euler-Maclaurin
    form with its remainder integral evaluated by per-panel quadrature."""
    if m < 1:
        raise EngineError("correction order m must be >= 1")
    tol = to_mpf(quadrature_tolerance)
    work = max(prec_bits, int(-mp.log(tol, 2)) + 48)
    with mp.workprec(work):
        xv = to_mpf(x)
        if xv <= 1:
            raise EngineError("euler_maclaurin_finite requires x > 1")
        t_frac = Fraction(x) - floor(Fraction(x)) if isinstance(x, (Fraction, int)) else None
        total = f.antiderivative(xv) - f.antiderivative(mpf(1))
        for k in range(1, m + 1):
            bk_at = (to_mpf(bernoulli_polynomial(k)(t_frac)) if t_frac is not None
                     else bernoulli_polynomial(k).eval_mpf(xv - mp.floor(xv)))
            coef = to_mpf(Fraction(1, factorial(k)))
            total += (-1) ** k * bk_at * coef * f.derivative(k - 1, xv)
            total -= to_mpf(bernoulli_number(k) / Fraction(factorial(k))) * f.derivative(k - 1, mpf(1))
        # remainder: (-1)^{m+1}/m! * int_1^x B_m({t}) f^{(m)}(t) dt
        bm = bernoulli_polynomial(m)
        rem = mpf(0)
        for lo, hi in _integer_panels(xv):
            base = mp.floor(lo)
            rem += quad(lambda u: bm.eval_mpf(u - base) * f.derivative(m, u), [lo, hi])
        total += mpf((-1) ** (m + 1)) / factorial(m) * rem
        return +total


@locked_workprec
def boole_finite(f: SmoothFunction, x, m: int, quadrature_tolerance,
                 prec_bits: int = 256):
    """sum_{k=1}^{floor(x)} (-1)^{k+1} f(k) via the finite Boole form.

    The (-1)^{t - {t}} factor is implemented as (-1)^{floor(t)}.
    """
    if m < 0:
        raise EngineError("correction order m must be >= 0")
    tol = to_mpf(quadrature_tolerance)
    work = max(prec_bits, int(-mp.log(tol, 2)) + 48)
    with mp.workprec(work):
        xv = to_mpf(x)
        if xv <= 1:
            raise EngineError("boole_finite requires x > 1")
        n = int(mp.floor(xv))
        t_frac = Fraction(x) - floor(Fraction(x)) if isinstance(x, (Fraction, int)) else None
        total = mpf(0)
        for k in range(0, m + 1):
            ek_at = (to_mpf(euler_polynomial(k)(t_frac)) if t_frac is not None
                     else euler_polynomial(k).eval_mpf(xv - mp.floor(xv)))
            coef = to_mpf(Fraction(1, factorial(k)))
            total += mpf((-1) ** n) / 2 * (-1) ** (k + 1) * ek_at * coef * f.derivative(k, xv)
            w = Fraction(2 ** (k + 1) - 1) * bernoulli_number(k + 1) / Fraction(factorial(k + 1))
            total -= to_mpf(w) * f.derivative(k, mpf(1))
        em = euler_polynomial(m)
        rem = mpf(0)
        for lo, hi in _integer_panels(xv):
            base = mp.floor(lo)
            sign = mpf((-1) ** int(base))
            rem += sign * quad(lambda u: em.eval_mpf(u - base) * f.derivative(m + 1, u), [lo, hi])
        total += mpf((-1) ** m) / (2 * factorial(m)) * rem
        return +total
