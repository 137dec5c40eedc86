"""Precision-parameterized mathematical constants.

zeta is computed by an internal Euler-Maclaurin evaluator (valid for real and
complex s != 1, including the continuation to negative real part), gamma and
the first Stieltjes constant by Euler-Maclaurin tail corrections of their
defining limits, zeta' by higher-order central differences of the zeta
evaluator.  pi and logarithms come from mpmath.

Every value carries the contract: relative error <= 2^-(prec_bits - 8).
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, factorial

from mpmath import mp, mpf, mpc, log, pi as mp_pi

from .bigreal import locked_workprec, to_mpf
from .combinatorics import bernoulli_number, shared_stirling_table

_cache: dict = {}
_cache_lock = threading.Lock()

MIN_PREC_BITS = 64


class ConstantError(ValueError):
    """Unknown constant id or invalid parameter (e.g. zeta at s = 1)."""


@dataclass(frozen=True)
class ConstantRequest:
    constant_id: str                 # zeta | zeta_prime | eta | euler_gamma | stieltjes_1 | pi | log_two_pi | log_two
    parameter: Fraction | None = None
    precision_bits: int = 256

    def __post_init__(self):
        if self.precision_bits < MIN_PREC_BITS:
            raise ConstantError(f"precision_bits must be >= {MIN_PREC_BITS}")


def _cached(key, builder):
    hit = _cache.get(key)
    if hit is None:
        hit = builder()
        with _cache_lock:
            _cache[key] = hit
    return hit


# ---------------------------------------------------------------------------
# Euler-Maclaurin zeta
# ---------------------------------------------------------------------------

@locked_workprec
def zeta_em(s, precision_bits: int = 256):
    """zeta(s) by Euler-Maclaurin summation; s real or complex, s != 1.

    N direct terms plus an EM tail with correction terms of even order; N is
    chosen so the tail gains ~2 log2(2 pi N) bits per correction order, and the
    number of corrections grows until the standard remainder bound drops below
    2^-(precision_bits + 8).
    """
    if isinstance(s, Fraction):
        s_key: object = s
    elif isinstance(s, int):
        s_key = Fraction(s)
    else:
        s_key = str(s)
    return _cached(("zeta", s_key, precision_bits), lambda: _zeta_em_impl(s, precision_bits))


def _zeta_em_impl(s, precision_bits: int):
    work = precision_bits + 32
    with mp.workprec(work):
        sv = to_mpf(s) if not isinstance(s, mpc) else s
        if sv == 1:
            raise ConstantError("zeta has a pole at s = 1")
        sigma = sv.real if isinstance(sv, mpc) else sv
        target = mpf(2) ** (-(precision_bits + 8))
        # N: direct terms; each EM correction gains ~ 2*log2(2 pi N) bits
        height = abs(sv.imag) if isinstance(sv, mpc) else mpf(0)
        n_terms = int(max(8, ceil(0.18 * precision_bits), ceil(float(height) / 3) + 8))
        for _attempt in range(6):
            value = mpf(0)
            for k in range(1, n_terms):
                value += mpf(k) ** (-sv) if not isinstance(sv, mpc) else mpc(k) ** (-sv)
            nn = mpf(n_terms)
            value += nn ** (-sv) / 2
            value += nn ** (1 - sv) / (sv - 1)
            # EM corrections: B_{2j}/(2j)! * (s)_{2j-1} * N^{-s-2j+1}
            rising = sv  # (s)_1
            npow = nn ** (-sv - 1)
            j = 1
            scale = max(mpf(1), abs(value))
            converged = False
            while True:
                b = bernoulli_number(2 * j)
                coef = to_mpf(Fraction(b, factorial(2 * j)))
                term = coef * rising * npow
                value += term
                # remainder bound: first omitted term x |(s+2j+1)/(sigma+2j+1)|
                rising_next = rising * (sv + 2 * j - 1) * (sv + 2 * j)
                npow_next = npow / nn**2
                b_next = bernoulli_number(2 * j + 2)
                bound_core = abs(to_mpf(Fraction(b_next, factorial(2 * j + 2)))
                                 * rising_next * npow_next)
                denom_ok = sigma + 2 * j + 1 > 0
                if denom_ok:
                    bound = bound_core * abs(sv + 2 * j + 1) / (sigma + 2 * j + 1)
                    if bound < target * scale:
                        converged = True
                        break
                rising = rising_next
                npow = npow_next
                j += 1
                if j > n_terms + 8:
                    break  # corrections no longer helping; enlarge N
            if converged:
                return +value
            n_terms *= 2
        raise ConstantError(f"zeta_em failed to converge for s={s} at {precision_bits} bits")


def zeta_neg_int_exact(m: int) -> Fraction:
    """zeta(-m) for integer m >= 0, exactly: -B_{m+1}(1)/(m+1).

    B_{m+1}(1) equals B_{m+1} except at m = 0 where B_1(1) = +1/2, which is
    what makes zeta(0) = -1/2 under the B_1 = -1/2 convention.
    """
    if m < 0:
        raise ConstantError("zeta_neg_int_exact needs m >= 0")
    b_at_1 = bernoulli_number(m + 1) + (Fraction(1) if m == 0 else Fraction(0))
    return -b_at_1 / (m + 1)


def eta_neg_int_exact(m: int) -> Fraction:
    """eta(-m) for integer m >= 0, exactly: (2^{m+1}-1) B_{m+1}(1)/(m+1)."""
    if m < 0:
        raise ConstantError("eta_neg_int_exact needs m >= 0")
    b_at_1 = bernoulli_number(m + 1) + (Fraction(1) if m == 0 else Fraction(0))
    return Fraction(2 ** (m + 1) - 1) * b_at_1 / (m + 1)


@locked_workprec
def eta(s, precision_bits: int = 256):
    """Dirichlet eta: (1 - 2^{1-s}) zeta(s); eta(1) = log 2."""
    with mp.workprec(precision_bits + 32):
        sv = to_mpf(s) if not isinstance(s, mpc) else s
        if sv == 1:
            return +log(mpf(2))
        return +((1 - mpf(2) ** (1 - sv)) * zeta_em(s, precision_bits)
                 if not isinstance(sv, mpc)
                 else (1 - mpc(2) ** (1 - sv)) * zeta_em(s, precision_bits))


@locked_workprec
def zeta_prime(s, precision_bits: int = 256):
    """zeta'(s) by a 5-point central difference of zeta_em.

    Step 2^(-precision_bits/3) with 2x working-precision padding; the h^4
    truncation and the rounding term both land far below 2^-(prec-8).
    """
    key = ("zeta_prime", s if isinstance(s, Fraction) else str(s), precision_bits)

    def build():
        inner = 2 * precision_bits
        with mp.workprec(inner + 32):
            sv = to_mpf(s)
            if sv == 1:
                raise ConstantError("zeta' is not defined at the pole s = 1")
            h = mpf(2) ** (-(precision_bits // 3))
            f1 = zeta_em(sv + h, inner)
            f_1 = zeta_em(sv - h, inner)
            f2 = zeta_em(sv + 2 * h, inner)
            f_2 = zeta_em(sv - 2 * h, inner)
            return +((-f2 + 8 * f1 - 8 * f_1 + f_2) / (12 * h))

    return _cached(key, build)


# ---------------------------------------------------------------------------
# gamma and the first Stieltjes constant
# ---------------------------------------------------------------------------

@locked_workprec
def euler_gamma(precision_bits: int = 256):
    """gamma = lim (H_N - log N), with the Euler-Maclaurin tail:

        gamma = H_N - log N - 1/(2N) + sum_j B_{2j}/(2j N^{2j}) - R.

    N is sized so the optimal tail term e^{-2 pi N} clears the target.
    """
    def build():
        work = precision_bits + 32
        with mp.workprec(work):
            n = int(ceil((precision_bits + 16) * 0.12)) + 4
            target = mpf(2) ** (-(precision_bits + 8))
            h_n = sum(Fraction(1, k) for k in range(1, n + 1))
            value = to_mpf(h_n) - log(mpf(n)) - mpf(1) / (2 * n)
            npow = Fraction(1, n * n)
            j = 1
            prev = None
            while True:
                term = to_mpf(bernoulli_number(2 * j) / (2 * j) * npow)
                if prev is not None and abs(term) > prev:
                    raise ConstantError("gamma tail started diverging; N heuristic too small")
                value += term
                if abs(term) < target:
                    return +value
                prev = abs(term)
                npow /= n * n
                j += 1

    return _cached(("gamma", precision_bits), build)


@locked_workprec
def stieltjes_1(precision_bits: int = 256):
    """First Stieltjes constant gamma_1 = lim (sum_{k<=N} log k / k - log^2 N / 2).

    Euler-Maclaurin tail for f(t) = log t / t, whose derivatives are
    f^{(j)}(t) = ((-1)^j j! log t + S_{j+1}(2)) / t^{j+1} with signed Stirling
    numbers S (an exact recurrence, so all tail coefficients are exact).
    """
    def build():
        work = precision_bits + 48
        with mp.workprec(work):
            n = int(ceil((precision_bits + 16) * 0.13)) + 6
            target = mpf(2) ** (-(precision_bits + 8))
            acc = mpf(0)
            for k in range(2, n + 1):
                acc += log(mpf(k)) / k
            logn = log(mpf(n))
            value = acc - logn**2 / 2 - logn / (2 * n)
            table = shared_stirling_table(2 * (precision_bits // 4) + 16)
            j = 1
            prev = None
            while True:
                order = 2 * j - 1                      # odd derivative order
                a = Fraction((-1) ** order * factorial(order))
                b = Fraction(table.value(order + 1, 2))
                deriv = (to_mpf(a) * logn + to_mpf(b)) / mpf(n) ** (order + 1)
                term = -to_mpf(bernoulli_number(2 * j) / Fraction(factorial(2 * j))) * deriv
                if prev is not None and abs(term) > prev:
                    raise ConstantError("gamma_1 tail started diverging; N heuristic too small")
                value += term
                if abs(term) < target:
                    return +value
                prev = abs(term)
                j += 1

    return _cached(("stieltjes_1", precision_bits), build)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

@locked_workprec
def get_constant(req: ConstantRequest):
    """Resolve a ConstantRequest to an mpf at its precision."""
    cid, s, bits = req.constant_id, req.parameter, req.precision_bits
    with mp.workprec(bits + 16):
        if cid == "zeta":
            if s is None:
                raise ConstantError("zeta requires a parameter")
            if s == 1:
                raise ConstantError("zeta has a pole at s = 1")
            return +zeta_em(s, bits)
        if cid == "zeta_prime":
            if s is None:
                raise ConstantError("zeta_prime requires a parameter")
            return +zeta_prime(s, bits)
        if cid == "eta":
            if s is None:
                raise ConstantError("eta requires a parameter")
            return +eta(s, bits)
        if cid == "euler_gamma":
            return +euler_gamma(bits)
        if cid == "stieltjes_1":
            return +stieltjes_1(bits)
        if cid == "pi":
            return +mp_pi
        if cid == "log_two_pi":
            return +log(2 * mp_pi)
        if cid == "log_two":
            return +log(mpf(2))
    raise ConstantError(f"unknown constant id: {cid}")


# The parameterized instances the formula catalog consumes; `constants` CLI
# subcommand lists exactly these.
CATALOG_CONSTANTS: list[tuple[str, Fraction | None]] = [
    ("pi", None),
    ("euler_gamma", None),
    ("stieltjes_1", None),
    ("log_two", None),
    ("log_two_pi", None),
    ("zeta", Fraction(1, 2)),
    ("zeta", Fraction(3, 2)),
    ("zeta", Fraction(2)),
    ("zeta", Fraction(5, 2)),
    ("zeta", Fraction(3)),
    ("zeta", Fraction(7, 2)),
    ("zeta_prime", Fraction(-1)),
    ("zeta_prime", Fraction(2)),
    ("eta", Fraction(1, 2)),
    ("eta", Fraction(3, 2)),
    ("eta", Fraction(2)),
    ("eta", Fraction(3)),
]


def constant_label(cid: str, parameter: Fraction | None) -> str:
    if parameter is None:
        return cid
    p = parameter
    text = str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"
    return f"{cid}({text})"
