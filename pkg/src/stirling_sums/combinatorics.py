"""Exact combinatorial kernels.

Everything here is computed in exact rational (or integer) arithmetic:
Bernoulli and Euler numbers, Bernoulli and Euler polynomials, signed Stirling
numbers of the first kind, rising factorials, extended odd double factorials
and generalized binomial coefficients.

Conventions:
  * Bernoulli numbers follow the generating function x/(e^x - 1), so B_1 = -1/2.
  * Stirling numbers are the signed connection coefficients in
        (x)_k = (-1)^k sum_l (-1)^l S_k(l) x^l,
    which coincide with the classical signed s(k, l).

Caches grow monotonically and are guarded by a lock so concurrent readers are
safe once a size has been reached.
"""
from __future__ import annotations

import threading
from fractions import Fraction
from math import comb, factorial

from mpmath import mp, mpf

_lock = threading.RLock()


# ---------------------------------------------------------------------------
# Bernoulli / Euler numbers
# ---------------------------------------------------------------------------

_bernoulli: list[Fraction] = [Fraction(1)]
_euler: list[int] = [1]


def bernoulli_number(k: int) -> Fraction:
    """k-th Bernoulli number under the x/(e^x-1) convention (B_1 = -1/2).

    Computed by the recurrence sum_{j=0}^{k} C(k+1, j) B_j = 0.
    """
    if k < 0:
        raise ValueError("Bernoulli index must be non-negative")
    if k >= len(_bernoulli):
        with _lock:
            while len(_bernoulli) <= k:
                n = len(_bernoulli)
                acc = Fraction(0)
                for j in range(n):
                    acc += comb(n + 1, j) * _bernoulli[j]
                _bernoulli.append(-acc / (n + 1))
    return _bernoulli[k]


def euler_number(k: int) -> int:
    """k-th Euler number, from 2e^x/(e^{2x}+1); odd indices vanish.

    Even indices satisfy sum_{j even, j<=n} C(n, j) E_j = 0.
    """
    if k < 0:
        raise ValueError("Euler index must be non-negative")
    if k >= len(_euler):
        with _lock:
            while len(_euler) <= k:
                n = len(_euler)
                if n % 2 == 1:
                    _euler.append(0)
                else:
                    acc = 0
                    for j in range(0, n, 2):
                        acc += comb(n, j) * _euler[j]
                    _euler.append(-acc)
    return _euler[k]


# ---------------------------------------------------------------------------
# Rational polynomials
# ---------------------------------------------------------------------------

class RationalPolynomial:
    """Dense polynomial with exact rational coefficients (index = power)."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients):
        coeffs = [Fraction(c) for c in coefficients]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        if not coeffs:
            coeffs = [Fraction(0)]
        self.coefficients = coeffs

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, t: Fraction) -> Fraction:
        """Exact Horner evaluation at a rational point."""
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * t + c
        return acc

    def eval_mpf(self, t, prec_bits: int | None = None):
        """Evaluate at an mpf point (one rounding per coefficient)."""
        with mp.workprec(prec_bits or mp.prec):
            acc = mpf(0)
            for c in reversed(self.coefficients):
                acc = acc * t + mpf(c.numerator) / mpf(c.denominator)
            return acc

    def __eq__(self, other):
        return isinstance(other, RationalPolynomial) and self.coefficients == other.coefficients

    def __hash__(self):
        return hash(tuple(self.coefficients))

    def __add__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        n = max(len(self.coefficients), len(other.coefficients))
        out = [Fraction(0)] * n
        for i, c in enumerate(self.coefficients):
            out[i] += c
        for i, c in enumerate(other.coefficients):
            out[i] += c
        return RationalPolynomial(out)

    def scale(self, factor) -> "RationalPolynomial":
        f = Fraction(factor)
        return RationalPolynomial([c * f for c in self.coefficients])

    def __repr__(self):
        return f"RationalPolynomial({[str(c) for c in self.coefficients]})"


_bernoulli_polys: list[RationalPolynomial] = []
_euler_polys: list[RationalPolynomial] = []


def bernoulli_polynomial(n: int) -> RationalPolynomial:
    """B_n(x) = sum_j C(n, j) B_j x^{n-j}, exact."""
    if n < 0:
        raise ValueError("polynomial order must be non-negative")
    if n >= len(_bernoulli_polys):
        with _lock:
            while len(_bernoulli_polys) <= n:
                m = len(_bernoulli_polys)
                coeffs = [Fraction(0)] * (m + 1)
                for j in range(m + 1):
                    coeffs[m - j] = comb(m, j) * bernoulli_number(j)
                _bernoulli_polys.append(RationalPolynomial(coeffs))
    return _bernoulli_polys[n]


def euler_polynomial(n: int) -> RationalPolynomial:
    """E_n(x), built by integrating E_n' = n E_{n-1} from the constant term
    E_n(0) = -2 (2^{n+1} - 1) B_{n+1} / (n+1)."""
    if n < 0:
        raise ValueError("polynomial order must be non-negative")
    if n >= len(_euler_polys):
        with _lock:
            while len(_euler_polys) <= n:
                m = len(_euler_polys)
                if m == 0:
                    _euler_polys.append(RationalPolynomial([Fraction(1)]))
                    continue
                prev = _euler_polys[m - 1].coefficients
                coeffs = [Fraction(0)] * (m + 1)
                for i in range(1, m + 1):
                    coeffs[i] = Fraction(m, i) * prev[i - 1] if i - 1 < len(prev) else Fraction(0)
                coeffs[0] = -2 * (2 ** (m + 1) - 1) * bernoulli_number(m + 1) / (m + 1)
                _euler_polys.append(RationalPolynomial(coeffs))
    return _euler_polys[n]


# ---------------------------------------------------------------------------
# Stirling numbers of the first kind (signed)
# ---------------------------------------------------------------------------

class StirlingTable:
    """Triangular table of signed Stirling numbers of the first kind.

    Row recurrence: S_{k+1}(l) = S_k(l-1) - k * S_k(l), seeded S_0(0) = 1.
    The table only grows; `ensure` is safe to call from multiple threads.
    """

    def __init__(self, max_k: int = 64):
        self._rows: list[list[int]] = [[1]]
        self._lock = threading.RLock()
        self.ensure(max_k)

    @property
    def max_k(self) -> int:
        return len(self._rows) - 1

    def ensure(self, max_k: int) -> "StirlingTable":
        if max_k > self.max_k:
            with self._lock:
                while self.max_k < max_k:
                    k = self.max_k
                    row = self._rows[k]
                    nxt = [0] * (k + 2)
                    for l in range(k + 2):
                        prev = row[l - 1] if 1 <= l <= k + 1 else 0
                        cur = row[l] if l <= k else 0
                        nxt[l] = prev - k * cur
                    self._rows.append(nxt)
        return self

    def value(self, k: int, l: int) -> int:
        if not (0 <= l <= k <= self.max_k):
            raise IndexError(f"Stirling index out of range: k={k}, l={l}, max_k={self.max_k}")
        return self._rows[k][l]

    def row(self, k: int) -> list[int]:
        if not (0 <= k <= self.max_k):
            raise IndexError(f"Stirling row out of range: k={k}")
        return self._rows[k]


_shared_table = StirlingTable(64)


def shared_stirling_table(max_k: int = 64) -> StirlingTable:
    """Process-wide table, grown on demand."""
    return _shared_table.ensure(max_k)


def stirling_first(table: StirlingTable, k: int, l: int) -> int:
    """Signed Stirling number of the first kind S_k^{(1)}(l)."""
    return table.value(k, l)


# ---------------------------------------------------------------------------
# Pochhammer, double factorials, binomials
# ---------------------------------------------------------------------------

def pochhammer(x, k: int):
    """Rising factorial (x)_k = x (x+1) ... (x+k-1); (x)_0 = 1.

    Works for mpf/mpc/Fraction/int; exact when x is exact.
    """
    if k < 0:
        raise ValueError("Pochhammer order must be non-negative")
    acc = Fraction(1) if isinstance(x, (Fraction, int)) else mpf(1)
    for i in range(k):
        acc = acc * (x + i)
    return acc


def double_factorial_odd(n: int) -> Fraction:
    """Odd double factorial n!!, extended to negative odd n.

    For n >= 1 the usual product; downward, n!! = (n+2)!!/(n+2) gives
    (-1)!! = 1, (-3)!! = -1, (-5)!! = 1/3, (-7)!! = -1/15, ...
    """
    if n % 2 == 0:
        raise ValueError("double_factorial_odd requires an odd argument")
    if n >= 1:
        acc = Fraction(1)
        while n >= 1:
            acc *= n
            n -= 2
        return acc
    acc = Fraction(1)
    m = -1
    while m > n:
        acc /= m
        m -= 2
    return acc


def generalized_binomial(m, l: int):
    """C(m, l) = m (m-1) ... (m-l+1) / l! for arbitrary m.

    Exact Fraction when m is Fraction/int; mpf/mpc otherwise.
    """
    if l < 0:
        raise ValueError("binomial lower index must be non-negative")
    if isinstance(m, (Fraction, int)):
        num = Fraction(1)
        for i in range(l):
            num *= (Fraction(m) - i)
        return num / factorial(l)
    acc = m - m + 1  # one, of the same type as m
    for i in range(l):
        acc = acc * (m - i)
    return acc / mpf(factorial(l))


# cached per-(order, t) polynomial values; the formula evaluator hits these hard
_bp_values: dict[tuple[int, Fraction], Fraction] = {}
_ep_values: dict[tuple[int, Fraction], Fraction] = {}


def bernoulli_poly_at(n: int, t: Fraction) -> Fraction:
    key = (n, t)
    val = _bp_values.get(key)
    if val is None:
        val = bernoulli_polynomial(n)(t)
        with _lock:
            _bp_values[key] = val
    return val


def euler_poly_at(n: int, t: Fraction) -> Fraction:
    key = (n, t)
    val = _ep_values.get(key)
    if val is None:
        val = euler_polynomial(n)(t)
        with _lock:
            _ep_values[key] = val
    return val
