"""Independent ground truth: literal summation of every left-hand side.

Rational summands are accumulated as exact Fractions (bit-identical across
runs); everything else uses compensated sequential summation at a precision
padded 32 bits over the request.  This module deliberately never touches the
Weniger engine, so it can stand as the oracle for it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor

from mpmath import mp, mpf, mpc

from .bigreal import locked_workprec, to_mpf
from .catalog import FAMILIES, EvalRequest, FormulaId, evaluate_partials


@dataclass
class ConvergenceReport:
    formula: FormulaId
    x: Fraction
    oracle_value: object
    oracle_cost: int
    rows: list = field(default_factory=list)   # (order, partial, abs_error, term_magnitude)


@locked_workprec
def brute_force(formula, x, m=None, a=None, precision_bits: int = 256,
                outer_terms: int = 0):
    """Literal left-hand side of a family at x: sum of f(k) up to floor(x).

    Returns a Fraction when every summand is rational, otherwise an mpf/mpc
    computed by compensated (Kahan) summation at precision_bits + 32.
    """
    fid = formula if isinstance(formula, FormulaId) else FormulaId.parse(str(formula))
    fam = FAMILIES[fid.family]
    req = EvalRequest(formula=fid, x=Fraction(x), m=m, a=a,
                      precision_bits=precision_bits)
    n = floor(req.x)
    first = fam.lhs_start
    if first == 0:
        # k = 0 contributes for the genuinely-from-zero families
        zero_term = {"gregory_leibniz": Fraction(1), "geometric_stirling": Fraction(1),
                     "alt_geometric_stirling": Fraction(1), "geometric_em": Fraction(1),
                     "alt_geometric_em": Fraction(1), "exp_geometric": Fraction(1)}.get(
                         fid.family, Fraction(0))
    else:
        zero_term = Fraction(0)

    if fam.summand_exact is not None:
        probe = fam.summand_exact(1, req) if n >= 1 else Fraction(0)
    else:
        probe = None
    if probe is not None:
        acc = zero_term
        for k in range(1, n + 1):
            acc += fam.summand_exact(k, req)
        return acc

    prec = precision_bits + 32
    with mp.workprec(prec):
        total = to_mpf(zero_term)
        comp = mpf(0)  # Kahan compensation
        complex_mode = isinstance(req.m, mpc)
        if complex_mode:
            total = mpc(total)
            comp = mpc(0)
        for k in range(1, n + 1):
            y = fam.summand_float(k, req, prec) - comp
            t = total + y
            comp = (t - total) - y
            total = t
        return +total


@locked_workprec
def convergence_study(formula, x, m=None, a=None, max_order: int = 32,
                      precision_bits: int = 256, shift=None) -> ConvergenceReport:
    """Per-order errors of a Stirling-series formula against brute force.

    shift=None follows the production evaluator; shift=0 studies the raw
    display at its own argument.
    """
    fid = formula if isinstance(formula, FormulaId) else FormulaId.parse(str(formula))
    req = EvalRequest(formula=fid, x=Fraction(x), m=m, a=a,
                      precision_bits=precision_bits, shift=shift)
    oracle_value = brute_force(fid, x, m=m, a=a, precision_bits=precision_bits)
    n_terms = floor(Fraction(x))
    base, increments = evaluate_partials(req, max_order)
    with mp.workprec(precision_bits + 32):
        want = to_mpf(oracle_value) if isinstance(oracle_value, Fraction) else oracle_value
        rows = []
        partial = base
        start = 1 if increments and increments[0] == 0 else 0
        for k in range(start, max_order + 1):
            partial = partial + increments[k]
            rows.append((k, +partial, +abs(partial - want), +abs(increments[k])))
    return ConvergenceReport(formula=fid, x=Fraction(x), oracle_value=oracle_value,
                             oracle_cost=max(0, n_terms), rows=rows)


@locked_workprec
def em_asymptotic_floor(x, max_order: int = 80, precision_bits: int = 256):
    """Best error reachable by the raw Euler-Maclaurin asymptotic tail for the
    harmonic sum at x: min over m of |H_floor(x) - (log x + gamma +
    sum_{k<=m} (-1)^k B_k({x})/(k x^k))|.  The factorial series beats this
    floor; the asymptotic series cannot."""
    from .combinatorics import bernoulli_poly_at
    from .constants import euler_gamma
    xq = Fraction(x)
    t = xq - floor(xq)
    truth = brute_force("harmonic.v1", xq, precision_bits=precision_bits)
    with mp.workprec(precision_bits + 32):
        xv = to_mpf(xq)
        want = to_mpf(truth)
        partial = mp.log(xv) + euler_gamma(precision_bits + 32)
        best = abs(partial - want)
        xpow = xv
        for k in range(1, max_order + 1):
            partial -= to_mpf(bernoulli_poly_at(k, t)) / (k * xpow)
            best = min(best, abs(partial - want))
            xpow *= xv
        return +best
