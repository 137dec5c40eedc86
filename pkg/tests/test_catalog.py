"""Formula catalog against the brute-force oracle, plus the inner-sum ops."""
from fractions import Fraction

import pytest
from mpmath import mp, mpf, mpc

from conftest import abs_err
from stirling_sums.catalog import (
    CapabilityError,
    EvalRequest,
    FormulaId,
    ParameterError,
    all_formula_ids,
    evaluate,
    faulhaber_inner_sum,
    list_formulas,
    log_family_inner_sum,
    log_weight_harmonic,
    numerator_polynomial,
    stirling_column_two,
)
from stirling_sums.combinatorics import RationalPolynomial
from stirling_sums.engine import Status
from stirling_sums.oracle import brute_force

PREC = 192


def check(formula: str, x, tol=1e-20, **kw):
    fid = FormulaId.parse(formula)
    res = evaluate(EvalRequest(formula=fid, x=Fraction(x), precision_bits=PREC, **kw))
    want = brute_force(fid, Fraction(x), precision_bits=PREC,
                       m=kw.get("m"), a=kw.get("a"))
    err = abs_err(res.value, want if isinstance(want, Fraction) else want)
    assert err <= tol, f"{formula} x={x} {kw}: err {err}"
    return res


# ---------------------------------------------------------------------------
# headline examples
# ---------------------------------------------------------------------------

def test_harmonic_v2_at_ten_and_a_half():
    res = check("harmonic.v2", "10.5", tol=1e-25)
    assert res.status == Status.CONVERGED
    assert brute_force("harmonic.v2", Fraction("10.5")) == Fraction(7381, 2520)


def test_self_counting_exact():
    res = check("self_counting.v1", 10, tol=1e-40)
    assert abs_err(res.value, Fraction(30)) < 1e-40
    assert res.error_estimate == 0
    assert brute_force("self_counting.v1", Fraction(10)) == 30


def test_alt_faulhaber_finite_m1_example():
    # 1 - 2 + 3 - 4 + 5 = 3, from eta(-1) + parity * Euler-polynomial sum
    res = check("alt_faulhaber_finite.v1", 5, tol=1e-40, m=Fraction(1))
    assert abs_err(res.value, Fraction(3)) < 1e-40
    assert res.error_estimate == 0


def test_gregory_leibniz_at_integer():
    res = check("gregory_leibniz.v1", 10, tol=1e-25)
    assert res.status == Status.CONVERGED


def test_sqrt_v1_matches_brute():
    check("sqrt.v1", "10.5", tol=1e-22)


# ---------------------------------------------------------------------------
# oracle equivalence across the grid (criterion-3 style, abbreviated here)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("family,nvar", [
    ("harmonic", 2), ("zeta2", 2), ("zeta3", 2), ("sqrt", 3), ("k_sqrt", 3),
    ("k2_sqrt", 3), ("inv_sqrt", 2), ("zeta_3_2", 2), ("zeta_5_2", 2),
    ("log_factorial", 3), ("k_log_k", 2), ("logk_over_k", 1),
    ("logk_over_k2", 1), ("log_squared", 1), ("gregory_leibniz", 1),
    ("alt_harmonic", 1),
])
def test_parameter_free_families(family, nvar):
    for v in range(1, nvar + 1):
        for x in ("1.25", "10.5"):
            check(f"{family}.v{v}", x)


@pytest.mark.parametrize("m", [Fraction(2), Fraction(1, 2), Fraction(-1, 2), Fraction(-2)])
def test_faulhaber_ext_variants(m):
    for v in (1, 2, 3):
        if v == 3 and m < -1:
            continue   # v3 needs m > -1 (negative-order polynomials otherwise)
        check(f"faulhaber_ext.v{v}", "10.5", m=m)


def test_faulhaber_v3_domain():
    with pytest.raises(ParameterError):
        EvalRequest(formula=FormulaId("faulhaber_ext", 3), x=Fraction(2), m=Fraction(-2))


def test_faulhaber_complex_m():
    for v in (1, 2):
        check(f"faulhaber_ext.v{v}", "10.5", tol=1e-20, m=mpc(1, 1))
        check("alt_faulhaber_gen.v1", "3.7", tol=1e-20, m=mpc(1, 1))


def test_faulhaber_int_family():
    for v in (1, 2, 3):
        for m in (Fraction(3), Fraction(1, 2)):
            check(f"faulhaber_int.v{v}", 10, m=m)


def test_faulhaber_integer_m_closed_forms():
    # classical closed forms, e.g. n(n+1)(2n+1)/6 for m = 2
    closed = {
        0: lambda n: n,
        1: lambda n: Fraction(n * (n + 1), 2),
        2: lambda n: Fraction(n * (n + 1) * (2 * n + 1), 6),
        3: lambda n: Fraction(n * (n + 1), 2) ** 2,
        4: lambda n: Fraction(n * (n + 1) * (2 * n + 1) * (3 * n * n + 3 * n - 1), 30),
    }
    for m, want_fn in closed.items():
        for n in (5, 17):
            res = evaluate(EvalRequest(formula=FormulaId("faulhaber_ext", 1),
                                       x=Fraction(n), m=Fraction(m), precision_bits=PREC))
            assert abs_err(res.value, want_fn(n)) < 1e-25, f"m={m} n={n}"


@pytest.mark.parametrize("a", [Fraction(1, 2), Fraction(2), Fraction(5)])
def test_geometric_families(a):
    for fam in ("geometric_stirling.v1", "alt_geometric_stirling.v1",
                "geometric_em.v1", "alt_geometric_em.v1"):
        for x in ("3.7", "10.5"):
            check(fam, x, a=a)


def test_exp_geometric():
    check("exp_geometric.v1", "10.5")
    check("exp_geometric.v1", "1.25")


def test_variant_agreement():
    # all variants of one family agree with each other (paper: they are equal)
    for family, nvar in (("sqrt", 3), ("zeta3", 2), ("k_sqrt", 3), ("log_factorial", 3)):
        vals = []
        for v in range(1, nvar + 1):
            res = evaluate(EvalRequest(formula=FormulaId(family, v),
                                       x=Fraction("3.7"), precision_bits=PREC))
            vals.append(res.value)
        for i in range(1, len(vals)):
            assert abs_err(vals[i], vals[0]) < 1e-20


def test_integer_real_consistency():
    # floor(x) is constant on [n, n+1): values at n and n+1-2^-40 agree;
    # crossing to n+1 adds exactly the next summand
    n = 7
    eps = Fraction(1, 2**40)
    for fam, summand in (("harmonic", Fraction(1, 8)), ("alt_harmonic", Fraction(1, 8))):
        fid = FormulaId(fam, 1)
        at_n = evaluate(EvalRequest(formula=fid, x=Fraction(n), precision_bits=PREC)).value
        near = evaluate(EvalRequest(formula=fid, x=Fraction(n + 1) - eps,
                                    precision_bits=PREC)).value
        after = evaluate(EvalRequest(formula=fid, x=Fraction(n + 1), precision_bits=PREC)).value
        assert abs_err(near, at_n) < 1e-15
        jump = summand if fam == "harmonic" else Fraction((-1) ** (n + 2), n + 1)
        assert abs_err(after - at_n, jump) < 1e-15


# ---------------------------------------------------------------------------
# exactness paths
# ---------------------------------------------------------------------------

def test_alt_faulhaber_finite_exact_sweep():
    for m in range(0, 9):
        for n in (1, 7, 50, 100):
            res = evaluate(EvalRequest(formula=FormulaId("alt_faulhaber_finite", 1),
                                       x=Fraction(n), m=Fraction(m), precision_bits=PREC))
            want = brute_force("alt_faulhaber_finite.v1", Fraction(n), m=Fraction(m))
            assert isinstance(want, Fraction)
            assert abs_err(res.value, want) < 1e-40, f"m={m} n={n}"
            assert res.error_estimate == 0


def test_geometric_rational_closed_form():
    # oracle rational mode matches (a^{n+1}-1)/(a-1) exactly
    for a in (Fraction(1, 2), Fraction(2), Fraction(5), Fraction(7, 3)):
        for n in (5, 23):
            got = brute_force("geometric_stirling.v1", Fraction(n), a=a)
            assert got == (a ** (n + 1) - 1) / (a - 1)


# ---------------------------------------------------------------------------
# numerator polynomials (leading orders)
# ---------------------------------------------------------------------------

LEADING_POLYS = {
    1: [Fraction(1, 24), Fraction(-1, 4), Fraction(1, 4)],
    2: [Fraction(1, 24), Fraction(-11, 48), Fraction(3, 16), Fraction(1, 24)],
    3: [Fraction(53, 640), Fraction(-7, 16), Fraction(21, 64), Fraction(3, 32),
        Fraction(1, 64)],
    4: [Fraction(79, 320), Fraction(-977, 768), Fraction(29, 32), Fraction(109, 384),
        Fraction(19, 256), Fraction(1, 128)],
}


def test_numerator_polynomials_sqrt_v1():
    fid = FormulaId("sqrt", 1)
    for k, coeffs in LEADING_POLYS.items():
        assert numerator_polynomial(fid, k) == RationalPolynomial(coeffs), f"k={k}"
    assert numerator_polynomial(fid, 1)(Fraction(0)) == Fraction(1, 24)
    assert numerator_polynomial(fid, 2)(Fraction(0)) == Fraction(1, 24)
    assert numerator_polynomial(fid, 3)(Fraction(0)) == Fraction(53, 640)
    assert numerator_polynomial(fid, 4)(Fraction(0)) == Fraction(79, 320)


def test_numerator_polynomial_unsupported():
    with pytest.raises(CapabilityError):
        numerator_polynomial(FormulaId("geometric_stirling", 1), 2)
    with pytest.raises(CapabilityError):
        numerator_polynomial(FormulaId("faulhaber_ext", 1), 2)


# ---------------------------------------------------------------------------
# inner-sum operations
# ---------------------------------------------------------------------------

def test_faulhaber_inner_sum_examples():
    # C(3,2) S_1(1) B_2 = 3 * 1/6 = 1/2
    assert faulhaber_inner_sum(Fraction(2), 1, 1, Fraction(0)) == Fraction(1, 2)
    # m = 0: C(1, l+1) = 0 for every l >= 1
    for k in (1, 3, 6):
        assert faulhaber_inner_sum(Fraction(0), k, 1, Fraction(0)) == 0
    # C(3/2, 1) B_1 = (3/2)(-1/2) = -3/4
    assert faulhaber_inner_sum(Fraction(1, 2), 1, 0, Fraction(0)) == Fraction(-3, 4)


def test_log_family_weights():
    assert log_weight_harmonic(1) == 1
    assert log_weight_harmonic(3) == Fraction(13, 3)
    assert stirling_column_two(1) == 1    # S_2(2)
    assert stirling_column_two(2) == -3   # S_3(2)


def test_log_family_inner_sum_runs():
    with mp.workprec(200):
        v = log_family_inner_sum("logk_over_k2", 3, Fraction(1, 2), mpf(2))
        assert v == v  # finite
    with pytest.raises(CapabilityError):
        log_family_inner_sum("harmonic", 2, Fraction(0), mpf(1))


# ---------------------------------------------------------------------------
# listing and identifiers
# ---------------------------------------------------------------------------

def test_list_formulas_contents():
    listing = list_formulas()
    ids = [e["formula"] for e in listing]
    assert "harmonic.v1" in ids
    assert "faulhaber_ext.v3" in ids
    assert sum(1 for i in ids if i.startswith("sqrt.")) == 3
    assert sum(1 for i in ids if i.startswith("zeta3.")) == 2
    assert sum(1 for i in ids if "geometric_em" in i) == 2
    # stable ordering by paper item
    assert ids == [str(f) for f in all_formula_ids()]
    assert listing == list_formulas()


def test_formula_id_parsing():
    assert str(FormulaId.parse("sqrt.v2")) == "sqrt.v2"
    assert FormulaId.parse("harmonic").variant == 1
    with pytest.raises(ParameterError):
        FormulaId.parse("sqrt.v9")
    with pytest.raises(ParameterError):
        FormulaId.parse("nope.v1")


# ---------------------------------------------------------------------------
# parameter validation
# ---------------------------------------------------------------------------

def test_parameter_errors():
    with pytest.raises(ParameterError):
        EvalRequest(formula=FormulaId("geometric_stirling", 1), x=Fraction("7.3"),
                    a=Fraction(1))
    with pytest.raises(ParameterError):
        EvalRequest(formula=FormulaId("sqrt", 1), x=Fraction(0))
    with pytest.raises(ParameterError):
        EvalRequest(formula=FormulaId("faulhaber_ext", 1), x=Fraction(2), m=Fraction(-1))
    with pytest.raises(ParameterError):
        EvalRequest(formula=FormulaId("alt_faulhaber_finite", 1), x=Fraction(2),
                    m=Fraction(1, 2))
    with pytest.raises(ParameterError):
        EvalRequest(formula=FormulaId("harmonic", 1), x=Fraction(2), a=Fraction(2))
    with pytest.raises(CapabilityError):
        EvalRequest(formula=FormulaId("faulhaber_ext", 3), x=Fraction(2), m=mpc(1, 1))
    with pytest.raises(ParameterError):
        EvalRequest(formula=FormulaId("faulhaber_int", 1), x=Fraction("2.5"), m=Fraction(2))


def test_small_x_edge():
    # x in (0, 1]: empty or single-term sums still evaluate
    res = check("harmonic.v1", "0.5", tol=1e-20)
    assert res.status == Status.CONVERGED
    check("zeta2.v2", "1", tol=1e-20)


def test_error_estimate_honesty():
    # converged catalog evaluations: |value - oracle| <= 10 x error_estimate,
    # up to the final-rounding floor of the requested precision
    from mpmath import mpf
    floor = float(mpf(2) ** (-(PREC - 8)))
    for formula, kw in (("harmonic.v1", {}), ("sqrt.v2", {}), ("zeta_5_2.v1", {}),
                        ("log_squared.v1", {}), ("faulhaber_ext.v1", {"m": Fraction(1, 2)}),
                        ("alt_harmonic.v1", {}), ("geometric_em.v1", {"a": Fraction(2)})):
        fid = FormulaId.parse(formula)
        res = evaluate(EvalRequest(formula=fid, x=Fraction("10.5"),
                                   precision_bits=PREC, **kw))
        assert res.status == Status.CONVERGED
        want = brute_force(fid, Fraction("10.5"), precision_bits=PREC,
                           m=kw.get("m"), a=kw.get("a"))
        err = abs_err(res.value, want)
        scale = max(1.0, abs(float(res.value)))
        assert err <= 10 * float(res.error_estimate) + floor * scale, formula


@pytest.mark.slow
def test_full_grid_oracle_equivalence(x_grid):
    # every family/variant, parameter sweeps included, across the whole x grid
    from mpmath import mpc
    from stirling_sums.catalog import NEEDS_A, NEEDS_M, SLOW_FAMILIES
    checked = 0
    for x in x_grid:
        for fid in all_formula_ids():
            if fid.family in SLOW_FAMILIES:
                continue
            cases = [{}]
            if fid.family in NEEDS_M:
                cases = ([{"m": Fraction(3)}] if fid.family == "alt_faulhaber_finite"
                         else [{"m": Fraction(2)}, {"m": Fraction(1, 2)},
                               {"m": Fraction(-1, 2)}])
                if fid.family in ("faulhaber_ext", "alt_faulhaber_gen") and fid.variant != 3:
                    cases.append({"m": mpc(1, 1)})
            if fid.family in NEEDS_A:
                cases = [{"a": Fraction(1, 2)}, {"a": Fraction(2)}, {"a": Fraction(5)}]
            for kw in cases:
                xx = Fraction(int(x)) if fid.family == "faulhaber_int" else x
                res = evaluate(EvalRequest(formula=fid, x=xx, precision_bits=PREC, **kw))
                want = brute_force(fid, xx, precision_bits=PREC,
                                   m=kw.get("m"), a=kw.get("a"))
                err = abs_err(res.value, want)
                assert err <= 1e-20, f"{fid} x={xx} {kw}: {err}"
                checked += 1
    assert checked >= 280


def test_concurrent_evaluations():
    # shared caches (Bernoulli, Stirling, constants) under concurrent readers
    from concurrent.futures import ThreadPoolExecutor

    def one(seed):
        fam = ["harmonic.v1", "sqrt.v1", "zeta3.v2", "log_factorial.v1"][seed % 4]
        fid = FormulaId.parse(fam)
        x = Fraction(105 + seed, 10)
        res = evaluate(EvalRequest(formula=fid, x=x, precision_bits=128))
        want = brute_force(fid, x, precision_bits=128)
        return abs_err(res.value, want)

    with ThreadPoolExecutor(max_workers=8) as pool:
        errs = list(pool.map(one, range(16)))
    assert all(e < 1e-20 for e in errs)
