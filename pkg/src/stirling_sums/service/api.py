"""Service layer: translate wire models into catalog calls.

Both the FastAPI app and the CLI go through these functions, so the CLI is a
thin client whether it runs in-process or against a remote server.
"""
from __future__ import annotations

import time
from fractions import Fraction

from mpmath import mp

from ..bigreal import format_decimal, parse_real, parse_real_or_complex, to_mpf
from ..catalog import (
    EvalRequest,
    FormulaId,
    SLOW_FAMILIES,
    all_formula_ids,
    evaluate,
    list_formulas,
)
from ..constants import CATALOG_CONSTANTS, ConstantRequest, constant_label, get_constant
from ..engine import TruncationPolicy
from ..oracle import brute_force, convergence_study
from ..special import tail_bound
from .models import (
    CompareParams,
    ConstantRecord,
    EvalParams,
    FormulaInfo,
    OutputRecord,
    TableParams,
    TableResponse,
    TableRow,
)

CATALOG_ABS_TOLERANCE = 1e-20  # per-family contract for the Stirling catalog


class RequestError(ValueError):
    pass


def _build_request(p: EvalParams | TableParams, formula: str | None = None) -> EvalRequest:
    try:
        fid = FormulaId.parse(formula or p.formula)
        x = parse_real(p.x)
        m = parse_real_or_complex(p.m) if p.m is not None else None
        a = parse_real(p.a) if p.a is not None else None
        policy = None
        max_order = getattr(p, "max_order", None)
        tol = getattr(p, "tol", None)
        if max_order is not None or tol is not None:
            policy = TruncationPolicy(
                mode="adaptive",
                tolerance=Fraction(tol) if tol is not None else Fraction(1, 10**30),
                max_order=max_order or 64)
        return EvalRequest(formula=fid, x=x, m=m, a=a,
                           precision_bits=p.prec_bits, policy=policy,
                           shift=p.shift, outer_terms=getattr(p, "outer_terms", 1000))
    except (ValueError, ZeroDivisionError) as exc:
        raise RequestError(str(exc)) from exc


def _params_dict(req: EvalRequest) -> dict:
    out = {}
    if req.m is not None:
        out["m"] = str(req.m)
    if req.a is not None:
        out["a"] = str(req.a)
    if req.formula.family in SLOW_FAMILIES:
        out["outer_terms"] = req.outer_terms
    return out


def run_eval(p: EvalParams) -> OutputRecord:
    req = _build_request(p)
    start = time.perf_counter()
    res = evaluate(req)
    elapsed = (time.perf_counter() - start) * 1000
    return OutputRecord(
        formula=str(req.formula), x=format_decimal(to_mpf(req.x, req.precision_bits), req.precision_bits),
        params=_params_dict(req),
        value=format_decimal(res.value, req.precision_bits),
        error_estimate=format_decimal(res.error_estimate, req.precision_bits),
        orders_used=res.orders_used, status=str(res.status), elapsed_ms=elapsed)


def _family_tolerance(req: EvalRequest) -> float:
    if req.formula.family in SLOW_FAMILIES:
        return tail_bound(req.formula.family, req.x, req.outer_terms)
    return CATALOG_ABS_TOLERANCE


def run_compare_one(p: EvalParams, formula: str | None = None) -> tuple[OutputRecord, bool]:
    req = _build_request(p, formula)
    start = time.perf_counter()
    res = evaluate(req)
    want = brute_force(req.formula, req.x, m=req.m, a=req.a,
                       precision_bits=req.precision_bits)
    elapsed = (time.perf_counter() - start) * 1000
    with mp.workprec(req.precision_bits + 16):
        wantf = to_mpf(want) if isinstance(want, Fraction) else want
        err = abs(res.value - wantf)
    ok = float(err) <= _family_tolerance(req)
    rec = OutputRecord(
        formula=str(req.formula), x=format_decimal(to_mpf(req.x, req.precision_bits), req.precision_bits),
        params=_params_dict(req),
        value=format_decimal(res.value, req.precision_bits),
        error_estimate=format_decimal(res.error_estimate, req.precision_bits),
        oracle_value=format_decimal(wantf, req.precision_bits),
        abs_error=format_decimal(err, req.precision_bits),
        orders_used=res.orders_used, status=str(res.status), elapsed_ms=elapsed)
    return rec, ok


# parameter grid used when `compare --formula all` meets a parameterized family
SWEEP_M = ["2", "1/2"]
SWEEP_A = ["1/2", "2", "5"]


def run_compare(p: CompareParams) -> tuple[list[OutputRecord], bool]:
    if p.formula.strip().lower() != "all":
        rec, ok = run_compare_one(p)
        return [rec], ok
    records: list[OutputRecord] = []
    all_ok = True
    for fid in all_formula_ids():
        fam = fid.family
        variants: list[EvalParams] = []
        base = p.model_copy(update={"formula": str(fid)})
        if fam in ("faulhaber_ext", "faulhaber_int", "alt_faulhaber_gen"):
            for mtext in SWEEP_M:
                variants.append(base.model_copy(update={"m": mtext}))
        elif fam == "alt_faulhaber_finite":
            variants.append(base.model_copy(update={"m": "2"}))
        elif fam in ("geometric_stirling", "alt_geometric_stirling",
                     "geometric_em", "alt_geometric_em"):
            for atext in SWEEP_A:
                variants.append(base.model_copy(update={"a": atext}))
        else:
            variants.append(base)
        for v in variants:
            if fam == "faulhaber_int":
                # integer-argument family: round the sweep x down
                v = v.model_copy(update={"x": str(int(float(Fraction(v.x))) or 1)})
            rec, ok = run_compare_one(v, str(fid))
            records.append(rec)
            all_ok = all_ok and ok
    return records, all_ok


def run_table(p: TableParams) -> TableResponse:
    req = _build_request(p)
    report = convergence_study(req.formula, req.x, m=req.m, a=req.a,
                               max_order=p.max_order,
                               precision_bits=p.prec_bits, shift=p.shift)
    bits = p.prec_bits
    oracle_f = (to_mpf(report.oracle_value, bits)
                if isinstance(report.oracle_value, Fraction) else report.oracle_value)
    return TableResponse(
        formula=str(req.formula), x=format_decimal(to_mpf(req.x, bits), bits),
        oracle_value=format_decimal(oracle_f, bits), oracle_cost=report.oracle_cost,
        rows=[TableRow(order=k, partial_value=format_decimal(val, bits),
                       abs_error=format_decimal(err, bits),
                       term_magnitude=format_decimal(mag, bits))
              for (k, val, err, mag) in report.rows])


def run_constants(prec_bits: int = 256) -> list[ConstantRecord]:
    out = []
    for cid, param in CATALOG_CONSTANTS:
        value = get_constant(ConstantRequest(constant_id=cid, parameter=param,
                                             precision_bits=prec_bits))
        out.append(ConstantRecord(constant=constant_label(cid, param),
                                  prec_bits=prec_bits,
                                  value=format_decimal(value, prec_bits)))
    return out


def run_list() -> list[FormulaInfo]:
    return [FormulaInfo(**entry) for entry in list_formulas()]
