"""FastAPI service wrapping the catalog.

Run with:  uvicorn stirling_sums.service.app:app
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query

from .. import __version__
from ..catalog import CapabilityError, ParameterError
from . import api
from .models import (
    CompareParams,
    ConstantRecord,
    EvalParams,
    FormulaInfo,
    OutputRecord,
    TableParams,
    TableResponse,
)

app = FastAPI(
    title="stirling-sums",
    description="Rapidly convergent Stirling-series evaluation of finite sums",
    version=__version__,
)


def _guard(fn, *args):
    try:
        return fn(*args)
    except (api.RequestError, ParameterError, CapabilityError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/eval", response_model=OutputRecord)
def eval_formula(params: EvalParams):
    return _guard(api.run_eval, params)


@app.post("/compare", response_model=list[OutputRecord])
def compare(params: CompareParams):
    records, _ok = _guard(api.run_compare, params)
    return records


@app.post("/table", response_model=TableResponse)
def table(params: TableParams):
    return _guard(api.run_table, params)


@app.get("/constants", response_model=list[ConstantRecord])
def constants(prec_bits: int = Query(256, ge=64)):
    return _guard(api.run_constants, prec_bits)


@app.get("/formulas", response_model=list[FormulaInfo])
def formulas():
    return api.run_list()
