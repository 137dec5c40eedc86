"""Pydantic request/response models shared by the HTTP service and the CLI."""
from __future__ import annotations

from typing import ClassVar, Optional

from pydantic import BaseModel, Field

SCHEMA_VERSION = "1"


class EvalParams(BaseModel):
    formula: str = Field(..., description="formula id, family.vN")
    x: str = Field(..., description="positive decimal argument")
    m: Optional[str] = Field(None, description="exponent for Faulhaber families; RE+IMi allowed")
    a: Optional[str] = Field(None, description="base for geometric families")
    prec_bits: int = Field(256, ge=64)
    max_order: Optional[int] = Field(None, ge=1)
    tol: Optional[str] = Field(None, description="adaptive tolerance, decimal")
    shift: Optional[int] = Field(None, description="argument shift override; 0 = raw display")
    outer_terms: int = Field(1000, ge=1, description="outer truncation for slow formulas")


class CompareParams(EvalParams):
    formula: str = Field(..., description="formula id or 'all'")


class TableParams(BaseModel):
    formula: str
    x: str
    m: Optional[str] = None
    a: Optional[str] = None
    prec_bits: int = Field(256, ge=64)
    max_order: int = Field(20, ge=1)
    shift: Optional[int] = None


class OutputRecord(BaseModel):
    schema_version: str = SCHEMA_VERSION
    formula: str
    x: str
    params: dict = Field(default_factory=dict)
    value: str
    error_estimate: str
    oracle_value: Optional[str] = None
    abs_error: Optional[str] = None
    orders_used: int = 0
    status: str = "converged"
    elapsed_ms: float = 0.0

    # fixed CSV column order; keep in sync with to_csv_row
    CSV_HEADER: ClassVar[str] = (
        "schema_version,formula,x,params,value,error_estimate,"
        "oracle_value,abs_error,orders_used,status,elapsed_ms")

    def to_csv_row(self) -> str:
        import json
        params = json.dumps(self.params, sort_keys=True).replace('"', "'")
        fields = [self.schema_version, self.formula, self.x, f'"{params}"',
                  self.value, self.error_estimate,
                  self.oracle_value or "", self.abs_error or "",
                  str(self.orders_used), self.status, f"{self.elapsed_ms:.3f}"]
        return ",".join(fields)


class TableRow(BaseModel):
    order: int
    partial_value: str
    abs_error: str
    term_magnitude: str


class TableResponse(BaseModel):
    schema_version: str = SCHEMA_VERSION
    formula: str
    x: str
    oracle_value: str
    oracle_cost: int
    rows: list[TableRow]


class ConstantRecord(BaseModel):
    schema_version: str = SCHEMA_VERSION
    constant: str
    prec_bits: int
    value: str


class FormulaInfo(BaseModel):
    formula: str
    item: str
    description: str
    params: dict
    constants: list[str]
    slow: bool
