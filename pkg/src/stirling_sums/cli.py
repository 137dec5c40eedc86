"""Command-line front end: a thin client over the service layer.

Subcommands: eval, compare, table, constants, list.  By default the service
layer runs in-process; --server http://host:port sends the same request models
to a running FastAPI instance instead.

Exit codes: 0 success/converged, 1 parameter or usage error, 2 evaluation
finished with a non-converged status or a failed comparison.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .catalog import CapabilityError, ParameterError
from .service import api
from .service.models import (
    CompareParams,
    EvalParams,
    OutputRecord,
    TableParams,
)

ENV_PREC = "STIRLING_SUMS_PREC_BITS"


def _default_prec() -> int:
    raw = os.environ.get(ENV_PREC)
    if raw:
        try:
            return max(64, int(raw))
        except ValueError:
            pass
    return 256


def _add_common(p: argparse.ArgumentParser, with_order=True):
    p.add_argument("--x", required=True, help="positive decimal argument")
    p.add_argument("--m", help="exponent for Faulhaber families (decimal or RE+IMi)")
    p.add_argument("--a", help="base for geometric families (decimal)")
    p.add_argument("--prec-bits", type=int, default=_default_prec())
    if with_order:
        p.add_argument("--max-order", type=int, default=None)
        p.add_argument("--tol", help="adaptive tolerance (decimal)")
    p.add_argument("--shift", type=int, default=None,
                   help="argument shift override; 0 evaluates the raw display")
    p.add_argument("--outer-terms", type=int, default=1000,
                   help="outer truncation for the slow formulas")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--server", help="base URL of a running stirling-sums service")


def _emit(records: list[OutputRecord], fmt: str):
    if fmt == "csv":
        print(OutputRecord.CSV_HEADER)
        for r in records:
            print(r.to_csv_row())
    else:
        for r in records:
            print(r.model_dump_json(exclude_none=True))


def _remote(server: str, method: str, path: str, payload=None, params=None):
    import httpx
    url = server.rstrip("/") + path
    with httpx.Client(timeout=600.0) as client:
        resp = (client.post(url, json=payload) if method == "post"
                else client.get(url, params=params))
    if resp.status_code == 422:
        raise api.RequestError(str(resp.json().get("detail", "invalid request")))
    resp.raise_for_status()
    return resp.json()


def cmd_eval(args) -> int:
    params = EvalParams(formula=args.formula, x=args.x, m=args.m, a=args.a,
                        prec_bits=args.prec_bits, max_order=args.max_order,
                        tol=args.tol, shift=args.shift, outer_terms=args.outer_terms)
    if args.server:
        rec = OutputRecord(**_remote(args.server, "post", "/eval",
                                     params.model_dump()))
    else:
        rec = api.run_eval(params)
    _emit([rec], args.format)
    return 0 if rec.status == "converged" else 2


def cmd_compare(args) -> int:
    params = CompareParams(formula=args.formula, x=args.x, m=args.m, a=args.a,
                           prec_bits=args.prec_bits, max_order=args.max_order,
                           tol=args.tol, shift=args.shift,
                           outer_terms=args.outer_terms)
    if args.server:
        payload = _remote(args.server, "post", "/compare", params.model_dump())
        records = [OutputRecord(**r) for r in payload]
        ok = all(r.abs_error is not None for r in records)  # tolerance checked locally below
        from fractions import Fraction
        from .special import tail_bound
        ok = True
        for r in records:
            tol = (tail_bound(r.formula.split(".")[0], Fraction(r.x),
                              int(r.params.get("outer_terms", args.outer_terms)))
                   if r.formula.split(".")[0] in ("sqrt_fresnel", "harmonic_cosint")
                   else api.CATALOG_ABS_TOLERANCE)
            ok = ok and r.abs_error is not None and float(Fraction(r.abs_error)) <= tol
    else:
        records, ok = api.run_compare(params)
    _emit(records, args.format)
    return 0 if ok else 2


def cmd_table(args) -> int:
    params = TableParams(formula=args.formula, x=args.x, m=args.m, a=args.a,
                         prec_bits=args.prec_bits, max_order=args.max_order or 20,
                         shift=args.shift)
    if args.server:
        payload = _remote(args.server, "post", "/table", params.model_dump())
        rows = payload["rows"]
    else:
        resp = api.run_table(params)
        rows = [r.model_dump() for r in resp.rows]
    print("order,partial_value,abs_error,term_magnitude")
    for r in rows:
        print(f"{r['order']},{r['partial_value']},{r['abs_error']},{r['term_magnitude']}")
    return 0


def cmd_constants(args) -> int:
    if args.server:
        payload = _remote(args.server, "get", "/constants",
                          params={"prec_bits": args.prec_bits})
        records = payload
    else:
        records = [r.model_dump() for r in api.run_constants(args.prec_bits)]
    if args.format == "csv":
        print("schema_version,constant,prec_bits,value")
        for r in records:
            print(f"{r['schema_version']},{r['constant']},{r['prec_bits']},{r['value']}")
    else:
        for r in records:
            print(json.dumps(r, sort_keys=True))
    return 0


def cmd_list(args) -> int:
    if args.server:
        entries = _remote(args.server, "get", "/formulas")
    else:
        entries = [r.model_dump() for r in api.run_list()]
    if args.format == "csv":
        print("formula,item,description,slow")
        for e in entries:
            print(f"{e['formula']},{e['item']},\"{e['description']}\",{str(e['slow']).lower()}")
    else:
        for e in entries:
            print(json.dumps(e, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="stirling-sums",
        description="Rapidly convergent Stirling-series evaluation of finite sums")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a formula")
    p.add_argument("--formula", required=True, help="formula id, family.vN")
    _add_common(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("compare", help="evaluate and check against brute force")
    p.add_argument("--formula", required=True, help="formula id or 'all'")
    _add_common(p)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("table", help="convergence table (CSV)")
    p.add_argument("--formula", required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_table)

    p = sub.add_parser("constants", help="list supported constants")
    p.add_argument("--prec-bits", type=int, default=_default_prec())
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--server")
    p.set_defaults(fn=cmd_constants)

    p = sub.add_parser("list", help="list the formula catalog")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--server")
    p.set_defaults(fn=cmd_list)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (api.RequestError, ParameterError, CapabilityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
