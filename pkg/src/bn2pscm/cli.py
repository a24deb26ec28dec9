"""Command-line front end: transform, verify, solve, enumerate, validate.

Exit codes: 0 on success, 2 when a system is infeasible or a
verification fails, 1 on malformed input (files or flags). All floats
are serialized with Python's shortest round-trip repr, so identical
inputs produce byte-identical outputs in single-threaded mode.
"""

import argparse
import json
import sys

import numpy as np

from .bn import BnModel, bn_from_dict, bn_to_dict, validate_bn
from .errors import (
    Bn2PscmError,
    CapacityError,
    ConsistencyError,
    DomainError,
    NullEvidenceError,
    PartitionError,
    ShapeError,
    TransformError,
    UnsupportedArityError,
    ValidationError,
)
from .linsys import FEAS_TOL, assemble_extended, classify_and_solve, solve_via_lp
from .pscm import pscm_from_dict, pscm_to_dict
from .search import SearchConfig, SearchResult, search_solutions
from .transform import TransformPlan, roundtrip_verify, transform_bn, transform_variable

#: Flag/file problems (malformed input) exit with this code.
EXIT_BAD_INPUT = 1
#: Infeasible systems and failed verifications exit with this code.
EXIT_INFEASIBLE = 2

_PARSE_ERRORS = (
    OSError,
    json.JSONDecodeError,
    UnicodeDecodeError,
    ShapeError,
    DomainError,
    CapacityError,
    UnsupportedArityError,
    ValueError,
)


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on bad flags — 2 means infeasible here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_BAD_INPUT)


def _csv_floats(text: str) -> list[float]:
    parts = [p for chunk in text.split(",") for p in chunk.split()]
    try:
        return [float(p) for p in parts if p]
    except ValueError:
        raise DomainError(f"not a comma-separated float list: {text!r}")


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _dump_json(obj, path: str | None):
    text = json.dumps(obj, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _read_objective(spec: str | None, n: int):
    """uniform → None (all-ones); otherwise a weights file of 2n floats."""
    if spec is None or spec == "uniform":
        return None
    with open(spec, "r", encoding="utf-8") as fh:
        weights = _csv_floats(fh.read())
    if len(weights) != 2 * n:
        raise DomainError(
            f"objective file has {len(weights)} weights, expected {2 * n} "
            "(one per u entry, then one per slack entry)"
        )
    return np.array(weights)


def _result_to_dict(r: SearchResult) -> dict:
    lp = r.lp_result
    n = r.system.n
    return {
        "matrix": [[int(v) for v in row] for row in r.matrix],
        "key": [list(col) for col in r.key],
        "lp_status": lp.status,
        "x": [float(v) for v in lp.x] if lp.x is not None else None,
        "u": [float(v) for v in lp.x[:n]] if lp.x is not None else None,
        "w": [float(v) for v in lp.x[n:]] if lp.x is not None else None,
        "objective": (float(lp.objective_value)
                      if lp.objective_value is not None else None),
        "method": r.outcome.method,
        "classification": r.outcome.classification,
        "algebra_x": ([float(v) for v in r.outcome.x]
                      if r.outcome.x is not None else None),
        "algebra_feasible": bool(r.outcome.feasible),
        "duplicate_of": ([list(col) for col in r.duplicate_of]
                         if r.duplicate_of is not None else None),
    }


def _fmt_floats(values) -> str:
    return json.dumps([float(v) for v in values])


def _fmt_matrix(a) -> str:
    return json.dumps([[int(v) for v in row] for row in a])


# ---------------------------------------------------------------- transform

def _cmd_transform(args) -> int:
    bn = bn_from_dict(_load_json(args.input))
    selection = "all" if args.all_solutions else "first"
    plan = TransformPlan(
        exo_size=args.exo_size,
        limit=args.limit,
        selection=selection,
        max_solutions=args.max_solutions,
        method=args.method,
        tol=args.tol,
        jobs=args.jobs,
    )
    try:
        pscm, report = transform_bn(bn, plan)
    except TransformError as exc:
        print(f"transform failed: {exc}")
        return EXIT_INFEASIBLE
    except ValidationError as exc:
        print(f"invalid model: {exc}")
        return EXIT_INFEASIBLE

    for vr in report.variables:
        print(f"{vr.variable}: exo {vr.exo_name} n={vr.n} "
              f"dist={_fmt_floats(vr.exo_dist)} matrix={_fmt_matrix(vr.matrix)} "
              f"method={vr.method} classification={vr.classification} "
              f"alternatives={vr.alternatives}")
    print(f"round-trip max deviation: {report.round_trip_max_deviation:.3g} "
          f"(tol {report.tol:g})")
    _dump_json(pscm_to_dict(pscm), args.output)

    if args.all_solutions:
        with open(args.all_solutions, "w", encoding="utf-8") as fh:
            for v in bn.variables:
                for cand in transform_variable(bn, v.name, plan):
                    fh.write(json.dumps({
                        "variable": cand.variable,
                        "exo": cand.exo.name,
                        "n": cand.exo.arity,
                        "matrix": [[int(x) for x in row] for row in cand.matrix],
                        "dist": [float(p) for p in cand.exo_dist],
                        "method": cand.method,
                        "classification": cand.classification,
                        "emission_index": cand.emission_index,
                    }) + "\n")
    return 0


# ------------------------------------------------------------------- verify

def _cmd_verify(args) -> int:
    bn = bn_from_dict(_load_json(args.bn))
    pscm = pscm_from_dict(_load_json(args.pscm))
    report = roundtrip_verify(bn, pscm, args.tol)
    eq = report.equivalence
    print(f"max deviation: {eq.max_deviation:.3g} (tol {args.tol:g})")
    print(f"posterior max deviation: {report.posterior_max_deviation:.3g} "
          f"over {report.posterior_checks} checks")
    for diff in eq.diffs:
        print(f"  {diff.variable} | {diff.config} = {diff.value}: "
              f"expected {diff.expected!r}, recovered {diff.recovered!r}")
    print("PASS" if report.passed else "FAIL")
    return 0 if report.passed else EXIT_INFEASIBLE


# -------------------------------------------------------------------- solve

def _solve_direct(args) -> int:
    a = np.array(_load_json(args.a))
    if a.ndim != 2:
        raise ShapeError(f"matrix file must hold a 2-d 0/1 array, got shape {a.shape}")
    b = list(args.b)
    if len(b) == a.shape[0]:
        b.append(1.0)
    sys_ = assemble_extended(a, b)
    c = _read_objective(args.objective, sys_.n)
    outcome = classify_and_solve(sys_, tol=args.tol)
    print(f"classification: {outcome.classification}")
    if outcome.x is not None:
        print(f"algebra ({outcome.method}): x = {_fmt_floats(outcome.x)} "
              f"feasible={outcome.feasible}")
    else:
        print(f"algebra ({outcome.method}): no solution from this route")
    lp_outcome, lp = solve_via_lp(sys_, c=c, tol=args.tol)
    if lp.optimal:
        print(f"lp: x = {_fmt_floats(lp.x)} objective = {lp.objective_value!r}")
    else:
        print(f"lp: {lp.status}")
    return 0 if lp.optimal else EXIT_INFEASIBLE


def _solve_search(args) -> int:
    cfg = SearchConfig(
        m=len(args.b),
        n=args.n,
        limit=args.limit,
        max_solutions=args.max_solutions,
        dedup=not args.no_dedup,
    )
    c = _read_objective(args.objective, args.n)
    count = 0
    for r in search_solutions(args.b, cfg, objective=c, jobs=args.jobs,
                              tol=args.tol):
        count += 1
        n = r.system.n
        print(f"solution {count}")
        print(f"  A = {_fmt_matrix(r.matrix)}")
        print(f"  u = {_fmt_floats(r.lp_result.x[:n])}")
        print(f"  w = {_fmt_floats(r.lp_result.x[n:])}")
        print(f"  classification={r.outcome.classification} "
              f"algebra={r.outcome.method} lp={r.lp_result.status}"
              + (" duplicate" if r.duplicate_of is not None else ""))
    print(f"found {count} solution(s)")
    return 0 if count else EXIT_INFEASIBLE


def _cmd_solve(args) -> int:
    if (args.n is None) == (args.a is None):
        raise DomainError("solve needs exactly one of --n (search) or --a (matrix file)")
    return _solve_direct(args) if args.a else _solve_search(args)


# ---------------------------------------------------------------- enumerate

def _cmd_enumerate(args) -> int:
    cfg = SearchConfig(
        m=len(args.b),
        n=args.n,
        limit=args.limit,
        max_solutions=args.max_solutions,
        dedup=not args.no_dedup,
    )
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", encoding="utf-8")
    count = 0
    try:
        for r in search_solutions(args.b, cfg, jobs=args.jobs, tol=args.tol):
            out.write(json.dumps(_result_to_dict(r)) + "\n")
            count += 1
    finally:
        if out is not sys.stdout:
            out.close()
    if out is not sys.stdout:
        print(f"wrote {count} result(s) to {args.out}")
    return 0 if count else EXIT_INFEASIBLE


# ----------------------------------------------------------------- validate

def _cmd_validate(args) -> int:
    payload = _load_json(args.model)
    kind = args.kind
    if kind == "auto":
        kind = "pscm" if "exogenous" in payload else "bn"
    if kind == "bn":
        report = validate_bn(bn_from_dict(payload))
    else:
        from .pscm import validate_pscm
        report = validate_pscm(pscm_from_dict(payload))
    print(report.summary())
    return 0 if report.ok else EXIT_INFEASIBLE


# ------------------------------------------------------------------ wiring

def _add_search_flags(p, with_objective=False):
    p.add_argument("--b", required=True, type=_csv_floats,
                   help="comma-separated target probabilities")
    p.add_argument("--limit", type=int, default=None,
                   help="max subset size per row (default: n)")
    p.add_argument("--max-solutions", type=int, default=None,
                   help="stop after this many emissions")
    p.add_argument("--no-dedup", action="store_true",
                   help="emit column-permutation duplicates too")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker threads (>1 gives up emission order)")
    p.add_argument("--tol", type=float, default=FEAS_TOL)
    if with_objective:
        p.add_argument("--objective", default=None, metavar="uniform|FILE",
                       help="LP objective: uniform (default) or a weights file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bn2pscm",
                     description="Transform Bayesian networks into "
                                 "probabilistic structural causal models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="transform a BN file into a PSCM file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True,
                   help="PSCM JSON path ('-' for standard output)")
    size = p.add_mutually_exclusive_group()
    size.add_argument("--exo-size", type=int, default=None,
                      help="fixed exogenous domain size for every variable")
    size.add_argument("--auto", action="store_true",
                      help="auto-size exogenous domains (default)")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--max-solutions", type=int, default=64)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--method", choices=("lp", "algebra", "both"), default="lp")
    p.add_argument("--all-solutions", default=None, metavar="OUT.jsonl",
                   help="also stream per-variable alternatives as JSON lines")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=_cmd_transform)

    p = sub.add_parser("verify", help="check BN/PSCM round-trip equivalence")
    p.add_argument("--bn", required=True)
    p.add_argument("--pscm", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("solve",
                       help="solve targets by search (--n) or a raw matrix (--a)")
    _add_search_flags(p, with_objective=True)
    p.add_argument("--n", type=int, default=None,
                   help="exogenous domain size (search mode)")
    p.add_argument("--a", default=None, metavar="MATRIX.json",
                   help="JSON file with 0/1 selection rows (direct mode)")
    p.add_argument("--method", choices=("lp", "algebra", "both"), default="lp")
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("enumerate",
                       help="stream all feasible matrices as JSON lines")
    _add_search_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", default=None, help="JSONL path (default: stdout)")
    p.set_defaults(fn=_cmd_enumerate)

    p = sub.add_parser("validate", help="validate a BN or PSCM JSON file")
    p.add_argument("model")
    p.add_argument("--kind", choices=("auto", "bn", "pscm"), default="auto")
    p.set_defaults(fn=_cmd_validate)
    return parser


def run(argv=None) -> int:
    """Parse argv and dispatch; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code or 0
    try:
        return args.fn(args)
    except _PARSE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (TransformError, ValidationError, ConsistencyError,
            NullEvidenceError, PartitionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


def main(argv=None):
    raise SystemExit(run(argv))


if __name__ == "__main__":
    main()
