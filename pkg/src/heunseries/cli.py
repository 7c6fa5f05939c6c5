"""Command-line front end.

Subcommands ``eval``, ``identity``, ``expand`` and ``report`` each read a
JSON parameter file and write CSV. Exit codes: 0 pass, 1 verification
failure, 2 bad input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings

from .core import Branch, Point, frobenius_series, eval_series, validate_params
from .errors import InvalidParameters, NumericalError, ValidationError
from .expansions import EXPANDERS, Kind, closed_form_case1
from .identities import Case, IdentityCase, verify_identity
from .oracle import IntegrationSpec, integrate_heun_many

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

PARAM_KEYS = {"a", "q", "alpha", "beta", "gamma", "delta"}
OPTIONAL_KEYS = {"epsilon", "case", "s", "expansion", "terms", "z_grid", "point", "branch"}

DEFAULT_TERMS = 200
DEFAULT_IDENTITY_ORDERS = 40
DEFAULT_TOL = 1e-6


def _number(value, key):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidParameters(f"{key} must be a number")
    return float(value)


def load_param_file(path: str) -> dict:
    """Parse and validate a parameter file into a dict with a ``params`` entry."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidParameters(f"cannot read {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise InvalidParameters("parameter file must hold a JSON object")
    unknown = set(raw) - PARAM_KEYS - OPTIONAL_KEYS
    if unknown:
        raise InvalidParameters(f"unknown keys: {', '.join(sorted(unknown))}")
    missing = PARAM_KEYS - set(raw)
    if missing:
        raise InvalidParameters(f"missing keys: {', '.join(sorted(missing))}")
    values = {k: _number(raw[k], k) for k in PARAM_KEYS}
    eps = _number(raw["epsilon"], "epsilon") if "epsilon" in raw else None
    cfg = {k: raw[k] for k in OPTIONAL_KEYS - {"epsilon"} if k in raw}
    cfg["params"] = validate_params(epsilon=eps, **values)
    return cfg


def _grid(args, cfg) -> list[float]:
    grid = cfg.get("z_grid")
    start = stop = count = None
    if isinstance(grid, dict):
        start, stop, count = grid.get("start"), grid.get("stop"), grid.get("count")
    elif isinstance(grid, list) and len(grid) == 3:
        start, stop, count = grid
    elif grid is not None:
        raise InvalidParameters("z_grid must be {start, stop, count} or [start, stop, count]")
    start = args.z_start if args.z_start is not None else start
    stop = args.z_stop if args.z_stop is not None else stop
    count = args.z_count if args.z_count is not None else count
    if start is None or stop is None or count is None:
        raise InvalidParameters("z grid needs start, stop and count")
    start, stop = _number(start, "z_start"), _number(stop, "z_stop")
    if isinstance(count, bool) or not isinstance(count, int) and not float(count).is_integer():
        raise InvalidParameters("z count must be an integer")
    count = int(count)
    if count < 1:
        raise InvalidParameters("empty z grid")
    if count == 1:
        return [start]
    step = (stop - start) / (count - 1)
    return [start + i * step for i in range(count)]


def _grid_or_none(args, cfg):
    if cfg.get("z_grid") is None and args.z_start is None and args.z_count is None:
        return None
    return _grid(args, cfg)


def _terms(args, cfg, default: int) -> int:
    terms = args.terms if args.terms is not None else cfg.get("terms", default)
    if isinstance(terms, bool) or not isinstance(terms, int) or terms < 1:
        raise InvalidParameters(f"terms must be a positive integer, got {terms!r}")
    return terms


def _fmt(x: float) -> str:
    return repr(float(x))


def _rel(err: float, ref: float) -> float:
    return err / max(abs(ref), 1e-300)


def _write_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _spec(args, params, point, branch) -> IntegrationSpec:
    return IntegrationSpec(params, point, branch, seed_offset=args.seed_offset)


_POINTS = {"0": Point.ZERO, "1": Point.ONE, "a": Point.A}


def cmd_eval(args, cfg) -> tuple[int, str]:
    params = cfg["params"]
    point_name = args.point or str(cfg.get("point", "0"))
    if point_name not in _POINTS:
        raise InvalidParameters(f"point must be one of 0, 1, a; got {point_name!r}")
    point = _POINTS[point_name]
    try:
        branch = Branch(args.branch or cfg.get("branch", "first"))
    except ValueError as exc:
        raise InvalidParameters(str(exc)) from exc
    grid = _grid(args, cfg)
    series = frobenius_series(params, point, branch, _terms(args, cfg, DEFAULT_TERMS))
    oracle = integrate_heun_many(_spec(args, params, point, branch), grid)
    rows = []
    for z, (u_ref, _) in zip(grid, oracle):
        u = eval_series(series, z)
        err = abs(u - u_ref)
        rows.append((z, u, u_ref, err, _rel(err, u_ref)))
    return EXIT_OK, _write_csv(["z", "value_primary", "value_oracle", "abs_err", "rel_err"], rows)


def _identity_case(args, cfg, params) -> IdentityCase:
    name = args.case or cfg.get("case")
    if name is None:
        raise InvalidParameters("identity needs a case")
    try:
        tag = Case(name)
    except ValueError as exc:
        raise InvalidParameters(f"unknown case {name!r}") from exc
    s = args.s if args.s is not None else cfg.get("s")
    if s is None or s == "first":
        return IdentityCase.first(tag)
    if s == "second":
        return IdentityCase.second(tag, params)
    try:
        return IdentityCase(tag, float(s))
    except (TypeError, ValueError) as exc:
        raise InvalidParameters(f"s must be a number, 'first' or 'second'; got {s!r}") from exc


def cmd_identity(args, cfg) -> tuple[int, str]:
    params = cfg["params"]
    case = _identity_case(args, cfg, params)
    report = verify_identity(
        params, case, n_orders=_terms(args, cfg, DEFAULT_IDENTITY_ORDERS),
        samples=_grid_or_none(args, cfg), check=False,
    )
    text = _write_csv(["z", "value_primary", "value_oracle", "abs_err", "rel_err"], report.samples)
    if report.degenerate:
        return EXIT_OK, text + "# DEGENERATE C=0.0\n"
    status = "PASS" if report.passed else "FAIL"
    summary = (
        f"# {status} C={_fmt(report.fitted_constant)} "
        f"max_coeff_dev={_fmt(report.max_coeff_deviation)} "
        f"max_point_dev={_fmt(report.max_point_deviation)}\n"
    )
    return (EXIT_OK if report.passed else EXIT_FAIL), text + summary


def _kinds(args, cfg) -> list[Kind]:
    names = []
    for item in args.kind or []:
        names.extend(x for x in item.split(",") if x)
    if not names:
        exp = cfg.get("expansion")
        if exp is None:
            raise InvalidParameters("no expansion kind given")
        names = exp if isinstance(exp, list) else [exp]
    try:
        kinds = [Kind(n) for n in names]
    except ValueError as exc:
        raise InvalidParameters(str(exc)) from exc
    return list(dict.fromkeys(kinds))


def _expansion_values(params, kind: Kind, grid, terms: int):
    """Expansion values and the matching oracle branch at 0."""
    if kind is Kind.CLOSED_FORM:
        return [closed_form_case1(params, z) for z in grid], Branch.FIRST, 1.0
    series = EXPANDERS[kind](params, terms)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        values = [series(z) for z in grid]
    return values, Branch.SECOND, series.leading_coefficient


def cmd_expand(args, cfg) -> tuple[int, str]:
    params = cfg["params"]
    kinds = _kinds(args, cfg)
    grid = _grid(args, cfg)
    terms = _terms(args, cfg, DEFAULT_TERMS)
    tol = args.tol
    oracles = {}
    results = {}
    for kind in kinds:
        values, branch, lead = _expansion_values(params, kind, grid, terms)
        if branch not in oracles:
            oracles[branch] = [u for u, _ in integrate_heun_many(_spec(args, params, Point.ZERO, branch), grid)]
        results[kind] = (values, branch, lead)

    ok = True
    if len(kinds) == 1:
        values, branch, lead = results[kinds[0]]
        rows = []
        for z, v, o in zip(grid, values, oracles[branch]):
            ref = lead * o
            err = abs(v - ref)
            ok &= _rel(err, ref) <= tol
            rows.append((z, v, ref, err, _rel(err, ref)))
        return (EXIT_OK if ok else EXIT_FAIL), _write_csv(
            ["z", "value_primary", "value_oracle", "abs_err", "rel_err"], rows
        )

    header = ["z"]
    for kind in kinds:
        header += [f"value_{kind.value}", f"oracle_{kind.value}", f"abs_err_{kind.value}", f"rel_err_{kind.value}"]
    pairs = [
        (k1, k2) for i, k1 in enumerate(kinds) for k2 in kinds[i + 1:]
        if results[k1][1] is results[k2][1]
    ]
    header += [f"equiv_{k1.value}_{k2.value}" for k1, k2 in pairs]
    rows = []
    for i, z in enumerate(grid):
        row = [z]
        for kind in kinds:
            values, branch, lead = results[kind]
            ref = lead * oracles[branch][i]
            err = abs(values[i] - ref)
            ok &= _rel(err, ref) <= tol
            row += [values[i], ref, err, _rel(err, ref)]
        for k1, k2 in pairs:
            v1 = results[k1][0][i] / results[k1][2]
            v2 = results[k2][0][i] / results[k2][2]
            row.append(_rel(abs(v1 - v2), v2))
        rows.append(row)
    return (EXIT_OK if ok else EXIT_FAIL), _write_csv(header, rows)


def cmd_report(args, cfg) -> tuple[int, str]:
    params = cfg["params"]
    grid = _grid(args, cfg)
    try:
        sweep = [int(x) for x in args.sweep.split(",") if x.strip()]
    except ValueError as exc:
        raise InvalidParameters(f"bad sweep {args.sweep!r}") from exc
    if not sweep or any(n < 1 for n in sweep):
        raise InvalidParameters("sweep needs positive term counts")
    kinds = _kinds(args, cfg) if (args.kind or cfg.get("expansion")) else [Kind.APPELL, Kind.BETA, Kind.TWO_F1]
    if Kind.CLOSED_FORM in kinds:
        raise InvalidParameters("closed_form has no truncation order to sweep")
    oracle = [u for u, _ in integrate_heun_many(_spec(args, params, Point.ZERO, Branch.SECOND), grid)]
    rows = []
    for kind in kinds:
        for n in sweep:
            values, _, lead = _expansion_values(params, kind, grid, n)
            worst = max(_rel(abs(v - lead * o), lead * o) for v, o in zip(values, oracle))
            rows.append((n, kind.value, worst))
    return EXIT_OK, _write_csv(["N", "kind", "max_rel_err"], rows)


COMMANDS = {"eval": cmd_eval, "identity": cmd_identity, "expand": cmd_expand, "report": cmd_report}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heunseries", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--params", required=True, metavar="FILE")
        p.add_argument("--terms", type=int)
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--seed-offset", type=float)
        p.add_argument("--z-start", type=float)
        p.add_argument("--z-stop", type=float)
        p.add_argument("--z-count", type=int)
        p.add_argument("--out", metavar="FILE")
        if name == "eval":
            p.add_argument("--point", choices=sorted(_POINTS))
            p.add_argument("--branch", choices=[b.value for b in Branch])
        if name == "identity":
            p.add_argument("--case", choices=[c.value for c in Case])
            p.add_argument("--s")
        if name in ("expand", "report"):
            p.add_argument("--kind", action="append", help="expansion kind; repeat or comma-separate")
        if name == "report":
            p.add_argument("--sweep", default="10,20,40,80", help="comma-separated term counts")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = load_param_file(args.params)
        code, text = COMMANDS[args.command](args, cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
