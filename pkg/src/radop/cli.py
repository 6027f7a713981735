"""Command-line interface.

Exit codes: 0 success, 1 parse error, 2 precondition violation, 3 numeric
failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import re
import sys
from pathlib import Path

import numpy as np

from . import geometry, symbols
from .algebra import AlgebraElement, classify_membership, element_to_json, parse_expression
from .errors import NumericFailure, PreconditionError
from .lattice import IndexBox, enumerate_allowable
from .norms import BergmanSpace, DirichletSpace, HardySpace, NormCache, build_norm_table, space_from_json
from .operators import (LaurentPoly, RadialOperator, apply_diagonal, apply_integral, feasibility_probe,
                        is_compact, is_finite_rank, spectrum_report)
from .verify import SUITES, run_suite

log = logging.getLogger("radop")

EXIT_PARSE, EXIT_PRECONDITION, EXIT_NUMERIC, EXIT_VERIFY = 1, 2, 3, 4


class ParseError(Exception):
    pass


# -- input loading ------------------------------------------------------------

def _read_json_arg(text: str):
    """JSON from a file path or an inline document; ``None`` if neither."""
    path = Path(text)
    if path.suffix == ".json" or path.is_file():
        try:
            return json.loads(path.read_text())
        except OSError as exc:
            raise ParseError(f"cannot read {text}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"{text}: invalid JSON ({exc})") from exc
    if text.lstrip().startswith(("{", "[")):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid inline JSON ({exc})") from exc
    return None


CATALOG = {
    "disk": lambda d: BergmanSpace(geometry.disk()),
    "polydisc": lambda d: BergmanSpace(geometry.polydisc(d or 2)),
    "ball": lambda d: BergmanSpace(geometry.ball(d or 2)),
    "annulus": lambda d: BergmanSpace(geometry.poly_annulus(d or 1)),
    "hartogs": lambda d: BergmanSpace(geometry.hartogs_triangle(d or 2)),
    "hardy": lambda d: HardySpace(),
    "dirichlet": lambda d: DirichletSpace(),
}


def load_space(text: str, dim: int | None = None, rel_tol: float = 1e-8, budget: float = 1e7):
    data = _read_json_arg(text)
    if data is None:
        if text not in CATALOG:
            raise ParseError(f"unknown space {text!r}; use a JSON file or one of {sorted(CATALOG)}")
        space = CATALOG[text](dim)
    else:
        if not isinstance(data, dict):
            raise ParseError("space JSON must be an object")
        try:
            space = space_from_json(data)
        except PreconditionError as exc:
            raise ParseError(str(exc)) from exc
    if isinstance(space, BergmanSpace):
        space.rel_tol, space.budget = rel_tol, int(budget)
    return space


def load_symbol(text: str, dim: int):
    data = _read_json_arg(text)
    try:
        if data is None:
            return symbols.builtin(text, dim)
        if not isinstance(data, dict):
            raise ParseError("symbol JSON must be an object")
        data.setdefault("dim", dim)
        return symbols.symbol_from_json(data)
    except PreconditionError as exc:
        raise ParseError(str(exc)) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed symbol: {exc}") from exc


def load_poly(text: str) -> LaurentPoly:
    data = _read_json_arg(text)
    if not isinstance(data, dict):
        raise ParseError("polynomial must be a JSON object {'dim': n, 'terms': [...]}")
    try:
        return LaurentPoly.from_json(data)
    except PreconditionError as exc:
        raise ParseError(str(exc)) from exc


def parse_point(text: str, dim: int) -> np.ndarray:
    try:
        z = np.array([complex(part.strip().replace(" ", "")) for part in text.split(",")])
    except ValueError as exc:
        raise ParseError(f"bad point {text!r}: {exc}") from exc
    if len(z) != dim:
        raise ParseError(f"point {text!r} needs {dim} coordinates")
    return z


def _cplx(v) -> list[float]:
    return [float(np.real(v)), float(np.imag(v))]


# -- output -------------------------------------------------------------------

def emit(args, payload=None, rows=None, header=None) -> None:
    """Write JSON (or CSV when requested and rows are available) deterministically."""
    if args.format == "csv" and rows is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def write_hull_csv(path, hull) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["re", "im"])
        for v in hull:
            writer.writerow([repr(float(np.real(v))), repr(float(np.imag(v)))])


# -- commands -----------------------------------------------------------------

def cmd_norms(args) -> int:
    space = load_space(args.space, args.dim, args.rel_tol, args.budget)
    index_set = enumerate_allowable(space, IndexBox(space.dim, args.N))
    cache = None if args.no_cache else NormCache()
    table = build_norm_table(space, index_set, cache)
    entries = []
    for a in index_set:
        prov, err = table.provenance.get(a, ("closed-form", 0.0))
        entries.append({"alpha": list(a), "norm_sq": table[a], "provenance": prov, "error": err})
    rows = [[*a, repr(table[a]), table.provenance.get(a, ("closed-form", 0.0))[0]] for a in index_set]
    header = [f"alpha{j + 1}" for j in range(space.dim)] + ["norm_sq", "provenance"]
    emit(args, {"space": space.to_json(), "fingerprint": space.fingerprint, "N": args.N,
                "quadrature_evaluations": table.evaluations, "entries": entries}, rows, header)
    return 0


def _operator(args):
    space = load_space(args.space, args.dim, args.rel_tol, args.budget)
    return RadialOperator(space, load_symbol(args.symbol, space.dim))


def cmd_apply(args) -> int:
    R = _operator(args)
    f = load_poly(args.poly)
    Rf = apply_diagonal(R, f)
    values = []
    for text in args.z or []:
        z = parse_point(text, R.dim)
        entry = {"z": [_cplx(v) for v in z]}
        if args.route in ("diagonal", "both"):
            entry["diagonal"] = _cplx(Rf.evaluate(z))
        if args.route in ("integral", "both"):
            entry["integral"] = _cplx(apply_integral(R, f, z))
        values.append(entry)
    emit(args, {"result": Rf.to_json(), "values": values})
    return 0


def _spectrum(args):
    R = _operator(args)
    probe = enumerate_allowable(R.space, IndexBox(R.dim, args.N))
    report = spectrum_report(R, probe, args.cluster_tol)
    return R, probe, report


def _maybe_plot(args, report, title) -> None:
    if args.figure:
        from .plotting import plot_spectrum
        plot_spectrum(report, args.figure, title=title)


def cmd_spectrum(args) -> int:
    R, probe, report = _spectrum(args)
    payload = report.to_json()
    norm = R.operator_norm(probe)
    payload.update({"operator_norm": {"value": norm.value, "exact": norm.exact},
                    "compact": is_compact(R), "finite_rank": is_finite_rank(R), "N": args.N})
    if args.csv:
        write_hull_csv(args.csv, report.hull)
    _maybe_plot(args, report, f"spectrum, N = {args.N}")
    rows = [[*a, repr(float(v.real)), repr(float(v.imag))] for a, v in zip(report.indices, report.values)]
    header = [f"alpha{j + 1}" for j in range(R.dim)] + ["re", "im"]
    emit(args, payload, rows, header)
    return 0


def cmd_numrange(args) -> int:
    R, probe, report = _spectrum(args)
    if args.csv:
        write_hull_csv(args.csv, report.hull)
    _maybe_plot(args, report, f"numerical range, N = {args.N}")
    rows = [[repr(float(v.real)), repr(float(v.imag))] for v in report.hull]
    emit(args, {"hull": [_cplx(v) for v in report.hull], "N": args.N,
                "orientation": "counterclockwise"}, rows, ["re", "im"])
    return 0


def cmd_verify(args) -> int:
    spaces = None
    if args.space:
        space = load_space(args.space, args.dim, args.rel_tol, args.budget)
        if not isinstance(space, BergmanSpace):
            raise PreconditionError("suites take Bergman spaces; hardy-dirichlet needs no --space")
        spaces = [space]
    result = run_suite(args.suite, args.trials, args.seed, spaces)
    emit(args, result.to_json())
    status = "PASS" if result.passed else "FAIL"
    print(f"{status} {args.suite}: worst residual {result.worst:.3e} (threshold {result.threshold:.1e})",
          file=sys.stderr)
    return 0 if result.passed else EXIT_VERIFY


def cmd_algebra(args) -> int:
    space = load_space(args.space, args.dim, args.rel_tol, args.budget)
    env = {}
    for item in args.define or []:
        name, sep, spec = item.partition("=")
        if not sep or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_\-]*", name):
            raise ParseError(f"--def expects NAME=SYMBOL, got {item!r}")
        env[name] = AlgebraElement(space, load_symbol(spec, space.dim))
    try:
        g = parse_expression(args.expr, env)
    except (SyntaxError, KeyError) as exc:
        raise ParseError(f"expression: {exc}") from exc
    probe = enumerate_allowable(space, IndexBox(space.dim, args.N))
    emit(args, {"expr": args.expr, **element_to_json(g, probe)})
    return 0


def cmd_feasible(args) -> int:
    space = load_space(args.space, args.dim, args.rel_tol, args.budget)
    report = feasibility_probe(space, args.samples, args.seed)
    emit(args, report.to_json())
    return 0 if report.verdict == "feasible-at-samples" else EXIT_NUMERIC


COEFF_PRESETS = {
    "geometric-series": lambda m: 1.0,
    "bergman-kernel": lambda m: (m + 1) / np.pi,
    "log-series": lambda m: 1.0 / m if m else 0.0,
}


def cmd_classify(args) -> int:
    if args.coeffs in COEFF_PRESETS:
        coeffs = COEFF_PRESETS[args.coeffs]
    else:
        data = _read_json_arg(args.coeffs)
        if data is None:
            raise ParseError(f"unknown coefficient preset {args.coeffs!r}; choose from {sorted(COEFF_PRESETS)}")
        if isinstance(data, dict):
            coeffs = load_poly(json.dumps(data))
        else:
            try:
                coeffs = [complex(*v) if isinstance(v, list) else complex(v) for v in data]
            except (TypeError, ValueError) as exc:
                raise ParseError(f"bad coefficient list: {exc}") from exc
    report = classify_membership(coeffs, args.N)
    emit(args, report.to_json())
    return 0


def cmd_cache(args) -> int:
    cache = NormCache()
    if args.action == "clear":
        emit(args, {"directory": str(cache.directory), "removed": cache.clear()})
        return 0
    files = sorted(p.name for p in cache.directory.glob("*.json")) if cache.directory.exists() else []
    emit(args, {"directory": str(cache.directory), "files": files})
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rel-tol", type=float, default=1e-8, help="quadrature relative tolerance")
    common.add_argument("--budget", type=float, default=1e7, help="quadrature evaluation budget")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--dim", type=int, help="dimension for catalog spaces (polydisc, ball, ...)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="radop", description="Radial operators on Reinhardt-domain Bergman spaces.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("norms", parents=[common], help="monomial norm table")
    s.add_argument("--space", required=True)
    s.add_argument("--N", type=int, default=32)
    s.add_argument("--no-cache", action="store_true")
    s.set_defaults(func=cmd_norms)

    s = sub.add_parser("apply", parents=[common], help="apply a radial operator to a polynomial")
    s.add_argument("--space", required=True)
    s.add_argument("--symbol", required=True)
    s.add_argument("--poly", required=True, help="LaurentPoly JSON (file or inline)")
    s.add_argument("--z", action="append", help="evaluation point, comma-separated coordinates")
    s.add_argument("--route", choices=("diagonal", "integral", "both"), default="diagonal")
    s.set_defaults(func=cmd_apply)

    for name, func, helptext in (("spectrum", cmd_spectrum, "sampled spectrum and limit points"),
                                 ("numrange", cmd_numrange, "numerical-range hull")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--space", required=True)
        s.add_argument("--symbol", required=True)
        s.add_argument("--N", type=int, default=32)
        s.add_argument("--cluster-tol", type=float, default=1e-6)
        s.add_argument("--csv", help="also write hull vertices to this CSV file")
        s.add_argument("--figure", help="render eigenvalues and hull to this image file")
        s.set_defaults(func=func)

    s = sub.add_parser("verify", parents=[common], help="run a verification suite")
    s.add_argument("--suite", required=True, choices=sorted(SUITES))
    s.add_argument("--trials", type=int)
    s.add_argument("--space", help="restrict the suite to one Bergman space")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("algebra", parents=[common], help="evaluate an algebra expression over named symbols")
    s.add_argument("--space", required=True)
    s.add_argument("--def", dest="define", action="append", metavar="NAME=SYMBOL")
    s.add_argument("--expr", required=True)
    s.add_argument("--N", type=int, default=32)
    s.set_defaults(func=cmd_algebra)

    s = sub.add_parser("feasible", parents=[common], help="probe kernel-series convergence")
    s.add_argument("--space", required=True)
    s.add_argument("--samples", type=int, default=20)
    s.set_defaults(func=cmd_feasible)

    s = sub.add_parser("classify", parents=[common], help="membership in the disc inclusion chain")
    s.add_argument("--coeffs", required=True, help=f"JSON list/poly or one of {sorted(COEFF_PRESETS)}")
    s.add_argument("--N", type=int, default=200)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("cache", parents=[common], help="inspect or clear the norm cache")
    s.add_argument("action", choices=("show", "clear"))
    s.set_defaults(func=cmd_cache)
    return p


def _check_config(args) -> None:
    for name in ("rel_tol", "budget"):
        if getattr(args, name) <= 0:
            raise PreconditionError(f"--{name.replace('_', '-')} must be positive")
    if getattr(args, "N", 0) < 0:
        raise PreconditionError("--N must be >= 0")
    if getattr(args, "cluster_tol", 1.0) <= 0:
        raise PreconditionError("--cluster-tol must be positive")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _check_config(args)
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PreconditionError as exc:
        print(f"precondition violated: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except NumericFailure as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
