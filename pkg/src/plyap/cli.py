"""Command-line front end: ``plyap {solve,bounds,homogenize,beam,ptrig}``.

Problems are read from JSON::

    {"p": 2, "L": 3.141592653589793, "a": 1, "rho": {"L": ..., "segments": [...]}}

Tables go to ``--output`` (default stdout) as CSV or JSON. Unless
``--no-header`` is given, CSV output starts with one ``#`` metadata line and
JSON output is wrapped as ``{"metadata": ..., "data": ...}``; the timestamp
lives only there, so ``--no-header`` output is reproducible byte for byte.

Exit codes: 0 success, 1 invalid input or no eigenvalue, 2 solver failure,
3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .errors import DomainError, IntegrationError, NoEigenvalueError, PlyapError, ResourceError, SearchError
from .higher_order import BeamProblem, assemble, smallest_positive_eigenvalue, verify_lyapi2
from .homog import SweepConfig, sweep
from .lyapunov import all_bounds, das_vatsala_constant
from .pmath import conjugate, phi_p, pi_p, pi_p_closed_form
from .shooting import ProblemSpec, eigenvalue
from .weights import PiecewiseWeight

__all__ = ["main", "main_entry", "build_parser", "parse_k_range", "load_problem", "canonical_json"]

EXIT_OK, EXIT_DOMAIN, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3
PHI_SAMPLES = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0)
DEFAULT_P_LIST = "1.2,1.5,2,3,5,10"

log = logging.getLogger("plyap")


class _InputError(Exception):
    """Bad file or JSON; mapped to the I/O exit code."""


def parse_k_range(text) -> list[int]:
    """``"3"`` -> [3], ``"1..3"`` -> [1, 2, 3]; lists pass through."""
    if isinstance(text, (list, tuple)):
        ks = [int(k) for k in text]
    elif isinstance(text, int):
        ks = [text]
    else:
        s = str(text).strip()
        if ".." in s:
            lo, hi = s.split("..", 1)
            ks = list(range(int(lo), int(hi) + 1))
        else:
            ks = [int(s)]
    if not ks or min(ks) < 1:
        raise DomainError(f"bad k range {text!r}")
    return ks


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise DomainError(f"bad number list {text!r}") from exc


def _read_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise _InputError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise _InputError(f"{path} must hold a JSON object")
    return data


def load_problem(data: dict) -> ProblemSpec:
    return ProblemSpec.from_dict(data)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _header(args) -> str:
    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return f"plyap {__version__} {args.command} {stamp}"


def _render(args, columns, rows, json_data=None) -> str:
    if args.format == "json":
        data = json_data if json_data is not None else [dict(zip(columns, r)) for r in rows]
        if not args.no_header:
            data = {"metadata": {"tool": "plyap", "version": __version__, "command": args.command,
                                 "generated": _header(args).rsplit(" ", 1)[-1]}, "data": data}
        return json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n"
    buf = io.StringIO()
    if not args.no_header:
        buf.write(f"# {_header(args)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(float(v))
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, PiecewiseWeight):
        return obj.to_dict()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _signs(sign: str) -> tuple:
    return ("+", "-") if sign == "both" else (sign,)


def _pairs(spec, args, data):
    ks = parse_k_range(args.k if args.k is not None else data.get("k", 1))
    return [eigenvalue(spec, k, s, tol=args.tol) for s in _signs(args.sign) for k in ks]


def cmd_solve(args) -> str:
    data = _read_json(args.input)
    spec = load_problem(data)
    pairs = _pairs(spec, args, data)
    cols = ("k", "sign", "lambda", "nodal_count", "terminal_residual")
    rows = [(e.k, e.sign, e.lam, e.nodal_count, e.terminal_residual) for e in pairs]
    return _render(args, cols, rows, json_data=[e.to_dict() for e in pairs])


def cmd_bounds(args) -> str:
    data = _read_json(args.input)
    spec = load_problem(data)
    pairs = _pairs(spec, args, data)
    reports = all_bounds(spec, pairs)
    cols = ("name", "k", "lambda", "lhs", "rhs", "satisfied", "slack")
    rows = [(r.name, r.inputs.get("k", ""), r.inputs.get("lambda", ""), r.lhs, r.rhs, r.satisfied, r.slack)
            for r in reports]
    json_rows = []
    for r in reports:
        d = r.to_dict()
        d["inputs"] = {k: v for k, v in d["inputs"].items() if k not in ("a", "rho")}
        json_rows.append(d)
    return _render(args, cols, rows, json_data={"problem": spec.to_dict(), "reports": json_rows})


def cmd_homogenize(args) -> str:
    data = _read_json(args.input)
    spec = load_problem(data)
    eps = _parse_float_list(args.eps) if args.eps else data.get("eps")
    ks = parse_k_range(args.k if args.k is not None else data.get("k", 1))
    kwargs = {"k_list": tuple(ks), "sign": args.sign, "tol": args.tol, "h": data.get("h"), "workers": args.workers}
    if eps:
        kwargs["epsilons"] = tuple(eps)
    result = sweep(SweepConfig(spec, **kwargs))
    if args.format == "json":
        payload = json.loads(result.to_json(with_rows=True))
        return _render(args, (), (), json_data=payload)
    return result.to_csv(header=None if args.no_header else _header(args))


def cmd_beam(args) -> str:
    data = _read_json(args.input)
    try:
        m, L = int(data["m"]), float(data["L"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"beam problem needs integer 'm' and numeric 'L': {data!r}") from exc
    rho = data.get("rho", 1.0)
    rho = PiecewiseWeight.from_dict(rho) if isinstance(rho, dict) else PiecewiseWeight.constant(float(rho), L)
    bp = BeamProblem(m, L, rho, int(data.get("n", 400)))
    cols = ("m", "n", "L", "lambda1", "lhs", "rhs", "satisfied", "das_vatsala_constant")
    if m >= 2:
        rep = verify_lyapi2(bp)
        row = (m, bp.n, L, rep.inputs["lambda"], rep.lhs, rep.rhs, rep.satisfied, das_vatsala_constant(m, L))
    else:
        lam, _ = smallest_positive_eigenvalue(assemble(bp))
        row = (m, bp.n, L, lam, "", "", "", "")
    return _render(args, cols, [row], json_data=dict(zip(cols, row)))


def cmd_ptrig(args) -> str:
    ps = _parse_float_list(args.p)
    cols = ("p", "q", "pi_p", "pi_p_closed_form") + tuple(f"phi_p({s:g})" for s in PHI_SAMPLES)
    rows = []
    for p in ps:
        rows.append((p, conjugate(p), pi_p(p), pi_p_closed_form(p)) + tuple(float(phi_p(s, p)) for s in PHI_SAMPLES))
    return _render(args, cols, rows)


COMMANDS = {
    "solve": cmd_solve,
    "bounds": cmd_bounds,
    "homogenize": cmd_homogenize,
    "beam": cmd_beam,
    "ptrig": cmd_ptrig,
}


def _tolerance(text: str) -> float:
    try:
        val = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if not 0.0 < val <= 1e-2:
        raise argparse.ArgumentTypeError(f"tolerance must lie in (0, 1e-2], got {val}")
    return val


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--no-header", action="store_true", help="omit the metadata line (reproducible output)")
    common.add_argument("--tol", type=_tolerance, default=None, help="integrator tolerance (default depends on p)")

    problem = argparse.ArgumentParser(add_help=False)
    problem.add_argument("--input", "-i", required=True, help="problem JSON")
    problem.add_argument("--k", help="eigenvalue index or range a..b")
    problem.add_argument("--sign", choices=("+", "-", "both"), default="+")

    parser = argparse.ArgumentParser(prog="plyap", description="Eigenvalues and Lyapunov bounds for weighted p-Laplacians.")
    parser.add_argument("--version", action="version", version=f"plyap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common, problem], help="eigenvalue table")
    sub.add_parser("bounds", parents=[common, problem], help="Lyapunov-type inequalities on computed eigenvalues")
    h = sub.add_parser("homogenize", parents=[common, problem], help="periodic homogenization sweep")
    h.add_argument("--eps", help="comma-separated decreasing epsilon grid")
    h.add_argument("--workers", type=int, default=1)
    b = sub.add_parser("beam", parents=[common], help="clamped higher-order problem check")
    b.add_argument("--input", "-i", required=True, help="beam JSON with m, L, rho, n")
    t = sub.add_parser("ptrig", parents=[common], help="pi_p and phi_p table")
    t.add_argument("--p", default=DEFAULT_P_LIST, help=f"comma-separated exponents (default {DEFAULT_P_LIST})")
    return parser


def _configure_logging():
    level = os.environ.get("PLYAP_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.ERROR), format="%(levelname)s %(name)s: %(message)s")


def _echo_input(args) -> str:
    path = getattr(args, "input", None)
    if not path:
        return ""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read(400)
    except OSError:
        return f" [input: {path}]"
    return f" [input: {path}: {' '.join(text.split())}]"


def main(argv=None) -> int:
    _configure_logging()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad usage; report it as invalid input
        return EXIT_OK if exc.code in (0, None) else EXIT_DOMAIN
    try:
        text = COMMANDS[args.command](args)
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except _InputError as exc:
        print(f"plyap: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"plyap: I/O error: {exc}{_echo_input(args)}", file=sys.stderr)
        return EXIT_IO
    except (IntegrationError, SearchError) as exc:
        print(f"plyap: solver failure: {exc}{_echo_input(args)}", file=sys.stderr)
        return EXIT_SOLVER
    except (DomainError, NoEigenvalueError, ResourceError, PlyapError, ValueError) as exc:
        print(f"plyap: invalid input: {exc}{_echo_input(args)}", file=sys.stderr)
        return EXIT_DOMAIN


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
