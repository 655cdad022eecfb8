"""Command line: derive flows, emit Lax data, sample solutions, run verifications.

Exit status: 0 when every requested verification passes, 1 on a
verification failure, 2 on configuration or I/O errors (reported as JSON
on stderr).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .diffalg import ParseError, VectorPoly, format_poly, parse_poly
from .hierarchy import DEFAULT_MAX_N, FlowTable, zero_curvature_residual
from .numerics import BreatherFamily, Grid, OrthonormalBreatherFamily, SolitonFamily, flow_residual
from .solutions import (
    BreatherParams,
    SolitonParams,
    TimeVector,
    backlund_residual,
    one_soliton_x_derivatives,
    orthonormal_breather_params,
)
from .solutions.errors import ConstraintViolation
from .verify import VerificationReport

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
SOLUTION_TOL = 1e-6
BACKLUND_TOL = 1e-10


class ConfigError(Exception):
    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        super().__init__(message)
        self.field = field
        self.line = line

    def to_dict(self) -> dict:
        d = {"error": "config", "message": str(self)}
        if self.field is not None:
            d["field"] = self.field
        if self.line is not None:
            d["line"] = self.line
        return d


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# -- params files ----------------------------------------------------------------


def load_schema() -> dict:
    return json.loads((resources.files("vmkdv") / "data" / "params.schema.json").read_text())


def _line_of(text: str, path) -> int | None:
    """Best-effort line number of the last key in ``path``."""
    keys = [p for p in path if isinstance(p, str)]
    if not keys:
        return None
    needle = f'"{keys[-1]}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def load_params(path: str) -> dict:
    import jsonschema

    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read params file: {exc}", field="params") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        field = ".".join(str(p) for p in err.absolute_path) or "(root)"
        raise ConfigError(err.message, field=field, line=_line_of(text, err.absolute_path))
    return data


def _complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        return complex(value[0], value[1])
    return complex(value)


def merged(args, params: dict, key: str, default=None):
    """Flag value if given, else params file value, else default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    return params.get(key, default)


def _grid(args, params: dict) -> Grid:
    g = params.get("grid", {})
    base = Grid()
    try:
        return Grid(
            float(merged(args, g, "x0", base.x0)),
            float(merged(args, g, "x1", base.x1)),
            int(merged(args, g, "nx", base.nx)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), field="grid") from exc


def _times(args, params: dict) -> dict:
    times = dict(params.get("times", {}))
    for name in ("t3", "t5", "t7", "t9"):
        value = getattr(args, name, None)
        if value is not None:
            times[name] = value
    return times


def _float_list(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}", field="c") from exc


def _n(args, params: dict) -> int:
    n = merged(args, params, "n", 1)
    if not 0 <= int(n) <= DEFAULT_MAX_N:
        raise ConfigError(f"n must lie in 0..{DEFAULT_MAX_N}", field="n")
    return int(n)


# -- output ----------------------------------------------------------------------


def _fmt(v) -> str:
    return format(float(v), ".17g")


def field_table(x, t, values) -> list:
    """Rows (x, t, u_1..u_N) as strings with 17 significant digits."""
    rows = []
    for i in range(len(x)):
        rows.append([_fmt(x[i]), _fmt(t)] + [_fmt(values[k, i]) for k in range(values.shape[0])])
    return rows


def write_field(rows, n_components: int, fmt: str, out) -> None:
    names = ["x", "t"] + [f"u_{k + 1}" for k in range(n_components)]
    if fmt == "csv":
        out.write(",".join(names) + "\n")
        for r in rows:
            out.write(",".join(r) + "\n")
    elif fmt == "dat":
        out.write("# " + " ".join(names) + "\n")
        for r in rows:
            out.write(" ".join(r) + "\n")
    else:
        raise ConfigError(f"format {fmt!r} is not available for fields (use csv or dat)", field="format")


class Output:
    """Writes artifacts into --out when given, else to stdout."""

    def __init__(self, directory: str | None):
        self.directory = Path(directory) if directory else None
        if self.directory is not None:
            try:
                self.directory.mkdir(parents=True, exist_ok=True)
            except OSError as exc:
                raise ConfigError(f"cannot create output directory: {exc}", field="output_dir") from exc

    def open(self, name: str):
        if self.directory is None:
            return _NoClose(sys.stdout)
        try:
            return open(self.directory / name, "w", newline="\n")
        except OSError as exc:
            raise ConfigError(f"cannot write {name}: {exc}", field="output_dir") from exc

    def report(self, reports, name: str = "report.json") -> None:
        if self.directory is None:
            return
        payload = {"reports": [r.to_dict() for r in reports], "pass": all(r.passed for r in reports)}
        with self.open(name) as fh:
            fh.write(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")


class _NoClose:
    def __init__(self, stream):
        self.stream = stream

    def __enter__(self):
        return self.stream

    def __exit__(self, *exc):
        self.stream.flush()


def _status(reports) -> int:
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


# -- commands ----------------------------------------------------------------------


def cmd_derive_flow(args, params) -> int:
    n = _n(args, params)
    fmt = merged(args, params, "format", "text")
    poly = FlowTable().flow(n)
    out = Output(merged(args, params, "output_dir"))
    with out.open(f"flow_t{2 * n + 1}.{'json' if fmt == 'json' else 'txt'}") as fh:
        if fmt == "json":
            fh.write(json.dumps({"time": f"t{2 * n + 1}", "flow": format_poly(poly)}, indent=2) + "\n")
        else:
            fh.write(f"u_t{2 * n + 1} = {format_poly(poly)}\n")
    return EXIT_OK


def cmd_lax(args, params) -> int:
    n = _n(args, params)
    lax = FlowTable().lax_v(n)
    out = Output(merged(args, params, "output_dir"))
    with out.open(f"lax_v{2 * n + 1}.json") as fh:
        fh.write(json.dumps(lax.to_json(), indent=2) + "\n")
    return EXIT_OK


def cmd_check_zcr(args, params) -> int:
    n = _n(args, params)
    flow_poly = None
    if args.flow is not None:
        try:
            flow_poly = parse_poly(args.flow, VectorPoly)
        except ParseError as exc:
            raise ConfigError(str(exc), field="flow") from exc
    residual = zero_curvature_residual(n, flow_poly=flow_poly, table=FlowTable())
    report = VerificationReport(
        name=f"zero curvature n={n}",
        max_residual=0.0 if residual.is_zero() else 1.0,
        tolerance=0.0,
        metadata={"residual": residual.to_json()},
    )
    if residual.is_zero():
        print("residual: exact zero")
    else:
        print("residual: nonzero")
        print(json.dumps(residual.to_json(), indent=2))
    Output(merged(args, params, "output_dir")).report([report])
    return _status([report])


def soliton_params(args, params) -> SolitonParams:
    mu = merged(args, params, "mu")
    c0 = merged(args, params, "c0")
    c = _float_list(args.c) if args.c is not None else params.get("c")
    missing = [k for k, v in (("mu", mu), ("c0", c0), ("c", c)) if v is None]
    if missing:
        raise ConfigError(f"missing soliton parameter(s): {', '.join(missing)}", field=missing[0])
    try:
        mu = float(_complex(mu).real) if not isinstance(mu, (int, float)) else float(mu)
        if args.normalize or params.get("normalize", False):
            return SolitonParams.normalized(mu, float(c0), c)
        return SolitonParams(mu, float(c0), tuple(c))
    except ValueError as exc:
        raise ConfigError(str(exc), field="c") from exc


def _sample_and_verify(family, args, params, stem: str, method: str, precision: str) -> int:
    grid = _grid(args, params)
    times = _times(args, params)
    fmt = merged(args, params, "format", "csv")
    t = TimeVector.from_names({"x": grid.x, **times})
    values = family.values(t)
    rows = field_table(grid.x, times.get("t3", 0.0), values)
    out = Output(merged(args, params, "output_dir"))
    with out.open(f"{stem}.{fmt}") as fh:
        if fmt == "json":
            payload = {"x": [float(v) for v in grid.x], "times": times, "u": values.tolist()}
            fh.write(json.dumps(payload) + "\n")
        else:
            write_field(rows, family.n_components, fmt, fh)
    report = flow_residual(family, 1, grid, TimeVector.from_names(times), method=method, tolerance=SOLUTION_TOL, precision=precision)
    report.metadata["provenance"] = family.provenance
    out.report([report])
    if out.directory is not None:
        print(report.line())
    return _status([report])


def cmd_soliton(args, params) -> int:
    family = SolitonFamily(soliton_params(args, params))
    return _sample_and_verify(family, args, params, "soliton", "analytic_xi", "extended")


def cmd_breather(args, params) -> int:
    mu = merged(args, params, "mu")
    if mu is None:
        raise ConfigError("missing breather parameter mu", field="mu")
    mu = _complex(mu)
    method = merged(args, params, "method", "kernel")
    ortho = params.get("orthonormal")
    if args.orthonormal is not None:
        n_comp, j = (int(v) for v in args.orthonormal.split(","))
        ortho = {"N": n_comp, "j": j}
    try:
        if ortho is not None and args.C is None and "C" not in params:
            if method == "kernel" and args.method is None and "method" not in params:
                return _sample_and_verify(OrthonormalBreatherFamily(mu, ortho["N"], ortho["j"]), args, params, "breather", "analytic_xi", "extended")
            bparams = orthonormal_breather_params(mu, ortho["N"], ortho["j"])
        else:
            raw = json.loads(args.C) if args.C is not None else params.get("C")
            if raw is None:
                raise ConfigError("breather needs C or orthonormal", field="C")
            bparams = BreatherParams(mu, np.array([[_complex(v) for v in row] for row in raw]))
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), field="C") from exc
    family = BreatherFamily(bparams, method)
    return _sample_and_verify(family, args, params, "breather", "fd", "double")


def cmd_backlund_check(args, params) -> int:
    sp = soliton_params(args, params)
    grid = _grid(args, params)
    times = _times(args, params)
    scale = float(merged(args, params, "scale", 1.0))
    jet = one_soliton_x_derivatives(sp, TimeVector.from_names({"x": grid.x, **times}), 1)
    zero = np.zeros_like(jet[0])
    try:
        result = backlund_residual(zero, zero, scale * jet[0], scale * jet[1], sp.mu, branch="best", strict=not args.lenient)
        worst = result.worst()
        meta = {"residual": result.residual, "constraint_deviation": result.constraint_deviation}
    except ConstraintViolation as exc:
        worst, meta = float("inf"), {"error": str(exc)}
    report = VerificationReport(
        name=f"Backlund (0, {scale:g} x soliton)", max_residual=worst, tolerance=BACKLUND_TOL, metadata={**meta, "scale": scale}
    )
    print(report.line())
    Output(merged(args, params, "output_dir")).report([report])
    return _status([report])


def cmd_verify_all(args, params) -> int:
    from .acceptance import run_all, summary_table

    only = None
    if args.only:
        try:
            only = {int(v) for v in args.only.split(",")}
        except ValueError as exc:
            raise ConfigError("--only expects comma-separated criterion numbers", field="only") from exc
    golden = merged(args, params, "golden_dir")
    if golden is not None and not Path(golden).is_dir():
        raise ConfigError(f"golden directory {golden!r} does not exist", field="golden_dir")
    quick = bool(args.quick or params.get("quick", False))
    reports = run_all(quick=quick, golden_dir=golden, only=only)
    print(summary_table(reports))
    for r in reports:
        if not r.passed:
            failed = [c["name"] for c in r.metadata.get("checks", []) if not c["pass"]]
            detail = r.metadata.get("error") or "; ".join(failed)
            print(f"FAILED {r.name}: {detail}")
    Output(merged(args, params, "output_dir")).report(reports)
    return _status(reports)


COMMANDS = {
    "derive-flow": cmd_derive_flow,
    "lax": cmd_lax,
    "check-zcr": cmd_check_zcr,
    "soliton": cmd_soliton,
    "breather": cmd_breather,
    "backlund-check": cmd_backlund_check,
    "verify-all": cmd_verify_all,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vmkdv", description="Vector mKdV hierarchy: flows, Lax matrices, solutions, verification.")
    parser.add_argument("--version", action="version", version=f"vmkdv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, fmt_choices=None):
        p.add_argument("--params", help="JSON params file (flags override it)")
        p.add_argument("--out", dest="output_dir", help="output directory (default: stdout)")
        if fmt_choices:
            p.add_argument("--format", choices=fmt_choices)

    def grid_flags(p):
        p.add_argument("--x0", type=float)
        p.add_argument("--x1", type=float)
        p.add_argument("--nx", type=int)
        for name in ("t3", "t5", "t7", "t9"):
            p.add_argument(f"--{name}", type=float)

    def soliton_flags(p):
        p.add_argument("--mu", type=float)
        p.add_argument("--c0", type=float)
        p.add_argument("--c", help="comma-separated vector c")
        p.add_argument("--normalize", action="store_true", default=None, help="rescale (c0, c) to unit length")

    p = sub.add_parser("derive-flow", help="print the flow u_t(2n+1)")
    p.add_argument("--n", type=int)
    common(p, ["text", "json"])

    p = sub.add_parser("lax", help="emit the Lax matrix V_(2n+1) as JSON")
    p.add_argument("--n", type=int)
    common(p)

    p = sub.add_parser("check-zcr", help="exact zero-curvature check")
    p.add_argument("--n", type=int)
    p.add_argument("--flow", help="substitute evolution (canonical text) to test fault detection")
    common(p)

    p = sub.add_parser("soliton", help="sample the one-soliton and verify it")
    soliton_flags(p)
    grid_flags(p)
    common(p, ["csv", "dat", "json"])

    p = sub.add_parser("breather", help="sample a breather and verify it")
    p.add_argument("--mu", type=complex, help="complex pole, e.g. 0.8+0.6j")
    p.add_argument("--C", help="JSON rows of C; entries real or [re, im]")
    p.add_argument("--orthonormal", help="N,j for C = e_1 + i e_(j+2)")
    p.add_argument("--method", choices=BreatherFamily.METHODS)
    grid_flags(p)
    common(p, ["csv", "dat", "json"])

    p = sub.add_parser("backlund-check", help="Backlund residual between zero and the one-soliton")
    soliton_flags(p)
    grid_flags(p)
    p.add_argument("--scale", type=float, help="amplitude factor on the soliton (1 = exact pair)")
    p.add_argument("--lenient", action="store_true", help="clamp instead of raising on |u~ - u| > 2 mu")
    common(p)

    p = sub.add_parser("verify-all", help="run the acceptance suite")
    p.add_argument("--quick", action="store_true", default=None, help="skip the n=3 symbolic check")
    p.add_argument("--golden-dir", dest="golden_dir", help="directory with flows.txt and lax_v3.json")
    p.add_argument("--only", help="comma-separated criterion numbers")
    common(p)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        params = load_params(args.params) if getattr(args, "params", None) else {}
        return COMMANDS[args.command](args, params)
    except ConfigError as exc:
        print(json.dumps(exc.to_dict(), sort_keys=True), file=sys.stderr)
        return EXIT_CONFIG
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head); silence the final flush
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except OSError as exc:
        print(json.dumps({"error": "io", "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
