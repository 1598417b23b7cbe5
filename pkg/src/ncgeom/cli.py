"""Command-line driver: ``python -m ncgeom <command> ...``.

Exit codes: 0 success, 1 I/O or validation failure, 2 no compatible
connection, 3 blow-up (partial output written), 4 residuals above --tol.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import curvature as cv
from . import solver, torus
from .connection import (
    Connection,
    cotorsion_closed,
    cotorsion_residual,
    max_residual,
    metric_compat_residual_closed,
    metric_compat_residual_direct,
    torsion_residual,
)
from .cyclic import DEFAULT_TOL, CyclicFunction
from .metric import DegenerateMetric, Metric, constant_metric, ellipse_metric, metric_from_x

EXIT_OK, EXIT_INVALID, EXIT_NO_SOLUTION, EXIT_BLOWUP, EXIT_RESIDUAL = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, msg, code=EXIT_INVALID):
        super().__init__(msg)
        self.code = code


# -- formatting ---------------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) or isinstance(x, str):
        return str(x)
    return format(float(x) + 0.0, ".17g")


def _columns(name, values):
    """A real column, or name_re/name_im when any imaginary part is non-zero."""
    arr = np.asarray(values, dtype=complex)
    if np.any(arr.imag != 0):
        return [(f"{name}_re", arr.real), (f"{name}_im", arr.imag)]
    return [(name, arr.real)]


def table(named_columns) -> tuple:
    cols = []
    for name, values in named_columns:
        if isinstance(values, list) and values and isinstance(values[0], str):
            cols.append((name, values))
        else:
            cols.extend(_columns(name, values))
    header = [c[0] for c in cols]
    rows = [[fmt(c[1][i]) for c in cols] for i in range(len(cols[0][1]))]
    return header, rows


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if path is None:
        sys.stdout.write(text)
    else:
        _write_text(path, text)


def write_json(path, obj):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        _write_text(path, text)


def _write_text(path, text):
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    except OSError as e:
        raise CliError(f"cannot write {path}: {e}") from e


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise CliError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise CliError(f"{path} is not valid JSON: {e}") from e


# -- argument parsing -------------------------------------------------------

def _complex(s):
    try:
        return complex(s.replace(" ", ""))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from e


def _tol(s):
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


def _floats(n):
    def parse(s):
        try:
            vals = [float(v) for v in s.split(",")]
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers") from e
        if len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {len(vals)}")
        return tuple(vals)

    return parse


def _ints(s):
    try:
        return [int(v) for v in s.split(",")]
    except ValueError as e:
        raise argparse.ArgumentTypeError("expected comma-separated integers") from e


def _sign(s):
    if s in ("+", "+1", "1"):
        return 1
    if s in ("-", "-1"):
        return -1
    raise argparse.ArgumentTypeError("sign must be + or -")


def _axes(s):
    parts = tuple(s.split(","))
    if len(parts) != 2 or {torus.AXIS.get(a) for a in parts} != {0, 1}:
        raise argparse.ArgumentTypeError("axes must be one generator per axis, e.g. p,s or pt,st")
    return parts


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_tol, default=DEFAULT_TOL, help="residual tolerance (default 1e-10)")
    common.add_argument("--out", help="output file (directory for solve-circle); stdout if omitted")

    circle = argparse.ArgumentParser(add_help=False)
    circle.add_argument("--metric", help="metric JSON file")
    circle.add_argument("--N", type=int, help="modulus of Z_N")
    circle.add_argument("--l", type=int, help="index of the non-constant X profile")
    circle.add_argument("--phi", type=_complex, default=0.37, help="phase of the non-constant X profile")
    circle.add_argument("--gamma", type=_complex, help="constant value of X_p")

    p = argparse.ArgumentParser(prog="ncgeom", description="Connections and curvature on Z_N and Z_N x Z_M.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve-circle", parents=[common, circle], help="classify compatible connections")
    s.add_argument("--kappa-p", type=_complex, help="single kappa sample for one-parameter families")
    s.add_argument("--case", choices=["Ia", "Ib", "Ic", "IIzero", "IIa", "IIb", "IInonconst"])

    s = sub.add_parser("verify", parents=[common], help="residuals of a connection against a metric")
    s.add_argument("--metric", required=True)
    s.add_argument("--connection", required=True)

    s = sub.add_parser("curvature", parents=[common, circle], help="Ricci and scalar curvature profiles")
    s.add_argument("--connection", help="connection JSON; uses the generic pipeline instead of a case")
    s.add_argument("--case", choices=list(cv.CASES), default="a")
    s.add_argument("--beta", type=float, default=-0.5)
    s.add_argument("--a", type=float, help="ellipse semi-axis (with --b and --N)")
    s.add_argument("--b", type=float)
    s.add_argument("--kappa-p", type=_complex, default=0.3, help="kappa for the even-extra B profile")
    s.add_argument("--closed-form", action="store_true", help="cross-check against the dual formulas")

    s = sub.add_parser("inverse", parents=[common], help="rebuild a metric from a target scalar curvature")
    s.add_argument("--target", default="0", help="constant value or file with one value per line")
    s.add_argument("--seeds", type=_floats(3), default=(-1.0, -1.0, -1.0))
    s.add_argument("--steps", type=int, default=50)
    s.add_argument("--sign", type=_sign, default=-1, help="+ for cases b/c, - for case a")

    s = sub.add_parser("torus", parents=[common], help="residual table for a torus connection")
    s.add_argument("--family", choices=["constant", "product", "alternating", "minus-two", "file"],
                   default="constant")
    s.add_argument("--N", type=int, default=6)
    s.add_argument("--M", type=int, default=6)
    s.add_argument("--l", type=int, help="product family: X profile index on both circles")
    s.add_argument("--phi", type=_complex, default=0.37)
    s.add_argument("--axes", type=_axes, default=("p", "s"))
    s.add_argument("--metric")
    s.add_argument("--connection")

    s = sub.add_parser("limit", parents=[common], help="convergence of N^2 R to the continuum curvature")
    s.add_argument("--N", type=_ints, default=[50, 100, 200])
    s.add_argument("--sign", type=_sign, default=-1)

    s = sub.add_parser("ellipse-metric", parents=[common], help="metric from a polygon inscribed in an ellipse")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--b", type=float, required=True)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--continuum-scale", action="store_true")
    return p


# -- commands -----------------------------------------------------------------

def circle_metric(args) -> Metric:
    if args.metric:
        try:
            return Metric.from_json(read_json(args.metric))
        except (KeyError, TypeError) as e:
            raise CliError(f"{args.metric}: malformed metric ({e})") from e
    if args.N is None:
        raise CliError("give --metric or --N")
    if getattr(args, "a", None) is not None:
        if args.b is None:
            raise CliError("--a needs --b")
        return ellipse_metric(args.a, args.b, args.N)
    if args.l is not None:
        X = solver.nonconstant_x(args.N, args.l, args.phi)
        return metric_from_x(X, CyclicFunction.constant(args.N, -1.0))
    gamma = 1.0 if args.gamma is None else args.gamma
    return constant_metric(args.N, -1.0, gamma)


def residual_row(conn: Connection, m: Metric) -> dict:
    row = {k: v.max_abs() for k, v in metric_compat_residual_closed(conn, m).items()}
    row["torsion"] = max_residual(torsion_residual(conn))
    row["cotorsion"] = max_residual(cotorsion_closed(conn, m))
    return row


def cmd_solve_circle(args) -> int:
    m = circle_metric(args)
    kappas = solver.DEFAULT_KAPPAS if args.kappa_p is None else (args.kappa_p,)
    result = solver.enumerate_connections(m, kappas=kappas, tol=args.tol)
    for d in result.diagnostics:
        print(d, file=sys.stderr)
    if result.xprofile.c is None:
        return EXIT_NO_SOLUTION
    sols = [s for s in result if args.case is None or s.params.case == args.case]
    if not sols:
        print("no solution in the requested family", file=sys.stderr)
        return EXIT_NO_SOLUTION
    header, rows, worst = None, [], 0.0
    for i, sol in enumerate(sols):
        tag = f"{i:02d}_{sol.params.case}"
        if args.out:
            write_json(Path(args.out) / f"connection_{tag}.json",
                       {"connection": sol.connection.to_json(), "family": sol.params.to_json()})
        res = residual_row(sol.connection, m)
        header = ["family", *res]
        rows.append([tag, *(fmt(v) for v in res.values())])
        worst = max(worst, *res.values())
    write_csv(Path(args.out) / "residuals.csv" if args.out else None, header, rows)
    return EXIT_OK if worst <= args.tol else EXIT_RESIDUAL


def _load_pair(args):
    mobj, cobj = read_json(args.metric), read_json(args.connection)
    cobj = cobj.get("connection", cobj)
    try:
        if "M" in mobj:
            return torus.TorusMetric.from_json(mobj), torus.TorusConnection.from_json(cobj)
        return Metric.from_json(mobj), Connection.from_json(cobj)
    except (KeyError, TypeError) as e:
        raise CliError(f"malformed input ({e})") from e


def cmd_verify(args) -> int:
    m, c = _load_pair(args)
    if isinstance(m, torus.TorusMetric):
        return _torus_report(args, c, m)
    rows = [[k, fmt(v)] for k, v in residual_row(c, m).items()]
    direct = metric_compat_residual_direct(c, m)
    rows.append(["compat_direct", fmt(direct.max_abs())])
    rows.append(["cotorsion_direct", fmt(cotorsion_residual(c, m).max_abs())])
    write_csv(args.out, ["equation", "max_abs"], rows)
    worst = max(float(r[1]) for r in rows)
    return EXIT_OK if worst <= args.tol else EXIT_RESIDUAL


def cmd_curvature(args) -> int:
    m = circle_metric(args)
    N = m.N
    lift = cv.Lift.constant(N, args.beta)
    if args.connection:
        cobj = read_json(args.connection)
        conn = Connection.from_json(cobj.get("connection", cobj))
        rho = cv.rho_coefficients(conn)
        ric = cv.ricci(conn, m, lift)
        R = cv.scalar(conn, m, lift)
        dual = cv.scalar_closed(conn, m, lift)
    else:
        gamma = 1.0 if args.gamma is None else args.gamma.real
        B_extra = None
        if args.case == "even-extra":
            sol = solver.case_c_connection(m, args.kappa_p, 0.0, tol=args.tol)
            B_extra = (sol.connection.B_p, sol.connection.B_pt)
        rep = cv.scalar_closed_case(m, gamma, args.case, lift, B_extra)
        conn, ric, R = rep.connection, rep.ricci, rep.scalar
        rho = cv.rho_coefficients(conn)
        dual = cv.scalar(conn, m, lift)
    cols = [("n", np.arange(N)), ("R", R.values),
            ("M_p", rho["p"][0].values), ("M_pt", rho["pt"][0].values),
            ("N_p", rho["p"][1].values), ("N_pt", rho["pt"][1].values)]
    for key in (("p", "p"), ("p", "pt"), ("pt", "p"), ("pt", "pt")):
        f = ric.coeffs.get(key)
        cols.append(("Ricci_" + "_".join(key), np.zeros(N) if f is None else f.values))
    code = EXIT_OK
    if args.closed_form:
        disc = np.abs(R.values - dual.values)
        cols.append(("closed_form_discrepancy", disc))
        print(f"max closed-form discrepancy {fmt(disc.max())}", file=sys.stderr)
        if disc.max() > args.tol:
            code = EXIT_RESIDUAL
    write_csv(args.out, *table(cols))
    return code


def _target(source, steps):
    p = Path(source)
    if p.exists():
        try:
            vals = [float(line) for line in p.read_text().split() if line.strip()]
        except ValueError as e:
            raise CliError(f"{source}: expected one number per line") from e
        return np.array(vals)
    try:
        return np.full(steps, float(source))
    except ValueError as e:
        raise CliError(f"--target {source!r} is neither a number nor a file") from e


def cmd_inverse(args) -> int:
    R = _target(args.target, args.steps)
    try:
        G = cv.inverse_metric(R, seeds=args.seeds, steps=args.steps, sign=args.sign)
        code = EXIT_OK
    except cv.BlowUp as e:
        print(f"blow-up: {e}", file=sys.stderr)
        G, code = e.partial, EXIT_BLOWUP
    n = len(G)
    back = np.full(n, np.nan, dtype=complex)
    want = np.full(n, np.nan, dtype=complex)
    back[1:n - 2] = cv.window_scalar(G, args.sign)
    want[1:n - 2] = R[: n - 3]
    err = np.abs(back - want)
    if code == EXIT_OK:
        roundtrip = float(np.nanmax(err)) if n > 3 else 0.0
        print(f"round-trip residual {fmt(roundtrip)}", file=sys.stderr)
        if roundtrip > args.tol:
            code = EXIT_RESIDUAL
    cols = [("j", np.arange(n)), ("G", G), ("R_target", want), ("R_roundtrip", back), ("residual", err)]
    write_csv(args.out, *table(cols))
    return code


def _torus_report(args, conn, metric) -> int:
    rows = []
    for kind, res in (("compat", torus.torus_compat_residual(conn, metric)),
                      ("cotorsion", torus.torus_cotorsion_residual(conn, metric))):
        for label, f in res:
            rows.append([kind, torus.format_label(label), fmt(f.max_abs())])
    write_csv(args.out, ["system", "equation", "max_abs"], rows)
    worst = max(float(r[2]) for r in rows)
    return EXIT_OK if worst <= args.tol else EXIT_RESIDUAL


def cmd_torus(args) -> int:
    N, M = args.N, args.M
    if args.family == "file":
        if not (args.metric and args.connection):
            raise CliError("--family file needs --metric and --connection")
        metric, conn = _load_pair(args)
        if not isinstance(metric, torus.TorusMetric):
            raise CliError("metric file is not a torus metric (missing M)")
    elif args.family == "constant":
        metric = torus.TorusMetric.constant(N, M)
        conn = torus.TorusConnection.uniform(N, M)
    elif args.family == "product":
        sols = []
        for K in (N, M):
            ns = argparse.Namespace(metric=None, N=K, l=args.l, phi=args.phi, gamma=None)
            m = circle_metric(ns)
            found = solver.enumerate_connections(m, tol=args.tol)
            if not len(found):
                raise CliError(f"no circle solution for N={K}", EXIT_NO_SOLUTION)
            sols.append((found[0].connection, m))
        conn, metric = torus.build_product_connection(*sols, tol=args.tol)
    elif args.family == "alternating":
        rep = torus.alternating_family(N, M, axes=args.axes)
        conn, metric = rep.connection, rep.metric
        for k, v in rep.identities.items():
            print(f"identity {k}: {fmt(v)}", file=sys.stderr)
    else:
        rep = torus.minus_two_family(N, M, axes=args.axes)
        conn, metric = rep.connection, rep.metric
    return _torus_report(args, conn, metric)


def profile(t):
    return 2 + np.cos(2 * np.pi * t)


def profile_d1(t):
    return -2 * np.pi * np.sin(2 * np.pi * t)


def profile_d2(t):
    return -4 * np.pi**2 * np.cos(2 * np.pi * t)


def cmd_limit(args) -> int:
    if any(N <= 4 for N in args.N):
        raise CliError("every N must exceed 4")
    rows = cv.continuous_limit_compare(profile, args.N, args.sign, profile_d1, profile_d2)
    out = [[str(r.N), fmt(r.max_error), "" if r.order is None else fmt(r.order)] for r in rows]
    write_csv(args.out, ["N", "max_error", "order"], out)
    return EXIT_OK


def cmd_ellipse_metric(args) -> int:
    write_json(args.out, ellipse_metric(args.a, args.b, args.N, args.continuum_scale).to_json())
    return EXIT_OK


COMMANDS = {
    "solve-circle": cmd_solve_circle,
    "verify": cmd_verify,
    "curvature": cmd_curvature,
    "inverse": cmd_inverse,
    "torus": cmd_torus,
    "limit": cmd_limit,
    "ellipse-metric": cmd_ellipse_metric,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except (DegenerateMetric, ValueError, ZeroDivisionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
