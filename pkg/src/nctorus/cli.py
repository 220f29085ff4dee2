"""Command-line entry point: ``nctorus {verify,apply,extend}``.

Exit codes: 0 success, 1 a check failed (or a sample point was rejected),
2 usage or parse error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io, psido, toroidal, verify
from .algebra import decay_report
from .errors import DomainError, InvalidArgument, NCTorusError
from .lattice import ThetaMatrix

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# argument parsing

def _theta(args) -> ThetaMatrix:
    n = args.n
    if args.theta is None:
        upper = [0.25] * (n * (n - 1) // 2)
    else:
        try:
            upper = [float(x) for x in args.theta.split(",") if x.strip()]
        except ValueError as exc:
            raise UsageError(f"--theta: {exc}") from exc
    try:
        return ThetaMatrix(n, upper)
    except InvalidArgument as exc:
        raise UsageError(f"--theta/--n: {exc}") from exc


def _common(p: argparse.ArgumentParser):
    p.add_argument("--out", help="output path (JSON); sidecars are written next to it")
    p.add_argument("--plot", action="store_true", help="also render PNG figures next to the outputs")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nctorus", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a seeded identity suite")
    v.add_argument("suite", choices=list(verify.SUITES) + ["all"])
    v.add_argument("--n", type=int, default=2, help="dimension of the torus (default 2)")
    v.add_argument("--theta", help="upper triangle of theta, row by row, comma separated")
    v.add_argument("--radius", type=int, default=3, help="radius of random elements")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=10, help="random samples per identity")
    v.add_argument("--tol", type=float, help="override the tolerance of every residual check")
    v.add_argument("--quad-points", type=int, dest="quad_points",
                   help="quadrature point budget for oscillating integrals")
    _common(v)

    a = sub.add_parser("apply", help="apply an operator to a stored element")
    a.add_argument("operator", help="identity | laplacian | lambda:S | delta:a1,..,an | "
                                    "symbol:FILE | toroidal:FILE")
    a.add_argument("element", help="element JSON file")
    _common(a)

    e = sub.add_parser("extend", help="evaluate the extension of a toroidal symbol")
    e.add_argument("table", help="toroidal symbol JSON file")
    e.add_argument("points", help='JSON file: {"points": [[xi_1, ..., xi_n], ...]}')
    e.add_argument("--margin", type=int, default=2, help="trusted window is |xi|_inf <= K - margin")
    e.add_argument("--kernel-file", help="tabulated kernel JSON (overrides the kernel flags)")
    e.add_argument("--kernel-order", type=int, default=64, help="Gauss-Legendre nodes per panel")
    e.add_argument("--kernel-panels", type=int, default=64)
    e.add_argument("--kernel-window", type=float, default=30.0)
    _common(e)
    return ap


# --------------------------------------------------------------------------
# verify

def cmd_verify(args) -> int:
    if args.trials < 1 or args.radius < 0:
        raise UsageError("--trials must be positive and --radius non-negative")
    if args.quad_points is not None and args.quad_points < 1:
        raise UsageError("--quad-points must be positive")
    if args.plot and not args.out:
        raise UsageError("--plot needs --out to know where to put the figure")
    cfg = verify.RunConfig(theta=_theta(args), radius=args.radius, seed=args.seed, tol=args.tol,
                           quad_budget=args.quad_points, trials=args.trials)
    rows = verify.run(args.suite, cfg)
    rep = verify.report(args.suite, cfg, rows)
    text = json.dumps(rep, indent=1, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        for r in rows:
            status = "PASS" if r.passed else "FAIL"
            shown = r.error if r.error else f"{r.value:.3e}"
            print(f"{status}  {r.suite:9s} {r.identity:45s} {shown}  (<= {r.tolerance:.1e})")
        if args.plot:
            from .plots import verify_figure
            verify_figure(rows, Path(args.out).with_suffix(".png"))
    else:
        sys.stdout.write(text)
    return EXIT_OK if rep["passed"] else EXIT_FAIL


# --------------------------------------------------------------------------
# apply

def _load(path: str):
    try:
        return io.read_json(path)
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc


def parse_operator(desc: str, theta: ThetaMatrix):
    """Map an operator descriptor to a callable on elements."""
    kind, _, arg = desc.partition(":")
    if kind == "identity" and not arg:
        return lambda u: u
    if kind == "laplacian" and not arg:
        return psido.DifferentialOperator.flat_laplacian(theta)
    if kind == "lambda":
        try:
            s = complex(arg.replace(" ", ""))
        except ValueError as exc:
            raise UsageError(f"operator {desc!r}: cannot read the exponent") from exc
        return lambda u: psido.lambda_power(s, u)
    if kind == "delta":
        try:
            alpha = tuple(int(x) for x in arg.split(","))
        except ValueError as exc:
            raise UsageError(f"operator {desc!r}: expected integers") from exc
        if len(alpha) != theta.n or min(alpha) < 0:
            raise UsageError(f"operator {desc!r}: need {theta.n} non-negative integers")
        return psido.DifferentialOperator.build(theta, {alpha: 1.0})
    if kind == "symbol" and arg:
        rho = io.symbol_from_json(_load(arg), theta, where=arg)
        if rho.theta != theta:
            raise UsageError("symbol and element use different theta matrices")
        return lambda u: psido.apply_psido(psido.LatticeSymbol.from_standard(rho), u)
    if kind == "toroidal" and arg:
        table = io.toroidal_from_json(_load(arg), where=arg)
        if table.theta != theta:
            raise UsageError("toroidal table and element use different theta matrices")
        return lambda u: psido.apply_psido(psido.LatticeSymbol.from_table(table), u)
    raise UsageError(f"unknown operator descriptor {desc!r}")


def _sidecar(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


def cmd_apply(args) -> int:
    if not args.out:
        raise UsageError("apply needs --out")
    u = io.element_from_json(_load(args.element), where=args.element)
    op = parse_operator(args.operator, u.theta)
    v = op(u)
    out = Path(args.out)
    io.write_json(out, io.element_to_json(v))
    before, after = decay_report(u), decay_report(v)
    _sidecar(out, ".decay.csv").write_text(after.to_csv())
    summary = {"operator": args.operator, "input": args.element,
               "input_fitted_order": before.fitted_order, "output_fitted_order": after.fitted_order,
               "order_change": (None if before.fitted_order is None or after.fitted_order is None
                                else after.fitted_order - before.fitted_order),
               "output_tail_mass": after.tail_mass}
    io.write_json(_sidecar(out, ".summary.json"), summary)
    if args.plot:
        from .plots import decay_figure
        decay_figure(before.shells, after.shells, _sidecar(out, ".decay.png"),
                     {"input": before.fitted_order, "output": after.fitted_order})
    return EXIT_OK


# --------------------------------------------------------------------------
# extend

def _cell_overshoot(ext: toroidal.ExtendedSymbol, xi: np.ndarray, value) -> float:
    """How far each coefficient leaves the range spanned at the corners of the unit cell around ``xi``."""
    lo, hi = np.floor(xi), np.ceil(xi)
    corners = [tuple(int(c) for c in np.where(np.array(m, dtype=bool), hi, lo))
               for m in np.ndindex(*(2,) * ext.n)]
    table = ext.rho.table
    vals = [table[c] for c in corners if c in table]
    if not vals:
        return 0.0
    keys = {tuple(int(x) for x in k) for v in vals + [value] for k in v.indices}
    worst = 0.0
    for k in keys:
        cs = np.array([v.coeff(k) for v in vals])
        z = value.coeff(k)
        for part, arr in ((z.real, cs.real), (z.imag, cs.imag)):
            worst = max(worst, arr.min() - part, part - arr.max(), 0.0)
    return float(worst)


def _kernel(args):
    if args.kernel_file:
        try:
            return io.kernel_from_json(_load(args.kernel_file))
        except (KeyError, TypeError) as exc:
            raise io.ParseError(f"malformed kernel file ({exc})", args.kernel_file) from exc
    if (args.kernel_order, args.kernel_panels, args.kernel_window) == (64, 64, 30.0):
        return toroidal.default_kernel()
    return toroidal.build_kernel(args.kernel_order, args.kernel_panels, window=args.kernel_window)


def _points(obj, n, where):
    pts = obj.get("points") if isinstance(obj, dict) else obj
    if not isinstance(pts, list):
        raise io.ParseError('expected a list of points or {"points": [...]}', where)
    out = []
    for i, p in enumerate(pts):
        if not isinstance(p, list) or len(p) != n:
            raise io.ParseError(f"point must be a list of {n} numbers", f"{where}.points[{i}]")
        try:
            out.append(np.array([float(x) for x in p]))
        except (TypeError, ValueError) as exc:
            raise io.ParseError(str(exc), f"{where}.points[{i}]") from exc
    return out


def cmd_extend(args) -> int:
    if not args.out:
        raise UsageError("extend needs --out")
    table = io.toroidal_from_json(_load(args.table), where=args.table)
    pts = _points(_load(args.points), table.n, args.points)
    ext = toroidal.extend(table, _kernel(args), args.margin)
    offenders = [p.tolist() for p in pts if not ext.in_window(p)]
    if offenders:
        print(f"{len(offenders)} sample point(s) outside the trusted window |xi|_inf <= {ext.trusted}:",
              file=sys.stderr)
        for p in offenders:
            print(f"  {p}", file=sys.stderr)
        return EXIT_FAIL
    samples = []
    for p in pts:
        val = ext(p)
        samples.append({"xi": p.tolist(), "element": io.element_to_json(val),
                        "overshoot": _cell_overshoot(ext, p, val)})
    result = {"table": args.table, "K": table.K, "trusted_window": ext.trusted,
              "kernel": ext.kernel.metadata(), "samples": samples,
              "max_overshoot": max((s["overshoot"] for s in samples), default=0.0)}
    io.write_json(args.out, result)
    if args.plot:
        _extension_plot(ext, pts, Path(args.out))
    return EXIT_OK


def _extension_plot(ext, pts, out: Path):
    from .plots import extension_figure

    zero = (0,) * ext.n
    rest = pts[0][1:] if pts else np.zeros(ext.n - 1)
    line = np.linspace(-ext.trusted, ext.trusted, 401)
    vals = [ext(np.concatenate([[x], rest])).coeff(zero).real for x in line]
    ks = np.arange(-ext.trusted, ext.trusted + 1)
    rest_k = tuple(int(round(x)) for x in rest)
    lat = [(k, ext.rho.table[(int(k),) + rest_k].coeff(zero).real) for k in ks
           if (int(k),) + rest_k in ext.rho.table]
    samp = [(p[0], ext(p).coeff(zero).real) for p in pts if np.allclose(p[1:], rest)]
    extension_figure(line, vals, [k for k, _ in lat], [v for _, v in lat], samp,
                     _sidecar(out, ".png"))


# --------------------------------------------------------------------------

_COMMANDS = {"verify": cmd_verify, "apply": cmd_apply, "extend": cmd_extend}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, io.ParseError) as exc:
        print(f"nctorus {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"nctorus {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except InvalidArgument as exc:
        # malformed content inside otherwise valid JSON
        print(f"nctorus {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NCTorusError as exc:
        print(f"nctorus {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (TypeError, ValueError) as exc:
        if args.command == "verify":
            raise
        print(f"nctorus {args.command}: malformed input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
