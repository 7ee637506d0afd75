"""Command line: ``oscfid {qcurve,ccurve,coeffs,verify}``.

Curves are written as comma-delimited text with a ``#`` header that holds
the canonical command line, so a file can always be regenerated.
Exit status: 0 success, 1 a check or computation failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import cfidelity as cf
from .curvefile import CurveFile, format_grid, parse_grid
from .dynamics import ModeSpec
from .mathkit import QuadratureBudgetError
from .qfidelity import (TruncationError, adaptive_weights, quantum_fidelity_curve,
                        spectral_weights)
from .verify import REGISTRY, UnknownCheckError, VerifyConfig, run_all

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _warn(msg: str) -> None:
    print(f"oscfid: warning: {msg}", file=sys.stderr)


def _mode(text: str) -> tuple[float, float, float, float]:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"mode must be four numbers a,b,c,d, got {text!r}")
    if len(vals) != 4:
        raise argparse.ArgumentTypeError(f"mode must be four numbers a,b,c,d, got {text!r}")
    return vals


def _grid(text: str) -> tuple[float, float, int]:
    try:
        return parse_grid(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _default_grid(eps: int) -> tuple[float, float, int]:
    return (0.0, math.pi, 512) if eps == 1 else (-8.0, 8.0, 512)


def _emit(curve: CurveFile, args) -> None:
    if args.out in (None, "-"):
        curve.write(sys.stdout)
    else:
        curve.save(args.out)
    if args.plot is not None:
        from .plotting import render_curve
        render_curve(curve, args.plot)


def _plot_path(args) -> None:
    # bare --plot puts the figure next to the output file
    if args.plot == "":
        if args.out in (None, "-"):
            raise UsageError("--plot without a path needs --out")
        args.plot = str(Path(args.out).with_suffix(".svg"))


# -- commands ----------------------------------------------------------------

def cmd_qcurve(args) -> int:
    try:
        mode = ModeSpec(*args.mode, epsilon=args.eps)
    except ValueError as e:
        raise UsageError(str(e))
    grid = args.t or _default_grid(args.eps)
    try:
        w = (spectral_weights(args.g, n_max=args.nmax, tol=args.tol) if args.nmax is not None
             else adaptive_weights(args.g, tol=args.tol))
    except TruncationError as e:
        _warn(str(e))
        w = e.weights
    curve = quantum_fidelity_curve(mode, args.g, np.linspace(*grid), w)
    cmd = (f"qcurve --eps {args.eps} --g {args.g!r} --mode {','.join(repr(x) for x in args.mode)}"
           f" --t {format_grid(*grid)} --tol {args.tol!r}")
    if args.nmax is not None:
        cmd += f" --nmax {args.nmax}"
    header = {
        "command": cmd,
        "case": curve.case,
        "eps": str(args.eps),
        "g": repr(float(args.g)),
        "dist": curve.distribution,
        "mode": ",".join(repr(x) for x in args.mode),
        "grid": format_grid(*grid),
        "seed": "none",
        "method": w.method,
        "terms": str(len(w)),
        "tail": f"{w.tail:.3e}",
    }
    rows = np.column_stack([curve.t, curve.value, curve.error])
    _emit(CurveFile(header, ["t", "value", "error"], rows), args)
    return EXIT_OK


def _distribution(args):
    if args.dist == "gaussian":
        if args.rescaled or args.scale is None:
            return cf.Gaussian()
        return cf.Gaussian(args.scale)
    radius = args.radius
    if radius is None:
        radius = 1.0 if args.eps == 1 else cf.SQRT3
    return cf.BallIndicator(radius)


def cmd_ccurve(args) -> int:
    if args.rescaled:
        if args.g is not None:
            raise UsageError("--rescaled fixes the coupling; drop --g")
        g = cf.G_INDEPENDENT
    elif args.g is None:
        raise UsageError("ccurve needs --g or --rescaled")
    else:
        g = args.g
    try:
        dist = _distribution(args)
    except ValueError as e:
        raise UsageError(str(e))
    grid = args.t or _default_grid(args.eps)
    t = np.linspace(*grid)
    method = args.method or ("quadrature" if args.dist == "gaussian" else "monte-carlo")
    try:
        curve = cf.classical_fidelity_curve(args.eps, g, dist, t, args.tol, seed=args.seed,
                                            n_samples=args.samples, method=method)
    except QuadratureBudgetError as e:
        print(f"oscfid: {e}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as e:
        raise UsageError(str(e))
    columns = ["t", "value", "error"]
    cols = [curve.t, curve.value, curve.error]
    cmd = [f"ccurve --eps {args.eps}", "--rescaled" if args.rescaled else f"--g {g!r}",
           f"--dist {args.dist}", f"--t {format_grid(*grid)}", f"--method {method}",
           f"--seed {args.seed}", f"--samples {args.samples}", f"--tol {args.tol!r}"]
    if isinstance(dist, cf.BallIndicator):
        cmd.append(f"--radius {dist.radius!r}")
    elif not args.rescaled:
        cmd.append(f"--scale {dist.scale!r}")
    header = {
        "case": curve.case,
        "eps": str(args.eps),
        "g": repr(float(g)),
        "dist": dist.tag,
        "mode": "none",
        "grid": format_grid(*grid),
        "seed": str(args.seed),
        "method": method,
        "samples": str(args.samples) if method == "monte-carlo" else "none",
    }
    if args.with_quantum:
        try:
            mode = ModeSpec(*args.mode, epsilon=args.eps)
        except ValueError as e:
            raise UsageError(str(e))
        q = quantum_fidelity_curve(mode, g, t, adaptive_weights(g, tol=1e-10))
        columns.append("quantum")
        cols.append(q.value)
        cmd.append(f"--with-quantum --mode {','.join(repr(x) for x in args.mode)}")
        header["mode"] = ",".join(repr(x) for x in args.mode)
    header = {"command": " ".join(cmd), **header}
    _emit(CurveFile(header, columns, np.column_stack(cols)), args)
    return EXIT_OK


def cmd_coeffs(args) -> int:
    try:
        w = spectral_weights(args.g, n_max=args.nmax, tol=args.tol)
    except TruncationError as e:
        _warn(str(e))
        w = e.weights
    exact = w.exact is not None
    lines = [f"# g: {abs(args.g)!r}", f"# method: {w.method}",
             f"# exact: {'yes' if exact else 'no'}", f"# tail: {w.tail:.3e}",
             "n,weight,cumulative,exact"]
    cum = np.cumsum(w.weights)
    for i, (n, wn) in enumerate(w):
        frac = str(w.exact[i]) if exact else ""
        lines.append(f"{n},{wn!r},{float(cum[i])!r},{frac}")
    text = "\n".join(lines) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    only = None
    if args.only:
        only = [c for item in args.only for c in item.split(",") if c]
    cfg = VerifyConfig(seed=args.seed, n_samples=args.samples)
    try:
        rep = run_all(cfg, only=only, workers=args.workers)
    except UnknownCheckError as e:
        raise UsageError(e.args[0])
    text = rep.to_json() + "\n" if args.json else rep.to_text()
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    bad = rep.failed + (rep.inconclusive if args.strict else [])
    for c in bad:
        print(f"oscfid: {c.status}: {c.id} ({c.detail})", file=sys.stderr)
    return EXIT_FAIL if bad else EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oscfid", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, plot=True):
        sp.add_argument("-o", "--out", help="output path (default: standard output)")
        if plot:
            sp.add_argument("--plot", nargs="?", const="", default=None, metavar="SVG",
                            help="also render the curve as SVG (bare flag: next to --out)")

    q = sub.add_parser("qcurve", help="quantum fidelity modulus on a time grid")
    q.add_argument("--eps", type=int, choices=(1, -1), required=True)
    q.add_argument("--g", type=float, required=True)
    q.add_argument("--mode", type=_mode, default=(1.0, 0.0, 0.0, 1.0), metavar="a,b,c,d")
    q.add_argument("--t", type=_grid, metavar="start:stop:n")
    q.add_argument("--nmax", type=int, help="terms kept for non-integer alpha (default: adaptive)")
    q.add_argument("--tol", type=float, default=1e-10, help="allowed tail mass")
    common(q)
    q.set_defaults(func=cmd_qcurve)

    c = sub.add_parser("ccurve", help="classical fidelity on a time grid")
    c.add_argument("--eps", type=int, choices=(1, -1), required=True)
    c.add_argument("--g", type=float)
    c.add_argument("--rescaled", action="store_true", help="g-independent form")
    c.add_argument("--dist", choices=("gaussian", "ball"), default="gaussian")
    c.add_argument("--radius", type=float, help="ball radius (default 1, or sqrt 3 if eps=-1)")
    c.add_argument("--scale", type=float, help="Gaussian width (default 1)")
    c.add_argument("--method", choices=("quadrature", "monte-carlo"))
    c.add_argument("--t", type=_grid, metavar="start:stop:n")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--samples", type=int, default=cf.DEFAULT_SAMPLES)
    c.add_argument("--tol", type=float, default=1e-8)
    c.add_argument("--with-quantum", action="store_true", help="add the quantum curve as a column")
    c.add_argument("--mode", type=_mode, default=(1.0, 0.0, 0.0, 1.0), metavar="a,b,c,d")
    common(c)
    c.set_defaults(func=cmd_ccurve)

    k = sub.add_parser("coeffs", help="spectral weights of the reference state")
    k.add_argument("--g", type=float, required=True)
    k.add_argument("--nmax", type=int, default=200)
    k.add_argument("--tol", type=float, default=1e-8)
    common(k, plot=False)
    k.set_defaults(func=cmd_coeffs)

    v = sub.add_parser("verify", help="run the verification checks")
    v.add_argument("--only", action="append", metavar="ID[,ID...]")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--samples", type=int, default=cf.DEFAULT_SAMPLES)
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--strict", action="store_true", help="inconclusive checks also fail")
    v.add_argument("--json", action="store_true")
    v.add_argument("--list", action="store_true", help="print the check ids and exit")
    common(v, plot=False)
    v.set_defaults(func=cmd_verify)
    return p


def _glue_grid(argv: list[str]) -> list[str]:
    # "--t -8:8:512" would otherwise read the grid as an option
    out, it = [], iter(argv)
    for a in it:
        if a == "--t":
            nxt = next(it, None)
            out.append(a if nxt is None else f"--t={nxt}")
        else:
            out.append(a)
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = _glue_grid(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if getattr(args, "list", False):
        print("\n".join(REGISTRY))
        return EXIT_OK
    try:
        if hasattr(args, "plot"):
            _plot_path(args)
        return args.func(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"oscfid {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
