"""Command-line front end: evaluate kernels, run solves, compare fields.

Subcommands: ml, symbol, green, solve, oracle, compare, validate.
Numeric output is CSV (17 significant digits, LF, UTF-8) so repeated
runs are byte-identical; each solve also writes a JSON manifest echoing
every input.  Exit codes: 0 success, 1 usage error, 2 constraint
violation, 3 numerical-tolerance failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .fracmath import HAccuracyError, mittag_leffler
from .green import (FourierOnlyError, GreenKind, ProblemSpec,
                    QuadratureConfig, RegimeError, ToleranceNotMetError,
                    green_point_closed, green_points)
from .operators import SymbolParams, riesz_feller_symbol
from .oracle import OracleConfig, OracleInstabilityError, oracle_solve
from .solver import (SourceDescriptor, SpaceTimeGrid, SpecValidationError,
                     solve)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONSTRAINT = 2
EXIT_TOLERANCE = 3

_FMT = "%.17g"


def _fmt(v) -> str:
    return _FMT % float(v)


def _parse_complex(text: str) -> complex:
    """Parse 're' or 're,im' into a complex number."""
    parts = text.split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise argparse.ArgumentTypeError(f"expected re or re,im, got {text!r}")


def _parse_source(text: str) -> SourceDescriptor:
    """Parse zero | delta[:center] | gaussian[:center,width] | box:lo,hi."""
    name, _, rest = text.partition(":")
    args = [float(v) for v in rest.split(",")] if rest else []
    try:
        if name == "zero":
            return SourceDescriptor.zero()
        if name == "delta":
            return SourceDescriptor.delta(*args)
        if name == "gaussian":
            return SourceDescriptor.gaussian(*args)
        if name == "box":
            return SourceDescriptor.box(*args)
    except TypeError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    raise argparse.ArgumentTypeError(f"unknown source {name!r}")


def _parse_times(text: str):
    return tuple(float(v) for v in text.split(","))


def _add_spec_args(p, need_beta=True):
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=need_beta,
                   default=None if need_beta else 2.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--lambda", dest="lam", type=_parse_complex,
                   default=complex(1.0), help="coefficient, re or re,im")
    p.add_argument("--mu", type=_parse_complex, default=complex(0.0))
    p.add_argument("--schrodinger", nargs=2, type=float, default=None,
                   metavar=("M", "HBAR"),
                   help="set lambda = i hbar / (2 m)")
    p.add_argument("--source-mode", choices=("riesz_feller", "identity"),
                   default="riesz_feller")
    p.add_argument("--source-coupling", choices=("external", "self"),
                   default="external")
    p.add_argument("--regime", choices=("auto", "low", "high"),
                   default="auto")


def _spec_from_args(args) -> ProblemSpec:
    lam = args.lam
    if args.schrodinger is not None:
        m, hbar = args.schrodinger
        lam = complex(0.0, hbar / (2.0 * m))
    return ProblemSpec(alpha=args.alpha, beta=args.beta, gamma=args.gamma,
                       theta=args.theta, phi=args.phi, lam=lam, mu=args.mu,
                       source_mode=args.source_mode,
                       source_coupling=args.source_coupling,
                       regime=args.regime)


def _add_grid_args(p):
    p.add_argument("--x-range", nargs=2, type=float, required=True,
                   metavar=("LO", "HI"))
    p.add_argument("--nx", type=int, required=True)
    p.add_argument("--t", type=_parse_times, required=True,
                   help="output times, comma separated")


def _spec_echo(spec: ProblemSpec) -> dict:
    return {
        "alpha": spec.alpha, "beta": spec.beta, "gamma": spec.gamma,
        "theta": spec.theta, "phi": spec.phi,
        "lambda": [spec.lam.real, spec.lam.imag],
        "mu": [spec.mu.real, spec.mu.imag],
        "source_mode": spec.source_mode,
        "source_coupling": spec.source_coupling,
        "regime": spec.regime,
    }


def _write_lines(path, lines):
    data = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(data)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)


def _write_manifest(path, command, spec, grid, checks, extra=None):
    doc = {
        "command": command,
        "version": __version__,
        "spec": _spec_echo(spec),
        "grid": {"x_min": grid.x_min, "x_max": grid.x_max, "nx": grid.nx,
                 "times": list(grid.times), "dt_oracle": grid.dt_oracle},
        "quadrature": {"k_max": QuadratureConfig().k_max,
                       "nodes_per_unit": QuadratureConfig().nodes_per_unit,
                       "abs_tol": QuadratureConfig().abs_tol,
                       "rel_tol": QuadratureConfig().rel_tol},
        "checks": checks,
    }
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _field_lines(grid, values):
    lines = ["t,x,re,im"]
    x = grid.x
    for it, t in enumerate(grid.times):
        for j in range(grid.nx):
            v = values[it, j]
            lines.append(",".join(
                (_fmt(t), _fmt(x[j]), _fmt(v.real), _fmt(v.imag))))
    return lines


def _read_field_csv(path):
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header[:4] != ["t", "x", "re", "im"]:
            raise ValueError(f"{path}: not a field CSV")
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(v) for v in line.split(",")[:4]])
    if not rows:
        raise ValueError(f"{path}: empty field CSV")
    return np.asarray(rows)


def _n_workers() -> int:
    raw = os.environ.get("FRACGREEN_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def _cmd_ml(args):
    v = mittag_leffler(args.alpha, args.beta, args.z)
    print(_fmt(v.real) + "," + _fmt(v.imag))
    return EXIT_OK


def _cmd_symbol(args):
    p = SymbolParams(order=args.order, skew=args.skew)
    ks = np.linspace(args.k_range[0], args.k_range[1], args.nk)
    vals = riesz_feller_symbol(p, ks)
    lines = ["k,re,im"]
    for k, v in zip(ks, np.atleast_1d(vals)):
        lines.append(",".join((_fmt(k), _fmt(v.real), _fmt(v.imag))))
    _write_lines(args.output, lines)
    return EXIT_OK


def _cmd_green(args):
    spec = _spec_from_args(args)
    probs = spec.violations()
    if probs:
        raise SpecValidationError(probs)
    kind = GreenKind[args.kind]
    xs = np.linspace(args.x_range[0], args.x_range[1], args.nx)
    cfg = QuadratureConfig()
    lines = ["t,x,re,im,method"]

    def eval_time(t):
        if args.method in ("auto", "closed"):
            try:
                vals = [green_point_closed(kind, x, t, spec) for x in xs]
                return t, vals, "closed"
            except (FourierOnlyError, RegimeError, ValueError,
                    HAccuracyError):
                if args.method == "closed":
                    raise
        vals = green_points(kind, xs, t, spec, cfg)
        return t, list(vals), "quadrature"

    times = list(args.t)
    if len(times) > 1 and _n_workers() > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(
                max_workers=min(_n_workers(), len(times))) as ex:
            results = list(ex.map(eval_time, times))
    else:
        results = [eval_time(t) for t in times]
    for t, vals, method in results:
        for x, v in zip(xs, vals):
            v = complex(v)
            lines.append(",".join(
                (_fmt(t), _fmt(x), _fmt(v.real), _fmt(v.imag), method)))
    _write_lines(args.output, lines)
    return EXIT_OK


def _cmd_solve(args):
    spec = _spec_from_args(args)
    grid = SpaceTimeGrid(args.x_range[0], args.x_range[1], args.nx, args.t)
    field = solve(spec, args.f, args.g, args.U, grid,
                  fundamental=args.fundamental)
    peak = float(np.max(np.abs(field.values)))
    _write_lines(args.output, _field_lines(grid, field.values))
    if args.manifest:
        checks = [["finite_values", bool(np.isfinite(peak)), peak]]
        _write_manifest(args.manifest, ["solve"] + args.raw_argv,
                        spec, grid, checks)
    if not np.isfinite(peak):
        print("solve produced non-finite values", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def _cmd_oracle(args):
    spec = _spec_from_args(args)
    grid = SpaceTimeGrid(args.x_range[0], args.x_range[1], args.nx, args.t,
                         dt_oracle=args.dt)
    n = int(round(grid.times[-1] / args.dt))
    field = oracle_solve(spec, args.f, grid, OracleConfig(args.dt, n))
    _write_lines(args.output, _field_lines(grid, field.values))
    return EXIT_OK


def _cmd_compare(args):
    a = _read_field_csv(args.field_a)
    b = _read_field_csv(args.field_b)
    if a.shape != b.shape or not np.allclose(a[:, :2], b[:, :2]):
        raise SpecValidationError(
            ["field CSVs disagree on the (t, x) sample points"])
    va = a[:, 2] + 1j * a[:, 3]
    vb = b[:, 2] + 1j * b[:, 3]
    num = float(np.linalg.norm(va - vb))
    den = float(np.linalg.norm(va))
    rel = 0.0 if num == 0.0 else num / max(den, 1e-300)
    doc = {"relative_l2": rel, "absolute_l2": num, "reference_l2": den,
           "max_abs": float(np.max(np.abs(va - vb)))}
    out = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    if args.tol is not None and rel > args.tol:
        print(f"relative_l2 {rel:.3e} exceeds tolerance {args.tol:.3e}",
              file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def _cmd_validate(args):
    spec = _spec_from_args(args)
    probs = spec.violations()
    if probs:
        for p in probs:
            print(p, file=sys.stderr)
        return EXIT_CONSTRAINT
    print("ok")
    return EXIT_OK


def _build_parser():
    top = argparse.ArgumentParser(
        prog="fracgreen",
        description="Green functions and solutions of space-time "
                    "fractional diffusion-wave equations")
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ml", help="evaluate a Mittag-Leffler value")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--z", type=_parse_complex, required=True)
    p.set_defaults(func=_cmd_ml)

    p = sub.add_parser("symbol", help="tabulate the space-operator symbol")
    p.add_argument("--order", type=float, required=True)
    p.add_argument("--skew", type=float, default=0.0)
    p.add_argument("--k-range", nargs=2, type=float, required=True)
    p.add_argument("--nk", type=int, default=101)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_symbol)

    p = sub.add_parser("green", help="tabulate a Green kernel on an x-grid")
    p.add_argument("--kind", choices=[k.name for k in GreenKind],
                   default="G")
    _add_spec_args(p)
    _add_grid_args(p)
    p.add_argument("--method", choices=("auto", "closed", "quadrature"),
                   default="auto")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_green)

    p = sub.add_parser("solve", help="solve from initial data and a source")
    _add_spec_args(p)
    _add_grid_args(p)
    p.add_argument("--f", type=_parse_source,
                   default=SourceDescriptor.zero())
    p.add_argument("--g", type=_parse_source,
                   default=SourceDescriptor.zero())
    p.add_argument("--U", type=_parse_source,
                   default=SourceDescriptor.zero())
    p.add_argument("--fundamental", action="store_true",
                   help="use a unit impulse as f")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--manifest", default=None,
                   help="write a JSON run manifest to this path")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("oracle", help="reference solve by GL time stepping")
    _add_spec_args(p)
    _add_grid_args(p)
    p.add_argument("--f", type=_parse_source,
                   default=SourceDescriptor.delta())
    p.add_argument("--dt", type=float, default=1.0 / 1024.0)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("compare", help="residual norms between two fields")
    p.add_argument("field_a")
    p.add_argument("field_b")
    p.add_argument("--tol", type=float, default=None,
                   help="exit 3 when relative_l2 exceeds this")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("validate", help="check parameter constraints")
    _add_spec_args(p)
    p.set_defaults(func=_cmd_validate)

    return top


def _splice_config(argv):
    """Insert key=value pairs from --config FILE before user flags.

    Flags given on the command line come later and therefore win under
    argparse's last-occurrence rule.
    """
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise SystemExit(2)
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2:]
    tokens = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            tokens.append("--" + key.strip())
            if value.strip():
                tokens.append(value.strip())
    if not rest:
        return tokens
    return rest[:1] + tokens + rest[1:]


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _splice_config(argv)
        parser = _build_parser()
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 1
        return EXIT_OK if code == 0 else EXIT_USAGE
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    args.raw_argv = argv
    try:
        return args.func(args)
    except (SpecValidationError, RegimeError, ValueError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONSTRAINT
    except (ToleranceNotMetError, HAccuracyError, FourierOnlyError,
            OracleInstabilityError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_TOLERANCE
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE


def main():
    raise SystemExit(run())
