"""Command-line entry point: density, moments, support, sample, verify."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import analytic, murs, oracle
from .moments import moment_sequence
from .product import ProductSpec
from .sampler import DEFAULT_SEED, EnsembleConfig, ks_distance, sample_spectrum

MAX_N = 1024
MAX_KMAX = 30


class UsageError(Exception):
    pass


def _table_csv(config: dict, header, rows) -> str:
    buf = io.StringIO()
    for k, v in config.items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _table_json(command: str, config: dict, header, rows, extra=None) -> str:
    doc = {"schema": 1, "command": command, "config": config, "columns": list(header),
           "rows": [list(r) for r in rows]}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2)


def read_csv_table(text: str):
    """Parse a CSV emitted by this tool: (config, header, rows of floats)."""
    config, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition("=")
            config[k] = v
        else:
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    rows = [[float(v) for v in row] for row in reader]
    return config, header, rows


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, newline="\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _spec(args) -> ProductSpec:
    try:
        return ProductSpec(args.r, args.s)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _svg_path(args, default: str) -> str:
    return args.out or default


def cmd_density(args) -> int:
    spec = _spec(args)
    try:
        method = analytic.resolve_method(spec, args.method)
    except analytic.MethodError as exc:
        raise UsageError(str(exc)) from exc
    x_star = analytic.support_edge(spec, method)
    xs = analytic.density_grid(x_star, args.points)
    if method == "contour" and args.tol:
        rho = np.array([murs.density_murs(spec, float(x), rel_tol=args.tol) for x in xs])
    else:
        rho = analytic.density(spec, xs, method)
    config = {**spec.as_dict(), "method": method, "points": args.points, "x_star": x_star,
              "left_exponent": analytic.left_exponent(spec)}
    title = f"mu_({spec.r},{spec.s}) density, {method}"
    if args.format == "svg":
        from .plotting import plot_density
        path = _svg_path(args, f"density_r{spec.r}_s{spec.s}.svg")
        plot_density(xs, rho, x_star, path, title)
        print(path)
        return 0
    rows = [(float(x), float(v)) for x, v in zip(xs, rho)]
    if args.format == "csv":
        _emit(_table_csv(config, ["x", "density"], rows), args.out)
    else:
        _emit(_table_json("density", config, ["x", "density"], rows), args.out)
    if args.figure:
        from .plotting import plot_density
        plot_density(xs, rho, x_star, args.figure, title)
    return 0


def cmd_moments(args) -> int:
    spec = _spec(args)
    if not 0 <= args.kmax <= MAX_KMAX:
        raise UsageError(f"--kmax must be in [0, {MAX_KMAX}]")
    formula = moment_sequence(spec, args.kmax)
    header = ["k", "moment"]
    rows = [[k, float(m)] for k, m in enumerate(formula)]
    status = 0
    config = {**spec.as_dict(), "kmax": args.kmax}
    if args.verify:
        tol = args.tol or 1e-5
        numeric = analytic.integrate_moments(spec, args.kmax)
        header += ["quadrature", "rel_diff"]
        for row, q in zip(rows, numeric):
            row += [float(q), float(abs(q / row[1] - 1.0))]
        worst = max(row[3] for row in rows)
        config.update({"verify_tol": tol, "verify_passed": worst <= tol})
        status = 0 if worst <= tol else 1
    if args.format == "svg":
        raise UsageError("moments has no figure output; use csv or json")
    if args.format == "csv":
        _emit(_table_csv(config, header, rows), args.out)
    else:
        _emit(_table_json("moments", config, header, rows), args.out)
    return status


def cmd_support(args) -> int:
    spec = _spec(args)
    rows = []
    method = analytic.resolve_method(spec)
    rows.append(["analytic", float(analytic.support_edge(spec)), method])
    edge = oracle.edge_search(spec)
    rows.append(["branch_search", float(edge.x_star), f"w*={edge.w_star:.17g}"])
    if spec.r >= spec.s + 2:
        closed = murs.support_edge_closed(spec)
        rows.append(["closed_w_star", float(closed.w_star), "w* formula"])
    config = spec.as_dict()
    if args.format == "svg":
        raise UsageError("support has no figure output; use csv or json")
    if args.format == "csv":
        _emit(_table_csv(config, ["source", "value", "note"], rows), args.out)
    else:
        _emit(_table_json("support", config, ["source", "value", "note"], rows), args.out)
    return 0


def cmd_sample(args) -> int:
    spec = _spec(args)
    if args.n > MAX_N:
        raise UsageError(f"--n {args.n} exceeds the desk-scale guard of {MAX_N}; "
                         "use a smaller n and more --trials")
    cfg = EnsembleConfig(spec, args.n, args.trials, args.seed)
    emp = sample_spectrum(cfg)
    cdf = analytic.model_cdf(spec)
    ks = ks_distance(emp, cdf)
    threshold = args.tol or 0.03
    verdict = {"ks_distance": ks, "ks_threshold": threshold, "ks_passed": ks < threshold,
               "method": analytic.resolve_method(spec)}
    if args.format == "svg":
        from .plotting import plot_spectrum
        path = _svg_path(args, f"sample_r{spec.r}_s{spec.s}.svg")
        plot_spectrum(emp.values, cdf.x_star, path, lambda x: analytic.density(spec, x))
        print(path)
    elif args.format == "csv":
        _emit(emp.to_csv(verdict), args.out)
    else:
        doc = json.loads(emp.to_json())
        doc.update(verdict)
        _emit(json.dumps(doc), args.out)
    if args.figure and args.format != "svg":
        from .plotting import plot_spectrum
        plot_spectrum(emp.values, cdf.x_star, args.figure, lambda x: analytic.density(spec, x))
    print(f"KS distance {ks:.6g} (threshold {threshold:g}): {'pass' if ks < threshold else 'FAIL'}",
          file=sys.stderr)
    return 0 if ks < threshold else 1


def cmd_verify(args) -> int:
    from .verify import run_verify
    spec = _spec(args)
    if spec.r > 9:
        raise UsageError("verify supports r <= 9")
    rep = run_verify(spec, points=args.points)
    if args.figure:
        from .plotting import plot_density
        x_star = analytic.support_edge(spec)
        xs = analytic.density_grid(x_star, 200)
        plot_density(xs, analytic.density(spec, xs), x_star, args.figure,
                     f"mu_({spec.r},{spec.s}) density")
        rep.outputs["figure"] = args.figure
    if args.format == "json":
        _emit(rep.to_json(), args.out)
    elif args.format == "csv":
        _emit(rep.to_csv(), args.out)
    else:
        raise UsageError("verify writes csv or json; add --figure for a plot")
    for v in rep.verdicts:
        print(f"{'pass' if v.passed else 'FAIL'}  {v.name}: {v.measured:.3g} (tol {v.tolerance:g})",
              file=sys.stderr)
    return 0 if rep.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prodspectra",
        description="Limit spectra of products of Ginibre and truncated unitary matrices.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, points=200):
        p.add_argument("--r", type=int, required=True, help="number of factors")
        p.add_argument("--s", type=int, default=0, help="number of truncated unitary factors")
        p.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
        p.add_argument("--out", help="output file (default: stdout, or a generated .svg name)")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--points", type=int, default=points)
        p.add_argument("--tol", type=float, default=None,
                       help="density: quadrature rel. tolerance; moments: --verify tolerance; "
                            "sample: KS threshold")
        p.add_argument("--figure", help="also render an SVG figure to this path")
        return p

    p = common(sub.add_parser("density", help="density table on an edge-refined grid"))
    p.add_argument("--method", choices=analytic.METHODS, default="auto")
    p.set_defaults(func=cmd_density)

    p = common(sub.add_parser("moments", help="moment table from the Jacobi formula"))
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--verify", action="store_true", help="add a quadrature column")
    p.set_defaults(func=cmd_moments)

    p = common(sub.add_parser("support", help="right edge of the support"))
    p.set_defaults(func=cmd_support)

    p = common(sub.add_parser("sample", help="Monte Carlo spectrum with a KS verdict"))
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=cmd_sample)

    p = common(sub.add_parser("verify", help="cross-check all density routes"), points=50)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    return 2
