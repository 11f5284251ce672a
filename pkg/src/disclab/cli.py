"""Command-line front end: ``disclab {generate,discrepancy,decay,certify,scaling,calibrate}``.

Exit codes: 0 success, 2 I/O or malformed input, 3 parameter validation,
4 infeasible cover.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, certificate, constants, fourier, report
from .discrepancy import (MODES, RotationSet, SearchBudget, avg_l2_disc, extremal_disc_search,
                          l2_disc_fourier)
from .pointsets import GENERATORS, PointSetFormatError, format_points, generate, read_points
from .svgplot import loglog_svg

EXIT_IO, EXIT_VALIDATION, EXIT_INFEASIBLE = 2, 3, 4
DETERMINISTIC = ("grid", "halton", "fibonacci")
ROUNDOFF = 1e-12


class ValidationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ helpers

def _check(cond, msg):
    if not cond:
        raise ValidationError(msg)


def _check_theta(theta, closed=True):
    hi = math.pi / 4
    ok = 0 < theta <= hi + 1e-15 if closed else 0 < theta < hi
    _check(ok, f"--theta must lie in (0, pi/4{']' if closed else ')'}, got {theta}")


def _point_set(args):
    if args.points:
        return read_points(args.points)
    _check(args.generator is not None, "give --points PATH or --generator NAME")
    _check(args.n is not None and args.n >= 1, "--n must be a positive integer")
    return generate(args.generator, args.n, args.seed)


def _params(args) -> dict:
    skip = {"func", "out", "workers", "timing"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, text: str):
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {args.out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _svg_with_meta(svg: str, meta: dict) -> str:
    comment = report.dumps(meta, indent=0).replace("\n", "").replace("--", "- -")
    return svg.replace("\n", f"\n<!-- {comment} -->\n", 1)


def _map(func, tasks, workers):
    workers = max(1, workers or 1)
    if workers == 1 or len(tasks) < 2:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(func, tasks))


def _flatten(d: dict, prefix="") -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out.update(_flatten(v, f"{prefix}{k}."))
        else:
            out[f"{prefix}{k}"] = v
    return out


def _single_row(args, meta, result: dict) -> str:
    flat = _flatten(result)
    return report.csv_document(meta, list(flat), [flat])


# ------------------------------------------------------------------ commands

def cmd_generate(args):
    _check(args.n >= 1, "--n must be >= 1")
    ps = generate(args.generator, args.n, args.seed)
    meta = report.metadata("generate", _params(args))
    header = {"tool": f"disclab {meta['tool_version']}", "n": len(ps), **ps.meta}
    _emit(args, format_points(ps, header))
    return 0


def cmd_discrepancy(args):
    _check_theta(args.theta)
    _check(args.format in ("json", "csv"), "discrepancy supports --format json or csv")
    _check(args.trunc >= 1, "--trunc must be >= 1")
    _check(0 < args.r <= 0.5, "--r must lie in (0, 1/2]")
    _check(not args.no_search or args.l2, "nothing to do: --no-search without --l2")
    budget = SearchBudget(args.budget_angles, args.budget_grid, args.budget_rounds)
    P = _point_set(args)
    result = {"label": P.label, "n": len(P), "theta": args.theta}
    if not args.no_search:
        result.update(extremal_disc_search(P, RotationSet(args.theta), args.mode, budget).to_json())
    if args.l2:
        result["l2"] = {"r": args.r, "nu": args.nu, "trunc": args.trunc,
                        "value": l2_disc_fourier(P, args.r, args.nu, args.trunc)}
    meta = report.metadata("discrepancy", _params(args))
    _emit(args, report.json_document(meta, result) if args.format == "json"
          else _single_row(args, meta, result))
    return 0


def _decay_direction(task):
    R, theta, arg, mags = task
    x1, x2 = mags * math.cos(arg), mags * math.sin(arg)
    phi = fourier.phi_avg_many(R, theta, x1, x2)
    return [(a, b, float(p)) for a, b, p in zip(x1.tolist(), x2.tolist(), phi.tolist())]


def decay_sweep(theta, R, directions=None, count=16, decades=3.0, workers=1):
    """Rows of (theta, R, xi1, xi2, arg, norm, phi, ratio_sector, ratio_global)."""
    if directions is None:
        directions = [-theta / 4, 0.0, theta / 4, math.pi / 4, math.pi / 2]
    lo = 4.0 / (theta * R)
    mags = np.geomspace(lo, lo * 10 ** decades, count)
    chunks = _map(_decay_direction, [(R, theta, a, mags) for a in directions], workers)
    rows = []
    for arg, chunk in zip(directions, chunks):
        for x1, x2, phi in chunk:
            norm = math.hypot(x1, x2)
            rows.append({"theta": theta, "R": R, "xi1": x1, "xi2": x2, "arg": arg, "norm": norm,
                         "phi": phi, "ratio_sector": phi * theta * norm ** 3 / R,
                         "ratio_global": phi * norm ** 4})
    return rows


DECAY_COLUMNS = ("theta", "R", "xi1", "xi2", "arg", "norm", "phi", "ratio_sector", "ratio_global")


def cmd_decay(args):
    _check_theta(args.theta)
    _check(0 < args.R <= 1, "--R must lie in (0, 1]")
    _check(args.magnitudes >= 2 and args.decades > 0, "need --magnitudes >= 2 and --decades > 0")
    dirs = None if args.directions is None else [float(a) for a in args.directions]
    rows = decay_sweep(args.theta, args.R, dirs, args.magnitudes, args.decades, args.workers)
    meta = report.metadata("decay", _params(args))
    if args.format == "csv":
        _emit(args, report.csv_document(meta, DECAY_COLUMNS, rows))
    elif args.format == "json":
        _emit(args, report.json_document(meta, rows))
    else:
        series = {}
        for r in rows:
            xs, ys = series.setdefault(f"arg={r['arg']:.4g}", ([], []))
            xs.append(r["norm"])
            ys.append(r["phi"])
        svg = loglog_svg(series, f"averaged decay, theta={args.theta:.4g}, R={args.R:.4g}",
                         "|xi|", "phi", ref_slopes=(-3, -4))
        _emit(args, _svg_with_meta(svg, meta))
    return 0


def cmd_certify(args):
    _check_theta(args.theta, closed=False)
    _check(args.kappa > 0 and args.K >= 0, "--kappa must be > 0 and --K >= 0")
    _check(args.format in ("json", "csv"), "certify supports --format json or csv")
    P = _point_set(args)
    cert = certificate.certified_lower_bound(P, args.theta, args.kappa, args.K, direct=args.direct)
    result = cert.to_json(timing=args.timing)
    if not args.paper_variant:
        result["rho_variant"] = None
    meta = report.metadata("certify", _params(args))
    _emit(args, report.json_document(meta, result) if args.format == "json"
          else _single_row(args, meta, result))
    return 0


def _scaling_cell(task):
    quantity, gen, n, seed, opts = task
    P = generate(gen, n, seed)
    if quantity == "certificate":
        value = certificate.certified_lower_bound(P, opts["theta"], opts["kappa"], opts["K"]).phi_sum
    elif quantity == "avg":
        value = avg_l2_disc(P, opts["theta"], opts["R"], opts["trunc"])
    else:
        budget = SearchBudget(opts["angles"], opts["grid"], opts["rounds"])
        value = extremal_disc_search(P, RotationSet(opts["theta"]), opts["mode"], budget).value
    return len(P), value


def _fit(pairs):
    try:
        return certificate.scaling_exponent(pairs)
    except ValueError:
        return None


def scaling_study(quantity, generators, ns, seed=0, seeds=1, workers=1, **opts):
    tasks, index = [], []
    for gen in generators:
        for n in ns:
            reps = [seed] if gen in DETERMINISTIC else [seed + s for s in range(seeds)]
            for s in reps:
                tasks.append((quantity, gen, n, s, opts))
                index.append((gen, n))
    out = _map(_scaling_cell, tasks, workers)
    cells = {}
    for key, (size, value) in zip(index, out):
        cells.setdefault(key, (size, []))[1].append(value)
    rows = [{"generator": g, "n_requested": n, "n": size, "seeds": len(vals),
             "value": math.fsum(vals) / len(vals)} for (g, n), (size, vals) in cells.items()]
    slopes = {}
    for gen in generators:
        pairs = [(r["n"], r["value"]) for r in rows if r["generator"] == gen]
        s = _fit(pairs)
        # values at round-off level (e.g. lattices whose dual misses the cover) give noise slopes
        resolved = all(v > ROUNDOFF * n for n, v in pairs)
        slopes[gen] = {"slope": s, "slope_sqrt": None if s is None else s / 2, "resolved": resolved}
    return rows, slopes


SCALING_COLUMNS = ("generator", "n_requested", "n", "seeds", "value")


def cmd_scaling(args):
    _check(len(set(args.n)) >= 3, "scaling needs at least 3 distinct --n values")
    _check(all(n >= 1 for n in args.n), "--n values must be >= 1")
    _check(args.seeds >= 1, "--seeds must be >= 1")
    if args.quantity == "certificate":
        _check_theta(args.theta, closed=False)
    else:
        _check_theta(args.theta)
    opts = {"theta": args.theta, "kappa": args.kappa, "K": args.K, "R": args.R, "trunc": args.trunc,
            "mode": args.mode, "angles": args.budget_angles, "grid": args.budget_grid,
            "rounds": args.budget_rounds}
    rows, slopes = scaling_study(args.quantity, args.generator, args.n, args.seed, args.seeds,
                                 args.workers, **opts)
    meta = report.metadata("scaling", _params(args))
    if args.format == "json":
        _emit(args, report.json_document(meta, {"rows": rows, "slopes": slopes}))
    elif args.format == "csv":
        text = report.csv_document(meta, SCALING_COLUMNS, rows)
        for gen, s in slopes.items():
            text += f"# slope {gen}: " + report.dumps(s, indent=0).replace("\n", "") + "\n"
        _emit(args, text)
    else:
        series = {g: ([r["n"] for r in rows if r["generator"] == g],
                      [r["value"] for r in rows if r["generator"] == g]) for g in args.generator}
        svg = loglog_svg(series, f"{args.quantity} vs n, theta={args.theta:.4g}", "n",
                         args.quantity, ref_slopes=(0.4,))
        _emit(args, _svg_with_meta(svg, meta))
    return 0


def cmd_calibrate(args):
    from .calibrate import calibrate
    data = calibrate(lambda msg: print(f"calibrating: {msg}", file=sys.stderr))
    _emit(args, report.dumps(data) + "\n")
    return 0


# ------------------------------------------------------------------ parser

def _add_source(p):
    p.add_argument("--points", metavar="PATH", help="point-set file ('x,y' per line)")
    p.add_argument("--generator", choices=GENERATORS)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, default=0)


def _add_budget(p):
    p.add_argument("--mode", choices=MODES, default="periodic")
    p.add_argument("--budget-angles", type=int, default=9)
    p.add_argument("--budget-grid", type=int, default=32)
    p.add_argument("--budget-rounds", type=int, default=3)


def _add_output(p, formats, default):
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    p.add_argument("--format", choices=formats, default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="disclab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"disclab {__version__} (constants {constants.get('version')})")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    workers = os.cpu_count() or 1

    p = sub.add_parser("generate", help="write a point-set file")
    p.add_argument("--generator", choices=GENERATORS, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("discrepancy", help="extremal search and/or L2 discrepancy")
    _add_source(p)
    p.add_argument("--theta", type=float, default=math.pi / 8)
    _add_budget(p)
    p.add_argument("--no-search", action="store_true", help="skip the extremal search")
    p.add_argument("--l2", action="store_true", help="also compute the Fourier L2 discrepancy")
    p.add_argument("--r", type=float, default=0.25, help="half side of the L2 squares")
    p.add_argument("--nu", type=float, default=0.0, help="rotation of the L2 squares")
    p.add_argument("--trunc", type=int, default=512)
    _add_output(p, ("json", "csv"), "json")
    p.set_defaults(func=cmd_discrepancy)

    p = sub.add_parser("decay", help="averaged Fourier decay sweep")
    p.add_argument("--theta", type=float, default=math.pi / 8)
    p.add_argument("--R", type=float, default=1 / 16)
    p.add_argument("--directions", nargs="+", metavar="ARG", help="frequency arguments (radians)")
    p.add_argument("--magnitudes", type=int, default=16)
    p.add_argument("--decades", type=float, default=3.0)
    p.add_argument("--workers", type=int, default=workers)
    _add_output(p, ("csv", "json", "svg"), "csv")
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("certify", help="certified lower bound for the averaged L2 discrepancy")
    _add_source(p)
    p.add_argument("--theta", type=float, default=math.pi / 8)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--K", type=float, default=0.0)
    p.add_argument("--direct", action="store_true", help="also compute the truncated direct value")
    p.add_argument("--paper-variant", action="store_true", help="report the rho-weighted count sum")
    p.add_argument("--timing", action="store_true", help="record wall time (breaks byte-identity)")
    _add_output(p, ("json", "csv"), "json")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("scaling", help="fit log-log slopes across n")
    p.add_argument("--generator", nargs="+", choices=GENERATORS, default=["random"])
    p.add_argument("--n", nargs="+", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=1, help="number of seeds averaged per cell")
    p.add_argument("--quantity", choices=("certificate", "avg", "extremal"), default="certificate")
    p.add_argument("--theta", type=float, default=math.pi / 8)
    p.add_argument("--R", type=float, default=1 / 16)
    p.add_argument("--trunc", type=int, default=64)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--K", type=float, default=0.0)
    _add_budget(p)
    p.add_argument("--workers", type=int, default=workers)
    _add_output(p, ("csv", "json", "svg"), "csv")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("calibrate", help="rerun the calibration sweeps and print constants JSON")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return args.func(args)
    except certificate.InfeasibleCoverError as exc:
        print(f"disclab: infeasible cover: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (PointSetFormatError, OSError) as exc:
        print(f"disclab: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, ValueError) as exc:
        print(f"disclab: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
