"""Command-line entry point: ``qgraph <command> --graph <file|name> ...``.

Exit status is 0 on success, 1 when a check fails and 2 on bad input.
Numbers are printed with 12 significant digits so output is byte-stable.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .discrete import DiscreteLaplacian, discrete_spectrum, equilateral_compare
from .ends import classify, load_ended_graph
from .graph import GraphError, MetricGraph, load_graph
from .orbits import OrbitBudgetExceeded, enumerate_orbits
from .spectrum import SpectrumError, eigenvalues, sigma_scan, weyl_fit, weyl_samples
from .trace import (GaussianTest, TailBoundError, poisson_demo, recover_orbit_lengths,
                    spectral_measure, trace_check)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

BUNDLED = ("circle3", "interval", "star3", "triangle", "k4", "petersen",
           "z_ray2", "ray_geometric", "ray_harmonic", "tree3")


class InputError(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.12g}"
    return str(x)


def plain(obj):
    """Recursively convert to JSON-ready Python types, floats cut to 12 digits."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "infinite" if x > 0 else str(x)
        return float(f"{x:.12g}") + 0.0
    return obj


def resolve_graph_path(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    bundled = resources.files("qgraph") / "data" / "graphs" / f"{stem}.json"
    if bundled.is_file():
        return Path(str(bundled))
    raise InputError(f"--graph: no such file or bundled graph {name!r} (bundled: {', '.join(BUNDLED)})")


def read_graph(name: str) -> MetricGraph:
    return load_graph(resolve_graph_path(name))


def write_csv(out, header: list[str], rows) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])


def write_json(out, obj) -> None:
    json.dump(plain(obj), out, indent=2, sort_keys=True)
    out.write("\n")


def _positive(name):
    def parse(text):
        try:
            x = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}") from None
        if not (math.isfinite(x) and x > 0):
            raise argparse.ArgumentTypeError(f"{name} must be positive, got {text!r}")
        return x
    return parse


def _finite(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return x


def _warn(flags):
    for f in flags:
        print(f"warning: {f}", file=sys.stderr)


# ------------------------------------------------------------------ commands

def cmd_spectrum(args, out) -> int:
    g = read_graph(args.graph)
    ev = eigenvalues(g, args.kmax, tol=args.tol)
    _warn(ev.flags)
    if args.scan:
        ks, sig = sigma_scan(g, args.kmax)
        with open(args.scan, "w") as fh:
            write_csv(fh, ["k", "sigma_min"], zip(ks, sig))
    if args.out == "json":
        write_json(out, {
            "kmax": args.kmax,
            "eigenvalues": [{"lambda": v.lam, "sqrt_lambda": v.sqrt, "multiplicity": v.multiplicity}
                            for v in ev.values],
            "flags": ev.flags,
        })
    else:
        write_csv(out, ["lambda", "sqrt_lambda", "multiplicity"],
                  ((v.lam, v.sqrt, v.multiplicity) for v in ev.values))
    return EXIT_OK


def cmd_weyl(args, out) -> int:
    g = read_graph(args.graph)
    ev = eigenvalues(g, args.kmax, tol=args.tol)
    _warn(ev.flags)
    ts, counts, weyl = weyl_samples(ev, g, args.samples)
    if args.out == "json":
        doc = {"volume": g.volume, "kmax": args.kmax, "flags": ev.flags,
               "samples": [{"lambda": t * t, "N": n, "vol_over_pi_lambda": w}
                           for t, n, w in zip(ts, counts, weyl)]}
        if ev.total >= 50:
            slope, rel = weyl_fit(ev, g)
            doc["fit"] = {"slope": slope, "target": g.volume / math.pi, "rel_error": rel}
        write_json(out, doc)
    else:
        write_csv(out, ["lambda", "N", "vol_over_pi_lambda"], zip(ts * ts, counts, weyl))
    return EXIT_OK


def cmd_orbits(args, out) -> int:
    g = read_graph(args.graph)
    orbits = enumerate_orbits(g, args.lmax, skip_zero=args.skip_zero, budget=args.budget)
    rows = [(p.canonical_id, p.length, p.primitive_length, p.repetition, p.scattering) for p in orbits]
    header = ["canonical_id", "length", "primitive_length", "repetition", "scattering"]
    if args.out == "json":
        write_json(out, {"lmax": args.lmax, "orbits": [dict(zip(header, r)) for r in rows]})
    else:
        write_csv(out, header, rows)
    return EXIT_OK


def cmd_trace_check(args, out) -> int:
    g = read_graph(args.graph)
    f = GaussianTest(args.sigma, args.center)
    report = trace_check(g, f, args.kmax, args.lmax, args.tol)
    doc = report.to_dict()
    doc.update(sigma=args.sigma, center=args.center)
    write_json(out, doc)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_poisson(args, out) -> int:
    f = GaussianTest(args.sigma, args.center)
    doc = poisson_demo(args.n, f, args.kmax, args.lmax, args.tol)
    write_json(out, doc)
    return EXIT_OK if doc["pass"] else EXIT_FAIL


def cmd_equilateral(args, out) -> int:
    g = read_graph(args.graph)
    report = equilateral_compare(g, args.kmax, args.tol)
    write_json(out, report.to_dict())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_discrete_spectrum(args, out) -> int:
    g = read_graph(args.graph)
    L = DiscreteLaplacian.normalized(g) if args.mode == "normalized" else DiscreteLaplacian.metric(g)
    spec = discrete_spectrum(L)
    if args.out == "json":
        write_json(out, {"mode": args.mode,
                         "eigenvalues": [{"eigenvalue": m, "multiplicity": k} for m, k in spec]})
    else:
        write_csv(out, ["eigenvalue", "multiplicity"], spec)
    return EXIT_OK


def cmd_classify(args, out) -> int:
    d = load_ended_graph(resolve_graph_path(args.graph))
    write_json(out, classify(d).to_dict())
    return EXIT_OK


def cmd_recover_lengths(args, out) -> int:
    g = read_graph(args.graph)
    ev = eigenvalues(g, args.kmax, tol=args.tol)
    _warn(ev.flags)
    try:
        scan = recover_orbit_lengths(spectral_measure(ev, g), window=args.window, t_max=args.tmax)
    except ValueError as exc:
        raise InputError(f"--window: {exc}") from None
    if args.out == "json":
        write_json(out, {"window": scan.window, "noise_floor": scan.noise_floor,
                         "peaks": [{"t": t, "F": h} for t, h in zip(scan.peaks, scan.heights)],
                         "samples": [{"t": t, "F": v} for t, v in zip(scan.t, scan.values)]})
    else:
        rows = [("sample", t, v) for t, v in zip(scan.t, scan.values)]
        rows += [("peak", t, h) for t, h in zip(scan.peaks, scan.heights)]
        write_csv(out, ["kind", "t", "F"], rows)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qgraph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, graph=True, fmt_choice=True):
        p = sub.add_parser(name, help=help_)
        if graph:
            p.add_argument("--graph", required=True, help="graph JSON file or bundled graph name")
        if fmt_choice:
            p.add_argument("--out", choices=("csv", "json"), default="csv", help="output format")
        p.add_argument("-o", "--output", help="write to this file instead of standard output")
        p.set_defaults(func=func)
        return p

    p = add("spectrum", cmd_spectrum, "eigenvalues up to kmax")
    p.add_argument("--kmax", type=_positive("--kmax"), required=True)
    p.add_argument("--tol", type=_positive("--tol"), default=1e-8)
    p.add_argument("--scan", help="also write the sigma_min(k) scan as CSV to this file")

    p = add("weyl", cmd_weyl, "counting function against the Weyl term")
    p.add_argument("--kmax", type=_positive("--kmax"), required=True)
    p.add_argument("--tol", type=_positive("--tol"), default=1e-8)
    p.add_argument("--samples", type=int, default=512)

    p = add("orbits", cmd_orbits, "periodic orbits up to lmax")
    p.add_argument("--lmax", type=_positive("--lmax"), required=True)
    p.add_argument("--skip-zero", action="store_true", help="drop orbits with zero scattering factor")
    p.add_argument("--budget", type=int, default=10_000_000)

    p = add("trace-check", cmd_trace_check, "compare both sides of the trace formula", fmt_choice=False)
    p.add_argument("--sigma", type=_positive("--sigma"), required=True)
    p.add_argument("--center", type=_finite, default=0.0)
    p.add_argument("--kmax", type=_positive("--kmax"), default=60.0)
    p.add_argument("--lmax", type=_positive("--lmax"), default=10.0)
    p.add_argument("--tol", type=_positive("--tol"), default=1e-6)

    p = add("poisson", cmd_poisson, "trace check on a cycle plus Poisson summation", graph=False, fmt_choice=False)
    p.add_argument("--n", type=int, default=3, help="number of cycle vertices")
    p.add_argument("--sigma", type=_positive("--sigma"), default=0.2)
    p.add_argument("--center", type=_finite, default=0.0)
    p.add_argument("--kmax", type=_positive("--kmax"), default=40.0)
    p.add_argument("--lmax", type=_positive("--lmax"), default=8.0)
    p.add_argument("--tol", type=_positive("--tol"), default=1e-6)

    p = add("equilateral", cmd_equilateral, "metric vs normalized discrete spectrum", fmt_choice=False)
    p.add_argument("--kmax", type=_positive("--kmax"), default=20.0)
    p.add_argument("--tol", type=_positive("--tol"), default=1e-8)

    p = add("discrete-spectrum", cmd_discrete_spectrum, "spectrum of a discrete Laplacian")
    p.add_argument("--mode", choices=("normalized", "metric-weighted"), default="normalized")

    add("classify", cmd_classify, "ends, Markovian uniqueness and self-adjointness", fmt_choice=False)

    p = add("recover-lengths", cmd_recover_lengths, "orbit lengths from spectral peaks")
    p.add_argument("--kmax", type=_positive("--kmax"), default=60.0)
    p.add_argument("--tol", type=_positive("--tol"), default=1e-8)
    p.add_argument("--window", type=_positive("--window"), default=None)
    p.add_argument("--tmax", type=_positive("--tmax"), default=5.0)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    buf = io.StringIO()
    try:
        status = args.func(args, buf)
    except (GraphError, InputError, SpectrumError, OrbitBudgetExceeded, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TailBoundError as exc:
        print(f"FAIL: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = buf.getvalue()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
