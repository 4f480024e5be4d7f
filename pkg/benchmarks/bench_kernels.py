"""Time the compiled orbit kernel against the pure-Python fallback.

Example::

    python benchmarks/bench_kernels.py --repeat 3
"""
import argparse
import json
import time
from importlib import resources

from qgraph.graph import graph_from_dict
from qgraph.kernels import closed_walks_ext, closed_walks_py
from qgraph.orbits import BondGraph

CASES = [("triangle", 12.0), ("k4", 8.0), ("k4", 11.0), ("petersen", 9.0), ("petersen", 12.0)]


def load(name):
    path = resources.files("qgraph") / "data" / "graphs" / f"{name}.json"
    return graph_from_dict(json.loads(path.read_text()))


def best_of(kernel, bg, lmax, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = kernel(bg.succ_ptr, bg.succ_idx, bg.factors, bg.lengths, lmax, False, 10**8)
        times.append(time.perf_counter() - t0)
    return min(times), out[2].size


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3, help="runs per case; the best is reported")
    args = parser.parse_args(argv)
    if closed_walks_ext is None:
        parser.exit(1, "compiled kernel not available (built without the extension or QGRAPH_PURE_PYTHON set)\n")

    print(f"{'graph':<10}{'lmax':>6}{'orbits':>10}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    for name, lmax in CASES:
        bg = BondGraph(load(name))
        py, n_py = best_of(closed_walks_py, bg, lmax, args.repeat)
        cy, n_cy = best_of(closed_walks_ext, bg, lmax, args.repeat)
        assert n_py == n_cy, "backends disagree"
        print(f"{name:<10}{lmax:>6g}{n_cy:>10}{py:>12.4f}{cy:>12.4f}{py / cy:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
