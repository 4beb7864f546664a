"""Compare the compiled and pure-Python path kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3]

Times ``greedy_path`` and ``tree_cost`` on contraction graphs taken from random
circuits, checks that both implementations return the same paths and costs,
and prints a speedup table.
"""

from __future__ import annotations

import argparse
import time

from tnsim import _kernels_py
from tnsim.circuit import PauliString, random_circuit
from tnsim.network import build_expectation_network
from tnsim.planner import _Encoded, fuse_small_tensors

try:
    from tnsim import _kernels as compiled
except ImportError:
    compiled = None


def graphs():
    for n, gates in ((8, 60), (12, 150), (16, 300), (20, 500)):
        c = random_circuit(n, gates, seed=n)
        net = fuse_small_tensors(build_expectation_network(c, PauliString.parse("Z0"), simplify=False))
        enc = _Encoded(net)
        yield f"n={n} gates={gates} nodes={len(net)}", enc.node_labels, enc.extents


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--restarts", type=int, default=8, help="perturbed greedy runs per graph")
    a = ap.parse_args(argv)
    if compiled is None:
        print("compiled kernels are not built; only the pure-Python timings are shown")
    impls = [("python", _kernels_py)] + ([("cython", compiled)] if compiled is not None else [])

    print(f"{'graph':<34}{'kernel':<8}{'greedy [s]':>12}{'cost [s]':>12}")
    for name, labels, ext in graphs():
        results = {}
        for kind, mod in impls:
            def greedy(mod=mod):
                return [mod.greedy_path(labels, ext, 0.5 if r else 0.0, r) for r in range(a.restarts)]

            tg, paths = best_time(greedy, a.repeat)
            tc, costs = best_time(lambda mod=mod: [mod.tree_cost(labels, ext, p) for p in paths], a.repeat)
            results[kind] = (tg, tc, paths, costs)
            print(f"{name:<34}{kind:<8}{tg:>12.4f}{tc:>12.4f}")
        if len(results) == 2:
            py, cy = results["python"], results["cython"]
            same = [list(map(tuple, p)) for p in py[2]] == [list(map(tuple, p)) for p in cy[2]] and py[3] == cy[3]
            print(f"{'':<34}{'speedup':<8}{py[0] / cy[0]:>11.1f}x{py[1] / cy[1]:>11.1f}x  identical={same}")


if __name__ == "__main__":
    main()
