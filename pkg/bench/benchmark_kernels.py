"""Benchmark the shortest-path kernel backends on annulus mesh graphs.

Run: python3 bench/benchmark_kernels.py
"""

import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from imcflab import SphereGrid, TimeGrid, build_delta  # noqa: E402
from imcflab import _kernels  # noqa: E402
from imcflab._kernels import pure  # noqa: E402
from imcflab.graphmesh import GraphOracle, MeshParams  # noqa: E402


def bench(fn, indptr, indices, weights, sources, repeat=1):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for s in sources:
            fn(indptr, indices, weights, s)
        best = min(best, time.perf_counter() - t0)
    return best / len(sources)


def main():
    print(f"selected backend at import: {_kernels.BACKEND}")
    field = build_delta(1.0, SphereGrid(8, 16), TimeGrid(1.0, 9))
    rng = np.random.default_rng(0)
    rows = []
    for level, n_src_pure in ((1, 4), (2, 1)):
        params = MeshParams.at_refinement(level)
        oracle = GraphOracle(field, params=params,
                             points=[(0.5, 1.0, 1.0), (0.7, 2.0, 4.0)])
        indptr, indices, w = oracle._indptr, oracle._indices, oracle._weights
        n = oracle.n_nodes
        sources = rng.integers(0, n, size=8)
        t_fast = bench(_kernels.dijkstra, indptr, indices, w, sources)
        t_pure = bench(pure.dijkstra, indptr, indices, w, sources[:n_src_pure])
        rows.append((level, n, len(indices), t_fast, t_pure))
    print(f"{'level':>5} {'nodes':>9} {'edges':>10} "
          f"{'compiled (s/run)':>17} {'pure (s/run)':>13} {'speedup':>8}")
    for level, n, m, tf, tp in rows:
        print(f"{level:>5} {n:>9} {m:>10} {tf:>17.4f} {tp:>13.4f} {tp / tf:>8.1f}")

    if _kernels.BACKEND != "compiled":
        print("note: compiled extension not built; both columns ran the "
              "pure kernel (python3 setup.py build_ext --inplace to build)")


if __name__ == "__main__":
    main()
