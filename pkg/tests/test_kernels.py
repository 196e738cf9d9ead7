import heapq

import numpy as np
import pytest

from imcflab import _kernels
from imcflab._kernels import pure


def random_csr(n, avg_deg, rng):
    rows, cols, w = [], [], []
    for u in range(n):
        deg = rng.integers(1, 2 * avg_deg)
        vs = rng.integers(0, n, size=deg)
        for v in vs:
            if v != u:
                rows.append(u)
                cols.append(int(v))
                w.append(float(rng.uniform(0.1, 2.0)))
    order = np.argsort(rows, kind="stable")
    rows = np.array(rows)[order]
    cols = np.array(cols, dtype=np.int32)[order]
    w = np.array(w)[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    return np.cumsum(indptr), cols, w


def reference_dijkstra(indptr, indices, weights, source):
    n = len(indptr) - 1
    dist = np.full(n, np.inf)
    dist[source] = 0.0
    heap = [(0.0, source)]
    seen = np.zeros(n, dtype=bool)
    while heap:
        d, u = heapq.heappop(heap)
        if seen[u]:
            continue
        seen[u] = True
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            nd = d + weights[k]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, int(v)))
    return dist


@pytest.mark.parametrize("backend", [pure.dijkstra, _kernels.dijkstra])
def test_dijkstra_against_reference(backend):
    rng = np.random.default_rng(17)
    indptr, indices, w = random_csr(200, 5, rng)
    for source in (0, 57, 199):
        got = backend(indptr, indices, w, source)
        ref = reference_dijkstra(indptr, indices, w, source)
        assert np.allclose(got, ref, equal_nan=True)


def test_backends_agree_each_other():
    rng = np.random.default_rng(3)
    indptr, indices, w = random_csr(500, 6, rng)
    a = _kernels.dijkstra(indptr, indices, w, 12)
    b = pure.dijkstra(indptr, indices, w, 12)
    assert np.allclose(a, b, equal_nan=True)


def test_early_exit_target():
    rng = np.random.default_rng(5)
    indptr, indices, w = random_csr(300, 5, rng)
    full = _kernels.dijkstra(indptr, indices, w, 7)
    for target in (3, 100, 299):
        part = _kernels.dijkstra(indptr, indices, w, 7, target)
        assert part[target] == full[target]


def test_source_out_of_range():
    indptr = np.array([0, 1], dtype=np.int64)
    indices = np.array([0], dtype=np.int32)
    w = np.array([1.0])
    with pytest.raises(ValueError):
        _kernels.dijkstra(indptr, indices, w, 5)


def test_backend_reports_itself():
    assert _kernels.BACKEND in ("compiled", "pure")
