"""Pure-Python shortest-path kernel, same contract as the compiled module."""

from __future__ import annotations

import heapq

import numpy as np


def dijkstra(indptr, indices, weights, source, target=-1):
    """Single-source distances on a CSR graph; early exit at ``target``."""
    n = len(indptr) - 1
    if not 0 <= source < n:
        raise ValueError("source out of range")
    dist = np.full(n, np.inf)
    done = np.zeros(n, dtype=bool)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == target:
            break
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if done[v]:
                continue
            nd = d + weights[k]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, int(v)))
    return dist
