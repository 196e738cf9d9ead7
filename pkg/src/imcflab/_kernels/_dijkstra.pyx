# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Single-source shortest paths on a CSR graph (binary heap, lazy deletion)."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport free, malloc

cnp.import_array()


def dijkstra(cnp.int64_t[::1] indptr, cnp.int32_t[::1] indices,
             double[::1] weights, int source, int target=-1):
    """Distances from ``source``; stops early once ``target`` is settled.

    Returns a float64 array of length n (inf where unreached / not settled).
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t m = indices.shape[0]
    if source < 0 or source >= n:
        raise ValueError("source out of range")

    dist_arr = np.full(n, np.inf)
    cdef double[::1] dist = dist_arr
    cdef unsigned char* done = <unsigned char*> malloc(n)
    # heap capacity: every edge can push once, plus the source
    cdef Py_ssize_t cap = m + 8
    cdef double* hkey = <double*> malloc(cap * sizeof(double))
    cdef cnp.int64_t* hval = <cnp.int64_t*> malloc(cap * sizeof(cnp.int64_t))
    if done == NULL or hkey == NULL or hval == NULL:
        free(done); free(hkey); free(hval)
        raise MemoryError()
    cdef Py_ssize_t i, u, v, heap_n, child, parent, pos
    cdef double d, nd, key
    cdef cnp.int64_t node

    for i in range(n):
        done[i] = 0
    dist[source] = 0.0
    hkey[0] = 0.0
    hval[0] = source
    heap_n = 1

    try:
        while heap_n > 0:
            # pop min
            d = hkey[0]
            u = hval[0]
            heap_n -= 1
            key = hkey[heap_n]
            node = hval[heap_n]
            pos = 0
            while True:
                child = 2 * pos + 1
                if child >= heap_n:
                    break
                if child + 1 < heap_n and hkey[child + 1] < hkey[child]:
                    child += 1
                if hkey[child] < key:
                    hkey[pos] = hkey[child]
                    hval[pos] = hval[child]
                    pos = child
                else:
                    break
            hkey[pos] = key
            hval[pos] = node

            if done[u]:
                continue
            done[u] = 1
            if u == target:
                break
            for i in range(indptr[u], indptr[u + 1]):
                v = indices[i]
                if done[v]:
                    continue
                nd = d + weights[i]
                if nd < dist[v]:
                    dist[v] = nd
                    # push (nd, v)
                    pos = heap_n
                    heap_n += 1
                    while pos > 0:
                        parent = (pos - 1) >> 1
                        if hkey[parent] > nd:
                            hkey[pos] = hkey[parent]
                            hval[pos] = hval[parent]
                            pos = parent
                        else:
                            break
                    hkey[pos] = nd
                    hval[pos] = v
    finally:
        free(done)
        free(hkey)
        free(hval)
    return dist_arr
