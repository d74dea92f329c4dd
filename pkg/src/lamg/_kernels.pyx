# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for relaxation and coarsening.

Every function here has a line-for-line twin in ``_pykernels``; the two must
produce bit-identical results.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

NAME = "cython"

ctypedef cnp.npy_intp idx_t


def gs_sweeps(const idx_t[::1] indptr, const idx_t[::1] indices,
              const double[::1] data, const double[::1] diag,
              const double[:, ::1] b, double[:, ::1] x,
              int nsweeps, bint reverse=False, bint zero_rhs=False):
    """In-place Gauss-Seidel on the columns of ``x`` (shape n x K)."""
    cdef idx_t n = x.shape[0]
    cdef idx_t K = x.shape[1]
    cdef idx_t u, jj, v, k, step, start, stop
    cdef int sweep
    cdef double d
    cdef double[::1] acc = np.empty(K, dtype=np.float64)

    if reverse:
        start, stop, step = n - 1, -1, -1
    else:
        start, stop, step = 0, n, 1
    for sweep in range(nsweeps):
        u = start
        while u != stop:
            if zero_rhs:
                for k in range(K):
                    acc[k] = 0.0
            else:
                for k in range(K):
                    acc[k] = b[u, k]
            for jj in range(indptr[u], indptr[u + 1]):
                v = indices[jj]
                d = data[jj]
                for k in range(K):
                    acc[k] -= d * x[v, k]
            d = diag[u]
            for k in range(K):
                x[u, k] = acc[k] / d
            u += step


def gs_sweep_residual(const idx_t[::1] indptr, const idx_t[::1] indices,
                      const double[::1] data, const double[::1] diag,
                      const double[::1] b, double[::1] x, double[::1] r):
    """One forward sweep; writes the post-sweep residual ``b - A x`` to ``r``.

    After the update at ``u`` its own equation holds with the old values of
    later neighbors, so r_u = -sum_{v>u} a_uv (x_v_new - x_v_old). Each delta
    is scattered to earlier neighbors as soon as it is known.
    """
    cdef idx_t n = x.shape[0]
    cdef idx_t u, jj, v
    cdef double acc, xn, delta

    for u in range(n):
        r[u] = 0.0
    for u in range(n):
        acc = b[u]
        for jj in range(indptr[u], indptr[u + 1]):
            acc -= data[jj] * x[indices[jj]]
        xn = acc / diag[u]
        delta = xn - x[u]
        x[u] = xn
        for jj in range(indptr[u], indptr[u + 1]):
            v = indices[jj]
            if v < u:
                r[v] -= data[jj] * delta


def low_degree_set(const idx_t[::1] indptr, const idx_t[::1] indices,
                   int max_degree):
    """Greedy independent set of nodes with degree <= max_degree (index order)."""
    cdef idx_t n = indptr.shape[0] - 1
    cdef idx_t u, jj
    cdef cnp.uint8_t[::1] eligible = np.ones(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] in_f = np.zeros(n, dtype=np.uint8)
    for u in range(n):
        if eligible[u] and indptr[u + 1] - indptr[u] <= max_degree:
            in_f[u] = 1
            for jj in range(indptr[u], indptr[u + 1]):
                eligible[indices[jj]] = 0
    return np.asarray(in_f).astype(bool)


cdef inline double _inflation(double a, const double[:, ::1] B,
                              const double[:, ::1] C, const double[:, ::1] X,
                              idx_t u, idx_t s, double qmax):
    # max over TVs of E_u(x; x_s) / min_y E_u(x; y); early exit above qmax
    cdef idx_t K = X.shape[1]
    cdef idx_t k
    cdef double q = 1.0, bk, ck, emin, gap, t, tol, ratio
    for k in range(K):
        bk = B[u, k]
        ck = C[u, k]
        emin = ck - bk * bk / (2.0 * a)
        t = X[s, k] - bk / a
        gap = 0.5 * a * t * t
        tol = 1e-13 * (ck if ck > 0 else -ck)
        if gap <= tol:
            ratio = 1.0
        elif emin + gap <= tol:
            return INFINITY
        elif emin > tol:
            ratio = 1.0 + gap / emin
        else:
            # non-positive local minimum (negative weights): no evidence against s
            ratio = 1.0
        if ratio > q:
            q = ratio
            if q > qmax:
                return q
    return q


def aggregation_stage(const idx_t[::1] indptr, const idx_t[::1] indices,
                      const cnp.uint8_t[::1] active, const double[::1] affinity,
                      const double[::1] diag, const double[:, ::1] B,
                      const double[:, ::1] C, const double[:, ::1] X,
                      const idx_t[::1] order, idx_t[::1] seed_of,
                      double max_affinity, double qmax):
    """One aggregation stage over ``order``; updates ``seed_of`` in place.

    seed_of[u] == -1 marks an undecided node, seed_of[u] == u a seed, any
    other non-negative value the seed of an associate, and -2 a node that is
    excluded from the scan (dummy aggregate).
    """
    cdef idx_t i, u, jj, s, best, so
    cdef double c, bestc, q
    cdef idx_t count = order.shape[0]
    for i in range(count):
        u = order[i]
        if seed_of[u] != -1:
            continue
        best = -1
        bestc = INFINITY
        for jj in range(indptr[u], indptr[u + 1]):
            if not active[jj]:
                continue
            s = indices[jj]
            so = seed_of[s]
            if so == -2 or (so >= 0 and so != s):
                continue
            c = affinity[jj]
            if c > max_affinity:
                continue
            if c > bestc or (c == bestc and s > best):
                continue
            q = _inflation(diag[u], B, C, X, u, s, qmax)
            if q <= qmax:
                best = s
                bestc = c
        if best >= 0:
            seed_of[best] = best
            seed_of[u] = best
