"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Selected at import time when the extension is unavailable (or when
``LAMG_PURE_PYTHON`` is set). Results are bit-identical to the compiled
versions; only speed differs.
"""

import math

import numpy as np

NAME = "python"


def gs_sweeps(indptr, indices, data, diag, b, x, nsweeps, reverse=False,
              zero_rhs=False):
    n, K = x.shape
    rows = range(n - 1, -1, -1) if reverse else range(n)
    ip = indptr.tolist()
    ind = indices.tolist()
    dat = data.tolist()
    dg = diag.tolist()
    for _ in range(nsweeps):
        for u in rows:
            acc = [0.0] * K if zero_rhs else b[u].tolist()
            for jj in range(ip[u], ip[u + 1]):
                v = ind[jj]
                d = dat[jj]
                xv = x[v]
                for k in range(K):
                    acc[k] -= d * xv[k]
            d = dg[u]
            for k in range(K):
                x[u, k] = acc[k] / d


def gs_sweep_residual(indptr, indices, data, diag, b, x, r):
    n = x.shape[0]
    ip = indptr.tolist()
    ind = indices.tolist()
    dat = data.tolist()
    xs = x.tolist()
    bl = b.tolist()
    rl = [0.0] * n
    for u in range(n):
        acc = bl[u]
        lo, hi = ip[u], ip[u + 1]
        for jj in range(lo, hi):
            acc -= dat[jj] * xs[ind[jj]]
        xn = acc / diag[u]
        delta = xn - xs[u]
        xs[u] = xn
        for jj in range(lo, hi):
            v = ind[jj]
            if v < u:
                rl[v] -= dat[jj] * delta
    x[:] = xs
    r[:] = rl


def low_degree_set(indptr, indices, max_degree):
    n = len(indptr) - 1
    ip = indptr.tolist()
    ind = indices.tolist()
    eligible = [True] * n
    in_f = np.zeros(n, dtype=bool)
    for u in range(n):
        if eligible[u] and ip[u + 1] - ip[u] <= max_degree:
            in_f[u] = True
            for jj in range(ip[u], ip[u + 1]):
                eligible[ind[jj]] = False
    return in_f


def _inflation(a, B, C, X, u, s, qmax):
    q = 1.0
    for bk, ck, xs in zip(B[u].tolist(), C[u].tolist(), X[s].tolist()):
        emin = ck - bk * bk / (2.0 * a)
        t = xs - bk / a
        gap = 0.5 * a * t * t
        tol = 1e-13 * abs(ck)
        if gap <= tol:
            ratio = 1.0
        elif emin + gap <= tol:
            return math.inf
        elif emin > tol:
            ratio = 1.0 + gap / emin
        else:
            ratio = 1.0
        if ratio > q:
            q = ratio
            if q > qmax:
                return q
    return q


def aggregation_stage(indptr, indices, active, affinity, diag, B, C, X,
                      order, seed_of, max_affinity, qmax):
    ip = indptr.tolist()
    ind = indices.tolist()
    act = active.tolist()
    aff = affinity.tolist()
    for u in order.tolist():
        if seed_of[u] != -1:
            continue
        best = -1
        bestc = math.inf
        for jj in range(ip[u], ip[u + 1]):
            if not act[jj]:
                continue
            s = ind[jj]
            so = seed_of[s]
            if so == -2 or (so >= 0 and so != s):
                continue
            c = aff[jj]
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
