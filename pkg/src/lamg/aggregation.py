"""Affinity-guided, energy-screened caliber-1 aggregation."""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ._backend import kernels
from .graph import SparseLaplacian, symmetrized
from .work import charge

MAX_ENERGY_RATIO = 2.5
HUB_FACTOR = 8.0
WEAK_EDGE_FACTOR = 1e-3
MAX_STAGES = 2
UNDECIDED, DUMMY = -1, -2


@dataclass
class AffinityView:
    """Affinities ``c_uv`` aligned with the stored off-diagonal entries of ``A``."""

    c: np.ndarray
    norms: np.ndarray
    degenerate: np.ndarray

    def matrix(self, A):
        return sp.csr_matrix((self.c, A.indices, A.indptr), shape=(A.n, A.n))


@dataclass
class AggregationLevel:
    """Partition of the fine nodes into aggregates and its Galerkin operator.

    ``aggregate[u]`` is the coarse index of fine node ``u``.
    """

    aggregate: np.ndarray
    n_c: int
    A: SparseLaplacian
    stage: int = 1
    stage_alphas: tuple = ()

    @property
    def alpha(self):
        return self.n_c / len(self.aggregate)

    def restrict(self, r):
        """``P^T r``: sum of fine values per aggregate."""
        charge(len(r))
        return np.bincount(self.aggregate, weights=r, minlength=self.n_c)

    def interpolate(self, e_c):
        """``P e_c``: piecewise-constant prolongation."""
        charge(len(self.aggregate))
        return e_c[self.aggregate]


def _tv_block(tvs):
    return np.asarray(tvs.X if hasattr(tvs, "X") else tvs, dtype=np.float64)


def compute_affinities(A, tvs):
    """``c_uv = 1 - (X_u, X_v)^2 / ((X_u, X_u)(X_v, X_v))`` on every edge.

    Pairs where either node has an identically zero TV row get ``c = 1`` and
    are flagged in ``degenerate``.
    """
    X = _tv_block(tvs)
    rows = A.row_of()
    cols = A.indices
    norms = np.einsum("ij,ij->i", X, X)
    dots = np.einsum("ij,ij->i", X[rows], X[cols])
    den = norms[rows] * norms[cols]
    degenerate = den == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        c = 1.0 - dots * dots / den
    c[degenerate] = 1.0
    np.clip(c, 0.0, 1.0, out=c)
    charge(A.nnz_off * X.shape[1])
    return AffinityView(c, norms, degenerate)


def affinity_pair(xu, xv):
    """Affinity of two TV sample rows."""
    xu = np.asarray(xu, dtype=float)
    xv = np.asarray(xv, dtype=float)
    den = float(xu @ xu) * float(xv @ xv)
    if den == 0.0:
        return 1.0
    return min(max(1.0 - float(xu @ xv) ** 2 / den, 0.0), 1.0)


def detect_hubs(A):
    """Nodes with ``|E_u| >= 8 sum_v |w_uv| |E_v| / sum_v |w_uv|``."""
    deg = A.degrees().astype(float)
    W = abs(A.offdiag)
    tot = np.asarray(W.sum(axis=1)).ravel()
    weighted = W @ deg
    with np.errstate(divide="ignore", invalid="ignore"):
        hub = (tot > 0) & (deg >= HUB_FACTOR * weighted / tot)
    return np.flatnonzero(hub)


def nodal_terms(A, X):
    """Per-node coefficients ``B_u = sum w_uv x_v`` and ``C_u = 1/2 sum w_uv x_v^2``."""
    W = -A.offdiag
    B = np.ascontiguousarray(W @ X)
    C = np.ascontiguousarray(0.5 * (W @ (X * X)))
    charge(2 * A.nnz_off * X.shape[1])
    return B, C


def energy_ratio_qus(A, tvs, u, s):
    """Energy inflation from setting ``x_u := x_s``, maximized over TVs.

    For each TV the nodal energy at ``u`` as a function of ``y = x_u`` is
    ``E_u(y) = a_uu y^2 / 2 - B_u y + C_u``. The ratio compares its value at
    ``y = x_s`` with its minimum (the value after relaxing ``u``). Returns
    ``inf`` when the value at ``x_s`` is not positive. A TV whose minimum is
    not positive (possible with negative weights) does not constrain the pair.
    """
    X = _tv_block(tvs)
    lo, hi = A.indptr[u], A.indptr[u + 1]
    nbrs = A.indices[lo:hi]
    w = -A.data[lo:hi]
    a = A.diag[u]
    q = 1.0
    for k in range(X.shape[1]):
        xv = X[nbrs, k]
        bk = float(w @ xv)
        ck = 0.5 * float(w @ (xv * xv))
        emin = ck - bk * bk / (2.0 * a)
        t = X[s, k] - bk / a
        gap = 0.5 * a * t * t
        tol = 1e-13 * abs(ck)
        if gap <= tol:
            continue
        if emin + gap <= tol:
            return math.inf
        if emin > tol:
            q = max(q, 1.0 + gap / emin)
    return q


def weak_edge_mask(A, factor=WEAK_EDGE_FACTOR):
    """True for edges kept during aggregation.

    Edge ``(u, v)`` is dropped when ``|w_uv| < factor * min(max_s |w_us|, max_s |w_sv|)``.
    """
    absw = np.abs(A.data)
    rowmax = np.zeros(A.n)
    np.maximum.at(rowmax, A.row_of(), absw)
    thresh = factor * np.minimum(rowmax[A.row_of()], rowmax[A.indices])
    return absw >= thresh


def aggregate(A, tvs, gamma=1.5, hubs=None, max_ratio=MAX_ENERGY_RATIO,
              max_stages=MAX_STAGES, affinities=None):
    """Partition the nodes of ``A`` into aggregates.

    Stage 1 aggregates the nodes of ``A``. Each further stage aggregates the
    previous aggregates on their Galerkin graph, with TVs carried over as
    aggregate means, so every aggregate is contained in one of the next stage.
    Later stages run only while the coarsening ratio exceeds ``0.7 / gamma``.

    Parameters
    ----------
    A : SparseLaplacian
    tvs : TestVectorSet or ndarray
        Relaxed test vectors on ``A`` (rows are nodes).
    gamma : float
        Cycle index; the stage whose coarsening ratio is closest to
        ``0.7 / gamma`` is kept.
    hubs : array of int, optional
        Nodes forced to be seeds; detected when omitted.

    Returns
    -------
    AggregationLevel
    """
    n = A.n
    X = np.ascontiguousarray(_tv_block(tvs))
    if hubs is None:
        hubs = detect_hubs(A)
    target = 0.7 / gamma
    owner = np.arange(n, dtype=np.intp)
    current, n_cur = A, n
    hub_mask = np.zeros(n, dtype=bool)
    hub_mask[hubs] = True
    partitions, coarse_ops, alphas = [], [], []
    dummy = None
    for stage in range(max_stages):
        aff = affinities if stage == 0 and affinities is not None else None
        seed_of = _stage(current, X, np.flatnonzero(hub_mask), max_ratio, aff, dummy)
        local = _finalize(seed_of)
        n_next = int(local.max()) + 1 if n_cur else 0
        owner = local[owner]
        A_next = galerkin_coarse_operator(current, local, n_next)
        partitions.append(owner)
        coarse_ops.append(A_next)
        alphas.append(n_next / n)
        if alphas[-1] <= target or n_next == n_cur:
            break
        # carry TVs, hub marks and the dummy aggregate to the aggregate graph
        X = np.ascontiguousarray(aggregate_type(local, X, n_next))
        hub_mask = np.bincount(local, weights=hub_mask, minlength=n_next) > 0
        dummy = np.unique(local[seed_of == DUMMY])
        current, n_cur = A_next, n_next
    best = int(np.argmin([abs(a - target) for a in alphas]))
    aggregate_of = partitions[best]
    n_c = int(aggregate_of.max()) + 1 if n else 0
    return AggregationLevel(aggregate_of, n_c, coarse_ops[best], best + 1, tuple(alphas))


def _stage(A, X, hubs, max_ratio, affinities=None, dummy=None):
    """One aggregation pass over the nodes of ``A``; returns seed pointers."""
    n = A.n
    if affinities is None:
        affinities = compute_affinities(A, X)
    aff = affinities.c
    active = weak_edge_mask(A)
    B, C = nodal_terms(A, X)

    seed_of = np.full(n, UNDECIDED, dtype=np.intp)
    seed_of[hubs] = hubs
    rows = A.row_of()
    masked = np.where(active, aff, np.inf)
    minaff = np.full(n, np.inf)
    np.minimum.at(minaff, rows, masked)
    isolated = ~np.isfinite(minaff)
    if dummy is not None:
        isolated[dummy] = True
    seed_of[isolated & (seed_of == UNDECIDED)] = DUMMY
    # ascending minimal affinity, ties by node index
    order = np.lexsort((np.arange(n), minaff)).astype(np.intp)
    order = order[seed_of[order] == UNDECIDED]
    kernels.aggregation_stage(A.indptr, A.indices, active.view(np.uint8), aff,
                              A.diag, B, C, X, order, seed_of, np.inf, max_ratio)
    charge(A.nnz_off * X.shape[1])
    return seed_of


def _finalize(seed_of):
    # undecided nodes become singleton seeds; dummies share one aggregate
    n = len(seed_of)
    owner = seed_of.copy()
    idx = np.arange(n)
    undecided = owner == UNDECIDED
    owner[undecided] = idx[undecided]
    dummy = owner == DUMMY
    if dummy.any():
        owner[dummy] = idx[dummy][0]
    _, aggregate_of = np.unique(owner, return_inverse=True)
    return aggregate_of.astype(np.intp)


def partition_matrix(aggregate_of, n_c=None):
    """Caliber-1 interpolation ``P`` (``n x n_c``, one unit entry per row)."""
    n = len(aggregate_of)
    if n_c is None:
        n_c = int(aggregate_of.max()) + 1
    return sp.csr_matrix((np.ones(n), (np.arange(n), aggregate_of)), shape=(n, n_c))


def galerkin_coarse_operator(A, aggregate_of, n_c=None):
    """``P^T A P`` for a caliber-1 partition."""
    aggregate_of = np.asarray(aggregate_of, dtype=np.intp)
    P = partition_matrix(aggregate_of, n_c)
    coarse = symmetrized((P.T @ A.offdiag @ P).tocsr())
    charge(2 * A.nnz_off)
    return SparseLaplacian(coarse, check=False)


def aggregate_type(aggregate_of, x, n_c=None):
    """Mean of ``x`` over each aggregate; a 2-D ``x`` is averaged per column."""
    aggregate_of = np.asarray(aggregate_of, dtype=np.intp)
    x = np.asarray(x, dtype=float)
    if n_c is None:
        n_c = int(aggregate_of.max()) + 1
    sizes = np.bincount(aggregate_of, minlength=n_c).astype(float)
    if x.ndim == 1:
        return np.bincount(aggregate_of, weights=x, minlength=n_c) / sizes
    sums = np.zeros((n_c, x.shape[1]))
    np.add.at(sums, aggregate_of, x)
    return sums / sizes[:, None]
