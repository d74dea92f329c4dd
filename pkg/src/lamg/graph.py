"""Sparse graph Laplacians: assembly, validation, products and components."""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc

from .errors import DimensionMismatch, EmptyGraph, NotALaplacian
from .work import charge

ROW_SUM_TOL = 1e-10
NEGATIVE_WEIGHT_TOL = 1e-5


@dataclass
class EdgeList:
    """Weighted undirected edges over nodes ``0..n-1``.

    Parameters
    ----------
    n : int
        Node count.
    u, v : array of int
        Edge endpoints.
    w : array of float
        Edge weights.
    """

    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=np.intp).ravel()
        self.v = np.asarray(self.v, dtype=np.intp).ravel()
        self.w = np.asarray(self.w, dtype=np.float64).ravel()
        if not (len(self.u) == len(self.v) == len(self.w)):
            raise ValueError("edge arrays must have equal length")
        if len(self.u) and (min(self.u.min(), self.v.min()) < 0
                            or max(self.u.max(), self.v.max()) >= self.n):
            raise ValueError(f"edge index out of range for n={self.n}")

    @classmethod
    def from_tuples(cls, n, edges):
        edges = list(edges)
        if not edges:
            return cls(n, [], [], [])
        u, v, w = zip(*edges)
        return cls(n, u, v, w)

    def __len__(self):
        return len(self.u)

    def canonical(self):
        """Merged, sorted copy with ``u < v`` and no self-loops or zero weights."""
        keep = self.u != self.v
        u, v, w = self.u[keep], self.v[keep], self.w[keep]
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        M = sp.coo_matrix((w, (lo, hi)), shape=(self.n, self.n)).tocsr()
        M.sum_duplicates()
        M.eliminate_zeros()
        M = M.tocoo()
        order = np.lexsort((M.col, M.row))
        return EdgeList(self.n, M.row[order], M.col[order], M.data[order])


class SparseLaplacian:
    """Symmetric zero-row-sum matrix stored as off-diagonal CSR plus diagonal.

    Both triangles of the off-diagonal part are stored so relaxation and
    neighbor scans never need a transpose. Off-diagonal entries are
    ``a_uv = -w_uv``.

    Parameters
    ----------
    offdiag : sparse matrix
        Off-diagonal part; any diagonal entries are discarded.
    diag : array, optional
        Diagonal. Defaults to the zero-row-sum closure ``-sum_v a_uv``.
    check : bool
        Validate the Laplacian invariants.
    """

    def __init__(self, offdiag, diag=None, check=True):
        coo = sp.coo_matrix(offdiag, dtype=np.float64)
        n = coo.shape[0]
        if coo.shape != (n, n):
            raise DimensionMismatch("Laplacian must be square")
        keep = coo.row != coo.col
        off = sp.csr_matrix((coo.data[keep], (coo.row[keep], coo.col[keep])),
                            shape=(n, n))
        off.sum_duplicates()
        off.eliminate_zeros()
        off.sort_indices()
        if diag is None:
            diag = -np.asarray(off.sum(axis=1)).ravel()
        self.offdiag = off
        self.diag = np.ascontiguousarray(diag, dtype=np.float64)
        self.indptr = np.ascontiguousarray(off.indptr, dtype=np.intp)
        self.indices = np.ascontiguousarray(off.indices, dtype=np.intp)
        self.data = np.ascontiguousarray(off.data, dtype=np.float64)
        if len(self.diag) != n:
            raise DimensionMismatch("diagonal length does not match matrix")
        if check:
            check_laplacian(self)

    @property
    def n(self):
        return self.offdiag.shape[0]

    @property
    def nnz_off(self):
        """Stored off-diagonal entries (``2 m``)."""
        return len(self.data)

    @property
    def m(self):
        return self.nnz_off // 2

    def degrees(self):
        return np.diff(self.indptr)

    def weights(self):
        """Edge weights ``w_uv = -a_uv`` aligned with the stored entries."""
        return -self.data

    def row_of(self):
        """Row index of every stored off-diagonal entry."""
        return np.repeat(np.arange(self.n, dtype=np.intp), self.degrees())

    def tocsr(self):
        return (self.offdiag + sp.diags(self.diag)).tocsr()

    def toarray(self):
        return self.tocsr().toarray()

    def to_edge_list(self):
        coo = sp.triu(self.offdiag, k=1).tocoo()
        return EdgeList(self.n, coo.row, coo.col, -coo.data).canonical()

    def subgraph(self, nodes):
        nodes = np.asarray(nodes, dtype=np.intp)
        off = self.offdiag[nodes][:, nodes]
        return SparseLaplacian(off, self.diag[nodes], check=False)

    def __repr__(self):
        return f"SparseLaplacian(n={self.n}, m={self.m})"


def symmetrized(M):
    """``(M + M^T) / 2``; exactly symmetric since floating-point addition commutes."""
    M = sp.csr_matrix(M)
    return ((M + M.T) * 0.5).tocsr()


def check_laplacian(A, tol=ROW_SUM_TOL):
    """Raise :class:`NotALaplacian` unless ``A`` is symmetric with zero row sums."""
    off = A.offdiag
    if A.n and (off - off.T).count_nonzero():
        raise NotALaplacian("off-diagonal part is not exactly symmetric")
    if A.n == 0:
        return
    scale = max(float(np.abs(A.diag).max()), np.finfo(float).tiny)
    rows = A.diag + np.asarray(off.sum(axis=1)).ravel()
    worst = float(np.abs(rows).max())
    if worst > tol * scale:
        raise NotALaplacian(f"row sum {worst:.3e} exceeds {tol:g} * max diagonal")
    deg = A.degrees()
    if np.any(A.diag[deg > 0] <= 0):
        raise NotALaplacian("non-positive diagonal at a non-isolated node")


def assemble_laplacian(edges, weight_policy="keep"):
    """Build the graph Laplacian of an edge list.

    Parameters
    ----------
    edges : EdgeList
    weight_policy : {'keep', 'absolute-if-large-negative'}
        With ``'absolute-if-large-negative'`` all weights are replaced by
        their absolute values if some merged weight satisfies
        ``w_uv < -1e-5 * sum_v' |w_uv'|``.

    Returns
    -------
    SparseLaplacian
    """
    if edges.n == 0:
        raise EmptyGraph("graph has no nodes")
    loops = int(np.count_nonzero(edges.u == edges.v))
    if loops:
        warnings.warn(f"ignored {loops} self-loop(s)", stacklevel=2)
    e = edges.canonical()
    n = e.n
    W = sp.coo_matrix((np.concatenate([e.w, e.w]),
                       (np.concatenate([e.u, e.v]), np.concatenate([e.v, e.u]))),
                      shape=(n, n)).tocsr()
    if weight_policy == "absolute-if-large-negative":
        if has_large_negative_weight(W):
            W = abs(W)
    elif weight_policy != "keep":
        raise ValueError(f"unknown weight policy {weight_policy!r}")
    return SparseLaplacian(-W)


def has_large_negative_weight(W, tol=NEGATIVE_WEIGHT_TOL):
    """True if some ``w_uv < -tol * sum_v' |w_uv'|`` (``W`` holds weights)."""
    W = sp.csr_matrix(W)
    absrow = np.asarray(abs(W).sum(axis=1)).ravel()
    rows = np.repeat(np.arange(W.shape[0]), np.diff(W.indptr))
    return bool(np.any(W.data < -tol * absrow[rows]))


def mvm(A, x):
    """Return ``A @ x`` for a vector or an ``n x K`` block; charges one MVM per column."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != A.n:
        raise DimensionMismatch(f"vector length {x.shape[0]} != n={A.n}")
    cols = 1 if x.ndim == 1 else x.shape[1]
    charge(A.nnz_off * cols)
    d = A.diag if x.ndim == 1 else A.diag[:, None]
    return A.offdiag @ x + d * x


def energy(A, x):
    """Quadratic energy ``x^T A x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.n,):
        raise DimensionMismatch(f"vector length {x.shape[0]} != n={A.n}")
    return float(x @ mvm(A, x))


def energy_edgewise(A, x):
    """``sum_(u,v) w_uv (x_u - x_v)^2`` evaluated edge by edge."""
    e = A.to_edge_list()
    return float(np.sum(e.w * (x[e.u] - x[e.v]) ** 2))


@dataclass
class ComponentSplit:
    """Connected components of a Laplacian's graph.

    ``labels[u]`` is the component of node ``u``; ``nodes[c]`` lists the nodes
    of component ``c`` in ascending order and ``parts[c]`` is its sub-Laplacian.
    """

    labels: np.ndarray
    nodes: list = field(default_factory=list)
    parts: list = field(default_factory=list)

    @property
    def count(self):
        return len(self.nodes)

    def assemble(self, pieces):
        """Scatter per-component vectors back into one vector."""
        x = np.zeros(len(self.labels))
        for idx, piece in zip(self.nodes, pieces):
            x[idx] = piece
        return x


def connected_components(A):
    """Split ``A`` into connected components (isolated nodes are singletons)."""
    count, labels = _cc(A.offdiag, directed=False)
    charge(A.nnz_off)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(count + 1))
    nodes = [order[bounds[c]:bounds[c + 1]] for c in range(count)]
    parts = [A.subgraph(idx) for idx in nodes] if count > 1 else [A]
    return ComponentSplit(labels, nodes, parts)
