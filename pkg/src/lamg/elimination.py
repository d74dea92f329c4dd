"""Exact elimination of independent low-degree nodes (Schur complement)."""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ._backend import kernels
from .errors import DimensionMismatch, SingularDiagonal
from .graph import SparseLaplacian, symmetrized
from .work import charge

MAX_DEGREE = 4
MIN_FRACTION = 0.01


@dataclass
class EliminationStage:
    """One round: eliminated nodes ``F`` and retained nodes ``C`` (stage-local indices).

    ``A_fc`` holds the rows of ``A`` for ``F`` restricted to the ``C`` columns
    (numbered by position in ``C``); ``d_f`` the diagonal entries ``a_ff``.
    """

    F: np.ndarray
    C: np.ndarray
    d_f: np.ndarray
    A_fc: sp.csr_matrix

    @property
    def n(self):
        return len(self.F) + len(self.C)

    def restrict(self, b):
        """``b_C - A_CF A_FF^{-1} b_F``."""
        charge(self.A_fc.nnz)
        return b[self.C] - self.A_fc.T @ (b[self.F] / self.d_f)

    def interpolate(self, x_c, b):
        """Assemble the parent iterate from ``x_C`` by back-substitution at ``F``."""
        charge(self.A_fc.nnz)
        x = np.empty(self.n)
        x[self.C] = x_c
        x[self.F] = (b[self.F] - self.A_fc @ x_c) / self.d_f
        return x


@dataclass
class EliminationLevel:
    """Consecutive elimination stages and the resulting coarse operator."""

    stages: list
    A: SparseLaplacian
    coarse_nodes: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.coarse_nodes is None:
            nodes = np.arange(self.stages[0].n)
            for st in self.stages:
                nodes = nodes[st.C]
            self.coarse_nodes = nodes

    @property
    def n_fine(self):
        return self.stages[0].n

    def restrict(self, b):
        """Coarse right-hand side and the per-stage right-hand sides."""
        if len(b) != self.n_fine:
            raise DimensionMismatch(f"rhs length {len(b)} != {self.n_fine}")
        history = []
        for st in self.stages:
            history.append(b)
            b = st.restrict(b)
        return b, history

    def interpolate(self, x_c, history):
        for st, b in zip(reversed(self.stages), reversed(history)):
            x_c = st.interpolate(x_c, b)
        return x_c


def select_low_degree_set(A, max_degree=MAX_DEGREE):
    """Independent set of nodes with degree <= ``max_degree``.

    Nodes are swept in ascending index; each eligible low-degree node joins
    ``F`` and makes its neighbors ineligible.

    Returns
    -------
    F, C : ndarray of int
    """
    in_f = kernels.low_degree_set(A.indptr, A.indices, max_degree)
    charge(A.nnz_off)
    return np.flatnonzero(in_f), np.flatnonzero(~in_f)


def schur_reduce(A, F, C):
    """Eliminate the independent set ``F`` from ``A``.

    Returns
    -------
    A_c : SparseLaplacian
        ``A_CC - A_CF A_FF^{-1} A_FC`` on the nodes ``C`` (in order).
    stage : EliminationStage
    """
    F = np.asarray(F, dtype=np.intp)
    C = np.asarray(C, dtype=np.intp)
    d_f = A.diag[F]
    if np.any(d_f == 0):
        raise SingularDiagonal("zero diagonal at an eliminated node")
    off = A.offdiag
    if len(F) and off[F][:, F].count_nonzero():
        raise ValueError("F is not an independent set")
    A_fc = off[F][:, C].tocsr()
    A_cc = off[C][:, C]
    fill = A_fc.T @ sp.diags(1.0 / d_f) @ A_fc
    charge(A_fc.nnz + fill.nnz)
    # zero row sums are preserved exactly by the Schur complement; averaging
    # with the transpose removes rounding asymmetry of the sparse product
    A_c = SparseLaplacian(symmetrized(A_cc - fill), check=False)
    return A_c, EliminationStage(F, C, d_f, A_fc)


def eliminate_rounds(A, max_degree=MAX_DEGREE, min_fraction=MIN_FRACTION):
    """Repeat select + reduce while ``|F| >= min_fraction * n``.

    Returns ``None`` when the first round already selects too few nodes.
    """
    stages = []
    current = A
    while current.n > 1:
        F, C = select_low_degree_set(current, max_degree)
        if len(F) < min_fraction * current.n or len(C) == 0:
            break
        current, stage = schur_reduce(current, F, C)
        stages.append(stage)
    if not stages:
        return None
    return EliminationLevel(stages, current)


def coarsen_rhs_elim(level, b):
    """``P^T b`` for an :class:`EliminationStage` or :class:`EliminationLevel`."""
    if isinstance(level, EliminationStage):
        return level.restrict(b)
    return level.restrict(b)[0]


def backsubstitute_elim(level, x_c, b):
    """Fine iterate from coarse values ``x_c`` and the fine right-hand side ``b``."""
    if isinstance(level, EliminationStage):
        return level.interpolate(x_c, b)
    _, history = level.restrict(b)
    return level.interpolate(x_c, history)
