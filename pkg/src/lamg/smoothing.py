"""Gauss-Seidel relaxation, test vectors and relaxation-speed probing."""

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DimensionMismatch, SingularDiagonal
from .work import charge

FAST_RELAXATION_FACTOR = 0.7
PROBE_SWEEPS = 8


@dataclass
class TestVectorSet:
    """Relaxed zero-mean test vectors, stored as the rows-are-nodes block ``X``."""

    X: np.ndarray
    nu: int

    __test__ = False  # not a pytest class

    @property
    def K(self):
        return self.X.shape[1]


@dataclass
class RelaxProbe:
    factor: float
    sweeps: int

    def is_fast(self, threshold=FAST_RELAXATION_FACTOR):
        return self.factor <= threshold


def _require_diag(A):
    if A.n and np.any(A.diag <= 0):
        raise SingularDiagonal("Gauss-Seidel needs a positive diagonal")


def gauss_seidel_sweep(A, b, x, ordering="forward", sweeps=1):
    """Relax ``A x = b`` in place.

    Parameters
    ----------
    A : SparseLaplacian
    b : array or None
        Right-hand side, shape ``(n,)`` or ``(n, K)``; ``None`` means zero.
    x : ndarray
        Iterate of matching shape, C-contiguous float64; updated in place.
    ordering : {'forward', 'backward'}
    sweeps : int
    """
    _require_diag(A)
    if x.shape[0] != A.n:
        raise DimensionMismatch(f"iterate length {x.shape[0]} != n={A.n}")
    if not (x.flags.c_contiguous and x.dtype == np.float64):
        raise TypeError("x must be a C-contiguous float64 array")
    if ordering not in ("forward", "backward"):
        raise ValueError(f"unknown ordering {ordering!r}")
    X = x.reshape(A.n, -1)
    if b is None:
        B = X
        zero = True
    else:
        B = np.ascontiguousarray(b, dtype=np.float64).reshape(A.n, -1)
        if B.shape != X.shape:
            raise DimensionMismatch("right-hand side and iterate shapes differ")
        zero = False
    kernels.gs_sweeps(A.indptr, A.indices, A.data, A.diag, B, X, sweeps,
                      ordering == "backward", zero)
    charge(A.nnz_off * X.shape[1] * sweeps)


def gauss_seidel_residual(A, b, x, r=None):
    """One forward sweep on a single vector, returning the new residual.

    The residual is produced during the sweep at the cost of half an extra
    product.
    """
    _require_diag(A)
    if r is None:
        r = np.empty(A.n)
    kernels.gs_sweep_residual(A.indptr, A.indices, A.data, A.diag,
                              np.ascontiguousarray(b, dtype=np.float64), x, r)
    charge(1.5 * A.nnz_off)
    return r


def generate_tvs(A, K, nu, rng_seed=None):
    """``K`` test vectors: ``nu`` sweeps on ``A x = 0`` from uniform[-1, 1].

    ``rng_seed`` may be an int or a :class:`numpy.random.Generator`.
    """
    if K < 1 or nu < 0:
        raise ValueError("need K >= 1 and nu >= 0")
    rng = np.random.default_rng(rng_seed)
    X = rng.uniform(-1.0, 1.0, size=(A.n, K))
    if nu:
        gauss_seidel_sweep(A, None, X, sweeps=nu)
    X -= X.mean(axis=0)
    return TestVectorSet(X, nu)


def probe_relaxation(A, sweeps=PROBE_SWEEPS, rng_seed=None):
    """Measure the asymptotic per-sweep reduction of ``||x||_A`` on ``A x = 0``.

    The first half of the sweeps only smooths the random start; the factor is
    the geometric mean over the second half. A start that is already zero
    reports factor 0.
    """
    if sweeps < 2:
        raise ValueError("probe needs at least 2 sweeps")
    rng = np.random.default_rng(rng_seed)
    x = rng.uniform(-1.0, 1.0, size=A.n)
    return _probe(A, x, sweeps)


def _probe(A, x, sweeps):
    warm = sweeps // 2
    x = np.ascontiguousarray(x - x.mean())
    norms = []
    for i in range(sweeps):
        if i == warm:
            norms.append(_anorm(A, x))
        gauss_seidel_sweep(A, None, x)
        x -= x.mean()
    norms.append(_anorm(A, x))
    charge(2 * A.nnz_off)
    start, end = norms
    if start == 0.0:
        return RelaxProbe(0.0, sweeps)
    return RelaxProbe(float((end / start) ** (1.0 / (sweeps - warm))), sweeps)


def _anorm(A, x):
    return float(np.sqrt(max(x @ (A.offdiag @ x + A.diag * x), 0.0)))
