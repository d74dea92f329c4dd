"""Solve phase: multigrid cycles with fractional cycle index and recombination."""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, Diverged, IncompatibleRHS
from .graph import mvm
from .smoothing import gauss_seidel_residual, gauss_seidel_sweep
from .work import charge, metered

COARSEST_RELAX_REDUCTION = 1e-12
COARSEST_RELAX_MAX_SWEEPS = 500
DIVERGENCE_FACTOR = 1e3


def flat_mu(Q):
    """Optimal flat energy-correction factor ``2 Q / (Q + 1)``."""
    return 2.0 * Q / (Q + 1.0)


@dataclass
class CycleConfig:
    """Solve-phase options.

    Attributes
    ----------
    gamma : float
        Cycle index at fine levels, in [1, 2].
    correction : {'adaptive', 'flat'}
        ``'adaptive'`` recombines iterates at coarse levels; ``'flat'`` scales
        every coarse right-hand side by ``mu``.
    mu : float
        Flat correction factor.
    max_cycles : int
    target : float
        Required reduction of the residual l2 norm.
    recombination : {'l2', 'energy'}
        Norm minimized when recombining iterates. ``'l2'`` minimizes the
        residual norm; ``'energy'`` minimizes the error energy norm.
    """

    gamma: float = 1.5
    correction: str = "adaptive"
    mu: float = 4.0 / 3.0
    max_cycles: int = 100
    target: float = 1e10
    rng_seed: int = None
    recombination: str = "l2"

    def __post_init__(self):
        if not 1.0 <= self.gamma <= 2.0:
            raise ValueError("gamma must lie in [1, 2]")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.correction not in ("adaptive", "flat"):
            raise ValueError(f"unknown correction {self.correction!r}")
        if self.recombination not in ("l2", "energy"):
            raise ValueError(f"unknown recombination {self.recombination!r}")


@dataclass
class SolveStats:
    residuals: list = field(default_factory=list)
    solve_mvm: float = 0.0
    seconds: float = 0.0
    recombinations: list = field(default_factory=list)
    final_residual: float = None

    @property
    def cycles(self):
        return len(self.residuals) - 1

    @property
    def acf(self):
        return acf_estimate(self.residuals)

    @property
    def reduction(self):
        r0, rp = self.residuals[0], self.residuals[-1]
        return math.inf if rp == 0 else r0 / rp

    def mvm_per_cycle(self):
        return self.solve_mvm / self.cycles if self.cycles else 0.0


def acf_estimate(residuals):
    """``(r_p / r_0) ** (1 / p)``; 0 for a zero initial residual."""
    p = len(residuals) - 1
    if p < 1 or residuals[0] == 0:
        return 0.0
    return (residuals[-1] / residuals[0]) ** (1.0 / p)


def recombine(A, b, iterates, x, log=None, norm="l2"):
    """Recombine saved iterates with the final one.

    Returns ``y = x + sum_i alpha_i (x_i - x)``. With ``norm='l2'`` the
    coefficients minimize ``||b - A y||_2``; with ``norm='energy'`` they
    minimize the energy norm of the error ``y - A^+ b``.
    """
    r = b - mvm(A, x)
    saved = [(xi, b - mvm(A, xi)) for xi in iterates]
    y, _ = _recombine(x, r, saved, log, norm)
    return y


def _recombine(x, r, saved, log=None, norm="l2"):
    # A (x_i - x) = r - r_i, so only residuals are needed
    AD = np.column_stack([r - ri for _, ri in saved])
    if norm == "energy":
        D = np.column_stack([xi - x for xi, _ in saved])
        alpha, *_ = np.linalg.lstsq(D.T @ AD, D.T @ r, rcond=1e-12)
        charge(3 * AD.size)
    else:
        alpha, *_ = np.linalg.lstsq(AD, r, rcond=1e-12)
        charge(2 * AD.size)
    r_new = r - AD @ alpha
    before, after = float(np.linalg.norm(r)), float(np.linalg.norm(r_new))
    if norm == "l2" and not after <= before:
        after, r_new, alpha = before, r, np.zeros_like(alpha)
    if log is not None:
        log.append((before, after))
    y = x.copy()
    for a, (xi, _) in zip(alpha, saved):
        y += a * (xi - x)
    return y, r_new


class _Cycle:
    """Recursive cycle over a hierarchy with persistent visit credits."""

    def __init__(self, h, cfg, stats):
        self.h = h
        self.levels = h.levels
        self.last = len(h.levels) - 1
        self.credit = np.zeros(len(h.levels))
        self.flat = cfg.correction == "flat"
        self.mu = cfg.mu if self.flat else 1.0
        self.log = stats.recombinations
        self.norm = cfg.recombination

    def recombines(self, l):
        """Adaptive mode combines iterates at levels ``l > 0`` with an aggregation child."""
        return (not self.flat and l > 0
                and self.levels[l + 1].kind == "aggregation")

    def visit(self, l, b, x, count):
        """Run ``count`` sub-cycles on level ``l``; return the residual or None."""
        if l == self.last:
            return self.coarsest(b, x)
        if self.levels[l + 1].kind == "elimination":
            # no relaxation here and exact elimination: the sub-cycles happen below
            return self.eliminate(l, b, x, count)
        saved = [] if self.recombines(l) else None
        r = None
        for _ in range(count):
            r = self.subcycle(l, b, x, saved)
        if saved:
            y, r = _recombine(x, r, saved, self.log, self.norm)
            x[:] = y
        return r

    def eliminate(self, l, b, x, count):
        T = self.levels[l + 1].transfer
        b_c, history = T.restrict(b)
        x_c = x[T.coarse_nodes]
        r_c = self.visit(l + 1, b_c, x_c, count)
        x[:] = T.interpolate(x_c, history)
        if r_c is None:
            return None
        # back-substitution leaves a zero residual at the eliminated nodes
        r = np.zeros(len(x))
        r[T.coarse_nodes] = r_c
        return r

    def subcycle(self, l, b, x, saved):
        lev, child = self.levels[l], self.levels[l + 1]
        A, T = lev.A, child.transfer
        if lev.nu1 > 1:
            gauss_seidel_sweep(A, b, x, sweeps=lev.nu1 - 1)
        r = gauss_seidel_residual(A, b, x)
        if saved is not None:
            saved.append((x.copy(), r.copy()))
        b_c = T.restrict(r)
        if self.mu != 1.0:
            b_c *= self.mu
        e_c = np.zeros(child.n)
        self.credit[l + 1] += lev.gamma
        count = max(1, int(math.floor(self.credit[l + 1])))
        self.credit[l + 1] -= count
        self.visit(l + 1, b_c, e_c, count)
        x += T.interpolate(e_c)
        if lev.nu2 > 1:
            gauss_seidel_sweep(A, b, x, sweeps=lev.nu2 - 1)
        return gauss_seidel_residual(A, b, x)

    def coarsest(self, b, x):
        lev = self.levels[-1]
        A = lev.A
        if self.h.coarsest is not None:
            x[:] = self.h.coarsest.solve(b)
            return b - mvm(A, x)
        r = b - mvm(A, x)
        r0 = np.linalg.norm(r)
        for _ in range(COARSEST_RELAX_MAX_SWEEPS):
            if np.linalg.norm(r) <= COARSEST_RELAX_REDUCTION * r0:
                break
            r = gauss_seidel_residual(A, b, x)
            x -= x.mean()
        return r


def coarsest_solve(A, b):
    """Zero-mean solution of ``A x = b`` via the bordered direct system."""
    from .hierarchy import CoarsestSolver

    return CoarsestSolver(A).solve(np.asarray(b, dtype=float))


def check_rhs(b, tol=1e-10):
    """Raise :class:`IncompatibleRHS` unless ``sum(b)`` vanishes.

    The tolerance is relative to ``max|b|`` and grows with ``n / 1e5`` to
    absorb summation round-off on large vectors.
    """
    scale = float(np.abs(b).max()) if len(b) else 0.0
    slack = tol * scale * max(1.0, len(b) / 1e5)
    total = float(b.sum())
    if abs(total) > slack:
        raise IncompatibleRHS(f"right-hand side sums to {total:.3e}, not zero")


def solve(h, b, x0=None, cfg=None):
    """Solve ``A x = b, sum(x) = 0`` with cycles over hierarchy ``h``.

    Parameters
    ----------
    h : Hierarchy
    b : ndarray
        Zero-sum right-hand side on the finest level.
    x0 : ndarray, optional
        Initial guess (zeros by default).
    cfg : CycleConfig, optional

    Returns
    -------
    x : ndarray
        Zero-mean approximate solution.
    stats : SolveStats
    """
    cfg = CycleConfig() if cfg is None else cfg
    A = h.finest
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (A.n,):
        raise DimensionMismatch(f"rhs length {len(b)} != n={A.n}")
    check_rhs(b)
    x = np.zeros(A.n) if x0 is None else np.array(x0, dtype=np.float64)
    if x.shape != (A.n,):
        raise DimensionMismatch(f"initial guess length {len(x)} != n={A.n}")
    x -= x.mean()
    stats = SolveStats()
    runner = _Cycle(h, cfg, stats)
    t0 = time.perf_counter()
    with metered(max(A.nnz_off, 1)) as meter:
        r0 = float(np.linalg.norm(b - mvm(A, x)))
        stats.residuals.append(r0)
        goal = r0 / cfg.target
        for _ in range(max(cfg.max_cycles, 1)):
            r = runner.visit(0, b, x, 1)
            x -= x.mean()
            if r is None:
                r = b - mvm(A, x)
            rn = float(np.linalg.norm(r))
            stats.residuals.append(rn)
            if not np.isfinite(rn) or rn > DIVERGENCE_FACTOR * max(r0, 1e-300):
                stats.solve_mvm = meter.mvm
                raise Diverged(f"residual grew from {r0:.3e} to {rn:.3e}", stats)
            if rn <= goal:
                break
    stats.solve_mvm = meter.mvm
    stats.seconds = time.perf_counter() - t0
    stats.final_residual = float(np.linalg.norm(b - A.offdiag @ x - A.diag * x))
    return x, stats
