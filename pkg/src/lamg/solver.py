"""Top-level driver: split components, build hierarchies, solve and report."""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._backend import BACKEND
from .cycle import CycleConfig, acf_estimate, check_rhs, solve
from .errors import DimensionMismatch, EmptyGraph
from .graph import connected_components
from .hierarchy import hierarchy_stats, setup


@dataclass
class SolveReport:
    """Whole-graph result of a solve.

    Work is in MVM-equivalents of the full input graph (``2 m`` stored
    off-diagonal entries per MVM).
    """

    x: np.ndarray
    n: int
    m: int
    L: int
    components: int
    residuals: list
    setup_mvm: float
    solve_mvm: float
    setup_seconds: float
    solve_seconds: float
    storage_per_edge: float
    final_residual: float
    recombinations: list = field(default_factory=list)

    @property
    def cycles(self):
        return len(self.residuals) - 1

    @property
    def acf(self):
        return acf_estimate(self.residuals)

    @property
    def digits(self):
        """``log10(r_0 / r_p)``."""
        r0, rp = self.residuals[0], self.residuals[-1]
        if r0 == 0:
            return 0.0
        return math.inf if rp == 0 else math.log10(r0 / rp)

    def as_dict(self):
        total = self.setup_mvm + self.solve_mvm
        return {
            "n": self.n,
            "m": self.m,
            "L": self.L,
            "components": self.components,
            "cycles": self.cycles,
            "acf": self.acf,
            "setup_mvm": self.setup_mvm,
            "solve_mvm": self.solve_mvm,
            "setup_fraction": self.setup_mvm / total if total else 0.0,
            "storage_per_edge": self.storage_per_edge,
            "initial_residual": self.residuals[0],
            "final_residual": self.final_residual,
            "residual_reduction": (self.residuals[0] / self.residuals[-1]
                                   if self.residuals[-1] else math.inf),
            "setup_seconds": self.setup_seconds,
            "solve_seconds": self.solve_seconds,
            "total_seconds": self.setup_seconds + self.solve_seconds,
            "backend": BACKEND,
        }


class Solver:
    """Laplacian solver for possibly disconnected graphs.

    Each connected component gets its own hierarchy; isolated nodes are
    trivial components with zero solution.

    Parameters
    ----------
    A : SparseLaplacian
    gamma : float
        Cycle index at fine levels.
    rng_seed : int, optional
        Seed for test vectors and relaxation probes.
    """

    def __init__(self, A, gamma=1.5, rng_seed=None):
        if A.n == 0:
            raise EmptyGraph("graph has no nodes")
        self.A = A
        self.gamma = gamma
        t0 = time.perf_counter()
        self.split = connected_components(A)
        self.hierarchies = [setup(part, gamma, rng_seed) if part.n > 1 else None
                            for part in self.split.parts]
        self.setup_seconds = time.perf_counter() - t0
        self._setup_entries = sum(h.setup_mvm * h.finest.nnz_off
                                  for h in self.hierarchies if h is not None)

    @property
    def setup_mvm(self):
        """Setup work in MVM-equivalents of the whole graph."""
        return self._setup_entries / max(self.A.nnz_off, 1)

    @property
    def L(self):
        return max((h.L for h in self.hierarchies if h is not None), default=1)

    def storage_per_edge(self):
        m = self.A.m
        stored = sum(lev.m for h in self.hierarchies if h is not None for lev in h.levels)
        return stored / m if m else 1.0

    def stats(self):
        """Per-component hierarchy statistics."""
        return [hierarchy_stats(h) for h in self.hierarchies if h is not None]

    def solve(self, b, x0=None, cfg=None):
        """Solve ``A x = b`` with ``x`` of zero mean on every component.

        Returns
        -------
        SolveReport
        """
        cfg = CycleConfig(gamma=self.gamma) if cfg is None else cfg
        A, split = self.A, self.split
        b = np.asarray(b, dtype=np.float64)
        if b.shape != (A.n,):
            raise DimensionMismatch(f"rhs length {len(b)} != n={A.n}")
        if x0 is not None:
            x0 = np.asarray(x0, dtype=np.float64)
            if x0.shape != (A.n,):
                raise DimensionMismatch(f"initial guess length {len(x0)} != n={A.n}")
        for idx in split.nodes:
            check_rhs(b[idx])
        pieces, histories, recomb = [], [], []
        solve_entries = 0.0
        t0 = time.perf_counter()
        for idx, h in zip(split.nodes, self.hierarchies):
            if h is None:
                pieces.append(np.zeros(len(idx)))
                histories.append([0.0])
                continue
            start = None if x0 is None else x0[idx]
            x, st = solve(h, b[idx], start, cfg)
            pieces.append(x)
            histories.append(st.residuals)
            recomb.extend(st.recombinations)
            solve_entries += st.solve_mvm * h.finest.nnz_off
        seconds = time.perf_counter() - t0
        x = split.assemble(pieces)
        cycles = max(len(r) for r in histories)
        residuals = [math.sqrt(sum(r[min(c, len(r) - 1)] ** 2 for r in histories))
                     for c in range(cycles)]
        unit = max(A.nnz_off, 1)
        final = float(np.linalg.norm(b - A.offdiag @ x - A.diag * x))
        return SolveReport(x, A.n, A.m, self.L, split.count, residuals,
                           self.setup_mvm, solve_entries / unit,
                           self.setup_seconds, seconds, self.storage_per_edge(),
                           final, recomb)


def lamg_solve(A, b, x0=None, cfg=None, rng_seed=None):
    """Set up and solve ``A x = b`` in one call; see :class:`Solver`."""
    cfg = CycleConfig() if cfg is None else cfg
    return Solver(A, cfg.gamma, rng_seed).solve(b, x0, cfg)
