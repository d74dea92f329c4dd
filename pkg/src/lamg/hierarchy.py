"""Setup phase: alternate elimination and aggregation until the coarsest level."""

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .aggregation import AggregationLevel, aggregate, galerkin_coarse_operator
from .elimination import EliminationLevel, eliminate_rounds
from .errors import LamgError
from .graph import SparseLaplacian, connected_components
from .smoothing import generate_tvs, probe_relaxation
from .work import charge, metered

COARSEST_SIZE = 150
NO_PROGRESS_ALPHA = 0.95
TV_SWEEPS = 3
FINEST_K = 4
MAX_K = 10
PRE_SWEEPS, POST_SWEEPS = 1, 2


@dataclass
class Level:
    """One level of the hierarchy.

    ``kind`` says how the operator was produced from its parent
    (``'finest'``, ``'elimination'`` or ``'aggregation'``); ``transfer`` holds
    the corresponding :class:`EliminationLevel` / :class:`AggregationLevel`.
    ``gamma``, ``nu1`` and ``nu2`` drive the cycle from this level to the next.
    """

    A: SparseLaplacian
    kind: str
    transfer: object = None
    gamma: float = 1.0
    nu1: int = 0
    nu2: int = 0
    relax_fast: bool = False

    @property
    def n(self):
        return self.A.n

    @property
    def m(self):
        return self.A.m


class CoarsestSolver:
    """Direct solve of the bordered system ``[[A, 1], [1^T, 0]]`` per component."""

    def __init__(self, A):
        self.n = A.n
        split = connected_components(A)
        self.nodes = split.nodes
        self.factors = []
        self.cost = 0
        for part in split.parts:
            k = part.n
            if k == 1:
                self.factors.append(None)
                continue
            ones = np.ones((k, 1))
            K = sp.bmat([[part.tocsr(), ones], [ones.T, None]], format="csc")
            lu = spla.splu(K, permc_spec="COLAMD")
            self.factors.append(lu)
            self.cost += lu.L.nnz + lu.U.nnz

    def solve(self, b):
        charge(self.cost)
        x = np.zeros(self.n)
        for idx, lu in zip(self.nodes, self.factors):
            if lu is not None:
                x[idx] = lu.solve(np.append(b[idx], 0.0))[:-1]
        return x


@dataclass
class Hierarchy:
    levels: list
    gamma: float = 1.5
    setup_mvm: float = 0.0
    setup_seconds: float = 0.0
    warnings: list = field(default_factory=list)
    coarsest: CoarsestSolver = None

    @property
    def L(self):
        return len(self.levels)

    @property
    def finest(self):
        return self.levels[0].A

    def storage_per_edge(self):
        m1 = self.levels[0].m
        return sum(lev.m for lev in self.levels) / m1 if m1 else 1.0

    def stats(self):
        return hierarchy_stats(self)


def level_cycle_index(h, l, gamma=None):
    """Cycle index of level ``l`` (0-based) towards level ``l + 1``."""
    gamma = h.gamma if gamma is None else gamma
    levels = h.levels
    child = levels[l + 1]
    if child.kind == "elimination":
        return 1.0
    m_l, m_1, m_c = levels[l].m, levels[0].m, child.m
    if m_l > 0.1 * m_1:
        return float(gamma)
    if m_c == 0:
        return 2.0
    return float(min(2.0, 0.7 * m_l / m_c))


def assign_cycle_parameters(h):
    for l, lev in enumerate(h.levels[:-1]):
        lev.gamma = level_cycle_index(h, l)
        if h.levels[l + 1].kind == "elimination":
            lev.nu1 = lev.nu2 = 0
        else:
            lev.nu1, lev.nu2 = PRE_SWEEPS, POST_SWEEPS
    last = h.levels[-1]
    last.gamma, last.nu1, last.nu2 = 1.0, 0, 0


def tv_count(aggregation_index):
    """TV count for the ``i``-th aggregation (0-based): 4, 6, 8, 10, 10, ..."""
    return min(MAX_K, FINEST_K + 2 * aggregation_index)


def setup(A, gamma=1.5, rng_seed=None, coarsest_size=COARSEST_SIZE,
          probe=True, elimination=True):
    """Build a multilevel hierarchy for a connected Laplacian ``A``.

    Parameters
    ----------
    A : SparseLaplacian
        Connected graph Laplacian; split components first.
    gamma : float
        Cycle index used at fine levels.
    rng_seed : int or numpy Generator, optional
        Seed for test vectors and relaxation probes.
    coarsest_size : int
        Stop coarsening once a level has at most this many nodes.
    probe, elimination : bool
        Disable the fast-relaxation stop or low-degree elimination.

    Returns
    -------
    Hierarchy
    """
    if connected_components(A).count > 1:
        raise LamgError("setup requires a connected graph; split components first")
    rng = np.random.default_rng(rng_seed)
    t0 = time.perf_counter()
    notes = []
    levels = [Level(A, "finest")]
    n_agg = 0
    with metered(max(A.nnz_off, 1)) as meter:
        current = A
        while current.n > coarsest_size:
            if elimination:
                elim = eliminate_rounds(current)
                if elim is not None:
                    levels.append(Level(elim.A, "elimination", elim))
                    current = elim.A
                    if current.n <= coarsest_size:
                        break
            if probe and probe_relaxation(current, rng_seed=rng).is_fast():
                levels[-1].relax_fast = True
                break
            agg = None
            for attempt in range(2):
                K = tv_count(n_agg) if attempt == 0 else MAX_K
                tvs = generate_tvs(current, K, TV_SWEEPS, rng)
                agg = aggregate(current, tvs, gamma)
                if agg.alpha <= NO_PROGRESS_ALPHA:
                    break
            if agg.alpha > NO_PROGRESS_ALPHA:
                notes.append(f"aggregation stalled at n={current.n} "
                             f"(alpha={agg.alpha:.3f}); level made coarsest")
                break
            levels.append(Level(agg.A, "aggregation", agg))
            current = agg.A
            n_agg += 1
        coarsest = levels[-1]
        solver = None
        if not coarsest.relax_fast:
            solver = CoarsestSolver(coarsest.A)
        if coarsest.n > 10 * coarsest_size and not coarsest.relax_fast:
            notes.append(f"direct solve on a large coarsest level (n={coarsest.n})")
    for note in notes:
        warnings.warn(note, stacklevel=2)
    h = Hierarchy(levels, gamma, meter.mvm, time.perf_counter() - t0, notes, solver)
    assign_cycle_parameters(h)
    return h


def two_level(A, aggregate_of, gamma=1.0):
    """Hierarchy with one aggregation level from a given partition (direct coarsest)."""
    aggregate_of = np.asarray(aggregate_of, dtype=np.intp)
    n_c = int(aggregate_of.max()) + 1
    A_c = galerkin_coarse_operator(A, aggregate_of, n_c)
    agg = AggregationLevel(aggregate_of, n_c, A_c)
    levels = [Level(A, "finest"), Level(A_c, "aggregation", agg)]
    h = Hierarchy(levels, gamma, coarsest=CoarsestSolver(A_c))
    assign_cycle_parameters(h)
    levels[0].gamma = gamma
    return h


def hierarchy_stats(h):
    """JSON-ready summary of a hierarchy."""
    levels = []
    for i, lev in enumerate(h.levels):
        entry = {"level": i + 1, "kind": lev.kind, "n": lev.n, "m": lev.m,
                 "gamma": lev.gamma, "nu1": lev.nu1, "nu2": lev.nu2}
        if isinstance(lev.transfer, AggregationLevel):
            entry["alpha"] = lev.transfer.alpha
            entry["stage"] = lev.transfer.stage
        elif isinstance(lev.transfer, EliminationLevel):
            entry["rounds"] = len(lev.transfer.stages)
        levels.append(entry)
    stored = sum(lev.A.nnz_off + lev.n for lev in h.levels)
    return {
        "L": h.L,
        "n": h.levels[0].n,
        "m": h.levels[0].m,
        "levels": levels,
        "coarsest_relax_fast": bool(h.levels[-1].relax_fast),
        "storage_per_edge": h.storage_per_edge(),
        "stored_entries": int(stored),
        "setup_mvm": h.setup_mvm,
        "setup_seconds": h.setup_seconds,
        "warnings": list(h.warnings),
    }
