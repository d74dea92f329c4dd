"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` to see the lines. Grid solves are
shared through a module fixture; criteria 3 and 13 audit every hierarchy and
every recombination produced by the default-configuration runs in this module.
"""

import math
import warnings

import numpy as np
import pytest

from lamg.aggregation import (affinity_pair, aggregate, aggregate_type,
                              compute_affinities)
from lamg.cycle import CycleConfig, flat_mu, solve
from lamg.elimination import backsubstitute_elim, coarsen_rhs_elim, eliminate_rounds
from lamg.generators import (grid_13pt_4th, grid_5pt, grid_anis_rotated, path,
                             random_connected, two_hubs)
from lamg.graph import check_laplacian, energy
from lamg.hierarchy import setup, two_level
from lamg.smoothing import generate_tvs
from oracles import (FIG1_EDGES, FIG1_MATRIX, a_norm, dense_laplacian,
                     dense_two_level_cycle, laplacian_of, random_edges)

ROW_TOL = 1e-10


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def info(capsys, number, detail):
    with capsys.disabled():
        print(f"\n    info {number:2d}: {detail}")


def zero_sum(rng, n):
    b = rng.uniform(-1.0, 1.0, n)
    return b - b.mean()


class Suite:
    """Registry of hierarchies and solves built by the acceptance runs."""

    def __init__(self):
        self.hierarchies = []
        self.recombinations = []
        self.cache = {}

    def setup(self, A, positive, seed=0):
        h = setup(A, rng_seed=seed)
        self.hierarchies.append((h, positive))
        return h

    def solve(self, h, b, x0, cfg, audit=True):
        x, stats = solve(h, b, x0, cfg)
        if audit:
            self.recombinations.extend(stats.recombinations)
        return x, stats

    def grid(self, name, make, max_cycles=1000):
        """Default-configuration solve of a grid problem, cached by name."""
        if name not in self.cache:
            A = make()
            h = self.setup(A, positive=A.weights().min() > 0)
            rng = np.random.default_rng(1)
            b, x0 = zero_sum(rng, A.n), rng.uniform(-1.0, 1.0, A.n)
            _, stats = self.solve(h, b, x0, CycleConfig(max_cycles=max_cycles))
            self.cache[name] = (A, h, b, x0, stats)
        return self.cache[name]

    def variant(self, name, cfg):
        """Informational rerun of a cached grid problem with another cycle config."""
        A, h, b, x0, _ = self.cache[name]
        return solve(h, b, x0, cfg)[1]


GRIDS = {
    "5pt-64": lambda: grid_5pt(64),
    "5pt-128": lambda: grid_5pt(128),
    "5pt-256": lambda: grid_5pt(256),
    "13pt-128": lambda: grid_13pt_4th(128),
    "anis-agnostic-128": lambda: grid_anis_rotated(128),
    "anis-northeast-128": lambda: grid_anis_rotated(128, alignment="northeast"),
}


@pytest.fixture(scope="module")
def suite():
    return Suite()


@pytest.fixture(scope="module")
def grids(suite):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return {name: suite.grid(name, make) for name, make in GRIDS.items()}


@pytest.fixture(scope="module")
def random_runs(suite):
    """Criterion 10 solves; also feeds the closure and monotonicity audits."""
    rng = np.random.default_rng(10)
    out = []
    for _ in range(20):
        n = int(rng.integers(100, 501))
        A = random_connected(n, int(rng.integers(0, 2 * n)), rng)
        h = suite.setup(A, positive=True, seed=int(rng.integers(2**31)))
        b = zero_sum(rng, n)
        x, stats = suite.solve(h, b, None, CycleConfig(max_cycles=200))
        out.append((A, b, x, stats))
    return out


def test_criterion_01_example_laplacian(capsys):
    A = laplacian_of(5, FIG1_EDGES)
    ok = np.array_equal(A.toarray(), FIG1_MATRIX) and A.toarray().dtype == np.float64
    report(capsys, 1, ok, "5-node example assembles to the printed matrix bit-exactly")
    assert ok


def test_criterion_02_elimination_exactness(capsys):
    rng = np.random.default_rng(2)
    worst, done = 0.0, 0
    while done < 50:
        n = int(rng.integers(10, 201))
        edges = random_edges(rng, n, int(rng.integers(0, n)))
        A = laplacian_of(n, edges)
        level = eliminate_rounds(A)
        if level is None:
            continue
        b = zero_sum(rng, n)
        b_c = coarsen_rhs_elim(level, b)
        x_c = np.linalg.lstsq(level.A.toarray(), b_c, rcond=None)[0]
        x = backsubstitute_elim(level, x_c, b)
        res = np.linalg.norm(b - dense_laplacian(n, edges) @ x) / np.linalg.norm(b)
        worst = max(worst, res)
        done += 1
    ok = worst <= 1e-10
    report(capsys, 2, ok, f"50 graphs, worst relative residual {worst:.2e} (limit 1e-10)")
    assert ok


def test_criterion_04_two_level_oracle(capsys):
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(10, 101))
        edges = random_edges(rng, n, n)
        A = laplacian_of(n, edges)
        agg = aggregate(A, generate_tvs(A, 4, 3, rng)).aggregate
        n_c = int(agg.max()) + 1
        h = two_level(A, agg)
        L = dense_laplacian(n, edges)
        P = np.zeros((n, n_c))
        P[np.arange(n), agg] = 1.0
        b, x0 = zero_sum(rng, n), rng.uniform(-1, 1, n)
        expect = x0 - x0.mean()
        for cycles in range(1, 6):
            expect = dense_two_level_cycle(L, P, b, expect)
            cfg = CycleConfig(gamma=1.0, correction="flat", mu=1.0, max_cycles=cycles,
                              target=1e300)
            x, _ = solve(h, b, x0, cfg)
            worst = max(worst, np.abs(x - expect).max() / max(np.abs(expect).max(), 1.0))
    ok = worst <= 1e-10
    report(capsys, 4, ok, f"20 graphs x 5 cycles, worst iterate deviation {worst:.2e}")
    assert ok


def test_criterion_05_path_inflation(capsys):
    n = 100
    A = path(n)
    x = np.arange(n, dtype=float)
    agg = np.arange(n) // 2
    ratio = energy(A, aggregate_type(agg, x)[agg]) / energy(A, x)
    ok = 1.8 <= ratio <= 2.2
    report(capsys, 5, ok, f"E(PTx)/E(x) = {ratio:.4f} (range [1.8, 2.2])")
    assert ok


def test_criterion_06_flat_mu(capsys):
    ok = flat_mu(2) == 4.0 / 3.0
    report(capsys, 6, ok, f"flat_mu(2) = {flat_mu(2)!r}")
    assert ok


def test_criterion_07_poisson_mesh_independence(capsys, grids, suite):
    names = ["5pt-64", "5pt-128", "5pt-256"]
    acfs = [grids[k][4].acf for k in names]
    reds = [grids[k][4].reduction for k in names]
    converged = all(r >= 1e10 for r in reds)
    spread = max(acfs) - min(acfs)
    ok = converged and max(acfs) <= 0.35 and spread <= 0.15
    report(capsys, 7, ok, "5pt ACF " + " / ".join(f"{a:.3f}" for a in acfs)
           + f" at 64/128/256 (limit 0.35), spread {spread:.3f} (limit 0.15), "
           + f"converged {converged}")
    for mode, cfg in (("flat mu=4/3", CycleConfig(correction="flat", max_cycles=1000)),
                      ("energy recombination",
                       CycleConfig(recombination="energy", max_cycles=1000))):
        vals = [suite.variant(k, cfg).acf for k in names]
        info(capsys, 7, f"{mode}: ACF " + " / ".join(f"{a:.3f}" for a in vals))
    assert ok


def test_criterion_08_thirteen_point(capsys, grids, suite):
    stats = grids["13pt-128"][4]
    ok = stats.reduction >= 1e10 and stats.acf <= 0.5
    report(capsys, 8, ok, f"13pt 128^2 ACF {stats.acf:.3f} (limit 0.5), "
           f"{stats.cycles} cycles")
    for mode, cfg in (("flat mu=4/3", CycleConfig(correction="flat", max_cycles=1000)),
                      ("energy recombination",
                       CycleConfig(recombination="energy", max_cycles=1000))):
        info(capsys, 8, f"{mode}: ACF {suite.variant('13pt-128', cfg).acf:.3f}")
    assert ok


def test_criterion_09_anisotropic(capsys, grids):
    parts, ok = [], True
    for name in ("anis-agnostic-128", "anis-northeast-128"):
        stats = grids[name][4]
        ok &= stats.reduction >= 1e10 and stats.acf < 0.97
        parts.append(f"{name} ACF {stats.acf:.3f} in {stats.cycles} cycles")
    report(capsys, 9, ok, "; ".join(parts) + " (limit 0.97)")
    assert ok


def test_criterion_10_dense_accuracy(capsys, random_runs):
    worst = 0.0
    for A, b, x, _ in random_runs:
        L = A.toarray()
        xs = np.linalg.pinv(L) @ b
        worst = max(worst, a_norm(L, x - xs) / a_norm(L, xs))
    ok = worst <= 1e-8
    report(capsys, 10, ok, f"20 graphs, worst relative A-norm error {worst:.2e} (limit 1e-8)")
    assert ok


def test_criterion_11_work_and_storage(capsys, grids):
    work = {k: v[4].mvm_per_cycle() for k, v in grids.items()}
    storage = {k: v[1].storage_per_edge() for k, v in grids.items()}
    ok = max(work.values()) <= 15 and max(storage.values()) <= 6
    report(capsys, 11, ok, f"max work/cycle {max(work.values()):.2f} MVM (limit 15), "
           f"max storage/edge {max(storage.values()):.2f} (limit 6)")
    assert ok


def test_criterion_12_affinities(capsys):
    rng = np.random.default_rng(12)
    bad = 0
    for _ in range(1000):
        n = int(rng.integers(3, 25))
        K = int(rng.integers(2, 9))
        A = laplacian_of(n, random_edges(rng, n, n))
        X = rng.uniform(-1, 1, (n, K))
        view = compute_affinities(A, X)
        C = view.matrix(A)
        bad += not (np.all(C.data >= 0) and np.all(C.data <= 1 + 1e-12))
        bad += abs(C - C.T).max() > 1e-15
        u = int(rng.integers(0, n))
        Y = X.copy()
        Y[u] *= rng.choice([-1.0, 1.0]) * 10 ** rng.uniform(-3, 3)
        bad += not np.allclose(compute_affinities(A, Y).c, view.c, rtol=0, atol=1e-13)
        jj = int(rng.integers(0, A.nnz_off))
        v = int(A.indices[jj])
        w = int(np.searchsorted(A.indptr, jj, side="right") - 1)
        bad += abs(view.c[jj] - affinity_pair(X[w], X[v])) > 1e-13
    A = two_hubs(50)
    agg = aggregate(A, generate_tvs(A, 4, 3, rng)).aggregate
    hubs_apart = agg[0] != agg[1]
    ok = bad == 0 and hubs_apart
    report(capsys, 12, ok, f"1000 TV sets, {bad} invariant violations; "
           f"two hubs in distinct aggregates: {hubs_apart}")
    assert ok


def test_criterion_03_laplacian_closure(capsys, grids, random_runs, suite):
    levels, bad = 0, []
    for h, positive in suite.hierarchies:
        for lev in h.levels[1:]:
            levels += 1
            A = lev.A
            M = A.tocsr()
            rows = np.abs(np.asarray(M.sum(axis=1)).ravel())
            scale = max(float(A.diag.max()), 1.0)
            sym = abs(M - M.T).max() if M.nnz else 0.0
            if rows.max() > ROW_TOL * scale or sym != 0:
                bad.append(("closure", lev.kind, A.n))
            if positive and A.nnz_off and A.data.max() > 0:
                bad.append(("sign", lev.kind, A.n))
            try:
                check_laplacian(A)
            except Exception as exc:  # report every failing level
                bad.append((type(exc).__name__, lev.kind, A.n))
    ok = not bad and levels > 0
    report(capsys, 3, ok, f"{len(suite.hierarchies)} hierarchies, {levels} coarse "
           f"operators audited, {len(bad)} violations")
    assert ok, bad[:5]


def test_criterion_13_recombination_monotone(capsys, grids, random_runs, suite):
    pairs = suite.recombinations
    increases = [(a, b) for a, b in pairs if not b <= a]
    ok = not increases and len(pairs) > 0
    report(capsys, 13, ok, f"{len(pairs)} recombinations audited, "
           f"{len(increases)} residual increases")
    assert ok
