import warnings

import numpy as np
import pytest
import scipy.sparse as sp

from lamg import CycleConfig, Solver, lamg_solve
from lamg.errors import DimensionMismatch, EmptyGraph, IncompatibleRHS
from lamg.generators import grid_5pt, random_connected
from lamg.graph import EdgeList, SparseLaplacian, assemble_laplacian, mvm
from oracles import FIG1_EDGES, laplacian_of, random_edges


def disjoint_union(*parts):
    edges, offset = [], 0
    for A in parts:
        e = A.to_edge_list()
        edges += [(u + offset, v + offset, w) for u, v, w in zip(e.u, e.v, e.w)]
        offset += A.n
    return laplacian_of(offset, edges)


class TestComponents:
    def test_per_component_zero_mean(self, rng):
        A = disjoint_union(grid_5pt(20), random_connected(300, 300, rng), grid_5pt(4))
        solver = Solver(A, rng_seed=0)
        assert solver.split.count == 3
        b = np.zeros(A.n)
        for idx in solver.split.nodes:
            piece = rng.standard_normal(len(idx))
            b[idx] = piece - piece.mean()
        report = solver.solve(b, rng.standard_normal(A.n))
        assert report.residuals[0] / report.residuals[-1] >= 1e10
        for idx in solver.split.nodes:
            assert abs(report.x[idx].sum()) <= 1e-10 * len(idx) * np.abs(report.x).max()
        assert np.linalg.norm(b - mvm(A, report.x)) <= 1e-9 * np.linalg.norm(b)

    def test_component_rhs_checked(self):
        A = disjoint_union(grid_5pt(3), grid_5pt(3))
        b = np.zeros(18)
        b[0], b[9] = 1.0, -1.0
        with pytest.raises(IncompatibleRHS):
            Solver(A).solve(b)

    def test_isolated_nodes(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            A = assemble_laplacian(EdgeList.from_tuples(6, [(0, 1, 1.0), (1, 2, 1.0)]))
        b = np.array([1.0, 0.0, -1.0, 0.0, 0.0, 0.0])
        report = Solver(A).solve(b)
        assert np.allclose(report.x[:3], [1.0, 0.0, -1.0])
        assert np.array_equal(report.x[3:], np.zeros(3))
        assert report.components == 4


class TestReport:
    def test_figure_one_single_level(self, rng):
        A = laplacian_of(5, FIG1_EDGES)
        b = rng.uniform(-1, 1, 5)
        b -= b.mean()
        report = lamg_solve(A, b, rng.uniform(-1, 1, 5))
        assert report.L == 1
        assert report.digits >= 10
        stats = report.as_dict()
        for key in ("n", "m", "L", "acf", "setup_mvm", "solve_mvm", "setup_fraction",
                    "storage_per_edge", "setup_seconds", "solve_seconds", "backend"):
            assert key in stats

    def test_work_units_match_single_hierarchy(self, rng):
        A = grid_5pt(40)
        solver = Solver(A, rng_seed=0)
        assert solver.setup_mvm == pytest.approx(solver.hierarchies[0].setup_mvm)

    def test_errors(self):
        A = grid_5pt(4)
        with pytest.raises(DimensionMismatch):
            Solver(A).solve(np.zeros(3))
        with pytest.raises(DimensionMismatch):
            Solver(A).solve(np.zeros(16), np.zeros(2))
        with pytest.raises(EmptyGraph):
            Solver(SparseLaplacian(sp.csr_matrix((0, 0)), np.zeros(0), check=False))

    def test_dense_accuracy(self, rng):
        for _ in range(5):
            n = int(rng.integers(150, 500))
            A = laplacian_of(n, random_edges(rng, n, 2 * n))
            L = A.toarray()
            b = rng.standard_normal(n)
            b -= b.mean()
            x = lamg_solve(A, b, cfg=CycleConfig(), rng_seed=2).x
            xs = np.linalg.pinv(L) @ b
            err = x - xs
            assert np.sqrt(err @ L @ err) <= 1e-8 * np.sqrt(xs @ L @ xs)
