import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lamg.elimination import (EliminationLevel, backsubstitute_elim,
                              coarsen_rhs_elim, eliminate_rounds, schur_reduce,
                              select_low_degree_set)
from lamg.errors import SingularDiagonal
from lamg.generators import complete, path, star
from lamg.graph import check_laplacian, connected_components
from oracles import dense_laplacian, laplacian_of, random_edges


def dense_schur(L, F, C):
    return L[np.ix_(C, C)] - L[np.ix_(C, F)] @ np.linalg.solve(L[np.ix_(F, F)], L[np.ix_(F, C)])


def dense_prolongation(L, F, C):
    """``P`` with ``x_F = -A_FF^{-1} A_FC x_C`` and identity on ``C``."""
    n = len(F) + len(C)
    P = np.zeros((n, len(C)))
    P[C, np.arange(len(C))] = 1.0
    P[F] = -np.linalg.solve(L[np.ix_(F, F)], L[np.ix_(F, C)])
    return P


def binary_tree(levels):
    n = 2 ** levels - 1
    return laplacian_of(n, [(i, (i - 1) // 2, 1.0) for i in range(1, n)])


class TestSelection:
    def test_path_sweep(self):
        F, C = select_low_degree_set(path(5))
        assert F.tolist() == [0, 2, 4] and C.tolist() == [1, 3]

    def test_complete_graph_empty(self):
        F, C = select_low_degree_set(complete(10))
        assert len(F) == 0 and len(C) == 10

    def test_star(self):
        # leaves are 0..7, the center is node 8
        F, C = select_low_degree_set(star(9))
        assert len(F) == 8 and C.tolist() == [8]

    @given(st.integers(0, 2**31))
    def test_independent_and_low_degree(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 60))
        A = laplacian_of(n, random_edges(rng, n, int(rng.integers(0, 3 * n))))
        F, C = select_low_degree_set(A)
        assert np.all(A.degrees()[F] <= 4)
        assert A.offdiag[F][:, F].count_nonzero() == 0
        assert sorted(np.concatenate([F, C]).tolist()) == list(range(n))


class TestSchur:
    def test_path_three(self):
        A = path(3)
        A_c, _ = schur_reduce(A, [1], [0, 2])
        assert np.allclose(A_c.toarray(), [[0.5, -0.5], [-0.5, 0.5]])

    def test_empty_f(self):
        A = path(4)
        A_c, _ = schur_reduce(A, [], np.arange(4))
        assert np.array_equal(A_c.toarray(), A.toarray())

    def test_dense_oracle(self, rng):
        for _ in range(10):
            n = int(rng.integers(10, 100))
            edges = random_edges(rng, n, int(rng.integers(0, 2 * n)))
            A = laplacian_of(n, edges)
            F, C = select_low_degree_set(A)
            A_c, _ = schur_reduce(A, F, C)
            expect = dense_schur(dense_laplacian(n, edges), F, C)
            assert np.allclose(A_c.toarray(), expect, rtol=1e-12, atol=1e-12 * np.abs(expect).max())
            check_laplacian(A_c)
            assert np.all(A_c.weights() > 0)

    def test_not_independent(self):
        with pytest.raises(ValueError):
            schur_reduce(path(3), [0, 1], [2])

    def test_zero_diagonal(self):
        A = path(3)
        A.diag[1] = 0.0
        with pytest.raises(SingularDiagonal):
            schur_reduce(A, [1], [0, 2])

    def test_edge_growth_bound(self, rng):
        for _ in range(10):
            n = int(rng.integers(20, 120))
            A = laplacian_of(n, random_edges(rng, n, n))
            F, C = select_low_degree_set(A)
            A_c, _ = schur_reduce(A, F, C)
            assert A_c.m <= A.m + 2 * len(F)


class TestRounds:
    def test_long_path_shrinks_geometrically(self):
        level = eliminate_rounds(path(1025))
        sizes = [st.n for st in level.stages] + [level.A.n]
        assert len(sizes) > 3
        for before, after in zip(sizes, sizes[1:]):
            assert after <= 0.6 * before

    def test_complete_graph_skipped(self):
        assert eliminate_rounds(complete(50)) is None

    def test_binary_tree_leaves(self):
        A = binary_tree(7)
        level = eliminate_rounds(A)
        leaves = np.flatnonzero(A.degrees() == 1)
        assert set(leaves) <= set(level.stages[0].F)

    def test_stages_stay_connected_laplacians(self, rng):
        A = laplacian_of(150, random_edges(rng, 150, 40))
        level = eliminate_rounds(A)
        current = A
        for st in level.stages:
            assert current.offdiag[st.F][:, st.F].count_nonzero() == 0
            current, _ = schur_reduce(current, st.F, st.C)
            check_laplacian(current)
            assert connected_components(current).count == 1
        assert np.allclose(current.toarray(), level.A.toarray())


class TestTransfers:
    def test_zero_rhs(self):
        level = eliminate_rounds(path(9))
        assert np.array_equal(coarsen_rhs_elim(level, np.zeros(9)), np.zeros(level.A.n))

    def test_path_rhs_example(self):
        A = path(3)
        _, stage = schur_reduce(A, [1], [0, 2])
        assert np.allclose(coarsen_rhs_elim(stage, np.array([1.0, 0.0, -1.0])), [1.0, -1.0])

    def test_path_backsubstitution_example(self):
        _, stage = schur_reduce(path(3), [1], [0, 2])
        x = backsubstitute_elim(stage, np.array([0.5, -0.5]), np.array([1.0, 0.0, -1.0]))
        assert x.tolist() == [0.5, 0.0, -0.5]

    def test_dense_restriction_oracle(self, rng):
        edges = random_edges(rng, 60, 30)
        A = laplacian_of(60, edges)
        F, C = select_low_degree_set(A)
        _, stage = schur_reduce(A, F, C)
        P = dense_prolongation(dense_laplacian(60, edges), F, C)
        b = rng.standard_normal(60)
        assert np.allclose(coarsen_rhs_elim(stage, b), P.T @ b, rtol=1e-12, atol=1e-12)

    def test_constant_preserved(self):
        level = eliminate_rounds(path(17))
        x = backsubstitute_elim(level, np.full(level.A.n, 2.5), np.zeros(17))
        assert np.allclose(x, 2.5, rtol=0, atol=1e-14)

    def test_exact_round_trip(self, rng):
        for _ in range(50):
            n = int(rng.integers(5, 200))
            A = laplacian_of(n, random_edges(rng, n, int(rng.integers(0, n))))
            level = eliminate_rounds(A)
            if level is None:
                continue
            b = rng.standard_normal(n)
            b -= b.mean()
            b_c = coarsen_rhs_elim(level, b)
            x_c = np.linalg.lstsq(level.A.toarray(), b_c, rcond=None)[0]
            x = backsubstitute_elim(level, x_c, b)
            res = np.linalg.norm(b - A.toarray() @ x)
            assert res <= 1e-10 * np.linalg.norm(b)

    def test_level_composes_coarse_nodes(self):
        level = eliminate_rounds(path(33))
        assert isinstance(level, EliminationLevel)
        assert len(level.coarse_nodes) == level.A.n
        assert np.all(np.diff(level.coarse_nodes) > 0)
