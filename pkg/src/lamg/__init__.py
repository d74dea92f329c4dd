"""Lean algebraic multigrid solver for graph Laplacian systems."""

from ._backend import BACKEND
from .cycle import CycleConfig, SolveStats, flat_mu, recombine, solve
from .errors import (DimensionMismatch, Diverged, EmptyGraph, IncompatibleRHS,
                     LamgError, MatrixMarketError, NotALaplacian, SingularDiagonal)
from .graph import (EdgeList, SparseLaplacian, assemble_laplacian,
                    connected_components, energy, mvm)
from .hierarchy import Hierarchy, hierarchy_stats, setup
from .problem_io import (load_laplacian, make_rhs, read_matrix_market,
                         read_vector, write_matrix_market, write_vector)
from .solver import Solver, SolveReport, lamg_solve

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CycleConfig", "DimensionMismatch", "Diverged", "EdgeList",
    "EmptyGraph", "Hierarchy", "IncompatibleRHS", "LamgError",
    "MatrixMarketError", "NotALaplacian", "SingularDiagonal", "SolveReport",
    "SolveStats", "Solver", "SparseLaplacian", "assemble_laplacian",
    "connected_components", "energy", "flat_mu", "hierarchy_stats",
    "lamg_solve", "load_laplacian", "make_rhs", "mvm", "read_matrix_market",
    "read_vector", "recombine", "setup", "solve", "write_matrix_market",
    "write_vector",
]
