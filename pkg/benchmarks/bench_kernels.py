"""Compare the compiled and pure-Python kernel backends.

Times each hot kernel on a 5-point grid with both backends, checks that the
outputs are bit-identical, and prints one row per kernel.

Usage::

    python3 benchmarks/bench_kernels.py --n 48 --repeat 3
"""

import argparse
import time

import numpy as np

from lamg import _pykernels
from lamg.aggregation import compute_affinities, nodal_terms, weak_edge_mask
from lamg.generators import grid_5pt
from lamg.smoothing import generate_tvs

try:
    from lamg import _kernels
except ImportError:  # extension not built
    _kernels = None


def _cases(A, K, rng):
    n = A.n
    b = rng.standard_normal(n)
    b -= b.mean()
    x1 = np.ascontiguousarray(rng.standard_normal(n))
    xk = np.ascontiguousarray(rng.standard_normal((n, K)))
    tvs = generate_tvs(A, K, 3, rng_seed=1)
    X = tvs.X
    aff = compute_affinities(A, X).c
    active = weak_edge_mask(A)
    B, C = nodal_terms(A, X)
    order = np.arange(n, dtype=np.intp)

    def gs(kern):
        x = xk.copy()
        kern.gs_sweeps(A.indptr, A.indices, A.data, A.diag, x, x, 3, False, True)
        return x

    def gs_res(kern):
        x, r = x1.copy(), np.empty(n)
        kern.gs_sweep_residual(A.indptr, A.indices, A.data, A.diag, b, x, r)
        return np.concatenate([x, r])

    def low_degree(kern):
        return kern.low_degree_set(A.indptr, A.indices, 4)

    def agg(kern):
        seed_of = np.full(n, -1, dtype=np.intp)
        kern.aggregation_stage(A.indptr, A.indices, active.view(np.uint8), aff, A.diag,
                               B, C, X, order, seed_of, np.inf, 2.5)
        return seed_of

    return {"gs_sweeps(K=%d,x3)" % K: gs, "gs_sweep_residual": gs_res,
            "low_degree_set": low_degree, "aggregation_stage": agg}


def _time(fn, kern, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(kern)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=48, help="grid side")
    parser.add_argument("--K", type=int, default=4, help="test vectors")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    A = grid_5pt(args.n)
    rng = np.random.default_rng(0)
    print(f"grid {args.n}x{args.n}: n={A.n} m={A.m}")
    if _kernels is None:
        print("compiled extension not built; timing the Python backend only")
    print(f"{'kernel':<24}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}{'identical':>11}")
    for name, fn in _cases(A, args.K, rng).items():
        t_py, out_py = _time(fn, _pykernels, args.repeat)
        if _kernels is None:
            print(f"{name:<24}{t_py:>12.4f}{'-':>12}{'-':>10}{'-':>11}")
            continue
        t_cy, out_cy = _time(fn, _kernels, args.repeat)
        same = np.array_equal(out_py, out_cy)
        print(f"{name:<24}{t_py:>12.4f}{t_cy:>12.5f}{t_py / t_cy:>10.0f}{str(same):>11}")


if __name__ == "__main__":
    main()
