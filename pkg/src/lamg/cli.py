"""Command-line interface: ``lamg {solve,gen,info,bench}``."""

import argparse
import csv
import json
import math
import sys
import warnings

import numpy as np

from . import generators
from .cycle import CycleConfig
from .errors import Diverged, IncompatibleRHS, LamgError, MatrixMarketError
from .problem_io import (KINDS, NEGATIVE_POLICIES, load_laplacian, make_rhs,
                         write_matrix_market, write_vector)
from .solver import Solver

EXIT_INPUT, EXIT_SOLVE = 2, 3
BENCH_HEADER = ["name", "n", "m", "L", "t_setup", "t_solve", "t_total",
                "acf", "storage_per_edge", "pct_setup"]
FAMILIES = ("grid5", "grid13", "anis", "path", "star", "complete", "two_hubs",
            "grid_plus_link")


class _Failure(Exception):
    def __init__(self, code, kind, message, extra=None):
        super().__init__(message)
        self.code, self.kind, self.extra = code, kind, extra or {}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _dump(obj, path=None, stream=None):
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as out:
            out.write(text + "\n")
    if stream is not None:
        stream.write(text + "\n")


def generate(family, n=64, alignment="agnostic", alpha=-math.pi / 4, eps=1e-2,
             u=0, v=None):
    """Build a generator family instance by CLI name."""
    if family == "grid5":
        return generators.grid_5pt(n)
    if family == "grid13":
        return generators.grid_13pt_4th(n)
    if family == "anis":
        return generators.grid_anis_rotated(n, alpha, eps, alignment)
    if family == "grid_plus_link":
        return generators.grid_plus_link(n, u, n * n - 1 if v is None else v)
    if family == "two_hubs":
        return generators.two_hubs(n)
    if family in ("path", "star", "complete"):
        return generators.structured_families(family, n=n)
    raise ValueError(f"unknown family {family!r}")


def parse_problem(spec, kind="auto", negative_policy="absolute-if-large-negative"):
    """Load ``spec``: a Matrix Market path or ``family:N[:alignment]``.

    Returns ``(name, A)``.
    """
    family, _, rest = spec.partition(":")
    if family in FAMILIES and rest:
        size, _, option = rest.partition(":")
        try:
            n = int(size)
        except ValueError:
            raise _Failure(EXIT_INPUT, "UsageError", f"bad size in problem {spec!r}") from None
        extra = {"alignment": option} if family == "anis" and option else {}
        try:
            return spec, generate(family, n, **extra)
        except ValueError as exc:
            raise _Failure(EXIT_INPUT, "UsageError", str(exc)) from None
    A, _ = load_laplacian(spec, kind, negative_policy)
    return spec, A


def _problem_of(args):
    if args.matrix:
        return parse_problem(args.matrix, args.kind, args.negative_policy)
    if args.problem:
        return parse_problem(args.problem, args.kind, args.negative_policy)
    raise _Failure(EXIT_INPUT, "UsageError", "one of --matrix or --problem is required")


def _cycle_config(args):
    try:
        return CycleConfig(gamma=args.gamma, correction=args.correction, mu=args.mu,
                           max_cycles=args.max_cycles, target=args.tol_reduction,
                           rng_seed=args.seed, recombination=args.recombination)
    except ValueError as exc:
        raise _Failure(EXIT_INPUT, "UsageError", str(exc)) from None


def per_edge_measures(setup_mvm, solve_mvm, r0, rp):
    """Per-edge performance measures in MVM-equivalents.

    Returns ``(t_setup, t_solve, t_total, pct_setup)`` where ``t_solve`` is
    solve work per significant figure ``log10(r0 / rp)`` and
    ``t_total = t_setup + 10 t_solve``.
    """
    digits = math.log10(r0 / rp) if r0 > 0 and rp > 0 else math.nan
    t_solve = solve_mvm / digits if digits and digits > 0 else math.nan
    t_total = setup_mvm + 10.0 * t_solve
    pct = 100.0 * setup_mvm / t_total if t_total > 0 else math.nan
    return setup_mvm, t_solve, t_total, pct


def cmd_solve(args):
    name, A = _problem_of(args)
    cfg = _cycle_config(args)
    b = make_rhs(A.n, args.rhs or f"random:{args.seed}", args.seed)
    x0 = None
    if args.initial == "random":
        x0 = np.random.default_rng(args.seed).uniform(-1.0, 1.0, A.n)
    solver = Solver(A, cfg.gamma, args.seed)
    try:
        report = solver.solve(b, x0, cfg)
    except Diverged as exc:
        raise _Failure(EXIT_SOLVE, "Diverged", str(exc)) from None
    stats = report.as_dict()
    r0, rp = report.residuals[0], report.residuals[-1]
    stats.update(problem=name, converged=rp <= r0 / cfg.target,
                 config={"gamma": cfg.gamma, "correction": cfg.correction, "mu": cfg.mu,
                         "max_cycles": cfg.max_cycles, "target": cfg.target,
                         "recombination": cfg.recombination, "seed": args.seed})
    if args.out_x:
        write_vector(args.out_x, report.x)
    _dump(stats, args.stats, sys.stdout)
    if not stats["converged"]:
        raise _Failure(EXIT_SOLVE, "NotConverged",
                       f"residual reduced by {stats['residual_reduction']:.3e} "
                       f"in {report.cycles} cycles; target {cfg.target:.3e}")
    return 0


def cmd_gen(args):
    try:
        A = generate(args.family, args.n, args.alignment, args.alpha, args.eps,
                     args.u, args.v)
    except ValueError as exc:
        raise _Failure(EXIT_INPUT, "UsageError", str(exc)) from None
    comment = f"lamg gen --family {args.family} --n {args.n}"
    write_matrix_market(args.out if args.out else sys.stdout, A, comment)
    return 0


def cmd_info(args):
    name, A = _problem_of(args)
    solver = Solver(A, args.gamma, args.seed)
    parts = solver.stats()
    main_part = max(parts, key=lambda s: s["n"]) if parts else {"levels": []}
    info = {
        "problem": name,
        "n": A.n,
        "m": A.m,
        "components": solver.split.count,
        "L": solver.L,
        "storage_per_edge": solver.storage_per_edge(),
        "setup_mvm": solver.setup_mvm,
        "setup_seconds": solver.setup_seconds,
        "levels": main_part["levels"],
        "hierarchies": parts,
    }
    _dump(info, None, sys.stdout)
    return 0


def cmd_bench(args):
    cfg = _cycle_config(args)
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(BENCH_HEADER)
        for spec in args.problems:
            name, A = parse_problem(spec, args.kind, args.negative_policy)
            b = make_rhs(A.n, f"random:{args.seed}")
            x0 = np.random.default_rng(args.seed).uniform(-1.0, 1.0, A.n)
            report = Solver(A, cfg.gamma, args.seed).solve(b, x0, cfg)
            t_setup, t_solve, t_total, pct = per_edge_measures(
                report.setup_mvm, report.solve_mvm, report.residuals[0], report.residuals[-1])
            writer.writerow([name, report.n, report.m, report.L,
                             f"{t_setup:.4g}", f"{t_solve:.4g}", f"{t_total:.4g}",
                             f"{report.acf:.4f}", f"{report.storage_per_edge:.4g}",
                             f"{pct:.1f}"])
            out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _add_input(p):
    p.add_argument("--matrix", help="Matrix Market file")
    p.add_argument("--problem", help="generator spec FAMILY:N[:ALIGNMENT], e.g. grid5:64")
    p.add_argument("--kind", choices=KINDS, default="auto")
    p.add_argument("--negative-policy", choices=NEGATIVE_POLICIES,
                   default="absolute-if-large-negative",
                   help="weight policy for adjacency input")


def _add_cycle(p):
    p.add_argument("--gamma", type=float, default=1.5)
    p.add_argument("--correction", choices=("adaptive", "flat"), default="adaptive")
    p.add_argument("--mu", type=float, default=4.0 / 3.0)
    p.add_argument("--recombination", choices=("l2", "energy"), default="l2")
    p.add_argument("--max-cycles", type=int, default=100)
    p.add_argument("--tol-reduction", type=float, default=1e10)
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(prog="lamg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve A x = b")
    _add_input(p)
    _add_cycle(p)
    p.add_argument("--rhs", help="random:SEED, zero or file:PATH (default random:<seed>)")
    p.add_argument("--initial", choices=("zero", "random"), default="random",
                   help="initial guess")
    p.add_argument("--out-x", help="write the solution vector here")
    p.add_argument("--stats", help="write the stats JSON here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", help="write a generated Laplacian as Matrix Market")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--n", type=int, default=64, help="grid side or node count")
    p.add_argument("--alignment", choices=("agnostic", "northeast"), default="agnostic")
    p.add_argument("--alpha", type=float, default=-math.pi / 4)
    p.add_argument("--eps", type=float, default=1e-2)
    p.add_argument("--u", type=int, default=0, help="grid_plus_link endpoint")
    p.add_argument("--v", type=int, default=None, help="grid_plus_link endpoint")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("info", help="run setup and print hierarchy statistics")
    _add_input(p)
    p.add_argument("--gamma", type=float, default=1.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("bench", help="benchmark problems and emit CSV")
    p.add_argument("problems", nargs="*", help="Matrix Market paths or FAMILY:N specs")
    p.add_argument("--kind", choices=KINDS, default="auto")
    p.add_argument("--negative-policy", choices=NEGATIVE_POLICIES,
                   default="absolute-if-large-negative")
    _add_cycle(p)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_bench)
    return parser


def _exit_code(exc):
    if isinstance(exc, (MatrixMarketError, IncompatibleRHS, ValueError, OSError)):
        return EXIT_INPUT, type(exc).__name__
    return EXIT_SOLVE, type(exc).__name__


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code = args.func(args)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        return code
    except (LamgError, ValueError, OSError) as exc:
        code, kind = _exit_code(exc)
        _dump({"error": kind, "message": str(exc), "exit_code": code}, None, sys.stderr)
        return code
    except _Failure as exc:
        _dump({"error": exc.kind, "message": str(exc), "exit_code": exc.code,
               **exc.extra}, None, sys.stderr)
        return exc.code
