"""Compiled vs pure-Python kernels on NMAM-sized inputs.

    python benchmarks/bench_kernels.py [--repeat N]

Times the compiled kernels (term evaluation, greedy root matching) directly,
then one full objective evaluation with each backend swapped in.
"""

import argparse
import timeit
from pathlib import Path

import numpy as np

from dssa import _kernels_py, fitness, ga
from dssa.fitness import FitnessConfig, FitnessContext, objective
from dssa.netlist import load_netlist
from dssa.numeric import build_pencil, extract_coeffs
from dssa.sampling import frequency_grid, make_dataset

try:
    from dssa import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

NMAM = Path(__file__).resolve().parents[1] / "src" / "dssa" / "data" / "nmam.cir"


class _Backend:
    """Minimal stand-in for dssa.kernels exposing one implementation."""

    def __init__(self, impl):
        self.term_coefficients = impl.term_coefficients
        self.response_error_sum = _kernels_py.response_error_sum  # numpy in both backends
        self.greedy_match = impl.greedy_match


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    model = load_netlist(NMAM)
    grid = frequency_grid(extract_coeffs(build_pencil(model, model.nominal)))
    data = make_dataset(model, 100, 1, seed=0)
    ctx = FitnessContext.build(data.train, grid, FitnessConfig(), 15)
    pop = ga.init_population(ga.GaConfig(), (ctx.M, ctx.N, ctx.K, ctx.T), np.random.default_rng(0))
    chrom = pop[0]
    S = np.ascontiguousarray(chrom.s_genes)
    TS = np.ascontiguousarray(chrom.selectors)
    poles = ctx.exact_poles * np.random.default_rng(1).uniform(0.5, 2.0, ctx.exact_poles.shape)
    scale = np.abs(ctx.exact_poles)

    impls = [("python", _kernels_py)]
    if _kernels_c is not None:
        impls.insert(0, ("cython", _kernels_c))
    else:
        print("compiled extension not available; timing the Python backend only")

    print(f"NMAM: P={ctx.P}, T={ctx.T}, K={ctx.K}, D={ctx.D}, C={grid.C}")
    print(f"{'kernel':<22}{'backend':<10}{'time':>12}")
    rows = {}
    saved = fitness.kernels
    try:
        for name, impl in impls:
            t1 = best_of(lambda: impl.term_coefficients(S, TS, ctx.X), args.repeat, 50)
            t4 = best_of(lambda: impl.greedy_match(poles, ctx.exact_poles, scale), args.repeat, 50)
            fitness.kernels = _Backend(impl)
            t3 = best_of(lambda: [objective(c, ctx) for c in pop], args.repeat, 1) / len(pop)
            rows[name] = (t1, t4, t3)
    finally:
        fitness.kernels = saved

    for i, label in enumerate(("term_coefficients", "greedy_match", "objective (full)")):
        for name in rows:
            print(f"{label:<22}{name:<10}{rows[name][i] * 1e6:>10.1f} us")
        if len(rows) == 2:
            print(f"{'':<22}{'speedup':<10}{rows['python'][i] / rows['cython'][i]:>11.1f}x")


if __name__ == "__main__":
    main()
