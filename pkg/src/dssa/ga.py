"""Genetic algorithm over term-level chromosomes.

Each generation is rebuilt from three parts: the best ``ceil(p_r * pop)``
members copied unchanged, ``ceil(p_c * pop)`` uniform-crossover children of
roulette-selected parent pairs, and single-gene mutants of roulette-selected
parents for the remainder. Random draws per generation come from one stream
in a fixed order: selection, crossover masks, mutation positions/values.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fitness import EvaluationResult, FitnessContext, objective
from .symbolic import Chromosome

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GaConfig:
    population: int = 50
    iterations: int = 1000
    p_r: float = 0.1
    p_c: float = 0.5
    p_m: float = 0.4
    seed: int = 0
    ts_init_probs: tuple[float, float, float] = (0.7, 0.2, 0.1)  # TS = 0, +1, -1

    def __post_init__(self):
        if abs(self.p_r + self.p_c + self.p_m - 1.0) > 1e-12:
            raise ValueError("p_r + p_c + p_m must equal 1")
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if abs(sum(self.ts_init_probs) - 1.0) > 1e-12 or min(self.ts_init_probs) < 0:
            raise ValueError("ts_init_probs must be a probability vector")

    def counts(self) -> tuple[int, int, int]:
        """(reproduction, crossover, mutation) member counts per generation."""
        n_r = math.ceil(self.p_r * self.population - 1e-9)
        n_c = min(math.ceil(self.p_c * self.population - 1e-9), self.population - n_r)
        return n_r, n_c, self.population - n_r - n_c


@dataclass
class GaResult:
    best: Chromosome
    result: EvaluationResult
    history: list = field(default_factory=list)  # best-ever objective per generation
    feasible_history: list = field(default_factory=list)
    population_sizes: list = field(default_factory=list)
    feasible: bool = False


def init_population(cfg: GaConfig, dims: tuple[int, int, int, int], rng) -> list[Chromosome]:
    """``dims`` is (M, N, K, T)."""
    M, N, K, T = dims
    P = M + N + 2
    out = []
    for _ in range(cfg.population):
        slots = np.empty((P, T, K + 1), dtype=np.int8)
        slots[:, :, :K] = rng.integers(0, 2, size=(P, T, K))
        slots[:, :, K] = rng.choice(
            np.array([0, 1, -1], dtype=np.int8), size=(P, T), p=cfg.ts_init_probs
        )
        out.append(Chromosome(slots.reshape(P, T * (K + 1)), M, N, K))
    return out


def roulette_weights(objectives) -> np.ndarray:
    obj = np.asarray(objectives, dtype=float)
    finite = np.isfinite(obj)
    if not finite.all():
        top = obj[finite].max() if finite.any() else 0.0
        obj = np.where(finite, obj, 10 * abs(top) + 1)
    hi, lo = obj.max(), obj.min()
    w = hi - obj + 1e-12 * (hi - lo + 1)
    return w / w.sum()


def select_roulette(objectives, rng, r=None) -> int:
    """Index drawn with probability proportional to (max - obj + eps)."""
    cdf = np.cumsum(roulette_weights(objectives))
    u = rng.random() if r is None else r
    return int(min(np.searchsorted(cdf, u * cdf[-1], side="right"), len(cdf) - 1))


def uniform_crossover(a: Chromosome, b: Chromosome, rng, mask=None) -> Chromosome:
    if a.genes.shape != b.genes.shape or (a.M, a.N, a.K) != (b.M, b.N, b.K):
        raise ValueError("parents have different dimensions")
    if mask is None:
        mask = rng.random(a.genes.shape) < 0.5
    return Chromosome(np.where(mask, a.genes, b.genes), a.M, a.N, a.K)


_OTHER_TS = {-1: (0, 1), 0: (1, -1), 1: (-1, 0)}


def mutate(parent: Chromosome, rng, pos=None, pick=None) -> Chromosome:
    """Change exactly one gene: flip an S gene, or move a TS gene to another value."""
    genes = parent.genes.copy()
    P, Q = genes.shape
    if pos is None:
        pos = int(rng.integers(P * Q))
    if pick is None:
        pick = int(rng.integers(2))
    p, q = divmod(pos, Q)
    if q % (parent.K + 1) == parent.K:
        genes[p, q] = _OTHER_TS[int(genes[p, q])][pick]
    else:
        genes[p, q] ^= 1
    return Chromosome(genes, parent.M, parent.N, parent.K)


def _better(a: EvaluationResult, b: EvaluationResult | None) -> bool:
    return b is None or a.objective < b.objective


def run(cfg: GaConfig, ctx: FitnessContext, rng=None, verbose: bool = False,
        parallel: bool = False) -> GaResult:
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    pool = ThreadPoolExecutor() if parallel else None

    def evaluate(pop):
        if pool is None:
            return [objective(c, ctx) for c in pop]
        return list(pool.map(lambda c: objective(c, ctx), pop))

    pop = init_population(cfg, (ctx.M, ctx.N, ctx.K, ctx.T), rng)
    res = evaluate(pop)
    best = best_res = None
    best_feas = best_feas_res = None
    n_r, n_c, n_m = cfg.counts()
    out = GaResult(pop[0], res[0])

    def track(gen):
        nonlocal best, best_res, best_feas, best_feas_res
        for c, r in zip(pop, res):
            if _better(r, best_res):
                best, best_res = c, r
            if r.feasible and _better(r, best_feas_res):
                best_feas, best_feas_res = c, r
        out.history.append(best_res.objective)
        out.feasible_history.append(best_feas_res is not None)
        out.population_sizes.append(len(pop))
        if verbose:
            print(f"iter {gen:5d}  best {best_res.objective:.6g}  "
                  f"feasible {best_feas_res is not None}", flush=True)

    try:
        track(0)
        for gen in range(1, cfg.iterations + 1):
            objs = np.array([r.objective for r in res])
            order = np.argsort(objs, kind="stable")
            cdf = np.cumsum(roulette_weights(objs))
            u = rng.random(2 * n_c + n_m) * cdf[-1]
            picks = np.minimum(np.searchsorted(cdf, u, side="right"), len(pop) - 1)
            masks = rng.random((n_c,) + pop[0].genes.shape) < 0.5
            positions = rng.integers(pop[0].genes.size, size=n_m)
            choices = rng.integers(2, size=n_m)

            nxt = [pop[i] for i in order[:n_r]]
            kept = [res[i] for i in order[:n_r]]
            children = [
                uniform_crossover(pop[picks[2 * i]], pop[picks[2 * i + 1]], rng, masks[i])
                for i in range(n_c)
            ]
            children += [
                mutate(pop[picks[2 * n_c + i]], rng, int(positions[i]), int(choices[i]))
                for i in range(n_m)
            ]
            pop = nxt + children
            res = kept + evaluate(children)
            track(gen)
    finally:
        if pool is not None:
            pool.shutdown()

    if best_feas is not None:
        out.best, out.result, out.feasible = best_feas, best_feas_res, True
    else:
        log.warning("no feasible solution found; returning best infeasible candidate")
        out.best, out.result, out.feasible = best, best_res, False
    return out
