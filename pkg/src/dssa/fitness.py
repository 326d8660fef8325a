"""Scoring of candidate simplified transfer functions.

Objective = w1 * Complexity + w2 * Error + lambda * (total normalized violation)

Complexity is the fraction of active term slots, Error the mean magnitude (dB)
plus phase (rad) deviation over train points and grid frequencies. The
constraints bound the dc-gain error and the relative pole/zero displacement
at every train point; violations are penalized additively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .numeric import batch_roots, find_roots
from .sampling import DataPoint, FrequencyGrid
from .symbolic import (
    Chromosome,
    SimplifiedSingular,
    SymbolicRational,
    encode,
    evaluate_poly,
    evaluate_rational,
)

# a coefficient whose |sum| is below this fraction of its summed |terms| counts as zero
CANCEL_RTOL = 1e-12
# penalty-side ceiling on one root's relative error (= an unmatched root)
ROOT_ERROR_CAP = 1.0


@dataclass(frozen=True)
class FitnessConfig:
    w1: float = 0.8
    w2: float = 0.2
    T_dc: float = 3.0
    T_root: float = 0.30
    penalty_lambda: float = 10.0
    error_clamp_db: float = 100.0

    def __post_init__(self):
        if self.w1 < 0 or self.w2 < 0:
            raise ValueError("weights must be nonnegative")
        if self.T_dc <= 0 or self.T_root <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class Violations:
    dc: float
    pole: float
    zero: float
    degree: float

    def as_dict(self):
        return {"dc": self.dc, "pole": self.pole, "zero": self.zero, "degree": self.degree}


@dataclass(frozen=True, eq=False)
class EvaluationResult:
    complexity: float
    error: float
    objective: float
    feasible: bool
    violations: Violations
    penalty: float
    per_point_dc_err: np.ndarray = field(repr=False)
    per_point_root_err: np.ndarray = field(repr=False)


def complexity(chrom: Chromosome) -> float:
    return float(np.count_nonzero(chrom.selectors)) / (chrom.P * chrom.T)


# -- reference (per point, per frequency) path -------------------------------


def _point_error(sr, point: DataPoint, s, clamp) -> float:
    try:
        hs = evaluate_rational(sr, point.values, s)
    except SimplifiedSingular:
        return clamp
    ratio = hs / point.exact(s)
    if ratio == 0 or not np.isfinite(ratio):
        return clamp
    return abs(20 * math.log10(abs(ratio))) + abs(np.angle(ratio))


def response_error(sr: SymbolicRational, points, grid: FrequencyGrid, clamp: float = 100.0) -> float:
    """Mean of |dB error| + |phase error| over points x grid, halved."""
    if not points or grid.C == 0:
        raise ValueError("need at least one point and one frequency")
    total = sum(_point_error(sr, p, s, clamp) for p in points for s in grid.points)
    return total / (2 * len(points) * grid.C)


def _rel_scale(exact: np.ndarray, omega_floor: float) -> np.ndarray:
    mag = np.abs(exact)
    return np.where(mag == 0, omega_floor, mag)


def match_roots(simplified, exact, omega_floor: float = 1.0):
    """Greedy one-to-one root matching by relative distance.

    Returns (pairs, unmatched): pairs is a list of ((i_simplified, j_exact),
    relative error); unmatched lists exact indices left without a partner
    (each counts as a 100% displacement).
    """
    simplified = [complex(r) for r in simplified if np.isfinite(r)]
    exact = np.asarray(exact, dtype=complex)
    scale = _rel_scale(exact, omega_floor)
    cands = sorted(
        (abs(rs - re) / scale[j], i, j)
        for i, rs in enumerate(simplified)
        for j, re in enumerate(exact)
    )
    used_s, used_e, pairs = set(), set(), []
    for err, i, j in cands:
        if i in used_s or j in used_e:
            continue
        used_s.add(i)
        used_e.add(j)
        pairs.append(((i, j), err))
    unmatched = [j for j in range(len(exact)) if j not in used_e]
    return pairs, unmatched


def root_errors(simplified, exact, omega_floor: float = 1.0) -> list[float]:
    """Per exact root: matched relative error, or 1.0 if unmatched."""
    pairs, unmatched = match_roots(simplified, exact, omega_floor)
    errs = [e for _, e in pairs] + [1.0] * len(unmatched)
    return errs


@dataclass(frozen=True)
class Slacks:
    dc: float
    pole: float
    zero: float
    degree: float
    dc_err: float
    root_errs: tuple

    def normalized(self, cfg: FitnessConfig) -> tuple[float, float, float, float]:
        return (self.dc / cfg.T_dc, self.pole / cfg.T_root, self.zero / cfg.T_root, self.degree)


def _dc_db(values_num, values_den):
    f0, g0 = values_num, values_den
    if f0 == 0 or g0 == 0:
        return None
    return 20 * math.log10(abs(f0 / g0))


def constraints(sr: SymbolicRational, point: DataPoint, cfg: FitnessConfig,
                omega_floor: float = 1.0) -> Slacks:
    """Constraint slacks for one data point (positive means violated)."""
    x = point.values
    num = np.array([evaluate_poly(p, x) for p in sr.num_polys])
    den = np.array([evaluate_poly(p, x) for p in sr.den_polys])

    exact_num, exact_den = point.exact.num, point.exact.den
    degree_ok = sr.M == point.exact.M and sr.N == point.exact.N
    if degree_ok:
        for c_exact, poly, c in zip(
            np.concatenate([exact_num, exact_den]),
            sr.num_polys + sr.den_polys,
            np.concatenate([num, den]),
        ):
            if c_exact != 0 and (not poly.terms or c == 0):
                degree_ok = False

    if np.isfinite(point.exact_dc):
        simp = _dc_db(num[0], den[0])
        dc_err = cfg.error_clamp_db if simp is None else abs(simp - point.exact_dc)
    else:
        s_lo = 1j * omega_floor
        try:
            hs = evaluate_rational(sr, x, s_lo)
            dc_err = abs(20 * math.log10(abs(hs)) - 20 * math.log10(abs(point.exact(s_lo))))
        except (SimplifiedSingular, ValueError):
            dc_err = cfg.error_clamp_db
        if not math.isfinite(dc_err):
            dc_err = cfg.error_clamp_db

    pe = root_errors(find_roots(den), point.exact_poles, omega_floor)
    ze = root_errors(find_roots(num), point.exact_zeros, omega_floor)
    return Slacks(
        dc=dc_err - cfg.T_dc,
        pole=max(pe, default=0.0) - cfg.T_root,
        zero=max(ze, default=0.0) - cfg.T_root,
        degree=0.0 if degree_ok else 1.0,
        dc_err=dc_err,
        root_errs=tuple(pe + ze),
    )


# -- prepared, vectorized path used by the optimizer --------------------------


@dataclass(frozen=True, eq=False)
class FitnessContext:
    """Everything the objective needs, precomputed from the train points."""

    M: int
    N: int
    K: int
    T: int
    cfg: FitnessConfig
    grid: FrequencyGrid
    X: np.ndarray  # (D, K)
    exact_h: np.ndarray  # (D, C)
    exact_dc: np.ndarray  # (D,) dB, nan where undefined
    exact_h_low: np.ndarray  # (D,) exact response at the lowest grid frequency
    exact_poles: np.ndarray  # (D, N)
    exact_zeros: np.ndarray  # (D, M)
    required: np.ndarray  # (P,) bool, exact coefficient nonzero
    omega_floor: float

    @property
    def P(self) -> int:
        return self.M + self.N + 2

    @property
    def D(self) -> int:
        return self.X.shape[0]

    @classmethod
    def build(cls, points, grid: FrequencyGrid, cfg: FitnessConfig, T: int):
        if not points:
            raise ValueError("no train points")
        M, N = points[0].exact.M, points[0].exact.N
        if any(p.exact.M != M or p.exact.N != N for p in points):
            raise ValueError("exact degrees differ across data points")
        s = grid.points
        required = np.zeros(M + N + 2, dtype=bool)
        for p in points:
            required |= np.concatenate([p.exact.num, p.exact.den]) != 0
        return cls(
            M=M, N=N, K=len(points[0].values), T=T, cfg=cfg, grid=grid,
            X=np.ascontiguousarray([p.values for p in points], dtype=float),
            exact_h=np.ascontiguousarray([p.exact(s) for p in points], dtype=complex),
            exact_dc=np.array([p.exact_dc for p in points]),
            exact_h_low=np.array([p.exact(s[0]) for p in points]),
            exact_poles=np.array([p.exact_poles for p in points]).reshape(len(points), N),
            exact_zeros=np.array([p.exact_zeros for p in points]).reshape(len(points), M),
            required=required,
            omega_floor=grid.lowest_omega,
        )


def _batch_match(simp: np.ndarray, exact: np.ndarray, omega_floor: float) -> np.ndarray:
    """Greedy matching for every point at once; (D, n_exact) errors, 1.0 where unmatched."""
    scale = np.ascontiguousarray(_rel_scale(exact, omega_floor), dtype=float)
    return kernels.greedy_match(
        np.ascontiguousarray(simp, dtype=complex), np.ascontiguousarray(exact, dtype=complex), scale
    )


def objective(chrom: Chromosome, ctx: FitnessContext) -> EvaluationResult:
    cfg = ctx.cfg
    S = np.ascontiguousarray(chrom.s_genes)
    TS = np.ascontiguousarray(chrom.selectors)
    coef, mag = kernels.term_coefficients(S, TS, ctx.X)
    nonzero = np.abs(coef) > CANCEL_RTOL * mag  # (P, D); false for empty rows
    m1 = ctx.M + 1
    num, den = coef[:m1], coef[m1:]

    cx = complexity(chrom)
    err = kernels.response_error_sum(
        np.ascontiguousarray(num), np.ascontiguousarray(den), ctx.grid.points,
        ctx.exact_h, cfg.error_clamp_db,
    ) / (2 * ctx.D * ctx.grid.C)

    # dc gain
    clamp = cfg.error_clamp_db
    with np.errstate(all="ignore"):
        simp_dc = 20 * np.log10(np.abs(num[0] / den[0]))
        dc_err = np.abs(simp_dc - ctx.exact_dc)
        undefined = ~np.isfinite(ctx.exact_dc)
        if undefined.any():
            s0 = ctx.grid.points[0]
            pw = s0 ** np.arange(max(m1, den.shape[0]))
            hs = (num.T @ pw[:m1]) / (den.T @ pw[: den.shape[0]])
            low = np.abs(20 * np.log10(np.abs(hs / ctx.exact_h_low)))
            dc_err = np.where(undefined, low, dc_err)
    dc_err[~nonzero[m1] | ~np.isfinite(dc_err)] = clamp

    # degree / structural presence
    degree_bad = (ctx.required[:, None] & ~nonzero).any(axis=0)

    # roots at the effective degree of each point
    clean = np.where(nonzero, coef, 0.0)
    zr = batch_roots(clean[:m1].T, degree=_effective_degree(nonzero[:m1]))
    pr = batch_roots(clean[m1:].T, degree=_effective_degree(nonzero[m1:]))
    pole_err = _batch_match(pr, ctx.exact_poles, ctx.omega_floor)
    zero_err = _batch_match(zr, ctx.exact_zeros, ctx.omega_floor)
    max_pole = pole_err.max(axis=1) if ctx.N else np.zeros(ctx.D)
    max_zero = zero_err.max(axis=1) if ctx.M else np.zeros(ctx.D)
    # a matched root counts at most as much as an unmatched one in the penalty
    cap = ROOT_ERROR_CAP
    slack = np.stack([
        (dc_err - cfg.T_dc) / cfg.T_dc,
        (np.minimum(max_pole, cap) - cfg.T_root) / cfg.T_root,
        (np.minimum(max_zero, cap) - cfg.T_root) / cfg.T_root,
        degree_bad.astype(float),
    ])
    penalty = cfg.penalty_lambda * float(np.maximum(slack, 0.0).sum())
    worst = np.array([
        (dc_err - cfg.T_dc).max(),
        (max_pole - cfg.T_root).max(),
        (max_zero - cfg.T_root).max(),
        float(degree_bad.any()),
    ])
    feasible = bool(np.all(worst <= 0))
    obj = cfg.w1 * cx + cfg.w2 * err + penalty
    root_err = np.maximum(max_pole, max_zero)
    return EvaluationResult(
        complexity=cx, error=err, objective=obj, feasible=feasible,
        violations=Violations(*(float(v) for v in worst)), penalty=penalty,
        per_point_dc_err=dc_err, per_point_root_err=root_err,
    )


def _effective_degree(nonzero: np.ndarray) -> np.ndarray:
    """Highest row index that is nonzero, per column; -1 when all are zero."""
    rows = nonzero.shape[0]
    any_nz = nonzero.any(axis=0)
    top = rows - 1 - np.argmax(nonzero[::-1], axis=0)
    return np.where(any_nz, top, -1)


def evaluate(sr: SymbolicRational, ctx: FitnessContext) -> EvaluationResult:
    """Objective of an already-decoded expression (re-encoded with the context's T)."""
    return objective(encode(sr, ctx.T, ctx.K), ctx)
