"""Monte Carlo datasets over parameter ranges and the shared frequency grid."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .netlist import CircuitModel
from .numeric import (
    InterpolationError,
    NoDcGainError,
    NumericRational,
    build_pencil,
    dc_gain,
    extract_coeffs,
    find_roots,
)

MAX_RETRIES = 3


@dataclass(frozen=True, eq=False)
class DataPoint:
    values: np.ndarray
    exact: NumericRational
    exact_poles: np.ndarray
    exact_zeros: np.ndarray
    exact_dc: float  # dB; nan when H(0) is zero or unbounded


@dataclass(frozen=True)
class Dataset:
    train: list
    test: list


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    freqs: np.ndarray  # Hz, strictly increasing

    @property
    def points(self) -> np.ndarray:
        return 2j * np.pi * self.freqs

    @property
    def C(self) -> int:
        return len(self.freqs)

    @property
    def lowest_omega(self) -> float:
        return 2 * np.pi * float(self.freqs[0])


def draw_values(model: CircuitModel, count: int, rng) -> np.ndarray:
    """``x = L + r (H - L)`` with r ~ U[0, 1], shape (count, K)."""
    lo = np.asarray(model.lower)
    hi = np.asarray(model.upper)
    r = rng.random((count, model.K))
    return lo + r * (hi - lo)


def characterize(model: CircuitModel, values) -> DataPoint:
    values = np.asarray(values, dtype=float)
    exact = extract_coeffs(build_pencil(model, values))
    try:
        dc, _ = dc_gain(exact)
    except NoDcGainError:
        dc = math.nan
    return DataPoint(values, exact, find_roots(exact.den), find_roots(exact.num), dc)


def sample_dataset(model: CircuitModel, D: int, rng) -> list[DataPoint]:
    if D < 1:
        raise ValueError("dataset size must be at least 1")
    points = []
    for values in draw_values(model, D, rng):
        for attempt in range(MAX_RETRIES + 1):
            try:
                points.append(characterize(model, values))
                break
            except (InterpolationError, np.linalg.LinAlgError):
                if attempt == MAX_RETRIES:
                    raise
                values = draw_values(model, 1, rng)[0]
    return points


def split(points, D_train: int, D_test: int, rng) -> Dataset:
    if D_train < 0 or D_test < 0 or D_train + D_test != len(points):
        raise ValueError(
            f"split sizes {D_train}+{D_test} do not add up to {len(points)} points"
        )
    order = rng.permutation(len(points))
    return Dataset(
        [points[i] for i in order[:D_train]], [points[i] for i in order[D_train:]]
    )


def make_dataset(model: CircuitModel, D_train: int, D_test: int, seed) -> Dataset:
    """Sample and split from one seeded stream; same seed gives the same dataset."""
    rng = np.random.default_rng(seed)
    points = sample_dataset(model, D_train + D_test, rng)
    return split(points, D_train, D_test, rng)


def _grid(start_hz: float, decades: int, per_decade: int) -> FrequencyGrid:
    exps = np.arange(decades * per_decade + 1) / per_decade
    return FrequencyGrid(start_hz * 10.0**exps)


def frequency_grid(nominal_exact: NumericRational, points_per_decade: int = 3) -> FrequencyGrid:
    """Log grid from a decade below the lowest root frequency to a decade above the highest.

    The span is rounded up to a whole number of decades so the point count is
    ``decades * points_per_decade + 1``.
    """
    if points_per_decade < 1:
        raise ValueError("points_per_decade must be positive")
    roots = np.concatenate([find_roots(nominal_exact.num), find_roots(nominal_exact.den)])
    mags = np.abs(roots)
    mags = mags[(mags > 0) & np.isfinite(mags)]
    if mags.size == 0:
        return _grid(1.0, 9, points_per_decade)
    f_lo = mags.min() / (2 * np.pi)
    f_hi = mags.max() / (2 * np.pi)
    span = math.log10(f_hi / f_lo)
    decades = math.ceil(span - 1e-9) + 2
    return _grid(f_lo / 10, decades, points_per_decade)


def write_dataset_csv(points, names, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["d", *names, "dc_dB", "poles", "zeros"])

    def roots_text(r):
        return " ".join(f"{z.real:.9g}{z.imag:+.9g}j" for z in r)

    for d, p in enumerate(points):
        w.writerow(
            [d, *(f"{v:.9g}" for v in p.values), f"{p.exact_dc:.9g}",
             roots_text(p.exact_poles), roots_text(p.exact_zeros)]
        )
