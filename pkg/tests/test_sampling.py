import io

import numpy as np
import pytest

from dssa.numeric import NumericRational, build_pencil, extract_coeffs
from dssa.sampling import (
    draw_values,
    frequency_grid,
    make_dataset,
    sample_dataset,
    split,
    write_dataset_csv,
)


def test_draws_within_bounds(nmam, rng):
    x = draw_values(nmam, 2000, rng)
    assert x.shape == (2000, nmam.K)
    assert np.all(x >= nmam.lower) and np.all(x <= nmam.upper)


def test_draw_endpoints(one_pole):
    class Fixed:
        def __init__(self, r):
            self.r = r

        def random(self, shape):
            return np.full(shape, self.r)

    assert draw_values(one_pole, 1, Fixed(0.0))[0] == pytest.approx(one_pole.lower)
    assert draw_values(one_pole, 1, Fixed(1.0))[0] == pytest.approx(one_pole.upper)


def test_points_carry_exact_data(one_pole, rng):
    (p,) = sample_dataset(one_pole, 1, rng)
    gm, g, c = p.values
    assert p.exact_poles == pytest.approx([-g / c], rel=1e-10)
    assert p.exact_zeros.size == 0
    assert p.exact_dc == pytest.approx(20 * np.log10(gm / g), abs=1e-9)


def test_split_sizes(one_pole, rng):
    pts = list(range(150))
    ds = split(pts, 100, 50, rng)
    assert len(ds.train) == 100 and len(ds.test) == 50
    assert sorted(ds.train + ds.test) == pts
    ds = split([0, 1], 1, 1, rng)
    assert sorted(ds.train + ds.test) == [0, 1]
    with pytest.raises(ValueError):
        split(pts, 100, 51, rng)


def test_make_dataset_is_seeded(one_pole):
    a = make_dataset(one_pole, 5, 3, seed=9)
    b = make_dataset(one_pole, 5, 3, seed=9)
    assert all(np.array_equal(p.values, q.values) for p, q in zip(a.train + a.test, b.train + b.test))


def test_one_pole_grid(one_pole):
    g = frequency_grid(extract_coeffs(build_pencil(one_pole, one_pole.nominal)), 3)
    f_pole = 1e7 / (2 * np.pi)
    assert g.C == 7
    assert g.freqs[0] == pytest.approx(f_pole / 10)
    assert g.freqs[-1] == pytest.approx(f_pole * 10)
    assert np.all(np.diff(g.freqs) > 0)


def test_default_grid_for_pure_gain():
    g = frequency_grid(NumericRational(np.array([1.0]), np.array([1.0])), 3)
    assert g.freqs[0] == pytest.approx(1.0)
    assert g.freqs[-1] == pytest.approx(1e9)


def test_nmam_grid_covers_roots(nmam):
    r = extract_coeffs(build_pencil(nmam, nmam.nominal))
    g = frequency_grid(r, 3)
    mags = np.abs(np.concatenate([r.poles(), r.zeros()])) / (2 * np.pi)
    assert g.freqs[0] <= mags.min() / 10 * (1 + 1e-12)
    assert g.freqs[-1] >= mags.max() * 10 * (1 - 1e-12)
    assert (g.C - 1) % 3 == 0


def test_dataset_csv(one_pole, rng):
    pts = sample_dataset(one_pole, 3, rng)
    buf = io.StringIO()
    write_dataset_csv(pts, one_pole.parameter_names, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "d,gm1,g_r1,c1,dc_dB,poles,zeros"
    assert len(lines) == 4
