import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dssa.numeric import (
    NoDcGainError,
    NumericRational,
    batch_roots,
    build_pencil,
    dc_gain,
    eval_response,
    extract_coeffs,
    find_roots,
    gain_db,
)


def test_one_pole_pencil_and_response(one_pole):
    p = build_pencil(one_pole, one_pole.nominal)
    assert p.size == 3  # 2 nodes + source row
    assert eval_response(p, 0) == pytest.approx(-100)
    h = eval_response(p, 1j * 1e-5 / 1e-12)
    assert h == pytest.approx(-100 / (1 + 1j))
    assert 20 * np.log10(abs(h)) == pytest.approx(40 - 3.0103, abs=1e-4)


def test_one_pole_coefficients(one_pole):
    r = extract_coeffs(build_pencil(one_pole, one_pole.nominal))
    assert (r.M, r.N) == (0, 1)
    ratio = r.den[0] / 1e-5
    assert r.num / ratio == pytest.approx([-1e-3], rel=1e-12)
    assert r.den / ratio == pytest.approx([1e-5, 1e-12], rel=1e-12)


def test_rc_ladder_determinant(rc_ladder):
    g1, g2, c2 = rc_ladder.nominal
    r = extract_coeffs(build_pencil(rc_ladder, rc_ladder.nominal))
    assert r.N == 1
    expected = np.array([g1 + g2, c2])
    scale = r.den[1] / c2
    assert r.den / scale == pytest.approx(expected, rel=1e-12)
    assert r(0) == pytest.approx(g1 / (g1 + g2), rel=1e-12)


def test_nmam_degrees(nmam):
    r = extract_coeffs(build_pencil(nmam, nmam.nominal))
    assert (r.M, r.N) == (2, 3)
    assert r.M <= r.N <= nmam.capacitor_count


def test_nmam_dc_gain(nmam):
    x = dict(zip(nmam.parameter_names, nmam.nominal))
    r = extract_coeffs(build_pencil(nmam, nmam.nominal))
    db, _ = dc_gain(r)
    expect = 20 * np.log10(x["gm1"] * x["gm2"] * x["gm3"] / (x["g1"] * x["g2"] * x["g3"]))
    assert db == pytest.approx(expect, abs=1e-9)


def test_find_roots_cubic():
    roots = np.sort(find_roots([6, 11, 6, 1]).real)
    assert roots == pytest.approx([-3, -2, -1], rel=1e-9)


def test_find_roots_one_pole_and_constant():
    assert find_roots([1e-5, 1e-12]) == pytest.approx([-1e7])
    assert find_roots([1.0]).size == 0


def test_find_roots_with_zero_root():
    r = np.sort(find_roots([0, 2, 1]).real)
    assert r == pytest.approx([-2, 0], abs=1e-12)


def test_dc_gain_cases(one_pole):
    r = extract_coeffs(build_pencil(one_pole, one_pole.nominal))
    db, sign = dc_gain(r)
    assert db == pytest.approx(40.0, abs=1e-9) and sign == -1
    assert dc_gain(NumericRational(np.array([1.0]), np.array([1.0]))) == (0.0, 1)
    with pytest.raises(NoDcGainError):
        dc_gain(NumericRational(np.array([0.0, 1.0]), np.array([1.0, 1.0])))
    assert gain_db(r, 0) == pytest.approx(40.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3).filter(lambda v: abs(v) > 1e-2), min_size=1, max_size=4))
def test_find_roots_recovers_real_roots(roots):
    coeffs = np.poly(roots)[::-1]
    found = np.sort_complex(find_roots(coeffs))
    want = np.sort_complex(np.array(roots, dtype=complex))
    # clustered roots are ill-conditioned; compare polynomial residuals instead
    assert len(found) == len(roots)
    resid = np.abs(np.polyval(coeffs[::-1], found))
    scale = np.polyval(np.abs(coeffs[::-1]), np.abs(found))
    assert np.all(resid <= 1e-8 * scale)
    assert found.real.min() == pytest.approx(want.real.min(), rel=1e-3, abs=1e-3)


def test_batch_roots_matches_scalar():
    rng = np.random.default_rng(0)
    coeffs = rng.uniform(0.5, 2.0, size=(20, 4)) * np.array([1e-15, 1e-17, 1e-26, 1e-35])
    coeffs[3, 3] = 0.0  # lower effective degree for one row
    got = batch_roots(coeffs)
    for row, want in zip(got, (find_roots(c) for c in coeffs)):
        finite = np.sort_complex(row[np.isfinite(row)])
        assert finite == pytest.approx(np.sort_complex(want), rel=1e-8)
