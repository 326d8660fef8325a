import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dssa.symbolic import (
    Chromosome,
    SimplifiedSingular,
    SymbolicPolynomial,
    SymbolicRational,
    SymbolicTerm,
    canonicalize,
    canonicalize_rational,
    chromosome_shape,
    decode,
    encode,
    evaluate_poly,
    evaluate_rational,
    from_json,
    render,
    to_json,
)

NAMES = ["gm1", "g_r1", "c1"]


def term(sign, *bits):
    return SymbolicTerm(sign, tuple(bool(b) for b in bits))


def one_pole_sr():
    return SymbolicRational(
        (SymbolicPolynomial((term(-1, 1, 0, 0),)),),
        (SymbolicPolynomial((term(1, 0, 1, 0),)), SymbolicPolynomial((term(1, 0, 0, 1),))),
    )


def test_shape():
    assert chromosome_shape(0, 1, 3, 15) == (3, 60)


def test_decode_row():
    genes = np.array([[1, 0, 1, 1, 0, 1, 0, -1], [0, 0, 0, 1, 0, 0, 0, 0]], dtype=np.int8)
    sr = decode(Chromosome(genes, 0, 0, 3))
    poly = sr.num_polys[0]
    assert poly.terms == (term(1, 1, 0, 1), term(-1, 0, 1, 0))
    assert evaluate_poly(poly, [2, 5, 3]) == 1
    assert sr.den_polys[0].terms == (term(1, 0, 0, 0),)
    assert evaluate_poly(sr.den_polys[0], [2, 5, 3]) == 1


def test_empty_row_decodes_to_zero():
    sr = decode(Chromosome(np.zeros((2, 8), dtype=np.int8), 0, 0, 3))
    assert sr.num_polys[0].terms == ()
    assert evaluate_poly(sr.num_polys[0], [1, 2, 3]) == 0


def test_decode_rejects_bad_shape():
    with pytest.raises(ValueError):
        decode(Chromosome(np.zeros((3, 8), dtype=np.int8), 0, 0, 3))


def test_evaluate_one_pole():
    sr = one_pole_sr()
    x = [1e-3, 1e-5, 1e-12]
    assert evaluate_rational(sr, x, 0) == pytest.approx(-100)
    assert evaluate_rational(sr, x, 1j * 1e7) == pytest.approx(-100 / (1 + 1j))
    empty = SymbolicRational(sr.num_polys, (SymbolicPolynomial(), SymbolicPolynomial()))
    with pytest.raises(SimplifiedSingular):
        evaluate_rational(empty, x, 1j)


def test_canonicalize_examples():
    a, b = term(1, 1, 1, 0), term(1, 0, 1, 0)
    assert canonicalize(SymbolicPolynomial((a, a))).terms == (a, a)
    assert canonicalize(SymbolicPolynomial((b, term(-1, 0, 1, 0)))).terms == ()
    x2, x13 = term(1, 0, 1, 0), term(1, 1, 0, 1)
    assert canonicalize(SymbolicPolynomial((x2, x13))).terms == (x13, x2)


def test_canonical_sign_normalization():
    sr = one_pole_sr()
    flipped = SymbolicRational(
        (SymbolicPolynomial((term(1, 1, 0, 0),)),),
        (SymbolicPolynomial((term(-1, 0, 1, 0),)), SymbolicPolynomial((term(-1, 0, 0, 1),))),
    )
    assert canonicalize_rational(flipped, NAMES) == canonicalize_rational(sr, NAMES)


def test_render_one_pole():
    assert render(one_pole_sr(), names=NAMES) == "H(s) = (-gm1) / (g_r1 + s·c1)"
    empty_num = SymbolicRational((SymbolicPolynomial(),), one_pole_sr().den_polys)
    assert render(empty_num, names=NAMES).startswith("H(s) = (0) / (")


def test_json_roundtrip_and_unknown_name():
    sr = one_pole_sr()
    data = to_json(sr, NAMES)
    assert data == {"num": [[["-", "gm1"]]], "den": [[["+", "g_r1"]], [["+", "c1"]]]}
    assert from_json(data, NAMES) == sr
    with pytest.raises(ValueError):
        from_json({"num": [[["+", "zz"]]], "den": [[["+", "c1"]]]}, NAMES)


chromosomes = st.integers(1, 4).flatmap(
    lambda T: st.lists(st.sampled_from([-1, 0, 1]), min_size=3 * T, max_size=3 * T).flatmap(
        lambda ts: st.lists(st.integers(0, 1), min_size=3 * T * 3, max_size=3 * T * 3).map(
            lambda s: (T, ts, s)
        )
    )
)


@settings(max_examples=60, deadline=None)
@given(chromosomes)
def test_encode_decode_roundtrip(spec):
    T, ts, s = spec
    slots = np.zeros((3, T, 4), dtype=np.int8)
    slots[:, :, :3] = np.array(s).reshape(3, T, 3)
    slots[:, :, 3] = np.array(ts).reshape(3, T)
    sr = decode(Chromosome(slots.reshape(3, -1), 0, 1, 3))
    again = decode(encode(sr, T, 3))
    assert again == sr
    x = [1.3, 0.7, 2.1]
    assert evaluate_poly(canonicalize(sr.den_polys[1], NAMES), x) == pytest.approx(
        evaluate_poly(sr.den_polys[1], x)
    )
