"""MNA pencil construction and exact numeric transfer-function extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .netlist import CAPACITANCE, CONDUCTANCE, VCCS, CircuitModel

EPS_TRIM = 1e-9


class SingularSystemError(ArithmeticError):
    def __init__(self, s, cond):
        self.s = s
        self.cond = cond
        super().__init__(f"MNA system singular at s={s} (condition estimate {cond:.3g})")


class InterpolationError(ArithmeticError):
    pass


class NoDcGainError(ArithmeticError):
    """H(0) is zero or unbounded."""


@dataclass(frozen=True)
class MnaPencil:
    G: np.ndarray
    Cm: np.ndarray
    b: np.ndarray
    out_index: int

    @property
    def size(self) -> int:
        return self.G.shape[0]

    def matrix(self, s) -> np.ndarray:
        return self.G + s * self.Cm


@dataclass(frozen=True, eq=False)
class NumericRational:
    """H(s) = num(s)/den(s), coefficients in ascending powers of s."""

    num: np.ndarray
    den: np.ndarray

    @property
    def M(self) -> int:
        return len(self.num) - 1

    @property
    def N(self) -> int:
        return len(self.den) - 1

    def __call__(self, s):
        return npoly.polyval(s, self.num) / npoly.polyval(s, self.den)

    def poles(self) -> np.ndarray:
        return find_roots(self.den)

    def zeros(self) -> np.ndarray:
        return find_roots(self.num)


def build_pencil(model: CircuitModel, values) -> MnaPencil:
    values = np.asarray(values, dtype=float)
    if values.shape != (model.K,):
        raise ValueError(f"expected {model.K} parameter values, got shape {values.shape}")
    if np.any(values <= 0):
        raise ValueError("parameter values must be positive")

    n = model.node_count + 1
    G = np.zeros((n, n))
    Cm = np.zeros((n, n))

    def two_terminal(mat, a, b, y):
        for i, j, sign in ((a, a, 1), (b, b, 1), (a, b, -1), (b, a, -1)):
            if i and j:
                mat[i - 1, j - 1] += sign * y

    for e in model.elements:
        v = values[e.parameter_index]
        if e.kind == CONDUCTANCE:
            two_terminal(G, *e.terminals, v)
        elif e.kind == CAPACITANCE:
            two_terminal(Cm, *e.terminals, v)
        elif e.kind == VCCS:
            op, on, cp, cn = e.terminals
            for i, j, sign in ((op, cp, 1), (op, cn, -1), (on, cp, -1), (on, cn, 1)):
                if i and j:
                    G[i - 1, j - 1] += sign * v
        else:
            raise ValueError(f"unknown element kind {e.kind!r}")

    # ideal unit voltage source at the input node
    src = n - 1
    G[model.input_node - 1, src] += 1.0
    G[src, model.input_node - 1] += 1.0
    b = np.zeros(n)
    b[src] = 1.0
    return MnaPencil(G, Cm, b, model.output_node - 1)


def eval_response(pencil: MnaPencil, s: complex) -> complex:
    A = pencil.matrix(s)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e15:
        raise SingularSystemError(s, cond)
    v = np.linalg.solve(A, pencil.b.astype(A.dtype))
    return complex(v[pencil.out_index])


def _initial_scale(pencil: MnaPencil) -> float:
    """1/tau from the mean diagonal conductance and capacitance."""
    g = np.abs(np.diag(pencil.G))[:-1]
    c = np.abs(np.diag(pencil.Cm))[:-1]
    if not np.any(c > 0) or not np.any(g > 0):
        return 1.0
    return float(np.mean(g[g > 0]) / np.mean(c[c > 0]))


def _geomean_abs(roots) -> float | None:
    mags = np.abs(np.asarray(roots))
    mags = mags[(mags > 0) & np.isfinite(mags)]
    if mags.size == 0:
        return None
    return float(np.exp(np.mean(np.log(mags))))


def _interpolate(pencil: MnaPencil, w0: float):
    """Raw (unnormalized) num/den coefficients from n+1 Chebyshev samples at scale w0."""
    n = pencil.size
    x = np.cos(np.pi * (2 * np.arange(n + 1) + 1) / (2 * (n + 1)))
    s_points = w0 * x
    out = pencil.out_index
    nums = np.empty(n + 1)
    dens = np.empty(n + 1)
    for i, s in enumerate(s_points):
        A = pencil.matrix(s)
        dens[i] = np.linalg.det(A)
        A[:, out] = pencil.b
        nums[i] = np.linalg.det(A)
    if not (np.all(np.isfinite(nums)) and np.all(np.isfinite(dens))):
        raise InterpolationError("non-finite determinant samples")
    powers = w0 ** np.arange(n + 1)
    return npoly.polyfit(x, nums, n) / powers, npoly.polyfit(x, dens, n) / powers


def _combine(passes, scales) -> np.ndarray:
    """Pick each coefficient from the pass where its term dominates most.

    A coefficient whose best relative dominance stays under EPS_TRIM is zero.
    """
    est = np.array(passes)  # (npass, n+1)
    k = np.arange(est.shape[1])
    terms = np.abs(est) * np.asarray(scales)[:, None] ** k
    with np.errstate(invalid="ignore", divide="ignore"):
        dom = terms / terms.max(axis=1, keepdims=True)
    dom = np.nan_to_num(dom)
    best = np.argmax(dom, axis=0)
    c = est[best, k]
    c[dom[best, k] < EPS_TRIM] = 0.0
    nz = np.flatnonzero(c)
    return c[: nz[-1] + 1] if nz.size else np.zeros(1)


def _scales(roots, base: float) -> list[float]:
    out = [base]
    for m in sorted(np.abs(np.asarray(roots))):
        if m > 0 and np.isfinite(m) and all(abs(math.log10(m / w)) > 0.3 for w in out):
            out.append(float(m))
    return out


def extract_coeffs(pencil: MnaPencil, omega0: float | None = None) -> NumericRational:
    """Exact H(s) coefficients by evaluate-and-interpolate on the pencil.

    Determinants of ``G + s*Cm`` (denominator) and of the same matrix with the
    output column replaced by the excitation (numerator, Cramer's rule) are
    sampled at Chebyshev-spaced real points ``w * x`` with ``|x| <= 1``.

    The reference scale ``omega0`` defaults to the geometric mean of the
    denominator root magnitudes, bootstrapped from the mean RC time constant.
    One more pass is run at each distinct root magnitude, and every
    coefficient is taken from the pass in which its term dominates, so
    widely spread poles and zeros keep full relative precision.
    """
    if omega0 is None:
        w0 = _initial_scale(pencil)
        num, den = _interpolate(pencil, w0)
        num, den = _combine([num], [w0]), _combine([den], [w0])
        g = _geomean_abs(find_roots(den))
        if g is not None:
            w0 = g
    else:
        w0 = float(omega0)

    num, den = _interpolate(pencil, w0)
    nums, dens, used = [num], [den], [w0]
    roots = np.concatenate(
        [find_roots(_combine([num], [w0])), find_roots(_combine([den], [w0]))]
    )
    for w in _scales(roots, w0)[1:]:
        num, den = _interpolate(pencil, w)
        nums.append(num)
        dens.append(den)
        used.append(w)
    num, den = _combine(nums, used), _combine(dens, used)
    if not np.any(den):
        raise InterpolationError("denominator vanished identically")

    # unit max |den|, lowest-order nonzero den coefficient positive
    scale = np.max(np.abs(den)) * np.sign(den[np.flatnonzero(den)[0]])
    return NumericRational(num / scale, den / scale)


def _poly_scale(c: np.ndarray) -> float:
    """Characteristic root magnitude |c0/cn|^(1/n) of a polynomial with c0 != 0."""
    return abs(c[0] / c[-1]) ** (1.0 / (len(c) - 1))


def find_roots(coeffs) -> np.ndarray:
    """All roots of an ascending-coefficient polynomial.

    Companion-matrix eigenvalues in a frequency-normalized variable, then one
    Newton step on the original polynomial (kept only if it lowers |p|).
    """
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if len(c) <= 1:
        return np.zeros(0, dtype=complex)
    nz = np.flatnonzero(c)[0]
    at_zero = np.zeros(nz, dtype=complex)
    c = c[nz:]
    if len(c) == 1:
        return at_zero
    w = _poly_scale(c)
    cn = c * w ** np.arange(len(c))
    r = np.roots(cn[::-1]).astype(complex) * w

    d = npoly.polyder(c)
    p = npoly.polyval(r, c)
    dp = npoly.polyval(r, d)
    with np.errstate(all="ignore"):
        step = np.where(dp != 0, p / dp, 0)
        refined = r - step
        better = np.isfinite(refined) & (np.abs(npoly.polyval(refined, c)) < np.abs(p))
    r = np.where(better, refined, r)
    return np.concatenate([at_zero, r])


def batch_roots(coeffs: np.ndarray, degree=None) -> np.ndarray:
    """Roots of many polynomials at once.

    ``coeffs`` has shape (D, n+1), ascending powers; exact zeros are
    structural. ``degree`` optionally gives each row's effective degree
    (coefficients above it are ignored). Returns (D, n) complex, padded
    with nan. Rows are grouped by their lowest and highest nonzero power
    and solved as batched companion eigenproblems in a scaled variable.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    D, width = coeffs.shape
    n = width - 1
    roots = np.full((D, max(n, 0)), np.nan + 0j)
    nz = coeffs != 0
    if degree is None:
        degree = np.where(nz.any(axis=1), n - np.argmax(nz[:, ::-1], axis=1), -1)
    degree = np.asarray(degree)
    low = np.argmax(nz, axis=1)
    for key in set(zip(low.tolist(), degree.tolist())):
        lo, k = key
        if k < 1 or lo > k:
            continue
        rows = np.flatnonzero((low == lo) & (degree == k))
        roots[rows, :lo] = 0.0
        m = k - lo
        if m == 0:
            continue
        c = coeffs[rows, lo : k + 1]
        w = np.abs(c[:, 0] / c[:, -1]) ** (1.0 / m)
        cn = c * w[:, None] ** np.arange(m + 1)
        cn = cn / cn[:, -1:]
        comp = np.zeros((rows.size, m, m))
        comp[:, 0, :] = -cn[:, m - 1 :: -1]
        if m > 1:
            idx = np.arange(m - 1)
            comp[:, idx + 1, idx] = 1.0
        with np.errstate(all="ignore"):
            ok = np.all(np.isfinite(comp), axis=(1, 2))
            if ok.any():
                roots[rows[ok], lo:k] = np.linalg.eigvals(comp[ok]) * w[ok, None]
    return roots


def dc_gain(r: NumericRational) -> tuple[float, int]:
    """(20*log10|H(0)|, sign of H(0))."""
    f0, g0 = r.num[0], r.den[0]
    if f0 == 0 or g0 == 0:
        raise NoDcGainError("no finite nonzero dc-gain")
    ratio = f0 / g0
    return 20.0 * math.log10(abs(ratio)), (1 if ratio > 0 else -1)


def gain_db(r: NumericRational, s: complex) -> float:
    return 20.0 * math.log10(abs(r(s)))
