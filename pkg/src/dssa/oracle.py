"""Exact symbolic transfer function by cofactor expansion of the MNA determinant.

Brute force on purpose: it is the ground truth the numeric engine and the
simplified expressions are checked against, and it only runs on small circuits.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .netlist import CAPACITANCE, CONDUCTANCE, VCCS, CircuitModel
from .numeric import build_pencil, extract_coeffs

MAX_NODES = 8

# Polynomial in s and the circuit parameters: {(s_power, sorted param indices): int}
Poly = dict


class OracleNotApplicable(ValueError):
    pass


@dataclass(frozen=True)
class ExactSymbolic:
    num: dict
    den: dict
    names: tuple[str, ...]

    @property
    def M(self) -> int:
        return max((k[0] for k in self.num), default=0)

    @property
    def N(self) -> int:
        return max((k[0] for k in self.den), default=0)

    def repeated(self) -> list[tuple]:
        """Terms in which some parameter appears more than once."""
        return [
            key
            for poly in (self.num, self.den)
            for key in poly
            if len(set(key[1])) != len(key[1])
        ]

    def coefficients(self, values) -> tuple[np.ndarray, np.ndarray]:
        """Numeric coefficient vectors (ascending powers of s) at ``values``."""
        values = np.asarray(values, dtype=float)

        def vec(poly, deg):
            out = np.zeros(deg + 1)
            for (p, params), c in poly.items():
                out[p] += c * np.prod(values[list(params)])
            return out

        return vec(self.num, self.M), vec(self.den, self.N)

    def evaluate(self, values, s) -> complex:
        num, den = self.coefficients(values)
        return np.polyval(num[::-1], s) / np.polyval(den[::-1], s)

    def polynomial_terms(self, which: str, power: int) -> list[tuple[int, tuple[str, ...]]]:
        poly = self.num if which == "num" else self.den
        terms = [
            (c, tuple(self.names[i] for i in params))
            for (p, params), c in poly.items()
            if p == power
        ]
        return sorted(terms, key=lambda t: (-len(t[1]), t[1]))


def _add(acc: Poly, poly: Poly, factor: Poly, sign: int) -> None:
    for (p1, m1), c1 in poly.items():
        for (p2, m2), c2 in factor.items():
            key = (p1 + p2, tuple(sorted(m1 + m2)))
            acc[key] += sign * c1 * c2


def _prune(poly) -> Poly:
    return {k: v for k, v in poly.items() if v != 0}


def symbolic_pencil(model: CircuitModel) -> tuple[list[list[Poly]], list[Poly]]:
    """(A, b) with A = G + s*C as symbolic entries and b the excitation."""
    n = model.node_count + 1
    A = [[defaultdict(int) for _ in range(n)] for _ in range(n)]

    def put(i, j, key, sign):
        if i and j:
            A[i - 1][j - 1][key] += sign

    for e in model.elements:
        k = e.parameter_index
        if e.kind in (CONDUCTANCE, CAPACITANCE):
            key = (1 if e.kind == CAPACITANCE else 0, (k,))
            a, b = e.terminals
            for i, j, sign in ((a, a, 1), (b, b, 1), (a, b, -1), (b, a, -1)):
                put(i, j, key, sign)
        elif e.kind == VCCS:
            op, on, cp, cn = e.terminals
            for i, j, sign in ((op, cp, 1), (op, cn, -1), (on, cp, -1), (on, cn, 1)):
                put(i, j, (0, (k,)), sign)
    src = n - 1
    A[model.input_node - 1][src][(0, ())] += 1
    A[src][model.input_node - 1][(0, ())] += 1
    A = [[_prune(x) for x in row] for row in A]
    b = [{} for _ in range(n)]
    b[src] = {(0, ()): 1}
    return A, b


def symbolic_det(A: list[list[Poly]]) -> Poly:
    """Laplace expansion along rows, memoized on the remaining column subset."""
    n = len(A)
    memo: dict[tuple[int, ...], Poly] = {}

    def minor(cols: tuple[int, ...]) -> Poly:
        if not cols:
            return {(0, ()): 1}
        if cols in memo:
            return memo[cols]
        row = n - len(cols)
        acc = defaultdict(int)
        for pos, j in enumerate(cols):
            entry = A[row][j]
            if not entry:
                continue
            sub = minor(cols[:pos] + cols[pos + 1:])
            if sub:
                _add(acc, sub, entry, -1 if pos % 2 else 1)
        res = _prune(acc)
        memo[cols] = res
        return res

    return minor(tuple(range(n)))


def exact_symbolic(model: CircuitModel) -> ExactSymbolic:
    if model.node_count > MAX_NODES:
        raise OracleNotApplicable(
            f"oracle not applicable at this scale: {model.node_count} nodes > {MAX_NODES}"
        )
    A, b = symbolic_pencil(model)
    den = symbolic_det(A)
    out = model.output_node - 1
    A_num = [row[:out] + [b[i]] + row[out + 1:] for i, row in enumerate(A)]
    num = symbolic_det(A_num)

    e = ExactSymbolic(num, den, tuple(model.parameter_names))
    # same sign convention as the numeric engine: lowest-order den coefficient positive
    _, dvec = e.coefficients(model.nominal)
    nz = np.flatnonzero(dvec)
    if nz.size and dvec[nz[0]] < 0:
        e = ExactSymbolic(
            {k: -v for k, v in num.items()}, {k: -v for k, v in den.items()}, e.names
        )
    return e


def term_count(e: ExactSymbolic) -> tuple[int, int, int]:
    return len(e.num), len(e.den), len(e.num) + len(e.den)


def _term_text(coef: int, names) -> str:
    body = "·".join(names) if names else "1"
    mag = abs(coef)
    return ("-" if coef < 0 else "+") + (f"{mag}·" if mag != 1 else "") + body


def render_exact(e: ExactSymbolic) -> str:
    lines = []
    for label, which, deg in (("numerator", "num", e.M), ("denominator", "den", e.N)):
        lines.append(f"{label}:")
        for p in range(deg + 1):
            terms = e.polynomial_terms(which, p)
            body = " ".join(_term_text(c, ns) for c, ns in terms) or "0"
            lines.append(f"  s^{p}: {body}")
    n, d, t = term_count(e)
    lines.append(f"terms: numerator {n}, denominator {d}, total {t}")
    rep = e.repeated()
    if rep:
        lines.append(f"warning: {len(rep)} terms contain a repeated parameter")
    return "\n".join(lines)


def _probe_band(model: CircuitModel) -> tuple[float, float]:
    """log10 angular-frequency band spanning the nominal roots, one decade margin."""
    r = extract_coeffs(build_pencil(model, model.nominal))
    from .numeric import find_roots

    mags = np.abs(np.concatenate([find_roots(r.num), find_roots(r.den)]))
    mags = mags[mags > 0]
    if mags.size == 0:
        return 0.0, 10.0
    return float(np.log10(mags.min())) - 1, float(np.log10(mags.max())) + 1


def verify_consistency(model: CircuitModel, sample_count: int, rng) -> float:
    """Max relative deviation between oracle H and interpolated numeric H."""
    if sample_count <= 0:
        return 0.0
    e = exact_symbolic(model)
    lo, hi = _probe_band(model)
    worst = 0.0
    for _ in range(sample_count):
        values = rng.uniform(model.lower, model.upper)
        s = 1j * 10 ** rng.uniform(lo, hi)
        h_exact = e.evaluate(values, s)
        h_num = extract_coeffs(build_pencil(model, values))(s)
        worst = max(worst, abs(h_num - h_exact) / abs(h_exact))
    return worst
