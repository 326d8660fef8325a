"""Simplified symbolic transfer functions and their chromosome encoding.

A chromosome is a P x Q integer matrix, P = M + N + 2 rows (numerator
coefficients f_0..f_M, then denominator coefficients g_0..g_N) and
Q = T * (K + 1) columns. Each row holds T term slots of K binary
parameter-presence genes followed by one term selector in {-1, 0, +1}.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np


class SimplifiedSingular(ArithmeticError):
    """The simplified denominator vanishes at the evaluation point."""


@dataclass(frozen=True)
class SymbolicTerm:
    sign: int
    present: tuple[bool, ...]

    def names(self, names) -> tuple[str, ...]:
        return tuple(n for n, p in zip(names, self.present) if p)


@dataclass(frozen=True)
class SymbolicPolynomial:
    terms: tuple[SymbolicTerm, ...] = ()

    def __len__(self):
        return len(self.terms)


@dataclass(frozen=True)
class SymbolicRational:
    num_polys: tuple[SymbolicPolynomial, ...]
    den_polys: tuple[SymbolicPolynomial, ...]

    @property
    def M(self) -> int:
        return len(self.num_polys) - 1

    @property
    def N(self) -> int:
        return len(self.den_polys) - 1

    @property
    def P(self) -> int:
        return len(self.num_polys) + len(self.den_polys)

    def term_count(self) -> int:
        return sum(len(p) for p in self.num_polys + self.den_polys)


@dataclass(frozen=True, eq=False)
class Chromosome:
    genes: np.ndarray  # (P, Q) int8
    M: int
    N: int
    K: int

    @property
    def P(self) -> int:
        return self.genes.shape[0]

    @property
    def T(self) -> int:
        return self.genes.shape[1] // (self.K + 1)

    @property
    def slots(self) -> np.ndarray:
        """(P, T, K+1) view of the genes."""
        return self.genes.reshape(self.P, self.T, self.K + 1)

    @property
    def s_genes(self) -> np.ndarray:
        return self.slots[:, :, : self.K]

    @property
    def selectors(self) -> np.ndarray:
        return self.slots[:, :, self.K]

    def __eq__(self, other):
        return (
            isinstance(other, Chromosome)
            and (self.M, self.N, self.K) == (other.M, other.N, other.K)
            and np.array_equal(self.genes, other.genes)
        )

    __hash__ = None


def chromosome_shape(M: int, N: int, K: int, T: int) -> tuple[int, int]:
    return M + N + 2, T * (K + 1)


def decode(chrom: Chromosome, model=None) -> SymbolicRational:
    if model is not None and chrom.K != model.K:
        raise ValueError(f"chromosome has K={chrom.K}, circuit has K={model.K}")
    P, Q = chrom.genes.shape
    if P != chrom.M + chrom.N + 2 or Q % (chrom.K + 1):
        raise ValueError(f"chromosome shape {chrom.genes.shape} does not match M, N, K")
    polys = []
    for row in chrom.slots:
        terms = tuple(
            SymbolicTerm(int(slot[-1]), tuple(bool(g) for g in slot[:-1]))
            for slot in row
            if slot[-1] != 0
        )
        polys.append(SymbolicPolynomial(terms))
    m = chrom.M + 1
    return SymbolicRational(tuple(polys[:m]), tuple(polys[m:]))


def encode(sr: SymbolicRational, T: int, K: int | None = None) -> Chromosome:
    """Inverse of decode; unused slots get TS = 0 and all-zero S genes."""
    if K is None:
        K = next((len(t.present) for p in sr.num_polys + sr.den_polys for t in p.terms), None)
    if K is None:
        raise ValueError("cannot infer K from an all-empty rational")
    genes = np.zeros((sr.P, T, K + 1), dtype=np.int8)
    for p, poly in enumerate(sr.num_polys + sr.den_polys):
        if len(poly) > T:
            raise ValueError(f"polynomial {p} has {len(poly)} terms, more than T={T}")
        for t, term in enumerate(poly.terms):
            genes[p, t, :K] = term.present
            genes[p, t, K] = term.sign
    return Chromosome(genes.reshape(sr.P, T * (K + 1)), sr.M, sr.N, K)


def evaluate_poly(poly: SymbolicPolynomial, values) -> float:
    total = 0.0
    for t in poly.terms:
        prod = 1.0
        for v, p in zip(values, t.present):
            if p:
                prod *= v
        total += t.sign * prod
    return total


def evaluate_rational(sr: SymbolicRational, values, s: complex) -> complex:
    num = sum(evaluate_poly(p, values) * s**i for i, p in enumerate(sr.num_polys))
    den = sum(evaluate_poly(p, values) * s**i for i, p in enumerate(sr.den_polys))
    if abs(den) < 1e-300:
        raise SimplifiedSingular(f"simplified denominator vanishes at s={s}")
    return num / den


def _default_names(K):
    return [f"x{k + 1}" for k in range(K)]


def canonicalize(poly: SymbolicPolynomial, names=None) -> SymbolicPolynomial:
    """Merge like terms, drop cancelled ones, order by size then names.

    A net coefficient c is kept as |c| copies of the term with sign(c).
    """
    if not poly.terms:
        return poly
    names = names or _default_names(len(poly.terms[0].present))
    net = Counter()
    for t in poly.terms:
        net[t.present] += t.sign
    terms = []
    for present, c in net.items():
        if c:
            terms.extend([SymbolicTerm(1 if c > 0 else -1, present)] * abs(c))
    terms.sort(key=lambda t: (-sum(t.present), t.names(names), -t.sign))
    return SymbolicPolynomial(tuple(terms))


def _negate(poly: SymbolicPolynomial) -> SymbolicPolynomial:
    return SymbolicPolynomial(tuple(SymbolicTerm(-t.sign, t.present) for t in poly.terms))


def canonicalize_rational(sr: SymbolicRational, names=None) -> SymbolicRational:
    """Canonicalize every polynomial and fix the overall sign.

    Numerator and denominator are negated together when the lowest-order
    nonempty denominator polynomial has a negative leading term, so
    ``gm / (-g - s·c)`` and ``-gm / (g + s·c)`` compare equal.
    """
    num = [canonicalize(p, names) for p in sr.num_polys]
    den = [canonicalize(p, names) for p in sr.den_polys]
    lead = next((p.terms[0] for p in den if p.terms), None)
    if lead is not None and lead.sign < 0:
        num = [canonicalize(_negate(p), names) for p in num]
        den = [canonicalize(_negate(p), names) for p in den]
    return SymbolicRational(tuple(num), tuple(den))


def _poly_text(poly: SymbolicPolynomial, names) -> str:
    # merge repeats into an integer prefix; order as given
    groups: list[list] = []
    for t in poly.terms:
        if groups and groups[-1][0] == t:
            groups[-1][1] += 1
        else:
            groups.append([t, 1])
    parts = []
    for term, count in groups:
        body = "·".join(term.names(names)) or "1"
        if count > 1:
            body = f"{count}·{body}"
        if not parts:
            parts.append(("-" if term.sign < 0 else "") + body)
        else:
            parts.append((" - " if term.sign < 0 else " + ") + body)
    return "".join(parts)


def _side_text(polys, names) -> str:
    parts = []
    for i, poly in enumerate(polys):
        if not poly.terms:
            continue
        text = _poly_text(poly, names)
        if i == 0:
            parts.append(text)
            continue
        sp = "s" if i == 1 else f"s^{i}"
        if len(poly.terms) > 1:
            text = f"({text})"
        if text.startswith("-"):
            parts.append(f"-{sp}·{text[1:]}")
        else:
            parts.append(f"{sp}·{text}")
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return out


def render(sr: SymbolicRational, model=None, names=None) -> str:
    if names is None:
        names = model.parameter_names if model is not None else None
    if names is None:
        K = next((len(t.present) for p in sr.num_polys + sr.den_polys for t in p.terms), 0)
        names = _default_names(K)
    sr = canonicalize_rational(sr, names)
    return f"H(s) = ({_side_text(sr.num_polys, names)}) / ({_side_text(sr.den_polys, names)})"


def to_json(sr: SymbolicRational, names) -> dict:
    """``{"num": [[["-", "gm1"], ...] per s-power], "den": [...]}``."""

    def side(polys):
        return [
            [["-" if t.sign < 0 else "+", *t.names(names)] for t in p.terms] for p in polys
        ]

    return {"num": side(sr.num_polys), "den": side(sr.den_polys)}


def from_json(data: dict, names) -> SymbolicRational:
    index = {n: k for k, n in enumerate(names)}

    def side(rows):
        polys = []
        for row in rows:
            terms = []
            for term in row:
                sign, *params = term
                if sign not in ("+", "-"):
                    raise ValueError(f"bad term sign {sign!r}")
                present = [False] * len(names)
                for name in params:
                    if name not in index:
                        raise ValueError(f"expression names unknown parameter {name!r}")
                    present[index[name]] = True
                terms.append(SymbolicTerm(-1 if sign == "-" else 1, tuple(present)))
            polys.append(SymbolicPolynomial(tuple(terms)))
        return tuple(polys)

    return SymbolicRational(side(data["num"]), side(data["den"]))
