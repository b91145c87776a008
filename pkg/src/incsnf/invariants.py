"""Closed-form p-adic invariant spectra of point-subspace incidence matrices.

Projective: the multiplicity of p^alpha is the total weight d_xi of the type
tuples xi in H with sum_j max(0, r - s_j) = alpha, plus one at alpha = 0;
the largest invariant also carries the unit factor (q^r - 1)/(q - 1).
Affine: every invariant is a p-power, counted directly from the monomials
with b_0 >= 1, or as a difference of two projective spectra.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .conway import prime_power
from .errors import OutsideTheoremRange


@lru_cache(maxsize=None)
def d_coefficients(n: int, p: int) -> tuple[int, ...]:
    """Coefficients of (1 + x + ... + x^(p-1))^(n+1), cross-checked."""
    if n < 1:
        raise ValueError("n must be at least 1")
    poly = [1]
    for _ in range(n + 1):
        nxt = [0] * (len(poly) + p - 1)
        for i, c in enumerate(poly):
            for k in range(p):
                nxt[i + k] += c
        poly = nxt
    alt = [
        sum((-1) ** j * comb(n + 1, j) * comb(n + i - j * p, n) for j in range(i // p + 1))
        for i in range(len(poly))
    ]
    if alt != poly:
        raise AssertionError(f"d_i expansions disagree for n={n}, p={p}")
    return tuple(poly)


def d_value(i: int, n: int, p: int) -> int:
    d = d_coefficients(n, p)
    return d[i] if 0 <= i < len(d) else 0


@dataclass(frozen=True)
class TypeTuple:
    s: tuple[int, ...]
    p: int
    n: int

    @property
    def t(self) -> int:
        return len(self.s)

    @property
    def lam(self) -> tuple[int, ...]:
        s, t = self.s, self.t
        return tuple(self.p * s[(j + 1) % t] - s[j] for j in range(t))

    @property
    def weight(self) -> int:
        """d_xi, the number of basis monomials of this type."""
        out = 1
        for lam in self.lam:
            out *= d_value(lam, self.n, self.p)
        return out

    def in_H(self) -> bool:
        top = (self.p - 1) * (self.n + 1)
        return all(1 <= s <= self.n for s in self.s) and all(0 <= x <= top for x in self.lam)

    def shift(self, k: int = 1) -> "TypeTuple":
        return TypeTuple(self.s[k:] + self.s[:k], self.p, self.n)


@lru_cache(maxsize=None)
def _H(n: int, p: int, t: int) -> tuple[TypeTuple, ...]:
    out = []
    for s in itertools.product(range(1, n + 1), repeat=t):
        xi = TypeTuple(s, p, n)
        if xi.in_H():
            out.append(xi)
    return tuple(out)


def enumerate_H(n: int, p: int, t: int) -> list[TypeTuple]:
    """The set H in lexicographic order."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return list(_H(n, p, t))


def alpha_of_type(xi: TypeTuple | tuple, r: int) -> int:
    s = xi.s if isinstance(xi, TypeTuple) else xi
    return sum(max(0, r - sj) for sj in s)


@dataclass(frozen=True)
class InvariantSpectrum:
    p: int
    t: int
    n: int
    r: int
    space: str
    mult: dict[int, int]
    last_nonp: int
    degenerate: bool = False
    source: str = "formula"

    @property
    def q(self) -> int:
        return self.p**self.t

    @property
    def total(self) -> int:
        return sum(self.mult.values())

    def invariants(self) -> list[int]:
        """Integer invariant chain: p-powers ascending, last one times last_nonp."""
        out = [self.p**a for a, m in sorted(self.mult.items()) for _ in range(m)]
        if out:
            out[-1] *= self.last_nonp
        return out

    def same_as(self, other: "InvariantSpectrum") -> bool:
        clean = lambda m: {a: k for a, k in m.items() if k}
        return clean(self.mult) == clean(other.mult) and self.last_nonp == other.last_nonp

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "t": self.t,
            "n": self.n,
            "r": self.r,
            "space": self.space,
            "p_spectrum": {str(a): m for a, m in sorted(self.mult.items())},
            "last_nonp": self.last_nonp,
            "total": self.total,
            "degenerate": self.degenerate,
            "source": self.source,
        }

    def csv_rows(self) -> list[list]:
        return [
            [self.p, self.t, self.n, self.r, self.space, a, m, self.last_nonp]
            for a, m in sorted(self.mult.items())
        ]


CSV_HEADER = ["p", "t", "n", "r", "space", "alpha", "multiplicity", "last_nonp"]


def spectra_csv(spectra) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for sp in spectra:
        w.writerows(sp.csv_rows())
    return buf.getvalue()


def _check_projective(n, r):
    if not 2 <= r <= n:
        raise OutsideTheoremRange(
            f"closed form needs 2 <= r <= n, got r={r}, n={n}; use the oracle for degenerate r"
        )


def projective_spectrum(n: int, q: int, r: int) -> InvariantSpectrum:
    _check_projective(n, r)
    p, t = prime_power(q)
    mult: dict[int, int] = {0: 1}
    for xi in _H(n, p, t):
        a = alpha_of_type(xi, r)
        mult[a] = mult.get(a, 0) + xi.weight
    mult = {a: m for a, m in sorted(mult.items()) if m}
    return InvariantSpectrum(p, t, n, r, "projective", mult, (q**r - 1) // (q - 1))


def hamada_p_rank(n: int, q: int, r: int) -> int:
    _check_projective(n, r)
    p, t = prime_power(q)
    return 1 + sum(xi.weight for xi in _H(n, p, t) if min(xi.s) >= r)


def _check_affine(n, r, lo_gap=1):
    if not 1 <= r <= n - lo_gap:
        raise OutsideTheoremRange(f"affine formula needs 1 <= r <= n-{lo_gap}, got r={r}, n={n}")


def affine_spectrum_direct(n: int, q: int, r: int) -> InvariantSpectrum:
    """Count monomials with b_0 >= 1 by alpha(type, r+1); the all-(q-1) one adds a unit."""
    from .charsum import basis_array, types_of

    _check_affine(n, r)
    p, t = prime_power(q)
    B = basis_array(n, q)
    B = B[B[:, 0] >= 1]
    S = types_of(B, q)
    alphas = np.maximum(0, r + 1 - S).sum(axis=1)
    counts = np.bincount(alphas)
    mult = {a: int(m) for a, m in enumerate(counts) if m}
    mult[0] = mult.get(0, 0) + 1
    return InvariantSpectrum(p, t, n, r, "affine", dict(sorted(mult.items())), 1)


def affine_spectrum_difference(n: int, q: int, r: int) -> InvariantSpectrum:
    """m(alpha, n, r+1) - m(alpha, n-1, r+1); defined here only for r <= n-2."""
    _check_affine(n, r, lo_gap=2)
    p, t = prime_power(q)
    big = projective_spectrum(n, q, r + 1).mult
    small = projective_spectrum(n - 1, q, r + 1).mult
    mult = {}
    for a in sorted(set(big) | set(small)):
        m = big.get(a, 0) - small.get(a, 0)
        if m < 0:
            raise AssertionError(f"negative multiplicity at alpha={a}")
        if m:
            mult[a] = m
    return InvariantSpectrum(p, t, n, r, "affine", mult, 1, source="difference")


def spectrum_from_invariants(invariants, n, q, r, space, degenerate=False) -> InvariantSpectrum:
    """Spectrum read off an integer invariant list (the oracle side)."""
    p, t = prime_power(q)
    mult: dict[int, int] = {}
    for d in invariants:
        a = 0
        while d % p == 0:
            d //= p
            a += 1
        mult[a] = mult.get(a, 0) + 1
    last = invariants[-1] if invariants else 1
    while last % p == 0:
        last //= p
    return InvariantSpectrum(
        p, t, n, r, space, dict(sorted(mult.items())), last, degenerate, source="oracle"
    )


def degenerate_projective_spectrum(n: int, q: int, r: int) -> InvariantSpectrum:
    """r = 1 or r = n + 1: literal SNF of the incidence matrix, flagged degenerate."""
    from .incidence import projective_incidence_matrix
    from .snf import smith_normal_form

    if r not in (1, n + 1):
        raise OutsideTheoremRange(f"r={r} is not a degenerate case for n={n}")
    res = smith_normal_form(projective_incidence_matrix(n, q, r))
    return spectrum_from_invariants(list(res.invariants), n, q, r, "projective", degenerate=True)
