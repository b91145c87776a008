"""Monomial bases, types, Jacobi sums and subspace coordinate sums.

Characters follow the Ax convention: T^0 is 1 on all of F_q (including 0),
while T^k(0) = 0 for 1 <= k <= q-1.  Coordinate sums are computed exactly
in R/p^N; a fast path groups summands by discrete logarithm so a whole
coordinate is an integer combination of powers of xi = T(g).  Whether such
a combination vanishes in R itself (not just mod p^N) is decided by
reducing it modulo the cyclotomic polynomial Phi_{q-1}.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .conway import prime_power
from .errors import (
    DegenerateCharacters,
    NoType,
    PrecisionExhausted,
    SpecMismatch,
)
from .geometry import Subspace, combine, subspace_array
from .gf import FieldSpec, RingElement, RingSpec, default_precision
from .invariants import TypeTuple, alpha_of_type


def sigma_digits(k: int, base: int, modulus_convention: bool = False, q: int | None = None) -> int:
    """Digit sum of k in the given base.

    With modulus_convention, k is first replaced by its least nonnegative
    residue mod q-1 (q defaults to base).
    """
    if modulus_convention:
        k %= (q if q is not None else base) - 1
    if k < 0:
        raise ValueError("digit sums need k >= 0")
    total = 0
    while k:
        k, d = divmod(k, base)
        total += d
    return total


def _digits(b: int, p: int, t: int) -> tuple[int, ...]:
    out = []
    for _ in range(t):
        b, a = divmod(b, p)
        out.append(a)
    return tuple(out)


@dataclass(frozen=True)
class ExponentTuple:
    b: tuple[int, ...]
    q: int

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(int(x) for x in self.b))
        if any(not 0 <= x <= self.q - 1 for x in self.b):
            raise ValueError("exponents must lie in [0, q-1]")
        if sum(self.b) % (self.q - 1):
            raise ValueError("total degree must be divisible by q-1")

    @property
    def p(self) -> int:
        return prime_power(self.q)[0]

    @property
    def t(self) -> int:
        return prime_power(self.q)[1]

    @property
    def n(self) -> int:
        return len(self.b) - 1

    def is_constant(self) -> bool:
        return not any(self.b)

    def in_basis(self) -> bool:
        return any(x != self.q - 1 for x in self.b)

    @property
    def digits(self) -> tuple[tuple[int, ...], ...]:
        """a_{i,j}: base-p digits of each b_i, least significant first."""
        return tuple(_digits(x, self.p, self.t) for x in self.b)

    @property
    def lam(self) -> tuple[int, ...]:
        return tuple(sum(col) for col in zip(*self.digits))

    @cached_property
    def type(self) -> TypeTuple:
        return type_of_monomial(self)

    def alpha(self, r: int) -> int:
        return alpha_of_type(self.type, r)


@lru_cache(maxsize=32)
def _basis_array(n: int, q: int) -> np.ndarray:
    grids = np.indices((q,) * (n + 1)).reshape(n + 1, -1).T
    keep = (grids.sum(axis=1) % (q - 1) == 0) & ~(grids == q - 1).all(axis=1)
    out = grids[keep]
    out.setflags(write=False)
    return out


def basis_array(n: int, q: int) -> np.ndarray:
    """Exponent tuples of the monomial basis, lexicographic, as an (N, n+1) array."""
    prime_power(q)
    return _basis_array(n, q)


def monomial_basis(n: int, q: int) -> list[ExponentTuple]:
    return [ExponentTuple(tuple(row), q) for row in basis_array(n, q).tolist()]


def types_of(B: np.ndarray, q: int) -> np.ndarray:
    """Type tuples (s_0, ..., s_{t-1}) for each row of B, vectorised."""
    p, t = prime_power(q)
    B = np.asarray(B, dtype=np.int64)
    digits = np.stack([(B // p**ell) % p for ell in range(t)], axis=-1)
    S = np.empty((len(B), t), dtype=np.int64)
    for j in range(t):
        weights = np.array([p ** (ell + t - j) if ell < j else p ** (ell - j) for ell in range(t)])
        rot = digits @ weights
        total = rot.sum(axis=1)
        S[:, j] = total // (q - 1)
        assert (total % (q - 1) == 0).all()
    return S


def type_of_monomial(b: ExponentTuple) -> TypeTuple:
    if b.is_constant():
        raise NoType("the constant monomial has no type")
    s = types_of(np.array([b.b]), b.q)[0]
    xi = TypeTuple(tuple(int(x) for x in s), b.p, b.n)
    # lambda_j = p s_{j+1} - s_j must reproduce the digit column sums
    if xi.lam != b.lam:
        raise AssertionError(f"type {xi.s} does not match digits of {b.b}")
    return xi


def wan_lower_bound(b: ExponentTuple, r: int) -> int:
    """sum_l max(0, r - (1/(q-1)) sum_i sigma_q(p^l b_i))."""
    if b.is_constant():
        raise NoType("the bound is stated for nonconstant monomials")
    q, p = b.q, b.p
    total = Fraction(0)
    for ell in range(b.t):
        s = Fraction(sum(sigma_digits(p**ell * x, q) for x in b.b), q - 1)
        total += max(Fraction(0), r - s)
    if total.denominator != 1:
        raise AssertionError("non-integral Wan bound")
    return int(total)


# -- characters, Jacobi sums ------------------------------------------------


def character_value(k: int, a: int, ring: RingSpec) -> RingElement:
    """T^k evaluated at the field element with index a (Ax convention)."""
    if k == 0:
        return ring.one
    if a == 0:
        return ring.zero
    return ring.teichmuller_table[a] ** k


def jacobi_sum(b0: int, b1: int, ring: RingSpec) -> RingElement:
    """J(T^b0, T^b1) = sum over x in F_q of T^b0(x) T^b1(1 - x)."""
    q = ring.q
    if not (0 <= b0 <= q - 1 and 0 <= b1 <= q - 1):
        raise ValueError("exponents must lie in [0, q-1]")
    F = ring.field
    total = ring.zero
    for x in F.elements():
        total = total + character_value(b0, x.index, ring) * character_value(
            b1, (F.one - x).index, ring
        )
    return total


def stickelberger_valuation(b0: int, b1: int, q: int) -> int:
    """Carries in b0 + b1 (mod q-1), as (sigma(b0)+sigma(b1)-sigma(b0+b1))/(p-1)."""
    p, _ = prime_power(q)
    if b0 % (q - 1) == 0 or b1 % (q - 1) == 0 or (b0 + b1) % (q - 1) == 0:
        raise DegenerateCharacters(f"({b0}, {b1}) is degenerate for q={q}")
    sig = lambda k: sigma_digits(k, p, True, q)
    num = sig(b0) + sig(b1) - sig(b0 + b1)
    assert num % (p - 1) == 0
    return num // (p - 1)


# -- coordinate sums ---------------------------------------------------------


def _check(b: ExponentTuple, Y: Subspace, ring: RingSpec):
    if Y.q != b.q or ring.q != b.q:
        raise SpecMismatch("monomial, subspace and ring must share q")
    if Y.ambient_dim != len(b.b):
        raise SpecMismatch("monomial has the wrong number of variables")


def eta_coordinate_direct(b: ExponentTuple, Y: Subspace, ring: RingSpec) -> RingElement:
    """(1/(q-1)) sum over nonzero vectors x of Y of prod_i T^{b_i}(x_i), literally."""
    _check(b, Y, ring)
    q = b.q
    basis = Y.array()
    coeffs = np.array(list(itertools.product(range(q), repeat=Y.dim))[1:], dtype=np.int64)
    vecs = combine(coeffs, basis[None], ring.field)[0]
    total = ring.zero
    for x in vecs.tolist():
        term = ring.one
        for k, a in zip(b.b, x):
            term = term * character_value(k, a, ring)
            if not term:
                break
        total = total + term
    return total * ring(q - 1).inverse()


@dataclass(frozen=True)
class _PowerBasis:
    """Integer data for evaluating sum_k c_k xi^k exactly and mod p^N."""

    powers: np.ndarray  # (q-1, t): coefficients of xi^k mod p^N
    reduce: np.ndarray  # (q-1, phi): x^k mod Phi_{q-1} over Z


def _cyclotomic(m: int) -> list[int]:
    """Phi_m over Z, constant term first."""
    poly = [-1] + [0] * (m - 1) + [1]
    for d in range(1, m):
        if m % d == 0:
            poly = _exact_div(poly, _cyclotomic(d))
    return poly


def _exact_div(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1] // den[-1]
        out[i] = c
        for j, d in enumerate(den):
            num[i + j] -= c * d
    assert not any(num)
    return out


@lru_cache(maxsize=64)
def _power_basis(ring: RingSpec) -> _PowerBasis:
    q, t = ring.q, ring.t
    F = ring.field
    xi = ring.teichmuller_table[F.generator]
    powers = np.zeros((q - 1, t), dtype=np.int64)
    e = ring.one
    for k in range(q - 1):
        powers[k] = e.coeffs
        e = e * xi
    phi = _cyclotomic(q - 1)
    deg = len(phi) - 1
    red = np.zeros((q - 1, deg), dtype=np.int64)
    cur = [1] + [0] * (deg - 1)
    for k in range(q - 1):
        red[k] = cur
        # multiply by x and reduce modulo the monic phi
        top = cur[-1]
        cur = [0] + cur[:-1]
        cur = [c - top * f for c, f in zip(cur, phi[:-1])]
    for arr in (powers, red):
        arr.setflags(write=False)
    return _PowerBasis(powers, red)


def log_counts(B: np.ndarray, Ys: np.ndarray, field: int | FieldSpec) -> np.ndarray:
    """c[b, Y, k] = number of points of Y where the monomial b equals g^k.

    Summing over normalised points equals (1/(q-1)) times the sum over all
    nonzero vectors because the total degree is divisible by q-1.
    """
    F = FieldSpec.of_order(field) if isinstance(field, (int, np.integer)) else field
    q = F.q
    N, r, m = Ys.shape
    coeffs = subspace_array(r - 1, q, 1)[:, 0, :]
    pts = combine(coeffs, Ys, F)  # (N, K, m)
    logs = F.log_table[pts]
    zero = pts == 0
    base = np.repeat(np.arange(N) * (q - 1), pts.shape[1])
    out = np.zeros((len(B), N, q - 1), dtype=np.int64)
    for i, b in enumerate(np.asarray(B, dtype=np.int64)):
        # a factor T^k(0) with k > 0 kills the summand; T^0 contributes 1
        live = ~(zero & (b > 0)).any(axis=-1).ravel()
        k = ((logs * b).sum(axis=-1) % (q - 1)).ravel()
        out[i] = np.bincount((base + k)[live], minlength=N * (q - 1)).reshape(N, q - 1)
    return out


def evaluate_counts(counts: np.ndarray, ring: RingSpec) -> np.ndarray:
    """Coefficient vectors (..., t) of sum_k c_k xi^k in R/p^N."""
    pb = _power_basis(ring)
    pN = ring.pN
    if counts.shape[-1] * int(counts.max(initial=0)) * pN >= 2**62:
        vals = np.asarray(counts, dtype=object) @ pb.powers.astype(object)
        return np.asarray(vals % pN)
    return (counts @ pb.powers) % pN


def exactly_zero(counts: np.ndarray, ring: RingSpec) -> np.ndarray:
    return ~((counts @ _power_basis(ring).reduce) != 0).any(axis=-1)


def valuations(coeffs: np.ndarray, p: int, N: int) -> np.ndarray:
    """Coefficientwise p-adic valuation over the last axis; N means 'at least N'."""
    v = np.full(coeffs.shape[:-1], N, dtype=np.int64)
    rest = coeffs.copy()
    open_ = np.ones(v.shape, dtype=bool)
    for k in range(N):
        hit = open_ & (rest % p != 0).any(axis=-1)
        v[hit] = k
        open_ &= ~hit
        rest //= p
    return v


def eta_coordinate(b: ExponentTuple, Y: Subspace, ring: RingSpec) -> RingElement:
    """Y-coordinate of the image of the monomial, via discrete-log counts."""
    _check(b, Y, ring)
    counts = log_counts(np.array([b.b]), Y.array()[None], ring.field)[0, 0]
    return ring(tuple(int(x) for x in evaluate_counts(counts, ring)))


def coordinate_valuations(
    B: np.ndarray, n: int, q: int, r: int, N: int | None = None, field: FieldSpec | None = None
):
    """Valuation of every coordinate, shape (len(B), #subspaces).

    Exact zeros are reported as -1.  Entries that vanish mod p^N but not in
    R are recomputed at doubled precision; PrecisionExhausted is raised when
    N exceeds eight times the starting precision.
    """
    p, t = prime_power(q)
    F = field or FieldSpec.of_order(q)
    if F.q != q:
        raise SpecMismatch("field order differs from q")
    N0 = N or default_precision(r, t)
    Ys = subspace_array(n, q, r)
    B = np.asarray(B, dtype=np.int64).reshape(-1, n + 1)
    out = np.empty((len(B), len(Ys)), dtype=np.int64)
    step = max(1, 4_000_000 // (len(Ys) * (q - 1)))
    for s in range(0, len(B), step):
        out[s : s + step] = _chunk_valuations(B[s : s + step], Ys, F, N0)
    return out


def _chunk_valuations(B, Ys, F: FieldSpec, N0: int):
    counts = log_counts(B, Ys, F)
    ring = RingSpec.lift(F, N0)
    zero = exactly_zero(counts, ring)
    val = valuations(evaluate_counts(counts, ring), F.p, N0)
    val[zero] = -1
    todo = (val == N0) & ~zero
    Ncur = N0
    while todo.any():
        Ncur *= 2
        if Ncur > 8 * N0:
            raise PrecisionExhausted(f"valuations still unresolved at N={Ncur // 2}")
        ring = RingSpec.lift(F, Ncur)
        sub = valuations(evaluate_counts(counts[todo], ring), F.p, Ncur)
        val[todo] = sub
        todo[todo] = sub == Ncur
    return val


def min_valuation_of_monomial(b: ExponentTuple, r: int, ring: RingSpec | None = None) -> int:
    """Minimum finite valuation over all r-subspaces of the monomial's coordinates."""
    if b.is_constant():
        raise NoType("the constant monomial is handled separately")
    n, q = b.n, b.q
    N = ring.N if ring is not None else None
    field = ring.field if ring is not None else None
    val = coordinate_valuations(np.array([b.b]), n, q, r, N, field)[0]
    finite = val[val >= 0]
    if finite.size == 0:
        raise PrecisionExhausted(f"every coordinate of {b.b} vanishes")
    return int(finite.min())


def audit_csv(n: int, q: int, r: int, N: int | None = None) -> str:
    """Per-monomial audit: b, type, alpha, min valuation and Wan bound."""
    B = basis_array(n, q)
    B = B[B.any(axis=1)]
    val = coordinate_valuations(B, n, q, r, N)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["b", "type", "alpha", "min_valuation", "wan_bound"])
    for row, v in zip(B.tolist(), val):
        e = ExponentTuple(tuple(row), q)
        finite = v[v >= 0]
        w.writerow(
            [
                " ".join(map(str, row)),
                " ".join(map(str, e.type.s)),
                e.alpha(r),
                int(finite.min()) if finite.size else "",
                wan_lower_bound(e, r),
            ]
        )
    return buf.getvalue()
