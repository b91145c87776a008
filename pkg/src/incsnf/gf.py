"""Finite fields F_q in a polynomial basis and the truncated ring R/p^N.

R is the ring of integers of the unramified extension of Q_p of degree t,
modelled as (Z/p^N)[x]/(f) with f a monic lift of the field modulus.
Elements are immutable; integer indices sum(c_i p^i) identify field
elements in I/O and in the vectorised helpers used by the geometry code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .conway import default_modulus, is_irreducible, is_prime, prime_power
from .errors import DivisionByZero, NotAUnit, SpecMismatch


def _reduce(prod, modulus, m):
    """Reduce a coefficient list modulo a monic polynomial and the integer m."""
    d = len(modulus) - 1
    prod = list(prod)
    for k in range(len(prod) - 1, d - 1, -1):
        c = prod[k] % m
        if c:
            for i in range(d):
                prod[k - d + i] -= c * modulus[i]
        prod[k] = 0
    out = [c % m for c in prod[:d]]
    out += [0] * (d - len(out))
    return tuple(out)


def _polymul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


@dataclass(frozen=True)
class FieldSpec:
    p: int
    t: int
    modulus: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "modulus", tuple(int(c) for c in self.modulus))
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if len(self.modulus) != self.t + 1 or self.modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree t")
        if any(not 0 <= c < self.p for c in self.modulus):
            raise ValueError("modulus coefficients must lie in [0, p)")
        if not is_irreducible(self.modulus, self.p):
            raise ValueError(f"modulus {self.modulus} is reducible over F_{self.p}")

    @classmethod
    def of_order(cls, q: int) -> "FieldSpec":
        p, t = prime_power(q)
        return cls(p, t, default_modulus(p, t))

    @property
    def q(self) -> int:
        return self.p**self.t

    def __call__(self, value) -> "FieldElement":
        """Element from an integer index or a coefficient sequence."""
        if isinstance(value, FieldElement):
            if value.spec != self:
                raise SpecMismatch("element belongs to another field")
            return value
        if isinstance(value, (int, np.integer)):
            return FieldElement(self, self.digits(int(value)))
        coeffs = tuple(int(c) % self.p for c in value)
        if len(coeffs) > self.t:
            raise ValueError("too many coefficients")
        return FieldElement(self, coeffs + (0,) * (self.t - len(coeffs)))

    def digits(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.q:
            raise ValueError(f"index {index} outside [0, {self.q})")
        out = []
        for _ in range(self.t):
            index, c = divmod(index, self.p)
            out.append(c)
        return tuple(out)

    def elements(self) -> list["FieldElement"]:
        return [self(i) for i in range(self.q)]

    @property
    def zero(self) -> "FieldElement":
        return self(0)

    @property
    def one(self) -> "FieldElement":
        return self(1)

    # -- vectorised index arithmetic ------------------------------------

    @cached_property
    def generator(self) -> int:
        """Index of the least primitive element (x itself for Conway moduli)."""
        from .conway import prime_factors

        order = self.q - 1
        if order == 1:
            return 1
        for g in range(2, self.q) if self.t > 1 else range(1, self.q):
            e = self(g)
            if all(e ** (order // ell) != self.one for ell in prime_factors(order)):
                return g
        raise AssertionError("no primitive element")

    @cached_property
    def exp_table(self) -> np.ndarray:
        """exp_table[k] = index of g^k for 0 <= k < q-1."""
        g = self(self.generator)
        out = np.empty(self.q - 1, dtype=np.int64)
        e = self.one
        for k in range(self.q - 1):
            out[k] = e.index
            e = e * g
        out.setflags(write=False)
        return out

    @cached_property
    def log_table(self) -> np.ndarray:
        """log_table[a] = discrete log of a to base g; -1 for a = 0."""
        out = np.full(self.q, -1, dtype=np.int64)
        out[self.exp_table] = np.arange(self.q - 1)
        out.setflags(write=False)
        return out

    def mul_idx(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        la, lb = self.log_table[a], self.log_table[b]
        prod = self.exp_table[(la + lb) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, prod)

    def add_idx(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.p == 2:
            return a ^ b
        out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
        place = 1
        for _ in range(self.t):
            out += ((a // place + b // place) % self.p) * place
            place *= self.p
        return out

    def to_json(self) -> dict:
        return {"p": self.p, "t": self.t, "modulus": list(self.modulus)}

    @classmethod
    def from_json(cls, data) -> "FieldSpec":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(int(data["p"]), int(data["t"]), tuple(data["modulus"]))


@dataclass(frozen=True)
class FieldElement:
    spec: FieldSpec
    coeffs: tuple[int, ...]

    @property
    def index(self) -> int:
        return sum(c * self.spec.p**i for i, c in enumerate(self.coeffs))

    def __int__(self):
        return self.index

    def __repr__(self):
        return f"F{self.spec.q}({self.index})"

    def _check(self, other) -> "FieldElement":
        if isinstance(other, (int, np.integer)):
            return self.spec(int(other) % self.spec.p)
        if not isinstance(other, FieldElement):
            return NotImplemented
        if other.spec != self.spec:
            raise SpecMismatch("elements of different fields")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        p = self.spec.p
        return FieldElement(self.spec, tuple((x + y) % p for x, y in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        p = self.spec.p
        return FieldElement(self.spec, tuple((-x) % p for x in self.coeffs))

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        prod = _polymul(self.coeffs, other.coeffs)
        return FieldElement(self.spec, _reduce(prod, self.spec.modulus, self.spec.p))

    __rmul__ = __mul__

    def __bool__(self):
        return any(self.coeffs)

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.spec.one
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> "FieldElement":
        if not self:
            raise DivisionByZero("inverse of zero in F_q")
        return self ** (self.spec.q - 2)

    def __truediv__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()


@dataclass(frozen=True)
class RingSpec:
    """(Z/p^N)[x]/(f) with f a coefficientwise lift of a field modulus."""

    p: int
    t: int
    N: int
    modulus: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "modulus", tuple(int(c) % self.p**self.N for c in self.modulus))
        if self.N < 1:
            raise ValueError("precision N must be at least 1")
        if len(self.modulus) != self.t + 1 or self.modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree t")
        # raises if the reduction is not irreducible
        self.field

    @classmethod
    def lift(cls, field_spec: FieldSpec, N: int) -> "RingSpec":
        return cls(field_spec.p, field_spec.t, N, field_spec.modulus)

    @cached_property
    def field(self) -> FieldSpec:
        return FieldSpec(self.p, self.t, tuple(c % self.p for c in self.modulus))

    @property
    def q(self) -> int:
        return self.p**self.t

    @property
    def pN(self) -> int:
        return self.p**self.N

    def with_precision(self, N: int) -> "RingSpec":
        return RingSpec(self.p, self.t, N, self.field.modulus)

    def __call__(self, value) -> "RingElement":
        if isinstance(value, RingElement):
            if value.spec != self:
                raise SpecMismatch("element belongs to another ring")
            return value
        if isinstance(value, (int, np.integer)):
            return RingElement(self, (int(value) % self.pN,) + (0,) * (self.t - 1))
        coeffs = tuple(int(c) % self.pN for c in value)
        if len(coeffs) > self.t:
            raise ValueError("too many coefficients")
        return RingElement(self, coeffs + (0,) * (self.t - len(coeffs)))

    @property
    def zero(self) -> "RingElement":
        return self(0)

    @property
    def one(self) -> "RingElement":
        return self(1)

    def to_json(self) -> dict:
        return {"p": self.p, "t": self.t, "modulus": list(self.field.modulus), "N": self.N}

    @classmethod
    def from_json(cls, data) -> "RingSpec":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(int(data["p"]), int(data["t"]), int(data["N"]), tuple(data["modulus"]))

    @cached_property
    def teichmuller_table(self) -> tuple["RingElement", ...]:
        """Teichmuller lifts of every field element, by index."""
        return tuple(teichmuller_lift(a, self) for a in self.field.elements())


@dataclass(frozen=True)
class RingElement:
    spec: RingSpec
    coeffs: tuple[int, ...]

    def __repr__(self):
        return f"R({list(self.coeffs)} mod {self.spec.p}^{self.spec.N})"

    def _check(self, other):
        if isinstance(other, (int, np.integer)):
            return self.spec(int(other))
        if not isinstance(other, RingElement):
            return NotImplemented
        if other.spec != self.spec:
            raise SpecMismatch("elements of different rings")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        m = self.spec.pN
        return RingElement(self.spec, tuple((x + y) % m for x, y in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        m = self.spec.pN
        return RingElement(self.spec, tuple((-x) % m for x in self.coeffs))

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        prod = _polymul(self.coeffs, other.coeffs)
        return RingElement(self.spec, _reduce(prod, self.spec.modulus, self.spec.pN))

    __rmul__ = __mul__

    def __bool__(self):
        return any(self.coeffs)

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.spec.one
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def is_unit(self) -> bool:
        return bool(self.residue())

    def residue(self) -> FieldElement:
        """Reduction modulo p."""
        return self.spec.field(tuple(c % self.spec.p for c in self.coeffs))

    def inverse(self) -> "RingElement":
        if not self.is_unit():
            raise NotAUnit(f"{self!r} is not a unit")
        y = self.spec(self.residue().inverse().coeffs)
        # Newton iteration doubles the p-adic precision each step
        prec = 1
        two = self.spec(2)
        while prec < self.spec.N:
            y = y * (two - self * y)
            prec *= 2
        return y

    def __truediv__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()


@dataclass(frozen=True)
class AtLeastPrecision:
    """Valuation result for an element that vanishes modulo p^N."""

    N: int

    def __repr__(self):
        return f"AtLeastPrecision({self.N})"


def valuation(x: RingElement) -> int | AtLeastPrecision:
    """p-adic valuation, computed coefficientwise (p is unramified in R)."""
    p, N = x.spec.p, x.spec.N
    best = N
    for c in x.coeffs:
        if c:
            v = 0
            while c % p == 0:
                c //= p
                v += 1
            best = min(best, v)
    if best >= N:
        return AtLeastPrecision(N)
    return best


def int_valuation(n: int, p: int) -> int:
    """Valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    n = abs(n)
    while n % p == 0:
        n //= p
        v += 1
    return v


def teichmuller_lift(a: FieldElement, ring: RingSpec) -> RingElement:
    """The unique root of x^q = x in R/p^N reducing to a."""
    if a.spec != ring.field:
        raise SpecMismatch("ring does not lift the element's field")
    w = ring(a.coeffs)
    q = ring.q
    # w -> w^q converges: each step gains one p-adic digit
    for _ in range(ring.N + 1):
        nxt = w**q
        if nxt == w:
            return w
        w = nxt
    raise AssertionError("Teichmuller iteration did not stabilise")


def default_precision(r: int, t: int) -> int:
    """Starting precision for valuation work at subspace dimension r."""
    return (r - 1) * t + 4
