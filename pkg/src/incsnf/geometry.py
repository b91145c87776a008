"""Subspaces of F_q^{n+1}, projective points and affine flats.

A subspace is stored by its reduced row echelon form with field elements
written as integer indices.  Enumeration is lexicographic on the flattened
RREF, so matrices built from these lists are reproducible bit for bit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidDimension, SpecMismatch
from .gf import FieldSpec


def gaussian_binomial(m: int, k: int, q: int) -> int:
    """Number of k-dimensional subspaces of F_q^m."""
    if not 0 <= k <= m:
        raise ValueError(f"need 0 <= k <= m, got k={k}, m={m}")
    num = den = 1
    for i in range(k):
        num *= q ** (m - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


@lru_cache(maxsize=None)
def _tables(F: FieldSpec) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(F.q)
    add = F.add_idx(idx[:, None], idx[None, :])
    mul = F.mul_idx(idx[:, None], idx[None, :])
    for tab in (add, mul):
        tab.setflags(write=False)
    return add, mul


def field_tables(field: int | FieldSpec) -> tuple[FieldSpec, np.ndarray, np.ndarray]:
    """(spec, add, mul) with q x q index tables; an int selects the default field."""
    F = FieldSpec.of_order(field) if isinstance(field, (int, np.integer)) else field
    return (F, *_tables(F))


@dataclass(frozen=True)
class Subspace:
    q: int
    rref: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.rref)

    @property
    def ambient_dim(self) -> int:
        return len(self.rref[0]) if self.rref else 0

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(next(j for j, x in enumerate(row) if x) for row in self.rref)

    def array(self) -> np.ndarray:
        return np.array(self.rref, dtype=np.int64).reshape(self.dim, self.ambient_dim)

    def matrix(self):
        """RREF as FieldElement rows."""
        F = FieldSpec.of_order(self.q)
        return [[F(x) for x in row] for row in self.rref]

    def dump(self) -> str:
        return ";".join(",".join(str(x) for x in row) for row in self.rref)

    @classmethod
    def parse(cls, line: str, q: int) -> "Subspace":
        rows = [tuple(int(x) for x in part.split(",")) for part in line.strip().split(";")]
        return canonical_subspace(rows, q)

    def points(self) -> list["ProjectivePoint"]:
        coeffs = _subspace_array(self.dim - 1, self.q, 1)[:, 0, :]
        pts = combine(coeffs, self.array()[None], self.q)[0]
        return [ProjectivePoint(self.q, tuple(int(x) for x in row)) for row in pts]


@dataclass(frozen=True)
class ProjectivePoint:
    q: int
    coords: tuple[int, ...]

    def __post_init__(self):
        nz = [x for x in self.coords if x]
        if not nz:
            raise ValueError("the zero vector is not a projective point")
        if nz[0] != 1:
            raise ValueError("first nonzero coordinate must be 1")

    @classmethod
    def normalize(cls, coords, q: int) -> "ProjectivePoint":
        F = FieldSpec.of_order(q)
        vec = [F(int(x)) for x in coords]
        lead = next((x for x in vec if x), None)
        if lead is None:
            raise ValueError("the zero vector is not a projective point")
        inv = lead.inverse()
        return cls(q, tuple((x * inv).index for x in vec))


@dataclass(frozen=True)
class AffineFlat:
    carrier: Subspace

    def __post_init__(self):
        if self.carrier.pivots[0] != 0:
            raise ValueError("carrier lies inside the hyperplane x_0 = 0")

    @property
    def dim(self) -> int:
        return self.carrier.dim - 1


def canonical_subspace(rows, q: int) -> Subspace:
    """Row-reduce a spanning set to the canonical RREF."""
    F = FieldSpec.of_order(q)
    M = [[F(int(x)) for x in row] for row in rows]
    if not M:
        raise InvalidDimension("empty spanning set")
    ncols = len(M[0])
    rank = 0
    for j in range(ncols):
        piv = next((i for i in range(rank, len(M)) if M[i][j]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = M[rank][j].inverse()
        M[rank] = [x * inv for x in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][j]:
                f = M[i][j]
                M[i] = [x - f * y for x, y in zip(M[i], M[rank])]
        rank += 1
    if rank == 0:
        raise InvalidDimension("spanning set has rank 0")
    return Subspace(q, tuple(tuple(x.index for x in row) for row in M[:rank]))


def _check_range(n: int, r: int, lo: int, hi: int):
    if n < 0 or not lo <= r <= hi:
        raise InvalidDimension(f"dimension {r} outside [{lo}, {hi}] for n={n}")


@lru_cache(maxsize=64)
def _subspace_array(n: int, q: int, r: int) -> np.ndarray:
    """All r-subspaces of F_q^{n+1} as an (N, r, n+1) index array, sorted."""
    m = n + 1
    blocks = []
    for piv in itertools.combinations(range(m), r):
        free = [(i, j) for i in range(r) for j in range(piv[i] + 1, m) if j not in piv]
        count = q ** len(free)
        block = np.zeros((count, r, m), dtype=np.int64)
        block[:, np.arange(r), list(piv)] = 1
        if free:
            vals = np.arange(count)
            # first free position is the most significant digit
            for pos, (i, j) in enumerate(reversed(free)):
                block[:, i, j] = vals % q
                vals //= q
        blocks.append(block)
    out = np.concatenate(blocks) if blocks else np.zeros((0, r, m), dtype=np.int64)
    flat = out.reshape(len(out), -1)
    order = np.lexsort(flat.T[::-1])
    out = out[order]
    out.setflags(write=False)
    return out


def subspace_array(n: int, q: int, r: int) -> np.ndarray:
    _check_range(n, r, 1, n + 1)
    FieldSpec.of_order(q)
    return _subspace_array(n, q, r)


def enumerate_subspaces(n: int, q: int, r: int) -> list[Subspace]:
    arr = subspace_array(n, q, r)
    return [Subspace(q, tuple(map(tuple, Y.tolist()))) for Y in arr]


def enumerate_points(n: int, q: int) -> list[ProjectivePoint]:
    arr = subspace_array(n, q, 1)
    return [ProjectivePoint(q, tuple(Y[0].tolist())) for Y in arr]


def affine_mask(n: int, q: int, r: int) -> np.ndarray:
    """Which (r+1)-subspaces are carriers of r-flats (not inside x_0 = 0)."""
    arr = subspace_array(n, q, r + 1)
    return arr[:, 0, 0] == 1


def enumerate_affine_flats(n: int, q: int, r: int) -> list[AffineFlat]:
    _check_range(n, r, 0, n)
    arr = subspace_array(n, q, r + 1)
    keep = arr[:, 0, 0] == 1
    return [AffineFlat(Subspace(q, tuple(map(tuple, Y.tolist())))) for Y in arr[keep]]


def combine(coeffs: np.ndarray, bases: np.ndarray, field: int | FieldSpec) -> np.ndarray:
    """All linear combinations coeffs @ basis over F_q.

    coeffs: (K, r) indices; bases: (N, r, m) indices -> (N, K, m).
    """
    _, add, mul = field_tables(field)
    N, r, m = bases.shape
    out = np.zeros((N, coeffs.shape[0], m), dtype=np.int64)
    for i in range(r):
        term = mul[coeffs[None, :, i, None], bases[:, None, i, :]]
        out = add[out, term]
    return out


def encode(vectors: np.ndarray, q: int) -> np.ndarray:
    """Integer key sum_j x_j q^j for vectors along the last axis."""
    m = vectors.shape[-1]
    return vectors @ (q ** np.arange(m, dtype=np.int64))


@lru_cache(maxsize=64)
def point_lookup(n: int, q: int) -> np.ndarray:
    """Map from encoded normalized vector to point index (-1 elsewhere)."""
    pts = _subspace_array(n, q, 1)[:, 0, :]
    table = np.full(q ** (n + 1), -1, dtype=np.int64)
    table[encode(pts, q)] = np.arange(len(pts))
    table.setflags(write=False)
    return table


def contains(Y: Subspace, Z: ProjectivePoint) -> bool:
    """Whether the point Z lies in the subspace Y."""
    if Y.q != Z.q or Y.ambient_dim != len(Z.coords):
        raise SpecMismatch("subspace and point live in different spaces")
    _, add, mul = field_tables(Y.q)
    # in RREF the only candidate combination uses Z's pivot-column entries
    acc = np.zeros(Y.ambient_dim, dtype=np.int64)
    for row, j in zip(Y.rref, Y.pivots):
        acc = add[acc, mul[Z.coords[j], np.array(row)]]
    return bool((acc == np.array(Z.coords)).all())


def dump_subspaces(subspaces) -> str:
    return "".join(Y.dump() + "\n" for Y in subspaces)
