"""Smith normal forms over Z and over Z localised at a prime.

Three independent routes are provided:

* ``p_elementary_divisors`` eliminates unit pivots modulo p^K one valuation
  level at a time.  Entries are residues held in float64 so the trailing
  updates run through BLAS; every product and partial sum stays below 2^52,
  which keeps the floor-based reduction exact.
* ``rank_mod_p`` is plain Gaussian elimination over F_p.
* ``smith_normal_form`` is the textbook integer algorithm (minimal pivot,
  Euclidean row and column reduction, gcd/lcm normalisation of the
  diagonal).  For large matrices whose Gram matrix has the shape aI + bJ
  (2-designs, which covers every incidence matrix built here) the integer
  form is assembled from exact local forms at the primes dividing the Gram
  determinant; no other prime can divide an invariant factor.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .conway import is_prime, prime_factors

# residues are kept below 2^21 and inner dimensions below 2^8, so every
# intermediate of a reduction step is bounded by 2^50
_FLOAT_MODULUS_LIMIT = 2**21
_PANEL = 256
# the direct big-integer algorithm is used when the smaller side is at most
# this long; square incidence matrices beyond it suffer heavy entry growth
DIRECT_MIN_DIM = 160
VERIFY_ROW_LIMIT = 200


@dataclass(frozen=True)
class SNFResult:
    invariants: tuple[int, ...]
    method: str = "integer"

    @property
    def rank(self) -> int:
        return len(self.invariants)

    def p_spectrum(self, p: int) -> dict[int, int]:
        counts = Counter(_vp(d, p) for d in self.invariants)
        return dict(sorted(counts.items()))

    def last_nonp(self, p: int) -> int:
        if not self.invariants:
            return 1
        d = self.invariants[-1]
        return d // p ** _vp(d, p)

    def to_json(self, p: int | None = None) -> dict:
        out = {"invariants": list(self.invariants)}
        if p is not None:
            out["p"] = p
            out["p_spectrum"] = {str(a): m for a, m in self.p_spectrum(p).items()}
            out["last_nonp"] = self.last_nonp(p)
        return out

    def dumps(self, p: int | None = None) -> str:
        return json.dumps(self.to_json(p), indent=2)


def _vp(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def as_array(M) -> np.ndarray:
    """Dense integer array from an IncidenceMatrix, array or nested list."""
    if hasattr(M, "to_dense"):
        return M.to_dense()
    A = np.asarray(M)
    if A.dtype == object:
        return A
    if A.size == 0:
        return A.reshape(A.shape if A.ndim == 2 else (0, 0)).astype(np.int64)
    if not np.issubdtype(A.dtype, np.integer):
        raise TypeError("integer matrix required")
    return A


# -- p-local elimination ----------------------------------------------------


def _fm(x, m):
    """x mod m for integer-valued float arrays with |x| < 2^52."""
    return x - np.floor(x / m) * m


def _reduce_inplace(S, m, buf):
    np.divide(S, m, out=buf)
    np.floor(buf, out=buf)
    buf *= m
    S -= buf


def _eliminate_units(S: np.ndarray, p: int, m: int, panel: int = _PANEL):
    """Remove every unit pivot of S (entries are residues mod m = p^k).

    Returns the pivot count and the residual Schur complement, reduced mod m
    and divisible by p.  S is overwritten.  Within one level a column that is
    divisible by p stays so under later Schur updates, so such columns are
    checked once and then skipped.
    """
    mf = float(m)
    R, C = S.shape
    S = np.ascontiguousarray(S)
    store = np.empty(R * C)
    buf = store.reshape(R, C)
    free = np.ones(R, dtype=bool)
    keep = np.ones(C, dtype=bool)  # not a pivot column
    alive = np.ones(C, dtype=bool)  # not a pivot and not known divisible by p
    pending = 0  # Schur updates since the last full reduction
    found = 0
    eliminated = 0  # rows eliminated since the last compaction
    while True:
        if eliminated * 4 > R:
            if pending:
                _reduce_inplace(S, mf, buf)
                pending = 0
            S = S[np.ix_(free, keep)]
            alive = alive[keep]
            R, C = S.shape
            buf = store[: R * C].reshape(R, C)
            free = np.ones(R, dtype=bool)
            keep = np.ones(C, dtype=bool)
            eliminated = 0
        # pick up to `panel` columns that still carry a unit
        pcols: list[int] = []
        for start in range(0, C, panel):
            chunk = np.flatnonzero(alive[start : start + panel]) + start
            if chunk.size == 0:
                continue
            block = S[:, chunk]
            if pending:
                block = _fm(block, mf)
            has_unit = (_fm(block, p) != 0).any(axis=0)
            alive[chunk[~has_unit]] = False
            pcols.extend(chunk[has_unit][: panel - len(pcols)].tolist())
            if len(pcols) == panel:
                break
        if not pcols:
            break
        P = _fm(S[:, pcols], mf) if pending else S[:, pcols]
        bw = len(pcols)
        L = np.zeros((R, bw))
        Linv = np.zeros((bw, bw))
        prow: list[int] = []
        pcol: list[int] = []
        for c in range(bw):
            k = len(prow)
            v = P[:, c]
            if k:
                u = _fm(Linv[:k, :k] @ P[prow, c], mf)
                v = _fm(v - L[:, :k] @ u, mf)
            cand = np.flatnonzero(_fm(v, p) != 0)
            if cand.size == 0:
                alive[pcols[c]] = False
                continue
            i = int(cand[0])
            inv = pow(int(v[i]), -1, m)
            L[:, k] = _fm(v * inv, mf)
            if k:
                Linv[k, :k] = _fm(-(L[i, :k] @ Linv[:k, :k]), mf)
            Linv[k, k] = 1.0
            prow.append(i)
            pcol.append(pcols[c])
        k = len(prow)
        found += k
        eliminated += k
        free[prow] = False
        alive[pcol] = False
        keep[pcol] = False
        top = S[prow]
        if pending:
            top = _fm(top, mf)
        U = _fm(Linv[:k, :k] @ top, mf)
        np.matmul(L[:, :k], U, out=buf)
        S -= buf
        pending += 1
        if pending == 3:
            _reduce_inplace(S, mf, buf)
            pending = 0
    if pending:
        _reduce_inplace(S, mf, buf)
    return found, S[np.ix_(free, keep)]


def _float_levels(A: np.ndarray, p: int):
    """Valuation levels of A over Z_(p) using float residues.

    Returns (spectrum, certified).  Only an empty residual is a proof: a
    residual that vanishes modulo the working precision may still hide
    invariants of larger valuation (or be a genuine rank deficiency).
    """
    prec = 1
    while p ** (prec + 1) <= _FLOAT_MODULUS_LIMIT:
        prec += 1
    m = p**prec
    S = _fm(np.asarray(A, dtype=np.float64), float(m))
    spectrum: dict[int, int] = {}
    level = 0
    while S.shape[0] and S.shape[1]:
        if not S.any():
            return spectrum, False
        found, S = _eliminate_units(S, p, m)
        if found:
            spectrum[level] = found
        if not (S.shape[0] and S.shape[1]):
            break
        if m == p:
            return spectrum, False
        S /= p
        m //= p
        level += 1
    return spectrum, True


def _hadamard_bits(A) -> float:
    norms = [math.sqrt(sum(int(x) * int(x) for x in row)) for row in A]
    return sum(math.log2(x) for x in norms if x > 0)


def _object_levels(A, p: int) -> dict[int, int]:
    """Exact local elimination with Python integers modulo p^K.

    K exceeds the p-adic valuation of every nonzero minor (Hadamard bound),
    so anything left after K levels is zero.
    """
    K = int(_hadamard_bits(A) / math.log2(p)) + 2
    S = [[int(x) % p**K for x in row] for row in A]
    spectrum: dict[int, int] = {}
    level = 0
    m = p**K
    while S and S[0] and m > 1:
        found = 0
        while True:
            pos = next(
                ((i, j) for i, row in enumerate(S) for j, x in enumerate(row) if x % p),
                None,
            )
            if pos is None:
                break
            i, j = pos
            inv = pow(S[i][j], -1, m)
            prow = S[i]
            new = []
            for a, row in enumerate(S):
                if a == i:
                    continue
                f = row[j] * inv % m
                new.append([(x - f * y) % m for b, (x, y) in enumerate(zip(row, prow)) if b != j])
            S = new
            found += 1
            if not S or not S[0]:
                break
        if found:
            spectrum[level] = found
        if not S or not S[0] or not any(any(row) for row in S):
            break
        S = [[x // p for x in row] for row in S]
        m //= p
        level += 1
    return spectrum


def p_elementary_divisors(M, p: int) -> dict[int, int]:
    """Multiplicity of each p^alpha among the nonzero invariant factors."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    A = as_array(M)
    if A.size == 0:
        return {}
    if p <= _FLOAT_MODULUS_LIMIT and A.dtype != object and np.abs(A).max() < 2**52:
        spectrum, certified = _float_levels(A, p)
        if certified:
            return dict(sorted(spectrum.items()))
    return dict(sorted(_object_levels(A.tolist(), p).items()))


def rank_mod_p(M, p: int) -> int:
    """Rank over F_p by Gaussian elimination."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    A = as_array(M)
    if A.size == 0:
        return 0
    if p <= _FLOAT_MODULUS_LIMIT and A.dtype != object:
        S = _fm(A.astype(np.float64), float(p))
        found, _ = _eliminate_units(S, p, p)
        return found
    rows = [[int(x) % p for x in row] for row in A.tolist()]
    rank = 0
    ncols = len(rows[0])
    for j in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][j]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][j], -1, p)
        for i in range(len(rows)):
            if i != rank and rows[i][j]:
                f = rows[i][j] * inv % p
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[rank])]
        rank += 1
    return rank


# -- integer Smith normal form ---------------------------------------------


def _chain(diag: list[int]) -> tuple[int, ...]:
    """Turn a nonzero diagonal into a divisibility chain via gcd/lcm swaps."""
    d = sorted(abs(x) for x in diag if x)
    ones = [x for x in d if x == 1]
    rest = [x for x in d if x != 1]
    for i in range(len(rest)):
        for j in range(i + 1, len(rest)):
            g = math.gcd(rest[i], rest[j])
            rest[i], rest[j] = g, rest[i] // g * rest[j]
    rest = [x for x in rest if x]
    out = sorted(ones + rest)
    return tuple(out)


class _Elim:
    """Dense elimination state with optional transform tracking."""

    def __init__(self, A: np.ndarray, track: bool):
        self.A = A.astype(object) if A.dtype == object else A.astype(np.int64)
        R, C = A.shape
        self.track = track
        if track:
            self.U = np.eye(R, dtype=object)
            self.W = np.eye(C, dtype=object)

    def _promote(self):
        if self.A.dtype != object:
            self.A = self.A.astype(object)

    def _safe(self, f, rows) -> bool:
        if self.A.dtype == object:
            return True
        lim = 2**62
        big = int(np.abs(f).max(initial=0)) * int(np.abs(rows).max(initial=0))
        return big < lim // 2 and int(np.abs(self.A).max(initial=0)) < lim // 2

    def swap_rows(self, i, j):
        if i != j:
            self.A[[i, j]] = self.A[[j, i]]
            if self.track:
                self.U[[i, j]] = self.U[[j, i]]

    def swap_cols(self, i, j):
        if i != j:
            self.A[:, [i, j]] = self.A[:, [j, i]]
            if self.track:
                self.W[:, [i, j]] = self.W[:, [j, i]]

    def reduce_col(self, k):
        """Subtract multiples of row k from the rows below it."""
        a = self.A
        piv = a[k, k]
        f = a[k + 1 :, k] // piv
        if not f.any():
            return
        if not self._safe(f, a[k, k:]):
            self._promote()
            a = self.A
            f = f.astype(object)
        a[k + 1 :, k:] -= np.outer(f, a[k, k:])
        if self.track:
            self.U[k + 1 :] -= np.outer(f.astype(object), self.U[k])

    def reduce_row(self, k):
        a = self.A
        piv = a[k, k]
        f = a[k, k + 1 :] // piv
        if not f.any():
            return
        if not self._safe(f, a[k:, k]):
            self._promote()
            a = self.A
            f = f.astype(object)
        a[k:, k + 1 :] -= np.outer(a[k:, k], f)
        if self.track:
            self.W[:, k + 1 :] -= np.outer(self.W[:, k], f.astype(object))


def _min_nonzero(block) -> tuple[int, int] | None:
    absb = np.abs(block)
    if absb.dtype == object:
        nz = [(x, i) for i, x in enumerate(absb.flat) if x]
        if not nz:
            return None
        return divmod(min(nz)[1], block.shape[1])
    if not absb.any():
        return None
    masked = np.where(absb != 0, absb, np.iinfo(np.int64).max)
    return divmod(int(np.argmin(masked)), block.shape[1])


def _direct_snf(A: np.ndarray, track: bool):
    R, C = A.shape
    st = _Elim(A, track)
    diag = []
    k = 0
    while k < min(R, C):
        pos = _min_nonzero(st.A[k:, k:])
        if pos is None:
            break
        st.swap_rows(k, k + pos[0])
        st.swap_cols(k, k + pos[1])
        while True:
            st.reduce_col(k)
            col = st.A[k + 1 :, k]
            if col.any():
                i = _min_nonzero(col.reshape(-1, 1))[0]
                st.swap_rows(k, k + 1 + i)
                continue
            st.reduce_row(k)
            row = st.A[k, k + 1 :]
            if row.any():
                j = _min_nonzero(row.reshape(1, -1))[1]
                st.swap_cols(k, k + 1 + j)
                continue
            break
        diag.append(int(st.A[k, k]))
        k += 1
    if track:
        D = st.U.dot(A.astype(object)).dot(st.W)
        expect = np.zeros((R, C), dtype=object)
        for i, d in enumerate(diag):
            expect[i, i] = d
        if not (D == expect).all():
            raise AssertionError("SNF transforms failed re-multiplication check")
    return diag


def design_gram(A: np.ndarray):
    """(a, b) if A^T A = aI + bJ (columns as the smaller side), else None."""
    if A.shape[1] > A.shape[0]:
        A = A.T
    if A.dtype == object or A.shape[0] >= 2**26 or np.abs(A).max() > 1:
        return None
    Af = A.astype(np.float64)
    G = Af.T @ Af
    v = G.shape[0]
    if v < 2:
        return None
    b = G[0, 1]
    a = G[0, 0] - b
    off = G.copy()
    np.fill_diagonal(off, b)
    if not (off == b).all() or not (np.diag(G) == a + b).all():
        return None
    return int(a), int(b)


def _assembled_snf(A: np.ndarray, a: int, b: int, hint=None) -> SNFResult | None:
    v = min(A.shape)
    det_parts = [a, a + v * b]
    if a == 0 or det_parts[1] == 0:
        return None
    primes = sorted({ell for x in det_parts for ell in prime_factors(abs(x))})
    columns = []
    for ell in primes:
        spec = (hint or {}).get(ell) or p_elementary_divisors(A, ell)
        if sum(spec.values()) != v:
            return None
        exps = [alpha for alpha, mult in sorted(spec.items()) for _ in range(mult)]
        columns.append((ell, exps))
    invariants = []
    for i in range(v):
        d = 1
        for ell, exps in columns:
            d *= ell ** exps[i]
        invariants.append(d)
    return SNFResult(tuple(invariants), method="local")


def smith_normal_form(
    M, *, direct_limit: int = DIRECT_MIN_DIM, local_hint: dict | None = None
) -> SNFResult:
    """Nonzero invariant factors d_1 | d_2 | ... of an integer matrix.

    local_hint may carry already computed p_elementary_divisors results,
    keyed by prime, for reuse on the assembled path.
    """
    A = as_array(M)
    if A.ndim != 2 or A.size == 0:
        return SNFResult(())
    if min(A.shape) > direct_limit:
        gram = design_gram(A)
        if gram is not None:
            res = _assembled_snf(A, *gram, hint=local_hint)
            if res is not None:
                return res
    track = A.shape[0] <= VERIFY_ROW_LIMIT
    return SNFResult(_chain(_direct_snf(A, track)))
