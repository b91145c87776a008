"""Point-subspace incidence matrices of PG(n,q) and AG(n,q), with file I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .conway import prime_power
from .geometry import (
    _check_range,
    affine_mask,
    combine,
    encode,
    point_lookup,
    subspace_array,
)


@dataclass(frozen=True)
class IncidenceMatrix:
    """Sparse (0,1) matrix; rows are subspaces or flats, columns are points.

    entries is an (nnz, 2) array of (row, col) pairs in sorted order.
    row_labels / col_labels are positions in the canonical enumerations
    of geometry.subspace_array.
    """

    rows: int
    cols: int
    entries: np.ndarray
    row_labels: np.ndarray
    col_labels: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return bool(self.metadata.get("degenerate", False))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def to_dense(self, dtype=np.int8) -> np.ndarray:
        A = np.zeros((self.rows, self.cols), dtype=dtype)
        if len(self.entries):
            A[self.entries[:, 0], self.entries[:, 1]] = 1
        return A

    def row_sums(self) -> np.ndarray:
        return np.bincount(self.entries[:, 0], minlength=self.rows)

    def col_sums(self) -> np.ndarray:
        return np.bincount(self.entries[:, 1], minlength=self.cols)

    def sidecar(self) -> dict:
        keys = ("p", "t", "n", "r", "space")
        out = {k: self.metadata[k] for k in keys if k in self.metadata}
        out.update(rows=self.rows, cols=self.cols)
        if self.degenerate:
            out["degenerate"] = True
        return out

    def write(self, path) -> None:
        """Matrix Market file plus a .json sidecar next to it."""
        path = Path(path)
        write_matrix_market(path, self)
        path.with_suffix(".json").write_text(json.dumps(self.sidecar(), indent=2) + "\n")

    @classmethod
    def from_dense(cls, A, metadata=None) -> "IncidenceMatrix":
        A = np.asarray(A)
        if A.size and not np.isin(A, (0, 1)).all():
            raise ValueError("incidence matrices have 0/1 entries")
        entries = np.argwhere(A != 0).astype(np.int64).reshape(-1, 2)
        R, C = A.shape
        return cls(R, C, entries, np.arange(R), np.arange(C), dict(metadata or {}))


def _meta(n, q, r, space, degenerate):
    p, t = prime_power(q)
    return {"p": p, "t": t, "n": n, "r": r, "space": space, "degenerate": degenerate}


def _incident_points(Ys: np.ndarray, coeffs: np.ndarray, n: int, q: int) -> np.ndarray:
    """Point indices spanned by each basis in Ys under the given coefficients."""
    table = point_lookup(n, q)
    out = np.empty((len(Ys), len(coeffs)), dtype=np.int64)
    step = max(1, 2_000_000 // max(1, len(coeffs) * (n + 1)))
    for s in range(0, len(Ys), step):
        vecs = combine(coeffs, Ys[s : s + step], q)
        out[s : s + step] = table[encode(vecs, q)]
    assert (out >= 0).all()
    return out


def _sorted_entries(rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    order = np.lexsort((cols, rows))
    return np.stack([rows[order], cols[order]], axis=1)


def projective_incidence_matrix(n: int, q: int, r: int) -> IncidenceMatrix:
    """r-subspaces versus points of PG(n,q)."""
    _check_range(n, r, 1, n + 1)
    Ys = subspace_array(n, q, r)
    coeffs = subspace_array(r - 1, q, 1)[:, 0, :]
    cols = _incident_points(Ys, coeffs, n, q)
    rows = np.repeat(np.arange(len(Ys)), cols.shape[1])
    entries = _sorted_entries(rows, cols.ravel())
    npts = len(subspace_array(n, q, 1))
    return IncidenceMatrix(
        len(Ys),
        npts,
        entries,
        np.arange(len(Ys)),
        np.arange(npts),
        _meta(n, q, r, "projective", not 2 <= r <= n),
    )


def affine_incidence_matrix(n: int, q: int, r: int) -> IncidenceMatrix:
    """r-flats versus points of AG(n,q) = PG(n,q) minus the hyperplane x_0 = 0."""
    _check_range(n, r, 0, n)
    carriers = np.flatnonzero(affine_mask(n, q, r))
    Ys = subspace_array(n, q, r + 1)[carriers]
    # coefficient vectors (1, c_1, ..., c_r): combinations with x_0 = 1
    coeffs = np.zeros((q**r, r + 1), dtype=np.int64)
    coeffs[:, 0] = 1
    vals = np.arange(q**r)
    for i in range(r, 0, -1):
        coeffs[:, i] = vals % q
        vals //= q
    proj_cols = _incident_points(Ys, coeffs, n, q)
    affine_pts = np.flatnonzero(subspace_array(n, q, 1)[:, 0, 0] == 1)
    position = np.full(affine_pts.max() + 1, -1, dtype=np.int64)
    position[affine_pts] = np.arange(len(affine_pts))
    cols = position[proj_cols]
    assert (cols >= 0).all()
    rows = np.repeat(np.arange(len(Ys)), cols.shape[1])
    entries = _sorted_entries(rows, cols.ravel())
    return IncidenceMatrix(
        len(Ys),
        len(affine_pts),
        entries,
        carriers,
        affine_pts,
        _meta(n, q, r, "affine", not 1 <= r <= n - 1),
    )


# -- Matrix Market ----------------------------------------------------------

_MM_HEADER = "%%MatrixMarket matrix coordinate integer general"


def write_matrix_market(path, M) -> None:
    """Coordinate format, 1-based indices; accepts IncidenceMatrix or a dense array.

    path may also be an open text stream.
    """
    if isinstance(M, IncidenceMatrix):
        R, C = M.shape
        coords = M.entries
        vals = np.ones(len(coords), dtype=np.int64)
    else:
        A = np.asarray(M)
        R, C = A.shape
        coords = np.argwhere(A != 0)
        vals = A[A != 0]
    lines = [_MM_HEADER, f"{R} {C} {len(coords)}"]
    lines += [f"{i + 1} {j + 1} {int(v)}" for (i, j), v in zip(coords.tolist(), vals.tolist())]
    text = "\n".join(lines) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        Path(path).write_text(text)


def read_matrix_market(path) -> np.ndarray:
    """Dense integer array from a coordinate Matrix Market file."""
    with open(path) as fh:
        header = fh.readline().strip().lower().split()
        if header[:2] != ["%%matrixmarket", "matrix"] or header[2] != "coordinate":
            raise ValueError("only coordinate Matrix Market files are supported")
        if header[3] not in ("integer", "pattern"):
            raise ValueError(f"unsupported field type {header[3]}")
        symmetric = len(header) > 4 and header[4] == "symmetric"
        line = fh.readline()
        while line.startswith("%"):
            line = fh.readline()
        R, C, nnz = (int(x) for x in line.split())
        A = np.zeros((R, C), dtype=np.int64)
        count = 0
        for line in fh:
            parts = line.split()
            if not parts or parts[0].startswith("%"):
                continue
            i, j = int(parts[0]) - 1, int(parts[1]) - 1
            v = int(parts[2]) if len(parts) > 2 else 1
            A[i, j] = v
            if symmetric:
                A[j, i] = v
            count += 1
    if count != nnz:
        raise ValueError(f"expected {nnz} entries, read {count}")
    return A


def read_incidence(path) -> IncidenceMatrix:
    """Matrix Market file plus optional sidecar metadata."""
    path = Path(path)
    A = read_matrix_market(path)
    side = path.with_suffix(".json")
    meta = json.loads(side.read_text()) if side.exists() else {}
    meta.pop("rows", None)
    meta.pop("cols", None)
    if A.size and not np.isin(A, (0, 1)).all():
        raise ValueError("file does not hold a (0,1) matrix")
    return IncidenceMatrix.from_dense(A, meta)
