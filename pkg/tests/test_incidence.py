import json

import numpy as np
import pytest

from incsnf.errors import InvalidDimension
from incsnf.geometry import gaussian_binomial, subspace_array
from incsnf.incidence import (
    IncidenceMatrix,
    affine_incidence_matrix,
    projective_incidence_matrix,
    read_incidence,
    read_matrix_market,
    write_matrix_market,
)

GRID_Q = [2, 3, 4, 5, 8, 9]


def test_fano():
    M = projective_incidence_matrix(2, 2, 2)
    A = M.to_dense()
    assert A.shape == (7, 7)
    assert (A.sum(axis=0) == 3).all() and (A.sum(axis=1) == 3).all()
    assert not M.degenerate
    # any two lines meet in exactly one point
    G = A.astype(int) @ A.T
    assert (G[~np.eye(7, dtype=bool)] == 1).all()


def test_pg24_and_pg32():
    M = projective_incidence_matrix(2, 4, 2)
    assert M.shape == (21, 21) and set(M.row_sums()) == {5}
    M = projective_incidence_matrix(3, 2, 2)
    assert M.shape == (35, 15)
    assert set(M.row_sums()) == {3} and set(M.col_sums()) == {7}


def test_affine_examples():
    M = affine_incidence_matrix(2, 2, 1)
    assert M.shape == (6, 4) and set(M.row_sums()) == {2}
    M = affine_incidence_matrix(2, 3, 1)
    assert M.shape == (12, 9) and set(M.row_sums()) == {3}
    M = affine_incidence_matrix(3, 2, 1)
    assert M.shape == (28, 8)


def test_range_and_degenerate_flags():
    with pytest.raises(InvalidDimension):
        projective_incidence_matrix(2, 2, 0)
    with pytest.raises(InvalidDimension):
        affine_incidence_matrix(2, 2, 3)
    assert projective_incidence_matrix(2, 2, 1).degenerate
    assert projective_incidence_matrix(2, 2, 3).degenerate
    assert affine_incidence_matrix(2, 2, 0).degenerate
    assert affine_incidence_matrix(2, 2, 2).degenerate
    assert (projective_incidence_matrix(2, 3, 1).to_dense() == np.eye(13)).all()


def _cells(limit=20000):
    for q in GRID_Q:
        for n in range(1, 5):
            for r in range(1, n + 2):
                if gaussian_binomial(n + 1, r, q) <= limit:
                    yield n, q, r


@pytest.mark.parametrize("n,q,r", list(_cells()))
def test_projective_sums(n, q, r):
    M = projective_incidence_matrix(n, q, r)
    assert M.shape == (gaussian_binomial(n + 1, r, q), gaussian_binomial(n + 1, 1, q))
    assert set(M.row_sums()) == {(q**r - 1) // (q - 1)}
    assert set(M.col_sums()) == {gaussian_binomial(n, r - 1, q)}


@pytest.mark.parametrize("n,q,r", [c for c in _cells() if c[2] <= c[0]])
def test_affine_sums(n, q, r):
    if r > n:
        return
    M = affine_incidence_matrix(n, q, r)
    assert M.shape == (q ** (n - r) * gaussian_binomial(n, r, q), q**n)
    assert set(M.row_sums()) == {q**r}
    assert set(M.col_sums()) == {gaussian_binomial(n, r, q)}


@pytest.mark.parametrize("n,q,r", [(2, 2, 2), (3, 2, 2), (3, 3, 2), (3, 2, 3), (2, 4, 2), (4, 2, 3)])
def test_hyperplane_block(n, q, r):
    """Rows inside x_0 = 0 against points on it form the PG(n-1,q) matrix; they miss every affine point."""
    A = projective_incidence_matrix(n, q, r).to_dense()
    Ys = subspace_array(n, q, r)
    inside = (Ys[:, :, 0] == 0).all(axis=1)
    on_h0 = subspace_array(n, q, 1)[:, 0, 0] == 0
    block = A[np.ix_(inside, on_h0)]
    assert np.array_equal(block, projective_incidence_matrix(n - 1, q, r).to_dense())
    assert not A[np.ix_(inside, ~on_h0)].any()


def test_construction_is_deterministic():
    a = projective_incidence_matrix(3, 3, 2)
    b = projective_incidence_matrix(3, 3, 2)
    assert np.array_equal(a.entries, b.entries)
    order = np.lexsort((a.entries[:, 1], a.entries[:, 0]))
    assert np.array_equal(order, np.arange(len(order)))


def test_matrix_market_round_trip(tmp_path):
    M = affine_incidence_matrix(2, 3, 1)
    path = tmp_path / "ag23.mtx"
    M.write(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "%%MatrixMarket matrix coordinate integer general"
    assert lines[1] == "12 9 36"
    side = json.loads(path.with_suffix(".json").read_text())
    assert side == {"p": 3, "t": 1, "n": 2, "r": 1, "space": "affine", "rows": 12, "cols": 9}
    back = read_incidence(path)
    assert np.array_equal(back.to_dense(), M.to_dense())
    assert back.metadata["p"] == 3


def test_matrix_market_dense_and_pattern(tmp_path):
    A = np.array([[0, 2], [-3, 0]])
    path = tmp_path / "a.mtx"
    write_matrix_market(path, A)
    assert np.array_equal(read_matrix_market(path), A)
    pat = tmp_path / "p.mtx"
    pat.write_text("%%MatrixMarket matrix coordinate pattern symmetric\n% c\n2 2 1\n2 1\n")
    assert np.array_equal(read_matrix_market(pat), [[0, 1], [1, 0]])
    bad = tmp_path / "b.mtx"
    bad.write_text("%%MatrixMarket matrix coordinate integer general\n2 2 3\n1 1 1\n")
    with pytest.raises(ValueError):
        read_matrix_market(bad)
    with pytest.raises(ValueError):
        read_incidence(path)  # entries 2 and -3 are not incidences


def test_from_dense():
    M = IncidenceMatrix.from_dense([[1, 0], [1, 1]])
    assert M.entries.tolist() == [[0, 0], [1, 0], [1, 1]]
    with pytest.raises(ValueError):
        IncidenceMatrix.from_dense([[2]])
