import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from incsnf.errors import InvalidDimension, SpecMismatch
from incsnf.geometry import (
    AffineFlat,
    ProjectivePoint,
    Subspace,
    canonical_subspace,
    contains,
    dump_subspaces,
    enumerate_affine_flats,
    enumerate_points,
    enumerate_subspaces,
    gaussian_binomial,
    subspace_array,
)
from incsnf.gf import FieldSpec


def test_gaussian_binomial_examples():
    assert gaussian_binomial(3, 1, 2) == 7
    assert gaussian_binomial(4, 2, 2) == 35
    assert gaussian_binomial(5, 0, 7) == 1
    assert gaussian_binomial(4, 2, 3) == 130


def test_enumeration_examples():
    assert len(enumerate_subspaces(2, 2, 1)) == 7
    assert len(enumerate_subspaces(2, 2, 2)) == 7
    assert len(enumerate_subspaces(3, 3, 2)) == 130
    with pytest.raises(InvalidDimension):
        enumerate_subspaces(2, 2, 4)
    with pytest.raises(InvalidDimension):
        enumerate_subspaces(2, 2, 0)


@pytest.mark.parametrize("q", [2, 3, 4, 5])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_counts(n, q):
    for r in range(1, n + 2):
        if gaussian_binomial(n + 1, r, q) > 20000:
            continue
        assert len(subspace_array(n, q, r)) == gaussian_binomial(n + 1, r, q)


def test_enumeration_sorted_and_canonical():
    subs = enumerate_subspaces(3, 3, 2)
    keys = [tuple(x for row in Y.rref for x in row) for Y in subs]
    assert keys == sorted(keys)
    assert len(set(subs)) == len(subs)
    for Y in subs:
        piv = Y.pivots
        assert list(piv) == sorted(piv)
        for i, j in enumerate(piv):
            assert Y.rref[i][j] == 1
            assert all(Y.rref[k][j] == 0 for k in range(Y.dim) if k != i)


@given(
    st.sampled_from([2, 3, 4, 5]),
    st.integers(0, 10**6),
    st.tuples(*[st.integers(0, 4)] * 4),
)
def test_recanonicalization(q, pick, mix):
    subs = enumerate_subspaces(3, q, 2)
    Y = subs[pick % len(subs)]
    F = FieldSpec.of_order(q)
    a, b, c, d = (F(x % q) for x in mix)
    assume(a * d - b * c)
    # an invertible recombination of the rows spans the same subspace
    r0, r1 = ([F(x) for x in row] for row in Y.rref)
    rows = [
        [(a * x + b * y).index for x, y in zip(r0, r1)],
        [(c * x + d * y).index for x, y in zip(r0, r1)],
    ]
    assert canonical_subspace(rows, q) == Y


def test_contains_examples():
    Y = canonical_subspace([(1, 0, 0), (0, 1, 0)], 2)
    assert contains(Y, ProjectivePoint(2, (1, 1, 0)))
    assert not contains(Y, ProjectivePoint(2, (0, 0, 1)))
    with pytest.raises(SpecMismatch):
        contains(Y, ProjectivePoint(2, (1, 0, 0, 0)))


@pytest.mark.parametrize("q", [2, 3, 4])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_points_per_subspace(n, q):
    pts = enumerate_points(n, q)
    for r in range(1, n + 2):
        expected = (q**r - 1) // (q - 1)
        for Y in enumerate_subspaces(n, q, r):
            assert sum(contains(Y, Z) for Z in pts) == expected
            assert len(Y.points()) == expected


def test_point_normalization():
    P = ProjectivePoint.normalize((0, 2, 1), 3)
    assert P.coords == (0, 1, 2)
    with pytest.raises(ValueError):
        ProjectivePoint(3, (0, 2, 1))
    with pytest.raises(ValueError):
        ProjectivePoint(3, (0, 0, 0))


def test_affine_examples():
    assert len(enumerate_affine_flats(2, 2, 1)) == 6
    assert len(enumerate_affine_flats(2, 3, 1)) == 12
    assert len(enumerate_affine_flats(2, 2, 0)) == 4
    with pytest.raises(InvalidDimension):
        enumerate_affine_flats(2, 2, 3)
    with pytest.raises(ValueError):
        AffineFlat(canonical_subspace([(0, 1, 0)], 2))


@pytest.mark.parametrize("q", [2, 3, 4])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_affine_partition(n, q):
    for r in range(0, n):
        flats = enumerate_affine_flats(n, q, r)
        assert len(flats) == q ** (n - r) * gaussian_binomial(n, r, q)
        inside = [Y for Y in enumerate_subspaces(n, q, r + 1) if Y.pivots[0] != 0]
        assert len(inside) == gaussian_binomial(n, r + 1, q)
        assert len(flats) + len(inside) == gaussian_binomial(n + 1, r + 1, q)
        assert all(f.dim == r for f in flats)


def test_dump_parse_round_trip():
    subs = enumerate_subspaces(2, 4, 2)
    text = dump_subspaces(subs)
    lines = text.splitlines()
    assert len(lines) == 21
    assert [Subspace.parse(line, 4) for line in lines] == subs
    assert lines[0] == "0,1,0;0,0,1"


def test_enumeration_is_deterministic():
    a = subspace_array(3, 4, 2).copy()
    b = np.array([[list(row) for row in Y.rref] for Y in enumerate_subspaces(3, 4, 2)])
    assert np.array_equal(a, b)
