from fractions import Fraction

import numpy as np
import pytest

from coinvlat import linalg as la


def test_hnf_unimodular_and_echelon():
    m = la.imat([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    H, U = la.hnf(m)
    assert np.array_equal(U.dot(m), H)
    assert abs(la.det(U)) == 1
    assert [H[i, i] for i in range(3)] == [2, 6, 12]
    assert 0 <= H[0, 1] < H[1, 1]


def test_snf_classic_example():
    m = la.imat([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    D, U, V = la.snf(m)
    assert np.array_equal(U.dot(m).dot(V), D)
    assert [D[i, i] for i in range(3)] == [2, 6, 12]


def test_snf_big_integers():
    big = 10**30 + 7
    m = la.imat([[big, 0], [0, 2 * big]])
    D, U, V = la.snf(m)
    assert [D[0, 0], D[1, 1]] == [big, 2 * big]


def test_snf_singular_tail():
    D, _, _ = la.snf(la.imat([[1, 2], [2, 4]]))
    assert D[0, 0] == 1 and D[1, 1] == 0


def test_det_inverse_solve():
    m = la.rmat([[2, 1], [1, Fraction(1, 2)]])
    assert la.det(m) == 0
    a = la.rmat([[4, 1], [2, 3]])
    assert la.det(a) == 10
    assert np.array_equal(la.inverse(a).dot(a), la.identity(2))
    x = la.solve_exact(a, la.rmat([1, 0]))
    assert list(x) == [Fraction(3, 10), Fraction(-1, 5)]
    with pytest.raises(la.NoSolution):
        la.solve_exact(la.imat([[1, 1], [1, 1]]), la.rmat([0, 1]))


def test_left_kernel():
    m = la.imat([[1, 2], [2, 4], [3, 6]])
    K = la.left_kernel_int(m)
    assert K.shape[0] == 2
    assert not np.any(K.dot(m))


def test_lll_reduces_skewed_basis():
    G = la.imat([[1, 0], [0, 1]])
    T0 = la.imat([[1, 0], [17, 1]])
    skew = T0.dot(G).dot(T0.T)
    T, G2 = la.lll_gram(skew)
    assert np.array_equal(G2, T.dot(skew).dot(T.T))
    assert sorted([G2[0, 0], G2[1, 1]]) == [1, 1]


def test_charpoly_and_cyclotomic():
    shift = la.imat([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    assert la.charpoly(shift) == [-1, 0, 0, 1]
    assert la.cyclotomic(1) == [-1, 1]
    assert la.cyclotomic(4) == [1, 0, 1]
    assert la.cyclotomic(6) == [1, -1, 1]
    q, r = la.poly_divmod([-1, 0, 0, 1], la.cyclotomic(3))
    assert q == [-1, 1] and not any(r)


@pytest.mark.parametrize("n", [1, 3, 5])
def test_rank_and_row_basis(n):
    m = la.imat([[1] * n, [2] * n])
    assert la.rank(m) == 1
    assert la.row_basis(m).shape[0] == 1
