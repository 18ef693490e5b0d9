from fractions import Fraction

import numpy as np
import pytest

from coinvlat import _accel
from coinvlat import linalg as la
from coinvlat.lattice import Lattice, _fp_setup, fixed_and_coinvariant, index_in


def root_lattice_A(n):
    rows = [[1 if j == i else -1 if j == i + 1 else 0 for j in range(n + 1)] for i in range(n)]
    return Lattice(rows)


def root_lattice_D(n):
    rows = [[1 if j == i else -1 if j == i + 1 else 0 for j in range(n)] for i in range(n - 1)]
    rows.append([1 if j in (n - 2, n - 1) else 0 for j in range(n)])
    return Lattice(rows)


def e8():
    rows = [list(r) for r in root_lattice_D(8).basis] + [[Fraction(1, 2)] * 8]
    return Lattice(la.row_basis(la.rmat(rows)))


@pytest.mark.parametrize(
    "L, roots",
    [(root_lattice_A(2), 6), (root_lattice_A(4), 20), (root_lattice_D(4), 24), (root_lattice_D(5), 40), (e8(), 240)],
)
def test_root_counts(L, roots):
    assert L.is_even()
    assert len(L.short_vectors(2)) == roots


def test_e8_unimodular_and_theta():
    L = e8()
    assert L.det == 1
    norms = [nm for _, nm in L.short_vectors(4)]
    assert norms.count(2) == 240 and norms.count(4) == 2160


def test_backends_agree():
    L = root_lattice_D(5).lll()
    D, mu, s, M, budget, scale = _fp_setup(L.gram, [Fraction(1, 3)] * 5, Fraction(6))
    a, na = _accel._bfs_numpy(D, mu, s, M, budget)
    b, nb = _accel._dfs_python(D, mu, s, M, budget)
    key = lambda xs, ns: sorted(zip(map(tuple, np.asarray(xs).tolist()), [int(v) for v in ns]))
    assert key(a, na) == key(b, nb)
    if _accel.HAVE_NUMBA:
        c, nc = _accel._dfs_numba(*(np.asarray(v, np.int64) for v in (D, mu, s)), np.int64(M), np.int64(budget))
        assert key(c, nc) == key(b, nb)


def test_shifted_enumeration_and_minimum():
    L = root_lattice_A(2)
    shift = L.dual().basis[0]
    vecs = L.short_vectors(Fraction(2, 3), shift=shift)
    assert len(vecs) == 3 and all(nm == Fraction(2, 3) for _, nm in vecs)
    assert L.minimum() == 2
    assert not L.is_rootless()


def test_dual_and_discriminant_index():
    L = root_lattice_A(3)
    Ld = L.dual()
    assert L.is_sublattice_of(Ld)
    assert index_in(Ld, L) == 4
    assert L.det == 4 and Ld.det == Fraction(1, 4)


def test_coords_contains_vector_roundtrip():
    L = root_lattice_D(4)
    x = np.array([2, -1, 0, 3])
    v = L.vector(x)
    assert L.contains(v)
    assert list(L.coords(v)) == list(x)
    assert not L.contains(la.rmat([1, 0, 0, 0]))


def test_pairing_sublattice():
    L = Lattice(la.identity(2))
    w = la.rmat([[Fraction(1, 2), 0]])
    P = L.pairing_sublattice(w)
    assert P.same_as(Lattice([[2, 0], [0, 1]]))
    Q = L.pairing_sublattice(la.rmat([[Fraction(1, 2), Fraction(1, 2)], [Fraction(1, 3), 0]]))
    assert index_in(L, Q) == 6
    for b in Q.basis:
        assert (b[0] + b[1]) % 2 == 0 and b[0] % 3 == 0


def test_fixed_and_coinvariant_of_swap():
    L = Lattice(la.identity(2))
    swap = la.imat([[0, 1], [1, 0]])
    F, C = fixed_and_coinvariant(L, swap)
    assert F.rank == 1 and C.rank == 1
    assert C.gram[0, 0] == 2


def test_json_roundtrip():
    L = e8()
    M = Lattice.from_json(L.to_json())
    assert M.same_as(L) and np.array_equal(M.gram, L.gram)
    G = Lattice([[1, 0], [0, 1]], form=[[2, 1], [1, 2]])
    assert np.array_equal(Lattice.from_json(G.to_json()).gram, G.gram)
