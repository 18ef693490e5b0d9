from math import factorial

import numpy as np
import pytest

from coinvlat import linalg as la
from coinvlat.isometries import aut_group, centralizer, conjugation_orbit, discriminant_action
from coinvlat.lattice import Lattice


def A(n):
    return Lattice([[1 if j == i else -1 if j == i + 1 else 0 for j in range(n + 1)] for i in range(n)])


def D4():
    return Lattice([[1, -1, 0, 0], [0, 1, -1, 0], [0, 0, 1, -1], [0, 0, 1, 1]])


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_aut_of_A_n(n):
    expected = 2 if n == 1 else 2 * factorial(n + 1)
    G = aut_group(A(n))
    assert G.order() == expected
    for g in G.gens:
        assert G.group.action.is_isometry(g)


def test_aut_of_D4():
    assert aut_group(D4()).order() == 1152


def test_cache_roundtrip(tmp_path):
    first = aut_group(A(4), cache_dir=tmp_path)
    assert any(tmp_path.iterdir())
    second = aut_group(A(4), cache_dir=tmp_path)
    assert second.order() == first.order() == 240


def test_centralizer_of_coxeter_element():
    L = A(3)
    G = aut_group(L)
    shift = la.imat([[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0]])
    g = la.to_int64(L.transport(shift))
    C = centralizer(G, g)
    # the 4-cycle generates its own centralizer in Sym_4, and -1 commutes with everything
    assert C.order() == 8
    elts, _, _ = conjugation_orbit(G.group, g)
    assert len(elts) * C.order() == G.order()


def test_discriminant_action_of_A3():
    L = A(3)
    da = discriminant_action(aut_group(L))
    assert da.form.size == 4
    assert da.image.order() == 2  # -1 swaps the two generators of Z/4
    assert da.kernel_order == 24


def test_non_member_rejected():
    L = A(2)
    G = aut_group(L)
    with pytest.raises(ValueError):
        centralizer(G, np.array([[2, 0], [0, 1]]))
