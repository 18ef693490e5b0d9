import numpy as np
import pytest

from coinvlat.groups import Group, ModuleAction
from coinvlat.search import conjugacy_classes, hom_images, homomorphisms_to_sym, low_index_subgroups_product, same_subgroup


def cyclic(n, unit, order):
    return Group(ModuleAction([n]), [np.array([[unit]])], upper_bound=order)


def sym3():
    # GL_2(F_2) acting on (Z/2)^2
    return Group(ModuleAction([2, 2]), [np.array([[0, 1], [1, 0]]), np.array([[1, 1], [1, 0]])])


def test_index_one():
    A, B = cyclic(7, 2, 3), cyclic(7, 2, 3)
    (H,) = low_index_subgroups_product(A, B, 1)
    assert H.order() == 9


def test_c3_times_c3_index3():
    A, B = cyclic(7, 2, 3), cyclic(7, 2, 3)
    subs = low_index_subgroups_product(A, B, 3)
    assert len(subs) == 4
    assert all(H.order() == 3 for H in subs)
    for i, H in enumerate(subs):
        for K in subs[i + 1 :]:
            assert not same_subgroup(H, K)


# order 12: three subgroups of order 6, three Sylow 2-subgroups, one of order 3, seven involutions
@pytest.mark.parametrize("d, count", [(2, 3), (3, 3), (4, 1), (6, 7), (5, 0)])
def test_sym3_times_c2(d, count):
    subs = low_index_subgroups_product(sym3(), cyclic(3, 2, 2), d)
    assert len(subs) == count


def test_homomorphisms_of_sym3():
    homs = homomorphisms_to_sym(sym3(), 3)
    # trivial, sign onto a transposition (3 ways), and the 6 automorphisms
    assert len(homs) == 1 + 3 + 6


def test_conjugacy_classes_in_sym3():
    G = sym3()
    A = G.action
    subs = [Group(A, [g], upper_bound=2) for g in (np.array([[0, 1], [1, 0]]), np.array([[1, 0], [1, 1]]), np.array([[1, 1], [0, 1]]))]
    assert [len(c) for c in conjugacy_classes(G, subs)] == [3]


def test_hom_images_agree_on_generators():
    G = sym3()
    for hom in homomorphisms_to_sym(G, 3):
        assert hom_images(G, hom, G.gens, 3) == list(hom)


def test_screen_keeps_supplements_only():
    # K = Sym_3 x 1: H K = A x B exactly when K is transitive on the cosets of H
    A, B = sym3(), cyclic(3, 2, 2)
    screen = [(g, np.eye(1, dtype=np.int64)) for g in A.gens]
    stats = {}
    kept = low_index_subgroups_product(A, B, 2, screen=screen, stats=stats)
    # of Sym_3 x 1, Alt_3 x C_2 and the diagonal, only the last two supplement K
    assert stats == {"subgroups": 3, "screened": 2} and len(kept) == 2
