from fractions import Fraction as F

import numpy as np
import pytest

from coinvlat.fqm import (
    DiscriminantForm,
    FqMap,
    FqModule,
    QuotientForm,
    image_and_index,
    isotropic_census,
    orbits,
    orthogonal_group,
    orthogonal_group_bruteforce,
    primary_decompose,
)
from coinvlat.glue import table2_build
from coinvlat.groups import Group
from coinvlat.irr import build_irr
from coinvlat.lattice import Lattice
from coinvlat.pipeline import CLASSES

HYPERBOLIC_2 = ([2, 2], [[0, F(1, 4)], [F(1, 4), 0]])
ANISOTROPIC_2 = ([2, 2], [[F(1, 2), F(1, 4)], [F(1, 4), F(1, 2)]])


def A(n):
    return Lattice([[1 if j == i else -1 if j == i + 1 else 0 for j in range(n + 1)] for i in range(n)])


def small_modules():
    yield FqModule([2], [[F(1, 4)]])
    yield FqModule(*HYPERBOLIC_2)
    yield FqModule(*ANISOTROPIC_2)
    yield FqModule([4], [[F(3, 8)]])
    yield FqModule([3, 3], [[F(1, 3), 0], [0, F(1, 3)]])
    yield FqModule([5, 5], [[F(1, 5), 0], [0, F(2, 5)]])
    yield FqModule([8], [[F(1, 16)]])
    yield FqModule([2, 4], [[F(1, 4), 0], [0, F(1, 8)]])
    yield FqModule([4, 4], [[0, F(1, 8)], [F(1, 8), 0]])
    yield DiscriminantForm(A(3))
    yield DiscriminantForm(A(2)).orthogonal_sum(DiscriminantForm(A(2)))


def built_modules():
    """Every form built upstream, plus its primary parts."""
    for name in CLASSES:
        bc = table2_build(name)
        S = build_irr(bc)
        for M in (bc.discriminant, S.lam, S.module):
            yield f"{name}:{M.structure()}", M
            for part in primary_decompose(M).parts:
                yield f"{name}:{M.structure()}:p{part.p}", part.module


def test_small_examples():
    M = FqModule([2], [[F(1, 4)]])
    assert len(isotropic_census(M, 2)) == 0
    assert isotropic_census(M, 1).tolist() == [[0]]
    assert orthogonal_group_bruteforce(FqModule(*HYPERBOLIC_2)) == 2
    assert orthogonal_group_bruteforce(FqModule(*ANISOTROPIC_2)) == 6


def test_discriminant_of_A3():
    D = DiscriminantForm(A(3))
    assert [int(d) for d in D.orders] == [4]
    assert D.q(D.action.unit(0)[None]) == F(3, 8)


@pytest.mark.parametrize("M", list(small_modules()), ids=lambda M: M.structure())
def test_orthogonal_group_matches_bruteforce(M):
    assert M.is_nondegenerate()
    res = orthogonal_group(M)
    assert res.order == res.group.order() == orthogonal_group_bruteforce(M)


def test_built_modules_nondegenerate_and_small_ones_match_bruteforce():
    checked = 0
    for label, M in built_modules():
        assert M.is_nondegenerate(), label
        assert M.check_quadratic(), label
        if M.size <= 64:
            assert orthogonal_group(M).order == orthogonal_group_bruteforce(M), label
            checked += 1
    assert checked >= 8


def test_generators_preserve_q_exhaustively():
    M = table2_build("8E").discriminant
    X = M.elements()
    qn = M.q_num(X)
    for A_ in orthogonal_group(M).group.gens:
        assert np.array_equal(M.q_num(M.action.apply(X, A_)), qn)


def test_degenerate_form_detected():
    assert not FqModule([2], [[0]]).is_nondegenerate()


@pytest.mark.parametrize("name, sizes", [("6G", [256, 243]), ("10F", [64, 625])])
def test_primary_decomposition_sizes(name, sizes):
    M = build_irr(table2_build(name)).module
    dec = primary_decompose(M)
    assert sorted(p.module.size for p in dec.parts) == sorted(sizes)
    X = M.elements()[::97]
    pieces = dec.split(X)
    assert np.array_equal(M.index_of(dec.join(pieces)), M.index_of(X))


def test_quotient_form_equals_discriminant_for_dual():
    L = A(3)
    Q = QuotientForm(L.dual(), L)
    assert Q.size == 4
    assert sorted(Q.q_num(Q.elements()).tolist()) == sorted(DiscriminantForm(L).q_num(DiscriminantForm(L).elements()).tolist())


def test_quotient_form_rejects_non_integral():
    L = A(2)
    with pytest.raises(ValueError):
        QuotientForm(L.dual().scaled(F(1, 2)), L)


def test_json_roundtrip():
    M = table2_build("10F").discriminant
    N = FqModule.from_json(M.to_json())
    assert np.array_equal(N.q_num(N.elements()), M.q_num(M.elements()))


def test_image_and_index():
    M = FqModule(*ANISOTROPIC_2)
    full = orthogonal_group(M)
    G, idx = image_and_index(full.group.gens, M)
    assert idx == 1
    swap = FqMap(M, np.array([[0, 1], [1, 0]]))
    _, idx = image_and_index([swap], M)
    assert idx == 3
    with pytest.raises(ValueError):
        image_and_index([FqMap(M, np.array([[1, 0], [0, 0]]))], M)


def test_orbits_of_trivial_group():
    M = FqModule(*HYPERBOLIC_2)
    G = Group(M.action, [], [])
    assert len(orbits(G, M.elements())) == 4


def test_census_4c_nonempty():
    D = table2_build("4C").discriminant
    for k in (1, 2, 4):
        assert len(isotropic_census(D, k)) > 0


def test_restrict_inverts_lift():
    M = build_irr(table2_build("10F")).module
    res = orthogonal_group(M)
    dec = res.decomposition
    for X in res.group.gens:
        assert np.array_equal(M.action.normalize(dec.lift(dec.restrict(X))), M.action.normalize(X))
