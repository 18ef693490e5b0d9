from fractions import Fraction as F

import numpy as np
import pytest

from coinvlat import linalg as la
from coinvlat.glue import table2_build
from coinvlat.irr import (
    DOUBLED,
    PLAIN,
    build_irr,
    doubled_frame,
    eigen_dimensions,
    hk_untwisted_action,
    sg_set,
    sg_split,
    sigma_label_action,
    twisted_q_values,
    vacuum_anomaly,
)
from coinvlat.pipeline import CLASSES

IRR = {"4C": "2^2 4^6", "6E": "2^6 3^6", "6G": "2^4 4^2 3^5", "8E": "2 4 8^4", "10F": "2^2 4^2 5^4"}
SG = {"4C": 4032, "6E": 9100, "6G": 240, "8E": 3840, "10F": 432}
RHO1 = {"4C": F(3, 4), "6E": F(5, 6), "6G": F(11, 12), "8E": F(7, 8), "10F": F(19, 20)}
PLAIN_CLASSES = ("4C", "6E", "8E")


@pytest.fixture(scope="module")
def spaces():
    return {name: build_irr(table2_build(name)) for name in CLASSES}


@pytest.mark.parametrize("name", CLASSES)
def test_structure_and_form(spaces, name):
    S = spaces[name]
    assert S.module.structure() == IRR[name]
    assert S.case == (DOUBLED if name in ("6G", "10F") else PLAIN)
    assert S.module.is_nondegenerate()
    assert S.module.check_quadratic()


@pytest.mark.parametrize("name", CLASSES)
def test_sg_contains_vacuum(spaces, name):
    S = spaces[name]
    X = sg_set(S)
    assert len(X) == SG[name]
    assert S.module.index_of(S.vacuum_label()[None])[0] in set(S.module.index_of(X).tolist())
    assert not np.any(S.module.q_num(X))


@pytest.mark.parametrize("name, p_count", [("6G", 80), ("10F", 144)])
def test_doubled_split(spaces, name, p_count):
    S = spaces[name]
    s2, sp = sg_split(S)
    assert len(s2) == 3 and len(sp) == p_count
    # the twisted-type elements of S_g(2) are (n,0) and (0,n); the third is their sum
    lam, i, j = S.split(s2)
    assert not np.any(lam)
    assert sorted(zip(i.tolist(), j.tolist())) == sorted([(S.n, 0), (0, S.n), (S.n, S.n)])


@pytest.mark.parametrize("name", ["6G", "10F"])
def test_doubled_frame(name):
    bc = table2_build(name)
    fr = doubled_frame(bc)
    fr.check(bc.L)
    assert bc.L.is_sublattice_of(fr.Y)
    assert fr.widened == (name == "6G")


@pytest.mark.parametrize("name", PLAIN_CLASSES)
def test_sigma_maps_preserve_q_exhaustively(spaces, name):
    S = spaces[name]
    M = S.module
    X = M.elements()
    qn = M.q_num(X)
    for x in S.lam.reps:
        f = sigma_label_action(S, S.bc.L.vector(x))
        assert f.is_bijective()
        assert np.array_equal(M.q_num(f(X)), qn)


@pytest.mark.parametrize("name", PLAIN_CLASSES)
def test_sigma_untwisted_footprint(spaces, name):
    S = spaces[name]
    x = S.lam.reps[0]
    a = S.lam.coords_of(S.bc.L.coords(S.bc.L.vector(x)))[0]
    f = sigma_label_action(S, S.bc.L.vector(x))
    lam = S.lam.action.unit(0)
    img = f(S.label(lam, 0, 0)[None])[0]
    expected_j = -int(S.lam.b(a[None], lam[None]) * S.n)
    assert np.array_equal(img, S.label(lam, 0, expected_j))


@pytest.mark.parametrize("name", PLAIN_CLASSES)
def test_hk_maps_preserve_q(spaces, name):
    S = spaces[name]
    for k in range(S.n):
        h = hk_untwisted_action(S, k)
        assert h.preserves_q() and h.is_injective()
        assert len(h.domain) == S.n * S.n


def test_label_maps_reject_doubled(spaces):
    S = spaces["6G"]
    with pytest.raises(ValueError):
        sigma_label_action(S, S.bc.L.basis[0])
    with pytest.raises(ValueError):
        hk_untwisted_action(S, 1)


@pytest.mark.parametrize("name", CLASSES)
def test_vacuum_anomaly(spaces, name):
    S = spaces[name]
    rho = vacuum_anomaly(S.bc, 1)
    assert rho == RHO1[name]
    assert rho in twisted_q_values(S, 1)


def test_vacuum_anomaly_rejects_non_units():
    with pytest.raises(ValueError):
        vacuum_anomaly(table2_build("4C"), 2)


def test_eigen_dimensions_of_cycle():
    shift = la.imat([[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0]])
    assert eigen_dimensions(shift, 4) == [1, 1, 1, 1]
    assert eigen_dimensions(la.identity(3), 2) == [3, 0]
