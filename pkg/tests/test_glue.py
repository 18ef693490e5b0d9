import dataclasses
from fractions import Fraction

import numpy as np
import pytest

from coinvlat import linalg as la
from coinvlat.glue import TABLE2, GlueSpec, build_block, build_LA_LB, table2_build, verify_eq_gchi
from coinvlat.pipeline import CLASSES

RANKS = {"4C": 14, "6E": 16, "6G": 18, "8E": 18, "10F": 20}


@pytest.mark.parametrize("k", [2, 3, 4, 6])
def test_coxeter_element_order_and_fixed_points(k):
    c = build_block(k).coxeter()
    P = la.identity(k)
    for _ in range(k):
        P = P.dot(c)
    assert np.array_equal(P, la.identity(k))
    # fixed vectors of the shift are multiples of (1,...,1), orthogonal to the root lattice
    assert la.rank(c - la.identity(k)) == k - 1


def test_fundamental_weights_pair_with_simple_roots():
    b = build_block(5)
    S = b.simple_roots()
    for j in range(1, 5):
        w = b.fundamental_weight(j)
        assert [S[i].dot(w) for i in range(4)] == [int(i == j - 1) for i in range(4)]


@pytest.mark.parametrize("name", CLASSES)
def test_class_construction_checks(name):
    bc = table2_build(name)
    assert bc.L.rank == RANKS[name]
    checks = bc.checks()
    assert all(checks.values()), {k: v for k, v in checks.items() if not v}


def test_second_gamma_choice_4c():
    a = table2_build("4C", 0)
    b = table2_build("4C", 1)
    assert not np.array_equal(a.gamma, b.gamma)
    assert all(b.checks().values())
    assert b.L.same_as(a.L)


def test_eq_gchi_negative_control():
    bc = table2_build("8E")
    bad = dataclasses.replace(bc, g_ambient=la.identity(bc.g_ambient.shape[0]))
    assert verify_eq_gchi(bc)
    assert not verify_eq_gchi(bad)


def test_spec_validation():
    with pytest.raises(ValueError):
        GlueSpec("bad", (4, 1), (1, 1))
    with pytest.raises(ValueError):
        GlueSpec("bad", (4, 4), (1, 2))


def test_odd_glue_raises():
    # lambda_1 of A_3 plus lambda_1 of A_1 has norm 5/4
    with pytest.raises(ArithmeticError):
        build_LA_LB(GlueSpec("odd", (4, 2), (1, 1)))


def test_rootless_negative_control():
    bc = build_LA_LB(GlueSpec("A1^4", (2, 2, 2, 2), (1, 1, 1, 1)))
    checks = bc.checks()
    assert checks["L_even"] and not checks["rootless"]


def test_table_matches_glue_codes():
    assert TABLE2["8E"].ks == (8, 8, 4, 2) and TABLE2["8E"].digits == (1, 3, 1, 1)
    assert TABLE2["10F"].doubled and not TABLE2["4C"].doubled


def test_json_is_serializable():
    import json

    data = table2_build("6E").to_json()
    text = json.dumps(data)
    assert json.loads(text)["n"] == 6
    assert Fraction(data["chi"][0]) == table2_build("6E").chi[0]
