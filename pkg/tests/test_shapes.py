import pytest

from coinvlat.pipeline import load_expectations
from coinvlat.shapes import abelian_invariants, orthogonal_order, shape_order


@pytest.mark.parametrize(
    "shape, order",
    [
        ("Sym_6", 720),
        ("Alt_5", 60),
        ("Dih_8^2", 64),
        ("Q_8:2^2", 32),
        ("AGL_1(5)", 20),
        ("2^{10+3}", 8192),
        ("[2^{20}].Sym_6", 2**20 * 720),
        ("GO_7(2)", 1451520),
        ("GO_4^+(2)", 72),
        ("GO_4^+(3)", 1152),
        ("GO_6^+(2)", 40320),
        ("Omega_5(3).2", 51840),
        ("PSO^+_4(3)", 288),
        ("GO_3(3)", 48),
        ("GO_4^+(5)", 28800),
    ],
)
def test_known_orders(shape, order):
    assert shape_order(shape) == order


def test_orthogonal_order_requires_type_in_even_dimension():
    with pytest.raises(ValueError):
        orthogonal_order("GO", 4, 3)
    with pytest.raises(ValueError):
        orthogonal_order("GO", 3, 3, "+")


def test_bad_shapes_rejected():
    for s in ["Foo_3", "2^", "(2 x 3", "Sym_6 )"]:
        with pytest.raises(ValueError):
            shape_order(s)


def test_abelian_invariants():
    assert abelian_invariants("2.4.8^2") == [2, 4, 8, 8]
    assert abelian_invariants("2^4 3^4") == [2] * 4 + [3] * 4


def test_expectation_orders_match_their_shapes():
    data = load_expectations()
    for name, row in data["classes"].items():
        for key, val in row.items():
            if isinstance(val, dict) and "shape" in val:
                assert shape_order(val["shape"]) == val["order"], (name, key)
