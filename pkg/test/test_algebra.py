import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stability_lab.algebra import (
    Algebra,
    AlgebraConstructionError,
    AlgebraMismatch,
    Element,
    EmptyChain,
    NonFinite,
    acts_on,
    as_matrix,
    from_basis_matrices,
    from_matrix,
    left_act,
    load_algebra_file,
    make_matrix_algebra,
    make_scalar_algebra,
    matrix_unit,
    mul,
    norm,
    product_chain,
    regular_bimodule,
    right_act,
)
from stability_lab.counterexamples import build_nilpotent_algebra

coordinates = st.floats(min_value=-10, max_value=10, allow_nan=False)


def m2_elements():
    return st.lists(coordinates, min_size=4, max_size=4)


M2 = make_matrix_algebra(2)


def test_scalar_algebra():
    r = make_scalar_algebra()
    assert r.dim == 1
    assert mul(Element(r, [3.0]), Element(r, [-2.0])).coords.tolist() == [-6.0]
    assert norm(Element(r, [-2.5])) == 2.5


def test_matrix_algebra_dimension_and_norm():
    m3 = make_matrix_algebra(3)
    assert m3.dim == 9
    assert m3.matrix_embedding == 3
    assert norm(from_matrix(m3, np.eye(3))) == pytest.approx(math.sqrt(3))


def test_matrix_product_matches_numpy():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.array([[0.0, 1.0], [-1.0, 5.0]])
    product = mul(from_matrix(M2, a), from_matrix(M2, b))
    assert np.allclose(as_matrix(product), a @ b)


@given(m2_elements(), m2_elements(), m2_elements())
def test_matrix_products_are_associative(x, y, z):
    a, b, c = (Element(M2, v) for v in (x, y, z))
    left = product_chain([mul(a, b), c])
    right = mul(a, mul(b, c))
    assert np.allclose(left.coords, right.coords, atol=1e-9)


@given(m2_elements(), m2_elements())
def test_frobenius_norm_is_submultiplicative(x, y):
    a, b = Element(M2, x), Element(M2, y)
    assert norm(mul(a, b)) <= norm(a) * norm(b) * (1 + 1e-12) + 1e-12


def test_product_chain_of_nilpotent_units():
    ut4 = build_nilpotent_algebra()
    e12, e23, e34 = (from_matrix(ut4, matrix_unit(4, i, i + 1)) for i in range(3))
    assert np.allclose(as_matrix(product_chain([e12, e23, e34])), matrix_unit(4, 0, 3))


def test_product_chain_errors():
    with pytest.raises(EmptyChain):
        product_chain([])
    with pytest.raises(AlgebraMismatch):
        mul(Element(M2, [1, 0, 0, 0]), Element(make_scalar_algebra(), [1.0]))


def test_element_checks():
    with pytest.raises(AlgebraMismatch):
        Element(M2, [1.0, 2.0])
    with pytest.raises(NonFinite):
        Element(M2, [1.0, float("nan"), 0.0, 0.0])


def test_from_matrix_outside_the_subalgebra():
    with pytest.raises(AlgebraMismatch):
        from_matrix(build_nilpotent_algebra(), np.eye(4))


def test_basis_matrices_must_be_closed():
    with pytest.raises(AlgebraConstructionError):
        from_basis_matrices(
            "bad", [matrix_unit(2, 0, 1), matrix_unit(2, 1, 0)], ["a", "b"]
        )


def test_non_associative_structure_is_rejected():
    with pytest.raises(AlgebraConstructionError):
        load_algebra_file("test/example_data/non_associative.yaml")


def test_non_submultiplicative_norm_is_rejected():
    # R with product x*y = 4xy under the weighted norm 1*|x|
    with pytest.raises(AlgebraConstructionError):
        Algebra("R4", [[[4.0]]], ["1"], "weighted_l1", weights=[1.0])


def test_load_dual_numbers():
    dual = load_algebra_file("test/example_data/dual_numbers.yaml")
    assert dual.space_id == "dual"
    e = Element(dual, [0.0, 1.0])
    assert np.array_equal(mul(e, e).coords, [0.0, 0.0])
    assert norm(Element(dual, [2.0, -3.0])) == 5.0


def test_regular_bimodule_actions():
    module = regular_bimodule(M2)
    a = from_matrix(M2, [[1.0, 2.0], [0.0, 1.0]])
    swap = from_matrix(M2, [[0.0, 1.0], [1.0, 0.0]])
    x = Element(module, swap.coords)
    assert np.allclose(left_act(a, x).coords, mul(a, swap).coords)
    assert np.allclose(right_act(x, a).coords, mul(swap, a).coords)
    assert acts_on(M2, module)
    assert acts_on(M2, M2)
    assert not acts_on(make_scalar_algebra(), module)


def test_matrix_units_multiply():
    e12 = from_matrix(M2, matrix_unit(2, 0, 1))
    e21 = from_matrix(M2, matrix_unit(2, 1, 0))
    assert np.array_equal(as_matrix(mul(e12, e21)), matrix_unit(2, 0, 0))
    assert np.array_equal(as_matrix(mul(e21, e12)), matrix_unit(2, 1, 1))
    assert M2.basis_labels[:2] == ("e11", "e12")


def test_frobenius_norm_of_a_pythagorean_row():
    assert norm(from_matrix(M2, [[3.0, 4.0], [0.0, 0.0]])) == 5.0
    assert norm(M2.zero()) == 0.0


@given(m2_elements(), st.floats(min_value=-100, max_value=100, allow_nan=False))
def test_norm_is_homogeneous(x, t):
    a = Element(M2, x)
    assert norm(a.scaled(t)) == pytest.approx(abs(t) * norm(a), rel=1e-12, abs=1e-300)


def test_same_id_with_other_structure_is_another_space(tmp_path):
    dual = load_algebra_file("test/example_data/dual_numbers.yaml")
    path = tmp_path / "split.yaml"
    path.write_text(
        "name: dual\n"
        "dim: 2\n"
        "labels: [one, j]\n"
        "structure:\n"
        "  - [0, 0, 0, 1.0]\n"
        "  - [0, 1, 1, 1.0]\n"
        "  - [1, 0, 1, 1.0]\n"
        "  - [1, 1, 0, 1.0]\n"
        "norm_kind: weighted_l1\n"
        "weights: [1.0, 1.0]\n"
    )
    split = load_algebra_file(str(path))
    assert dual.same_as(load_algebra_file("test/example_data/dual_numbers.yaml"))
    assert not dual.same_as(split)
    assert not regular_bimodule(dual).same_as(regular_bimodule(split))
    assert make_matrix_algebra(2).same_as(make_matrix_algebra(2))
