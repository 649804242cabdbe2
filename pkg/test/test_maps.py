import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stability_lab.algebra import (
    Element,
    from_matrix,
    make_matrix_algebra,
    make_scalar_algebra,
    norm,
    regular_bimodule,
)
from stability_lab.counterexamples import build_nilpotent_algebra
from stability_lab.maps import (
    CustomPolynomial,
    DefectBudget,
    DomainMismatch,
    InvalidBudget,
    InvalidEps,
    InvalidMapSpec,
    LogMap,
    MapSpec,
    SineBump,
    TupleTooShort,
    build_family,
    cauchy_defect,
    corner_complement,
    corner_embedding,
    der_defect,
    evaluate,
    hom_defect,
    identity_map,
    inner_derivation,
    linear_map,
    log_map_slot,
    make_perturbed_hom,
    make_power_perturbed,
    rassias_admissible_amplitude,
    scalar_multiple_map,
    x_log_abs,
)

R = make_scalar_algebra()
M2 = make_matrix_algebra(2)
M3 = make_matrix_algebra(3)

reals = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


def scalar(x):
    return Element(R, [x])


def sine_map():
    return MapSpec(R, R, [[1.0]], SineBump(1.0), name="t+sin t")


def log_map():
    return MapSpec(R, M3, np.zeros((9, 1)), LogMap(log_map_slot(M3)), name="log")


def test_x_log_abs():
    assert x_log_abs(0.5) == 0.0
    assert x_log_abs(-1.0) == 0.0
    assert x_log_abs(math.e) == pytest.approx(math.e)
    assert x_log_abs(-2.0) == pytest.approx(-2 * math.log(2))


def test_cauchy_defect_of_sine_bump():
    a = scalar(math.pi / 2)
    assert cauchy_defect(sine_map(), a, a) == pytest.approx(2.0)


def test_cauchy_defect_of_log_map():
    one = scalar(1.0)
    assert cauchy_defect(log_map(), one, one) == pytest.approx(2 * math.log(2))


def test_hom_defect_of_sine_bump():
    a = scalar(math.pi)
    assert hom_defect(sine_map(), [a, a]) == pytest.approx(
        abs(math.sin(math.pi**2)), abs=1e-12
    )


def test_der_defect_of_square():
    square = MapSpec(R, R, [[0.0]], CustomPolynomial([(2, [[1.0]])]), name="x^2")
    one = scalar(1.0)
    assert der_defect(square, [one, one]) == pytest.approx(1.0)


def test_exact_maps_have_no_defect():
    corner = corner_embedding(M2)
    rng = np.random.default_rng(0)
    for _ in range(20):
        elems = [scalar(x) for x in rng.uniform(-5, 5, 3)]
        assert hom_defect(corner, elems) <= 1e-12
        assert cauchy_defect(corner, elems[0], elems[1]) <= 1e-12

    x = from_matrix(M2, [[1.0, 2.0], [3.0, -1.0]])
    ad = inner_derivation(M2, x)
    for _ in range(20):
        elems = [Element(M2, row) for row in rng.standard_normal((2, 4))]
        assert der_defect(ad, elems) <= 1e-12


def test_every_linear_map_on_ut4_is_a_4_derivation():
    ut4 = build_nilpotent_algebra()
    rng = np.random.default_rng(1)
    f = linear_map(ut4, ut4, rng.standard_normal((6, 6)))
    elems = [Element(ut4, row) for row in rng.standard_normal((4, 6))]
    assert der_defect(f, elems) == 0.0


def test_inner_derivation_into_regular_bimodule():
    module = regular_bimodule(M2)
    ad = inner_derivation(M2, Element(module, [0.0, 1.0, -1.0, 2.0]))
    rows = np.random.default_rng(2).standard_normal((3, 4))
    elems = [Element(M2, row) for row in rows]
    assert ad.codomain is module
    assert der_defect(ad, elems) <= 1e-12


@given(reals)
def test_hash_noise_stays_within_eps(x):
    f = make_perturbed_hom(identity_map(R), 0.5, seed=7)
    a = scalar(x)
    assert norm(f(a) - a) <= 0.5
    assert np.array_equal(f(a).coords, f(a).coords)


@given(reals, reals)
def test_hash_noise_cauchy_defect(x, y):
    f = make_perturbed_hom(identity_map(R), 0.5)
    assert cauchy_defect(f, scalar(x), scalar(y)) <= 1.5 + 1e-9


@given(reals, reals)
def test_admissible_power_noise_meets_cauchy_premise(x, y):
    p = 0.5
    f = make_power_perturbed(identity_map(R), rassias_admissible_amplitude(1.0, p), p)
    weight = abs(x) ** p + abs(y) ** p
    assert cauchy_defect(f, scalar(x), scalar(y)) <= weight * (1 + 1e-9) + 1e-12


def test_power_noise_vanishes_at_zero():
    f = make_power_perturbed(identity_map(R), 1.0, 0.5)
    assert f(scalar(0.0)).coords.tolist() == [0.0]


def test_noise_respects_support():
    f = make_perturbed_hom(corner_embedding(M2), 0.5, support=corner_complement(M2))
    value = f(scalar(3.0)).coords
    assert value[0] == 3.0
    assert value[1] == value[2] == 0.0


def test_corner_complement_and_log_slot():
    assert corner_complement(M2) == [3]
    assert log_map_slot(M3) == 3


def test_rassias_admissible_amplitude():
    assert rassias_admissible_amplitude(1.0, 0.5) == 0.5
    assert rassias_admissible_amplitude(1.0, 3.0) == 0.2


def test_build_family():
    h0 = scalar_multiple_map(R, 2.0)
    assert build_family(h0, "none", 0.5) is h0
    assert build_family(h0, "sine_bump", 0.5).name == "2*id+sine_bump"
    assert build_family(corner_embedding(M3), "log_map", 0.0).name == "x_log_abs"
    poly = build_family(h0, "custom_polynomial", 0.0, coefficients=[1.0, 0.0, 3.0])
    assert evaluate(poly, scalar(2.0)).coords.tolist() == [2.0 + 3.0 * 2.0 * 4.0]
    with pytest.raises(InvalidMapSpec):
        build_family(h0, "power_noise", 0.5)
    with pytest.raises(InvalidMapSpec):
        build_family(h0, "gaussian", 0.5)


def test_map_errors():
    with pytest.raises(InvalidMapSpec):
        MapSpec(R, M2, np.zeros((2, 1)))
    with pytest.raises(InvalidMapSpec):
        MapSpec(R, R, [[1.0]], SineBump(1.0), homogeneous=True)
    with pytest.raises(InvalidEps):
        make_perturbed_hom(identity_map(R), -1.0)
    with pytest.raises(DomainMismatch):
        identity_map(R)(Element(M2, [1, 0, 0, 1]))
    with pytest.raises(TupleTooShort):
        hom_defect(identity_map(R), [scalar(1.0)])
    with pytest.raises(DomainMismatch):
        der_defect(corner_embedding(M2), [scalar(1.0), scalar(2.0)])


def test_defect_budget_validation():
    assert DefectBudget(0.5, 0.1, n=3).to_json()["n"] == 3
    with pytest.raises(InvalidBudget):
        DefectBudget(0.5, n=1)
    with pytest.raises(InvalidBudget):
        DefectBudget(float("inf"))
