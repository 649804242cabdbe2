import math

import numpy as np
import pytest

from stability_lab.algebra import Element, make_matrix_algebra, make_scalar_algebra
from stability_lab.direct_method import Schedule
from stability_lab.maps import (
    LogMap,
    MapSpec,
    SineBump,
    corner_embedding,
    identity_map,
    log_map_slot,
    make_perturbed_hom,
    scalar_multiple_map,
)
from stability_lab.oracle import (
    InvalidSample,
    cross_validate,
    fit_additive,
    golden_section,
    minimax_distance,
    nearest_additive_chebyshev,
    pattern_search,
    sample_map,
)

R = make_scalar_algebra()
ONE = Element(R, [1.0])


def test_golden_section_finds_the_minimum():
    assert golden_section(lambda x: (x - 2.0) ** 2, 0.0, 5.0, 1e-10) == pytest.approx(
        2.0, abs=1e-8
    )
    assert golden_section(abs, 3.0, 3.0, 1e-10) == 3.0


def test_pattern_search_polishes_a_quadratic():
    x, value, step = pattern_search(
        lambda v: float(np.sum((v - [1.0, -2.0]) ** 2)), np.zeros(2), 1.0, 1e-9
    )
    assert np.allclose(x, [1.0, -2.0])
    assert value == 0.0
    assert step < 1e-8


def test_exact_linear_maps_have_zero_distance():
    image, distance = nearest_additive_chebyshev(
        sample_map(scalar_multiple_map(R, 3.0), ONE, 50)
    )
    assert image.coords.tolist() == [3.0]
    assert distance == 0.0

    corner = fit_additive(
        sample_map(corner_embedding(make_matrix_algebra(2)), ONE, 100)
    )
    assert corner.distance <= 1e-12
    assert np.allclose(corner.generator_image.coords, [1.0, 0.0, 0.0, 0.0])


def test_sine_bump_is_close_to_the_identity():
    f = MapSpec(R, R, [[1.0]], SineBump(1.0), name="t+sin t")
    fit = fit_additive(sample_map(f, ONE, 100))
    assert 0.99 <= fit.generator_image.coords[0] <= 1.01
    assert fit.distance <= 1.0
    sample = sample_map(f, ONE, 100)
    assert minimax_distance(sample, fit.generator_image.coords) == pytest.approx(
        fit.distance
    )


def test_small_samples_are_rejected():
    with pytest.raises(InvalidSample):
        sample_map(identity_map(R), ONE, 4)


def test_cross_validation_with_bounded_noise():
    f = make_perturbed_hom(identity_map(R), 0.5, seed=11)
    report = cross_validate(f, Schedule(tol=1e-11), 512, 0.5)
    assert report.functional_name == "oracle_agreement"
    assert report.bound_value == pytest.approx(1.0 / 512)
    assert report.satisfied
    assert report.params["distance"] <= 0.5
    assert report.samples == 1025


def test_log_map_is_far_from_every_additive_map():
    m3 = make_matrix_algebra(3)
    f = MapSpec(R, m3, np.zeros((9, 1)), LogMap(log_map_slot(m3)), name="log")
    fit = fit_additive(sample_map(f, ONE, 100))
    assert fit.distance > 25.0
    assert fit.distance < 100 * math.log(100)
