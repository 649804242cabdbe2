import math

import numpy as np
import pytest

from stability_lab.algebra import Element, make_scalar_algebra
from stability_lab.counterexamples import build_luminet_map
from stability_lab.direct_method import (
    InvalidSchedule,
    LimitDiverged,
    Schedule,
    ScaleOverflow,
    UnsupportedExponent,
    alternate_schedule,
    build_limit_map,
    construct_limit,
    direct_limit,
    hom_stability_constant,
    rassias_constant,
    residual_bound,
    schedule_sign,
    scaled_iterate,
    validate_exponent,
)
from stability_lab.maps import (
    DefectBudget,
    MapSpec,
    SineBump,
    identity_map,
    make_perturbed_hom,
    make_power_perturbed,
)

R = make_scalar_algebra()


def scalar(x):
    return Element(R, [x])


def sine_map():
    return MapSpec(R, R, [[1.0]], SineBump(1.0), name="t+sin t")


def test_sine_bump_limit_is_the_identity():
    trace = direct_limit(sine_map(), scalar(1.0), Schedule(), DefectBudget(3.0))
    assert trace.converged
    assert trace.limit.coords[0] == pytest.approx(1.0, abs=1e-9)
    assert trace.verdict.residual_bound <= 1e-10
    assert trace.to_json()["verdict"] == "converged"


def test_scaled_iterate_of_sine_bump():
    value = scaled_iterate(sine_map(), scalar(1.0), Schedule(), 3)
    assert value.coords[0] == pytest.approx(1.0 + math.sin(8.0) / 8.0)


def test_residual_bounds():
    assert residual_bound(1.0, None, Schedule(), 10, 1.0) == 2.0**-10
    assert residual_bound(1.0, 0.5, Schedule(), 0, 1.0) == pytest.approx(
        2.0 / (2.0 - math.sqrt(2.0))
    )
    contracting = Schedule(s=-1)
    assert residual_bound(1.0, 3.0, contracting, 2, 1.0) == pytest.approx(
        4.0**-2 * 2.0 / 6.0
    )


def test_residual_bound_rejects_mismatched_signs():
    with pytest.raises(UnsupportedExponent):
        residual_bound(1.0, None, Schedule(s=-1), 3, 1.0)
    with pytest.raises(UnsupportedExponent):
        residual_bound(1.0, 3.0, Schedule(s=1), 3, 1.0)


def test_exponent_one_is_unsupported():
    with pytest.raises(UnsupportedExponent):
        validate_exponent(1.0)
    with pytest.raises(UnsupportedExponent):
        rassias_constant(1.0, 1.0)
    with pytest.raises(UnsupportedExponent):
        validate_exponent(-0.5)


def test_stability_constants():
    assert schedule_sign(0.5) == 1
    assert schedule_sign(3.0) == -1
    assert hom_stability_constant(0.0) == 2.0
    assert hom_stability_constant(2.0) == 1.0


def test_schedules():
    dyadic = Schedule()
    assert dyadic.max_steps() == 60
    assert dyadic.scale(10) == 1024.0
    with pytest.raises(ScaleOverflow):
        dyadic.scale(61)

    integer = Schedule("integer")
    assert integer.label(2) == 9
    assert integer.scale(2) == 9.0
    assert integer.max_steps() == 31

    other = alternate_schedule(dyadic)
    assert other.kind == "integer"
    assert other.m_max == 31
    assert alternate_schedule(other).m_max == 60


@pytest.mark.parametrize(
    "kwargs",
    [{"kind": "fibonacci"}, {"s": 0}, {"m_max": 0}, {"tol": 0.0}, {"ratio": 1}],
)
def test_invalid_schedules(kwargs):
    with pytest.raises(InvalidSchedule):
        Schedule(**kwargs)


def test_log_map_diverges():
    trace = direct_limit(build_luminet_map(), scalar(1.0), Schedule())
    assert not trace.converged
    assert trace.verdict.kind == "diverged"
    with pytest.raises(LimitDiverged):
        trace.limit
    with pytest.raises(LimitDiverged):
        build_limit_map(build_luminet_map(), Schedule())


def test_homogeneous_maps_short_circuit():
    trace = direct_limit(identity_map(R), scalar(2.0), Schedule(), DefectBudget(1.0))
    assert trace.converged
    assert trace.limit.coords.tolist() == [2.0]
    assert trace.verdict.converged_at == 0
    assert trace.verdict.residual_bound == 0.0
    assert len(trace.iterates) == 4


def test_construct_limit_recovers_the_identity():
    f = make_perturbed_hom(identity_map(R), 0.5, seed=3)
    construction = construct_limit(f, Schedule(), budget=DefectBudget(0.5))
    assert construction.limit_map.homogeneous
    assert np.allclose(construction.limit_map.base_linear, [[1.0]], atol=1e-9)
    assert len(construction.probe_traces) == 1
    assert len(construction.check_traces) == 16
    assert construction.check_gap <= 10 * 1e-10


def test_contracting_schedule_for_large_exponents():
    f = make_power_perturbed(identity_map(R), 0.2, 3.0)
    h = build_limit_map(
        f, Schedule(s=-1, tol=1e-6), budget=DefectBudget(1.0, p=3.0)
    )
    assert h.base_linear[0, 0] == pytest.approx(1.0, abs=1e-5)


def test_integer_schedule_agrees_with_dyadic():
    f = make_perturbed_hom(identity_map(R), 0.5, seed=5)
    a = scalar(0.75)
    dyadic = direct_limit(f, a, Schedule(tol=1e-8))
    integer = direct_limit(f, a, alternate_schedule(Schedule(tol=1e-8)))
    assert dyadic.converged and integer.converged
    assert dyadic.limit.coords[0] == pytest.approx(integer.limit.coords[0], abs=1e-7)
