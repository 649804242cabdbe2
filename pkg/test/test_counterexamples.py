import math

import pytest

from stability_lab.algebra import make_matrix_algebra
from stability_lab.counterexamples import (
    CounterexampleError,
    build_luminet_map,
    build_nilpotent_algebra,
    candidate_gap_profile,
    divergence_profile,
    every_linear_is_4derivation,
    find_two_derivation_witness,
    oracle_growth,
    power_ideal_dim,
    power_ideal_dim_by_enumeration,
    premise_report,
)
from stability_lab.grid import default_grid, scaled_grid

LN2 = math.log(2)


def test_power_ideal_dimensions():
    ut4 = build_nilpotent_algebra()
    dims = [power_ideal_dim(ut4, k) for k in range(1, 5)]
    assert dims == [6, 3, 1, 0]
    assert dims == [power_ideal_dim_by_enumeration(ut4, k) for k in range(1, 5)]
    with pytest.raises(CounterexampleError):
        power_ideal_dim(ut4, 0)


def test_matrix_algebras_are_not_nilpotent():
    m2 = make_matrix_algebra(2)
    assert power_ideal_dim(m2, 5) == 4


def test_every_linear_map_is_a_4_derivation():
    survey = every_linear_is_4derivation(trials=5, seed=3)
    assert survey.report.sup_value == 0.0
    assert survey.report.satisfied
    assert survey.report.samples == 5 * 8
    assert survey.witness_map is not None
    assert not survey.witness_report.satisfied
    assert survey.witness_report.sup_value > 0.1


def test_two_derivation_witness_is_the_first_basis_map():
    f, report = find_two_derivation_witness(build_nilpotent_algebra())
    assert f is not None
    assert f.name == report.params["map"]
    assert report.params["n"] == 2


def test_divergence_profile_grows_like_m_ln2():
    profile = divergence_profile(20)
    for m, value in profile.rows:
        assert value == pytest.approx(m * LN2, rel=1e-9, abs=1e-12)
    assert profile.trace.verdict.kind == "diverged"
    with pytest.raises(CounterexampleError):
        divergence_profile(61)


def test_premise_constants_stay_bounded():
    grid = scaled_grid(build_luminet_map().domain, 32.0)
    eps_hat, delta_hat = premise_report(grid)
    assert LN2 * (1 - 1e-9) <= eps_hat.sup_value <= 1.0
    assert 0.0 < delta_hat.sup_value <= 1 / math.e + 1e-12
    assert eps_hat.params["p"] == 1.0
    assert delta_hat.params["q"] == 2.0


def test_candidate_gap_keeps_growing():
    domain = build_luminet_map().domain
    grid = default_grid(domain).extended(scaled_grid(domain, 32.0))
    rows = candidate_gap_profile(grid, [1, 5, 10, 20])
    for m, gap in rows:
        assert gap >= m * LN2 * (1 - 1e-9)
    assert rows[-1][1] > rows[0][1]


def test_oracle_distance_grows_with_the_window():
    (_, small), (_, large) = oracle_growth([64, 256])
    assert small > 0.2 * 64
    assert large >= 1.5 * small
