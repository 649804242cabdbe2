import numpy as np

from stability_lab.algebra import make_matrix_algebra, make_scalar_algebra, norm
from stability_lab.config import ExperimentConfig, build_maps
from stability_lab.experiments import ExperimentOutcome, experiment
from stability_lab.maps import LogMap, MapSpec, SineBump, corner_embedding
from stability_lab.oracle import (
    cross_validate,
    fit_additive,
    minimax_distance,
    sample_map,
)
from stability_lab.verifiers import DefectReport

SMALL_N = 100
SINE_SLOPE_WINDOW = (0.99, 1.01)
LOG_DISTANCE_FLOOR = 25.0
CERTIFICATE_FACTOR = 10.0
CERTIFICATE_SLACK = 1e-12


@experiment(
    "oracle-crosscheck",
    "nearest additive map",
    "Brute-force nearest additive map against the direct-method limit.",
)
def oracle_crosscheck(cfg: ExperimentConfig, out: ExperimentOutcome) -> None:
    amplitude = cfg.noise_amplitude()
    _, f = build_maps(cfg, amplitude)
    N = cfg["oracle_n"]
    out.check(cross_validate(f, cfg.schedule(), N, amplitude))

    corner = corner_embedding(make_matrix_algebra(2))
    one = corner.domain.basis()[0]
    exact = fit_additive(sample_map(corner, one, SMALL_N))
    out.check(
        DefectReport(
            "oracle_exact_linear",
            norm(exact.generator_image - corner(one)),
            [one],
            0.0,
            2 * SMALL_N + 1,
            1e-15,
            {"N": SMALL_N, "distance": exact.distance},
        )
    )

    real = make_scalar_algebra()
    sine = MapSpec(real, real, [[1.0]], SineBump(1.0), name="t+sin t")
    sine_fit = fit_additive(sample_map(sine, real.basis()[0], SMALL_N))
    x0 = float(sine_fit.generator_image.coords[0])
    lo, hi = SINE_SLOPE_WINDOW
    out.expect("sine_bump_slope", lo <= x0 <= hi, f"x0 = {x0:.9f}")
    out.expect(
        "sine_bump_distance",
        sine_fit.distance <= 1.0,
        f"distance = {sine_fit.distance:.6g}",
    )

    log_map = MapSpec(real, real, [[0.0]], LogMap(0), name="t ln|t|")
    sampled = sample_map(log_map, real.basis()[0], SMALL_N)
    log_fit = fit_additive(sampled)
    out.expect(
        "log_map_far_from_additive",
        log_fit.distance > LOG_DISTANCE_FLOOR,
        f"distance = {log_fit.distance:.6g}",
    )

    # A convex objective that no axis poll improves is minimal along every axis.
    x = log_fit.generator_image.coords
    step = CERTIFICATE_FACTOR * log_fit.grid_step
    floor = log_fit.distance - CERTIFICATE_SLACK * max(1.0, log_fit.distance)
    polls = []
    for i in range(len(x)):
        for sign in (1.0, -1.0):
            trial = np.array(x, dtype=float)
            trial[i] += sign * step
            polls.append(minimax_distance(sampled, trial))
    out.expect(
        "oracle_optimality_certificate",
        min(polls) >= floor,
        f"poll step {step:.3e}, best poll {min(polls):.9g}",
    )
