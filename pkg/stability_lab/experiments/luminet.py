import math

from stability_lab.config import ExperimentConfig, build_maps
from stability_lab.counterexamples import (
    candidate_gap_profile,
    divergence_profile,
    oracle_growth,
    premise_report,
)
from stability_lab.direct_method import Diverged, LimitDiverged, build_limit_map
from stability_lab.experiments import ExperimentOutcome, experiment

PROFILE_TOL = 1e-9
GAP_MS = [1, 5, 10, 20, 40]
ORACLE_GROWTH_FACTOR = 1.5


@experiment(
    "luminet",
    "critical exponent counterexample",
    "x ln|x| into M3 meets the premises with p = 1 and q = 2, yet no "
    "n-ring homomorphism stays within a linear envelope of it.",
    asserts_convergence=False,
)
def luminet(cfg: ExperimentConfig, out: ExperimentOutcome) -> None:
    _, f = build_maps(cfg, 0.0)
    ln2 = math.log(2.0)

    profile = divergence_profile(cfg["profile_m_max"], f)
    out.trace(profile.trace)
    values = dict(profile.rows)
    out.table(
        "divergence_profile",
        ["m", "||h_m(1)||", "m ln 2"],
        [[m, v, m * ln2] for m, v in profile.rows],
    )
    out.expect(
        "profile_is_m_ln2",
        all(abs(v - m * ln2) <= PROFILE_TOL for m, v in profile.rows),
    )
    out.expect(
        "profile_doubles",
        all(
            abs(values[2 * m] / values[m] - 2.0) <= PROFILE_TOL
            for m in values
            if m >= 1 and 2 * m in values
        ),
    )
    out.expect(
        "direct_method_diverges",
        isinstance(profile.trace.verdict, Diverged),
        profile.trace.verdict.describe(),
    )

    try:
        build_limit_map(f, cfg.schedule(), seed=cfg.seed)
        out.expect("limit_construction_fails", False, "a limit map was built")
    except LimitDiverged as e:
        out.trace(e.trace)
        out.expect("limit_construction_fails", True, str(e))

    radii = cfg["premise_radii"]
    premises = [
        premise_report(
            cfg.grid(f.domain, radius), cfg.n, f, cfg["tuple_count"], cfg.seed
        )
        for radius in radii
    ]
    for reports in premises:
        for report in reports:
            out.record(report)
    out.table(
        "premise_constants",
        ["radius", "eps_hat", "delta_hat"],
        [
            [r, eps_hat.sup_value, delta_hat.sup_value]
            for r, (eps_hat, delta_hat) in zip(radii, premises)
        ],
    )
    small, large = premises[0], premises[-1]
    out.expect(
        "premises_stay_bounded",
        all(
            big.sup_value <= 2.0 * little.sup_value
            for little, big in zip(small, large)
        ),
    )

    gap_grid = cfg.grid(f.domain).extended(cfg.grid(f.domain, radii[0]))
    gaps = candidate_gap_profile(gap_grid, GAP_MS, f)
    out.table("candidate_gap", ["m", "sup |f(a) - a h_m(1)| / |a|"], gaps)
    out.expect(
        "candidate_gap_unbounded",
        all(gap >= m * ln2 * (1.0 - PROFILE_TOL) for m, gap in gaps)
        and gaps[-1][1] > gaps[0][1],
    )

    growth = oracle_growth(cfg["oracle_sizes"], f)
    out.table("oracle_growth", ["N", "nearest_additive_distance"], growth)
    out.expect(
        "oracle_distance_grows",
        growth[-1][1] >= ORACLE_GROWTH_FACTOR * growth[0][1],
        f"{growth[0][1]:.6g} -> {growth[-1][1]:.6g}",
    )
