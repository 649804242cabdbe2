from stability_lab.config import ExperimentConfig, build_maps
from stability_lab.direct_method import (
    Converged,
    alternate_schedule,
    construct_limit,
    iterate_cauchy_defect,
)
from stability_lab.experiments import ExperimentOutcome, experiment
from stability_lab.grid import ball_points, sample_tuples
from stability_lab.maps import DefectBudget
from stability_lab.util import rng_for
from stability_lab.verifiers import (
    IDENTITY_TOL,
    LIMIT_TOL_FACTOR,
    check_hom_hypotheses,
    check_hyers_bound,
    check_schedule_agreement,
    limit_hom_defect,
    limit_product_identities,
    orthogonality_check,
    sup_report,
)

SHRINKAGE_PAIRS = 100
SHRINKAGE_STEPS = 20
ORTHOGONALITY_TOL = 1e-6
CONVERGENCE_DEADLINE = 40


@experiment(
    "hyers-hom",
    "bounded homomorphism stability",
    "Bounded defects: the dyadic limit is an n-ring homomorphism within eps of f.",
)
def hyers_hom(cfg: ExperimentConfig, out: ExperimentOutcome) -> None:
    eps, n = cfg.eps, cfg.n
    amplitude = cfg.noise_amplitude()
    delta = cfg.delta if "delta" in cfg.given else amplitude + amplitude**n
    _, f = build_maps(cfg, amplitude)
    grid = cfg.grid(f.domain)
    tuples = sample_tuples(grid, n, cfg["tuple_count"], cfg.seed)
    sched = cfg.schedule()
    limit_tol = LIMIT_TOL_FACTOR * cfg.tol

    for report in check_hom_hypotheses(
        f, 3 * amplitude, delta, None, None, n, grid, cfg["tuple_count"], cfg.seed
    ):
        out.check(report)

    construction = construct_limit(
        f, sched, budget=DefectBudget(amplitude), seed=cfg.seed
    )
    rows = []
    for trace in construction.probe_traces:
        out.trace(trace)
        verdict = trace.verdict
        assert isinstance(verdict, Converged)
        rows.append(
            [
                trace.point.to_json(),
                verdict.converged_at,
                trace.iterates[-1].m,
                verdict.residual_bound,
            ]
        )
        out.expect(
            f"residual_within_tol at {trace.point.to_json()}",
            verdict.residual_bound is not None and verdict.residual_bound <= cfg.tol,
        )
        out.expect(
            f"converged_by_m_{CONVERGENCE_DEADLINE} at {trace.point.to_json()}",
            verdict.converged_at <= CONVERGENCE_DEADLINE,
            f"converged at m = {verdict.converged_at}",
        )
    out.table(
        "probe_convergence",
        ["probe", "converged_at", "final_m", "residual_bound"],
        rows,
    )
    h = construction.limit_map

    out.check(check_hyers_bound(f, h, eps, grid))
    out.check(limit_hom_defect(h, tuples, limit_tol))
    out.check(orthogonality_check(f, h, tuples, tolerance=ORTHOGONALITY_TOL))
    for report in limit_product_identities(f, h, tuples, limit_tol):
        out.check(report)

    points = ball_points(
        f.domain, cfg["agreement_points"], rng_for(cfg.seed, "agreement", f.name)
    )
    out.check(
        check_schedule_agreement(
            f, sched, alternate_schedule(sched), points, DefectBudget(amplitude)
        )
    )

    pairs = sample_tuples(grid, 2, SHRINKAGE_PAIRS, cfg.seed)[-SHRINKAGE_PAIRS:]
    cauchy_bound = 3 * amplitude
    shrinkage_rows = []
    for j in range(1, SHRINKAGE_STEPS + 1):
        worst = max(iterate_cauchy_defect(f, a, b, sched, j) for a, b in pairs)
        shrinkage_rows.append([sched.label(j), worst, cauchy_bound / sched.scale(j)])
    out.table("defect_shrinkage", ["m", "sup_cauchy_defect", "bound"], shrinkage_rows)
    out.check(
        sup_report(
            "defect_shrinkage",
            pairs,
            lambda ab: max(
                iterate_cauchy_defect(f, ab[0], ab[1], sched, j) * sched.scale(j)
                for j in range(1, SHRINKAGE_STEPS + 1)
            ),
            cauchy_bound,
            IDENTITY_TOL * cauchy_bound,
            {"eps": cauchy_bound, "steps": SHRINKAGE_STEPS},
        )
    )
