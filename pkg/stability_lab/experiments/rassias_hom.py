from stability_lab.config import ExperimentConfig, InvalidConfig, build_maps
from stability_lab.direct_method import (
    alternate_schedule,
    construct_limit,
    hom_stability_constant,
)
from stability_lab.experiments import ExperimentOutcome, experiment
from stability_lab.grid import ball_points, sample_tuples
from stability_lab.util import rng_for
from stability_lab.verifiers import (
    LIMIT_TOL_FACTOR,
    check_hom_hypotheses,
    check_rassias_bound,
    check_schedule_agreement,
    limit_hom_defect,
)


@experiment(
    "rassias-hom",
    "power-weighted homomorphism stability",
    "Power-weighted defects, p and q on one side of 1: an n-ring homomorphism "
    "within k eps ||a||^p.",
)
def rassias_hom(cfg: ExperimentConfig, out: ExperimentOutcome) -> None:
    if cfg.p is None:
        raise InvalidConfig("rassias-hom needs an exponent p")
    eps, p, n = cfg.eps, cfg.p, cfg.n
    q = cfg.q if cfg.q is not None else p
    amplitude = cfg.noise_amplitude()
    delta = cfg.delta if "delta" in cfg.given else amplitude + amplitude**n
    _, f = build_maps(cfg, amplitude)
    grid = cfg.grid(f.domain)
    sched = cfg.schedule()

    for report in check_hom_hypotheses(
        f, eps, delta, p, q, n, grid, cfg["tuple_count"], cfg.seed
    ):
        out.check(report)

    construction = construct_limit(f, sched, budget=cfg.budget(), seed=cfg.seed)
    for trace in construction.probe_traces:
        out.trace(trace)
    h = construction.limit_map

    bound = out.check(
        check_rassias_bound(f, h, eps, p, grid, LIMIT_TOL_FACTOR * cfg.tol)
    )
    out.table(
        "stability_constant",
        ["p", "k", "empirical sup ratio / eps"],
        [[p, hom_stability_constant(p), bound.sup_value / eps if eps else 0.0]],
    )
    out.check(
        limit_hom_defect(
            h,
            sample_tuples(grid, n, cfg["tuple_count"], cfg.seed),
            LIMIT_TOL_FACTOR * cfg.tol,
        )
    )
    points = ball_points(
        f.domain, cfg["agreement_points"], rng_for(cfg.seed, "agreement", f.name)
    )
    out.check(check_schedule_agreement(f, sched, alternate_schedule(sched), points))
