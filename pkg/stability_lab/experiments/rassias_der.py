from stability_lab.config import ExperimentConfig, InvalidConfig, build_maps
from stability_lab.direct_method import (
    build_limit_map,
    construct_limit,
    scaled_derivation_defect,
)
from stability_lab.experiments import ExperimentOutcome, experiment
from stability_lab.grid import sample_tuples
from stability_lab.maps import rassias_admissible_amplitude
from stability_lab.typedefs import Weight
from stability_lab.verifiers import (
    IDENTITY_TOL,
    LIMIT_TOL_FACTOR,
    check_der_hypotheses,
    check_rassias_bound,
    homogeneity_implies_equality,
    limit_der_defect,
    sup_report,
)

ENVELOPE_TUPLES = 64
ENVELOPE_STEPS = 20


def _derivation_amplitude(cfg: ExperimentConfig, p: float) -> float:
    if cfg.amplitude is not None:
        return cfg.amplitude
    return min(rassias_admissible_amplitude(cfg.eps, p), cfg.eps / (cfg.n + 1))


def _run_derivation(
    cfg: ExperimentConfig, out: ExperimentOutcome, weight: Weight
) -> None:
    if cfg.p is None:
        raise InvalidConfig(f"{cfg.experiment} needs an exponent p")
    eps, p, n = cfg.eps, cfg.p, cfg.n
    if weight == "product" and p >= 1:
        raise InvalidConfig(
            f"Product weights need p < 1 on the unit-ball grid, got p = {p}"
        )
    amplitude = _derivation_amplitude(cfg, p)
    h0, f = build_maps(cfg, amplitude)
    grid = cfg.grid(f.domain)
    sched = cfg.schedule()

    for report in check_der_hypotheses(
        f, eps, p, n, grid, weight, cfg["tuple_count"], cfg.seed
    ):
        out.check(report)

    construction = construct_limit(f, sched, budget=cfg.budget(), seed=cfg.seed)
    for trace in construction.probe_traces:
        out.trace(trace)
    D = construction.limit_map

    out.check(check_rassias_bound(f, D, eps, p, grid, LIMIT_TOL_FACTOR * cfg.tol))
    tuples = sample_tuples(grid, n, cfg["tuple_count"], cfg.seed)
    out.check(limit_der_defect(D, tuples, LIMIT_TOL_FACTOR * cfg.tol))
    out.check(homogeneity_implies_equality(h0, build_limit_map(h0, sched), grid))

    # Scaled residuals shrink like lambda^{-|1-p|} on the unit ball.
    sample = tuples[-ENVELOPE_TUPLES:]
    envelope = (n + 1) * amplitude
    rows = []
    for j in range(1, ENVELOPE_STEPS + 1):
        lam = sched.scale(j)
        worst = max(scaled_derivation_defect(f, t, sched, j) for t in sample)
        rows.append([sched.label(j), worst, envelope * lam ** -abs(1 - p)])
    out.table("scaled_derivation_defect", ["m", "sup_defect", "envelope"], rows)
    out.check(
        sup_report(
            "scaled_derivation_envelope",
            sample,
            lambda t: max(
                scaled_derivation_defect(f, t, sched, j)
                * sched.scale(j) ** abs(1 - p)
                / envelope
                for j in range(1, ENVELOPE_STEPS + 1)
            ),
            1.0,
            IDENTITY_TOL,
            {"n": n, "p": p, "eps": eps, "weight": weight},
        )
    )


@experiment(
    "rassias-der-sum",
    "sum-weighted derivation stability",
    "Sum-weighted derivational defect: an n-ring derivation within "
    "2 eps ||a||^p / |2 - 2^p|.",
)
def rassias_der_sum(cfg: ExperimentConfig, out: ExperimentOutcome) -> None:
    _run_derivation(cfg, out, "sum")


@experiment(
    "rassias-der-prod",
    "product-weighted derivation stability",
    "Product-weighted derivational defect, p < 1: an n-ring derivation within "
    "2 eps ||a||^p / |2 - 2^p|.",
)
def rassias_der_prod(cfg: ExperimentConfig, out: ExperimentOutcome) -> None:
    _run_derivation(cfg, out, "product")
