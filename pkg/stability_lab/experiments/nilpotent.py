from more_itertools import pairwise

from stability_lab.algebra import Algebra
from stability_lab.config import ExperimentConfig, InvalidConfig, build_space
from stability_lab.counterexamples import (
    WITNESS_THRESHOLD,
    every_linear_is_4derivation,
    power_ideal_dim,
    power_ideal_dim_by_enumeration,
)
from stability_lab.experiments import ExperimentOutcome, experiment

MAX_POWER = 4


@experiment(
    "nilpotent",
    "nilpotent derivation counterexample",
    "Strictly upper-triangular 4 x 4 matrices: every linear self-map is a "
    "4-ring derivation, but not a 2-ring derivation.",
    asserts_convergence=False,
)
def nilpotent(cfg: ExperimentConfig, out: ExperimentOutcome) -> None:
    alg = build_space(cfg["domain"], cfg.seed)
    if not isinstance(alg, Algebra):
        raise InvalidConfig(f"{cfg['domain']} is not an algebra")

    rows = [
        [k, power_ideal_dim(alg, k), power_ideal_dim_by_enumeration(alg, k)]
        for k in range(1, MAX_POWER + 1)
    ]
    out.table("power_ideal_dims", ["k", "dim A^k (span)", "dim A^k (chains)"], rows)
    dims = {k: d for k, d, _ in rows}
    out.expect("power_dims_agree", all(d == e for _, d, e in rows))
    out.expect(
        "nilpotent_of_index_four",
        dims[3] > 0 and dims[4] == 0,
        f"dim A^3 = {dims[3]}, dim A^4 = {dims[4]}",
    )
    out.expect(
        "power_dims_nonincreasing",
        all(b <= a for a, b in pairwise(dims[k] for k in sorted(dims))),
    )

    survey = every_linear_is_4derivation(cfg["trials"], cfg.seed, alg)
    out.check(survey.report)
    out.record(survey.witness_report)
    out.expect(
        "two_derivation_witness",
        survey.witness_map is not None
        and survey.witness_report.sup_value > WITNESS_THRESHOLD,
        survey.witness_map.name if survey.witness_map is not None else "none found",
    )
