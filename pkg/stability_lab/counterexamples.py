"""Executable counterexamples.

* The strictly upper-triangular 4 x 4 matrices: A^3 != 0 = A^4, so every
  linear self-map is a 4-ring derivation while 2-ring derivations are rare.
* The map x -> x ln|x| placed in the (2,1) slot of M3: it satisfies the
  homomorphism premises with p = 1, q = 2, yet the direct method diverges and
  no additive map stays within a linear envelope of it.
"""

import itertools
from typing import List, Optional, Sequence, Tuple

import numpy as np

from stability_lab.algebra import (
    Algebra,
    Element,
    from_basis_matrices,
    make_matrix_algebra,
    make_scalar_algebra,
    matrix_unit,
    norm,
    product_chain,
)
from stability_lab.direct_method import (
    IterationTrace,
    Schedule,
    direct_limit,
    scaled_iterate,
)
from stability_lab.grid import Grid, sample_tuples
from stability_lab.maps import MapSpec, build_family, der_defect, linear_map, x_log_abs
from stability_lab.oracle import fit_additive, sample_map
from stability_lab.typedefs import FloatArray
from stability_lab.util import rng_for
from stability_lab.verifiers import (
    IDENTITY_TOL,
    DefectReport,
    cauchy_ratio_report,
    hom_ratio_report,
    sup_report,
)

UT4_LABELS = ["e12", "e13", "e14", "e23", "e24", "e34"]
RANK_TOL = 1e-10
WITNESS_THRESHOLD = 0.1
PROFILE_M_LIMIT = 60
TUPLES_PER_TRIAL = 8


class CounterexampleError(Exception):
    pass


def build_nilpotent_algebra(seed: int = 0) -> Algebra:
    mats = [
        matrix_unit(4, int(label[1]) - 1, int(label[2]) - 1) for label in UT4_LABELS
    ]
    return from_basis_matrices("UT4", mats, UT4_LABELS, seed)


def _row_span(rows: FloatArray, dim: int) -> FloatArray:
    if rows.size == 0:
        return np.zeros((0, dim))
    _, singular, vt = np.linalg.svd(rows, full_matrices=False)
    return np.asarray(vt[: int(np.sum(singular > RANK_TOL))])


def power_ideal_dim(alg: Algebra, k: int) -> int:
    """dim span of all k-fold products of basis elements."""
    if k < 1:
        raise CounterexampleError(f"k must be >= 1, got {k}")
    basis = np.eye(alg.dim)
    span = basis
    for _ in range(k - 1):
        if len(span) == 0:
            break
        products = alg.products(span[:, None, :], basis[None, :, :])
        span = _row_span(products.reshape(-1, alg.dim), alg.dim)
    return len(span)


def power_ideal_dim_by_enumeration(alg: Algebra, k: int) -> int:
    if k < 1:
        raise CounterexampleError(f"k must be >= 1, got {k}")
    basis = alg.basis()
    rows = [
        product_chain([basis[i] for i in chain]).coords
        for chain in itertools.product(range(alg.dim), repeat=k)
    ]
    return int(np.linalg.matrix_rank(np.array(rows), tol=RANK_TOL))


class DerivationSurvey:
    def __init__(
        self,
        report: DefectReport,
        witness_map: Optional[MapSpec],
        witness_report: DefectReport,
    ):
        self.report = report
        self.witness_map = witness_map
        self.witness_report = witness_report


def _basis_supported_maps(alg: Algebra) -> List[Tuple[str, MapSpec]]:
    maps = []
    for source, target in itertools.product(range(alg.dim), repeat=2):
        matrix = np.zeros((alg.dim, alg.dim))
        matrix[target, source] = 1.0
        name = f"{alg.basis_labels[source]}->{alg.basis_labels[target]}"
        maps.append((name, linear_map(alg, alg, matrix, name=name)))
    return maps


def find_two_derivation_witness(alg: Algebra) -> Tuple[Optional[MapSpec], DefectReport]:
    """First basis-supported linear map with a basis pair of 2-derivation defect > 0.1."""
    pairs = [list(ab) for ab in itertools.product(alg.basis(), repeat=2)]
    for _, f in _basis_supported_maps(alg):
        report = sup_report(
            "two_derivation_witness",
            pairs,
            lambda t: der_defect(f, t),
            WITNESS_THRESHOLD,
            params={"n": 2, "map": f.name},
        )
        if not report.satisfied:
            return f, report
    return None, sup_report("two_derivation_witness", [], lambda t: 0.0, None)


def every_linear_is_4derivation(
    trials: int = 100, seed: int = 0, alg: Optional[Algebra] = None
) -> DerivationSurvey:
    """sup of the 4-derivation defect over random linear maps, plus a 2-derivation witness."""
    alg = alg if alg is not None else build_nilpotent_algebra(seed)
    rng = rng_for(seed, "nilpotent-trials", alg.space_id)
    best: Optional[DefectReport] = None
    samples = 0
    for trial in range(trials):
        f = linear_map(alg, alg, rng.standard_normal((alg.dim, alg.dim)), f"L{trial}")
        tuples = [
            [Element(alg, row) for row in rng.standard_normal((4, alg.dim))]
            for _ in range(TUPLES_PER_TRIAL)
        ]
        trial_report = sup_report(
            "four_derivation_defect", tuples, lambda t: der_defect(f, t), 0.0
        )
        samples += trial_report.samples
        if best is None or trial_report.sup_value > best.sup_value:
            best = trial_report
    report = DefectReport(
        "four_derivation_defect",
        best.sup_value if best is not None else 0.0,
        best.witness if best is not None else [],
        0.0,
        samples,
        IDENTITY_TOL,
        {"n": 4, "trials": trials},
    )
    witness_map, witness_report = find_two_derivation_witness(alg)
    return DerivationSurvey(report, witness_map, witness_report)


luminet_phi = x_log_abs


def build_luminet_map() -> MapSpec:
    """f: R -> M3 with x ln|x| (0 on [-1, 1]) in the (2,1) entry."""
    m3 = make_matrix_algebra(3)
    zero = linear_map(make_scalar_algebra(), m3, np.zeros((m3.dim, 1)), name="zero")
    return build_family(zero, "log_map", 0.0)


class DivergenceProfile:
    def __init__(self, rows: List[Tuple[int, float]], trace: IterationTrace):
        self.rows = rows
        self.trace = trace


def divergence_profile(
    m_max: int = 50, f: Optional[MapSpec] = None
) -> DivergenceProfile:
    """||h_m(1)|| along the dyadic iteration, with the direct-method verdict."""
    if not 1 <= m_max <= PROFILE_M_LIMIT:
        raise CounterexampleError(
            f"m_max must lie in 1..{PROFILE_M_LIMIT}, got {m_max}"
        )
    f = f if f is not None else build_luminet_map()
    sched = Schedule("dyadic", 1, m_max, 1e-10)
    one = f.domain.basis()[0]
    rows = [(m, norm(scaled_iterate(f, one, sched, m))) for m in range(m_max + 1)]
    return DivergenceProfile(rows, direct_limit(f, one, sched))


def premise_report(
    grid: Grid,
    n: int = 2,
    f: Optional[MapSpec] = None,
    tuple_count: int = 512,
    seed: int = 0,
) -> Tuple[DefectReport, DefectReport]:
    """Empirical premise constants: Cauchy ratio with p = 1 and hom ratio with q = 2."""
    f = f if f is not None else build_luminet_map()
    params = {"p": 1.0, "q": 2.0, "n": n, "grid": grid.description}
    return (
        cauchy_ratio_report(
            f, sample_tuples(grid, 2, tuple_count, seed), 1.0, None, "eps_hat", params
        ),
        hom_ratio_report(
            f, sample_tuples(grid, n, tuple_count, seed), 2.0, None, "delta_hat", params
        ),
    )


def candidate_gap_profile(
    grid: Grid, ms: Sequence[int], f: Optional[MapSpec] = None
) -> List[Tuple[int, float]]:
    """sup_a ||f(a) - a h_m(1)|| / |a| for each m; grows without bound for the log map."""
    f = f if f is not None else build_luminet_map()
    sched = Schedule("dyadic", 1, max(ms) if ms else 1, 1e-10)
    one = f.domain.basis()[0]
    rows = []
    for m in ms:
        candidate = scaled_iterate(f, one, sched, m)
        rows.append(
            (
                m,
                max(
                    norm(f(a) - candidate.scaled(float(a.coords[0]))) / norm(a)
                    for a in grid.nonzero()
                ),
            )
        )
    return rows


def oracle_growth(
    sizes: Sequence[int], f: Optional[MapSpec] = None
) -> List[Tuple[int, float]]:
    """Nearest-additive minimax distance on [-N, N] for each N."""
    f = f if f is not None else build_luminet_map()
    one = f.domain.basis()[0]
    return [(N, fit_additive(sample_map(f, one, N)).distance) for N in sizes]
