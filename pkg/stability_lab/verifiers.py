"""Grid-supremum checks of the stability bounds and product identities.

Every check scans its cases in grid order and keeps the first case that
attains the maximum, so a report's witness reproduces its sup value exactly
when the functional is evaluated again.
"""

from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from stability_lab.algebra import Element, norm, product_chain
from stability_lab.direct_method import (
    LimitDiverged,
    NotAdditive,
    Schedule,
    UnsupportedExponent,
    direct_limit,
    rassias_constant,
    validate_exponent,
)
from stability_lab.grid import (
    DEFAULT_TUPLE_COUNT,
    Grid,
    VerificationError,
    sample_tuples,
)
from stability_lab.maps import (
    DefectBudget,
    MapSpec,
    cauchy_defect,
    der_defect,
    hom_defect,
)
from stability_lab.typedefs import DefectReportJson, Weight

IDENTITY_TOL = 1e-12
ADDITIVITY_TOL = 1e-9
HYERS_TOL = 1e-9
RASSIAS_REL_TOL = 1e-6
WEIGHT_FLOOR = 1e-12
LIMIT_TOL_FACTOR = 10.0

CSV_COLUMNS = [
    "functional_name",
    "n",
    "p",
    "q",
    "eps",
    "delta",
    "sup",
    "bound",
    "satisfied",
    "witness",
]


class NotHomogeneous(VerificationError):
    pass


class DefectReport:
    def __init__(
        self,
        functional_name: str,
        sup_value: float,
        witness: Sequence[Element],
        bound_value: Optional[float],
        samples: int,
        tolerance: float = 0.0,
        params: Optional[Dict[str, Any]] = None,
    ):
        self.functional_name = functional_name
        self.sup_value = sup_value
        self.witness = list(witness)
        self.bound_value = bound_value
        self.samples = samples
        self.tolerance = tolerance
        self.params = dict(params or {})
        self.satisfied = bound_value is None or sup_value <= bound_value + tolerance

    def to_json(self) -> DefectReportJson:
        return {
            "functional_name": self.functional_name,
            "sup_value": self.sup_value,
            "witness": [w.to_json() for w in self.witness],
            "bound_value": self.bound_value,
            "satisfied": self.satisfied,
            "samples": self.samples,
            "tolerance": self.tolerance,
            "params": self.params,
        }

    def csv_row(self) -> List[Any]:
        witness = " ".join(
            "[" + ";".join(repr(c) for c in w.to_json()) + "]" for w in self.witness
        )
        return [
            self.functional_name,
            self.params.get("n"),
            self.params.get("p"),
            self.params.get("q"),
            self.params.get("eps"),
            self.params.get("delta"),
            self.sup_value,
            self.bound_value,
            self.satisfied,
            witness,
        ]

    def __repr__(self) -> str:
        return (
            f"DefectReport({self.functional_name}, sup={self.sup_value:.6g}, "
            f"bound={self.bound_value}, satisfied={self.satisfied})"
        )


Measure = Callable[[Sequence[Element]], Optional[float]]


def sup_report(
    functional_name: str,
    cases: Iterable[Sequence[Element]],
    measure: Measure,
    bound_value: Optional[float],
    tolerance: float = 0.0,
    params: Optional[Dict[str, Any]] = None,
) -> DefectReport:
    """Largest ``measure`` over ``cases``; cases measured as None are skipped."""
    best: Optional[float] = None
    witness: Sequence[Element] = []
    samples = 0
    for case in cases:
        value = measure(case)
        if value is None:
            continue
        samples += 1
        if best is None or value > best:
            best, witness = value, case
    return DefectReport(
        functional_name,
        best if best is not None else 0.0,
        witness,
        bound_value,
        samples,
        tolerance,
        params,
    )


def _weight(elems: Sequence[Element], exponent: Optional[float], kind: Weight) -> float:
    if exponent is None:
        return 1.0
    powers = [norm(a) ** exponent for a in elems]
    if kind == "sum":
        return float(sum(powers))
    out = 1.0
    for w in powers:
        out *= w
    return out


def _ratio(defect: float, weight: float) -> Optional[float]:
    if weight < WEIGHT_FLOOR:
        return None
    return defect / weight


def cauchy_ratio_report(
    f: MapSpec,
    pairs: Iterable[Sequence[Element]],
    p: Optional[float],
    bound: Optional[float],
    name: str = "cauchy_ratio",
    params: Optional[Dict[str, Any]] = None,
) -> DefectReport:
    """sup ||f(a+b) - f(a) - f(b)|| / (||a||^p + ||b||^p); p=None means weight 1."""
    return sup_report(
        name,
        pairs,
        lambda ab: _ratio(cauchy_defect(f, ab[0], ab[1]), _weight(ab, p, "sum")),
        bound,
        _hypothesis_tolerance(bound),
        params,
    )


def hom_ratio_report(
    f: MapSpec,
    tuples: Iterable[Sequence[Element]],
    q: Optional[float],
    bound: Optional[float],
    name: str = "hom_ratio",
    params: Optional[Dict[str, Any]] = None,
) -> DefectReport:
    """sup ||f(a_1...a_n) - f(a_1)...f(a_n)|| / prod ||a_i||^q."""
    return sup_report(
        name,
        tuples,
        lambda t: _ratio(hom_defect(f, t), _weight(t, q, "product")),
        bound,
        _hypothesis_tolerance(bound),
        params,
    )


def der_ratio_report(
    f: MapSpec,
    tuples: Iterable[Sequence[Element]],
    p: Optional[float],
    weight: Weight,
    bound: Optional[float],
    name: str = "der_ratio",
    params: Optional[Dict[str, Any]] = None,
) -> DefectReport:
    return sup_report(
        name,
        tuples,
        lambda t: _ratio(der_defect(f, t), _weight(t, p, weight)),
        bound,
        _hypothesis_tolerance(bound),
        params,
    )


def _hypothesis_tolerance(bound: Optional[float]) -> float:
    if bound is None:
        return 0.0
    return RASSIAS_REL_TOL * bound + IDENTITY_TOL


def _check_exponents(
    p: Optional[float], q: Optional[float], allow_critical: bool
) -> None:
    if allow_critical:
        return
    for e in (p, q):
        if e is not None:
            validate_exponent(e)
    if p is not None and q is not None and (p < 1) != (q < 1):
        raise UnsupportedExponent(
            f"Exponents p = {p} and q = {q} must lie on the same side of 1"
        )


def check_additive(
    h: MapSpec, grid: Grid, count: int = DEFAULT_TUPLE_COUNT, seed: int = 0
) -> None:
    """Raise NotAdditive unless h passes the Cauchy equation on sampled grid pairs."""
    report = sup_report(
        f"additivity of {h.name}",
        sample_tuples(grid, 2, count, seed),
        lambda ab: cauchy_defect(h, ab[0], ab[1]),
        0.0,
        ADDITIVITY_TOL,
    )
    if not report.satisfied:
        raise NotAdditive(
            f"{h.name} is not additive: Cauchy defect {report.sup_value:.3e} at "
            f"{[w.to_json() for w in report.witness]}"
        )


def check_hyers_bound(f: MapSpec, h: MapSpec, eps: float, grid: Grid) -> DefectReport:
    """sup ||f(a) - h(a)|| against eps, for an additive h."""
    check_additive(h, grid)
    return sup_report(
        "hyers_bound",
        ([a] for a in grid),
        lambda t: norm(f(t[0]) - h(t[0])),
        eps,
        HYERS_TOL,
        {"eps": eps},
    )


def check_rassias_bound(
    f: MapSpec,
    D: MapSpec,
    eps: float,
    p: float,
    grid: Grid,
    limit_tol: float = 0.0,
) -> DefectReport:
    """sup ||f(a) - D(a)|| / ||a||^p against 2 eps / |2 - 2^p|.

    A numerically computed D is trusted to limit_tol ||a||; that much of the
    distance is discounted before dividing by ||a||^p.
    """
    validate_exponent(p)
    check_additive(D, grid)
    bound = rassias_constant(eps, p)
    return sup_report(
        "rassias_bound",
        ([a] for a in grid),
        lambda t: _ratio(
            max(0.0, norm(f(t[0]) - D(t[0])) - limit_tol * norm(t[0])),
            norm(t[0]) ** p,
        ),
        bound,
        RASSIAS_REL_TOL * bound,
        {"eps": eps, "p": p, "limit_tol": limit_tol},
    )


def check_hom_hypotheses(
    f: MapSpec,
    eps: float,
    delta: float,
    p: Optional[float],
    q: Optional[float],
    n: int,
    grid: Grid,
    tuple_count: int = DEFAULT_TUPLE_COUNT,
    seed: int = 0,
    allow_critical: bool = False,
) -> Tuple[DefectReport, DefectReport]:
    """Cauchy and n-multiplicativity premises. None exponents mean constant weights."""
    if n < 2:
        raise VerificationError(f"n must be >= 2, got {n}")
    _check_exponents(p, q, allow_critical)
    params = {"eps": eps, "delta": delta, "p": p, "q": q, "n": n}
    pairs = sample_tuples(grid, 2, tuple_count, seed)
    tuples = sample_tuples(grid, n, tuple_count, seed)
    return (
        cauchy_ratio_report(f, pairs, p, eps, "cauchy_premise", params),
        hom_ratio_report(f, tuples, q, delta, "hom_premise", params),
    )


def check_der_hypotheses(
    f: MapSpec,
    eps: float,
    p: Optional[float],
    n: int,
    grid: Grid,
    weight: Weight = "sum",
    tuple_count: int = DEFAULT_TUPLE_COUNT,
    seed: int = 0,
    allow_critical: bool = False,
) -> Tuple[DefectReport, DefectReport]:
    """Cauchy premise and the derivational premise with sum or product weights."""
    if n < 2:
        raise VerificationError(f"n must be >= 2, got {n}")
    _check_exponents(p, None, allow_critical)
    params = {"eps": eps, "p": p, "n": n, "weight": weight}
    pairs = sample_tuples(grid, 2, tuple_count, seed)
    tuples = sample_tuples(grid, n, tuple_count, seed)
    return (
        cauchy_ratio_report(f, pairs, p, eps, "cauchy_premise", params),
        der_ratio_report(f, tuples, p, weight, eps, f"der_premise_{weight}", params),
    )


def _split_products(
    left: MapSpec, right: MapSpec, elems: Sequence[Element], k: int
) -> Element:
    """(prod_{i<=k} left(a_i)) (prod_{i>k} right(a_i))."""
    return product_chain([left(a) for a in elems[:k]] + [right(a) for a in elems[k:]])


def _k_values(n: int, k_range: Optional[Iterable[int]]) -> List[int]:
    return list(k_range) if k_range is not None else list(range(1, n))


def orthogonality_check(
    f: MapSpec,
    h: MapSpec,
    tuples: Sequence[Sequence[Element]],
    k_range: Optional[Iterable[int]] = None,
    tolerance: float = 1e-6,
) -> DefectReport:
    """Both products (prod h)(prod f - prod h) and (prod f - prod h)(prod h), split at k."""

    def measure(t: Sequence[Element]) -> float:
        worst = 0.0
        for k in _k_values(len(t), k_range):
            head_h = product_chain([h(a) for a in t[:k]])
            head_f = product_chain([f(a) for a in t[:k]])
            tail_h = product_chain([h(a) for a in t[k:]])
            tail_f = product_chain([f(a) for a in t[k:]])
            worst = max(
                worst,
                norm(product_chain([head_h, tail_f - tail_h])),
                norm(product_chain([head_f - head_h, tail_h])),
            )
        return worst

    n = len(tuples[0]) if tuples else 0
    return sup_report("orthogonality", tuples, measure, 0.0, tolerance, {"n": n})


def limit_product_identities(
    f: MapSpec,
    h: MapSpec,
    tuples: Sequence[Sequence[Element]],
    tolerance: float,
) -> List[DefectReport]:
    """Product identities linking f and its limit h along the homomorphism proof."""
    n = len(tuples[0]) if tuples else 0

    def first_factor(t: Sequence[Element]) -> float:
        return norm(h(product_chain(t)) - _split_products(h, f, t, 1))

    def leading_limits(t: Sequence[Element]) -> float:
        target = h(product_chain(t))
        return max(
            norm(_split_products(h, f, t, k) - target) for k in range(1, len(t))
        )

    def trailing_limits(t: Sequence[Element]) -> float:
        target = product_chain([h(a) for a in t])
        return max(
            norm(_split_products(f, h, t, k) - target) for k in range(1, len(t))
        )

    return [
        sup_report(name, tuples, measure, 0.0, tolerance, {"n": n})
        for name, measure in (
            ("limit_first_factor", first_factor),
            ("limit_leading_factors", leading_limits),
            ("limit_trailing_factors", trailing_limits),
        )
    ]


def limit_hom_defect(
    h: MapSpec, tuples: Sequence[Sequence[Element]], tolerance: float
) -> DefectReport:
    n = len(tuples[0]) if tuples else 0
    return sup_report(
        "limit_hom_defect", tuples, lambda t: hom_defect(h, t), 0.0, tolerance, {"n": n}
    )


def limit_der_defect(
    D: MapSpec, tuples: Sequence[Sequence[Element]], tolerance: float
) -> DefectReport:
    n = len(tuples[0]) if tuples else 0
    return sup_report(
        "limit_der_defect", tuples, lambda t: der_defect(D, t), 0.0, tolerance, {"n": n}
    )


def homogeneity_implies_equality(f: MapSpec, D: MapSpec, grid: Grid) -> DefectReport:
    if not f.homogeneous:
        raise NotHomogeneous(f"{f.name} is not flagged homogeneous")
    check_additive(f, grid)
    return sup_report(
        "homogeneous_equality",
        ([a] for a in grid),
        lambda t: norm(f(t[0]) - D(t[0])),
        0.0,
        IDENTITY_TOL,
    )


def check_schedule_agreement(
    f: MapSpec,
    sched_a: Schedule,
    sched_b: Schedule,
    points: Sequence[Element],
    budget: Optional[DefectBudget] = None,
) -> DefectReport:
    """Distance between the limits of two schedules; both must converge everywhere."""

    def measure(t: Sequence[Element]) -> float:
        limits = []
        for sched in (sched_a, sched_b):
            trace = direct_limit(f, t[0], sched, budget)
            if not trace.converged:
                raise LimitDiverged(t[0], trace)
            limits.append(trace.limit)
        return norm(limits[0] - limits[1])

    return sup_report(
        "schedule_agreement",
        ([a] for a in points),
        measure,
        0.0,
        LIMIT_TOL_FACTOR * max(sched_a.tol, sched_b.tol),
        {"schedules": [sched_a.kind, sched_b.kind]},
    )
