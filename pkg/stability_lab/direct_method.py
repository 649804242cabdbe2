"""Direct-method limits h(a) = lim lambda^{-s} f(lambda^s a) with convergence verdicts.

The dyadic schedule uses lambda = 2^m. The integer schedule walks the
multipliers ratio^j, a geometric subsequence of the integers, and records the
multiplier itself as m.
"""

import math
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from more_itertools import pairwise

from stability_lab.algebra import Element, acts_on, norm, product_chain
from stability_lab.grid import ball_points
from stability_lab.maps import (
    DefectBudget,
    DomainMismatch,
    MapSpec,
    evaluate,
    leibniz_sum,
)
from stability_lab.typedefs import ScheduleKind, TraceJson
from stability_lab.util import rng_for

DYADIC_SCALE_CAP = 2.0**60
INTEGER_SCALE_CAP = 1e15
DIVERGENCE_FACTOR = 1e6
DIVERGENCE_WINDOW = 8
CONVERGENCE_RUN = 3
STEP_GROWTH_SLACK = 1e-9
LIMIT_CHECK_FACTOR = 10.0


class DirectMethodError(Exception):
    pass


class InvalidSchedule(DirectMethodError):
    pass


class ScaleOverflow(DirectMethodError):
    pass


class UnsupportedExponent(DirectMethodError):
    pass


class NotAdditive(DirectMethodError):
    pass


class Schedule:
    def __init__(
        self,
        kind: ScheduleKind = "dyadic",
        s: int = 1,
        m_max: int = 60,
        tol: float = 1e-10,
        ratio: int = 3,
    ):
        if kind not in ("dyadic", "integer"):
            raise InvalidSchedule(f"Unknown schedule kind {kind}")
        if s not in (1, -1):
            raise InvalidSchedule(f"s must be +1 or -1, got {s}")
        if m_max < 1:
            raise InvalidSchedule(f"m_max must be >= 1, got {m_max}")
        if not tol > 0:
            raise InvalidSchedule(f"tol must be positive, got {tol}")
        if ratio < 2:
            raise InvalidSchedule(f"Integer schedule ratio must be >= 2, got {ratio}")
        self.kind: ScheduleKind = kind
        self.s = s
        self.m_max = m_max
        self.tol = tol
        self.ratio = ratio

    @property
    def cap(self) -> float:
        return DYADIC_SCALE_CAP if self.kind == "dyadic" else INTEGER_SCALE_CAP

    def label(self, j: int) -> int:
        """The m recorded for step j: the exponent (dyadic) or the multiplier (integer)."""
        return j if self.kind == "dyadic" else self.ratio**j

    def multiplier(self, m: int) -> float:
        return 2.0**m if self.kind == "dyadic" else float(m)

    def scale(self, j: int) -> float:
        lam = self.multiplier(self.label(j))
        if lam > self.cap:
            raise ScaleOverflow(
                f"{self.kind} schedule scale {lam:.3e} at step {j} exceeds {self.cap:.0e}"
            )
        return lam

    def max_steps(self) -> int:
        if self.kind == "dyadic":
            return int(math.log2(self.cap))
        return int(math.floor(math.log(self.cap) / math.log(self.ratio) + 1e-12))

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "s": self.s,
            "m_max": self.m_max,
            "tol": self.tol,
            "ratio": self.ratio,
        }


def alternate_schedule(sched: Schedule) -> Schedule:
    """The other schedule kind, run as far as its scale cap allows."""
    kind: ScheduleKind = "integer" if sched.kind == "dyadic" else "dyadic"
    other = Schedule(kind, sched.s, 1, sched.tol, sched.ratio)
    other.m_max = other.max_steps()
    return other


def schedule_sign(p: float) -> int:
    """(1 - p) / |1 - p|."""
    return 1 if p < 1 else -1


def validate_exponent(p: float, s: Optional[int] = None) -> None:
    if p == 1:
        raise UnsupportedExponent(
            "Unsupported exponent p = 1: the stability estimate needs p != 1"
        )
    if p < 0:
        raise UnsupportedExponent(f"Unsupported exponent p = {p}: p must be >= 0")
    if s is not None and s != schedule_sign(p):
        raise UnsupportedExponent(
            f"Exponent p = {p} needs schedule sign {schedule_sign(p)}, got {s}"
        )


def rassias_constant(eps: float, p: float) -> float:
    """2 eps / |2 - 2^p|."""
    validate_exponent(p)
    return 2.0 * eps / abs(2.0 - 2.0**p)


def hom_stability_constant(p: float) -> float:
    return rassias_constant(1.0, p)


def residual_bound(
    eps: float, p: Optional[float], sched: Schedule, m: int, a_norm: float
) -> float:
    """Upper bound for ||h_m(a) - h(a)||.

    eps / lambda in the bounded case and
    lambda^{s(p-1)} (2 eps / |2 - 2^p|) ||a||^p in the Rassias case.
    """
    lam = sched.multiplier(m)
    if p is None:
        if sched.s != 1:
            raise UnsupportedExponent("A bounded budget needs an expanding schedule")
        return eps / lam
    validate_exponent(p, sched.s)
    return float(lam ** (sched.s * (p - 1)) * rassias_constant(eps, p) * a_norm**p)


class Converged:
    kind = "converged"

    def __init__(
        self, limit: Element, residual_bound: Optional[float], converged_at: int
    ):
        self.limit = limit
        self.residual_bound = residual_bound
        self.converged_at = converged_at

    def describe(self) -> str:
        return f"converged to {self.limit.to_json()} from m = {self.converged_at}"


class Diverged:
    kind = "diverged"

    def __init__(self, growth_witness: float, reason: str):
        self.growth_witness = growth_witness
        self.reason = reason

    def describe(self) -> str:
        return f"diverged ({self.reason}), ||h_m|| reached {self.growth_witness:.6g}"


class Inconclusive:
    kind = "inconclusive"

    def describe(self) -> str:
        return "inconclusive"


Verdict = Union[Converged, Diverged, Inconclusive]


class IterateRecord:
    def __init__(self, m: int, value: Element, step_norm: Optional[float]):
        self.m = m
        self.value = value
        self.step_norm = step_norm


class IterationTrace:
    def __init__(
        self,
        point: Element,
        schedule: Schedule,
        iterates: List[IterateRecord],
        verdict: Verdict,
    ):
        self.point = point
        self.schedule = schedule
        self.iterates = iterates
        self.verdict = verdict

    @property
    def converged(self) -> bool:
        return isinstance(self.verdict, Converged)

    @property
    def limit(self) -> Element:
        if not isinstance(self.verdict, Converged):
            raise LimitDiverged(self.point, self)
        return self.verdict.limit

    def to_json(self) -> TraceJson:
        out: TraceJson = {
            "point": self.point.to_json(),
            "schedule": self.schedule.to_json(),
            "iterates": [
                {"m": r.m, "value": r.value.to_json(), "step_norm": r.step_norm}
                for r in self.iterates
            ],
            "verdict": self.verdict.kind,
        }
        if isinstance(self.verdict, Converged):
            out["limit"] = self.verdict.limit.to_json()
            out["residual_bound"] = self.verdict.residual_bound
            out["converged_at"] = self.verdict.converged_at
        elif isinstance(self.verdict, Diverged):
            out["growth_witness"] = self.verdict.growth_witness
            out["reason"] = self.verdict.reason
        return out


class LimitDiverged(DirectMethodError):
    def __init__(self, point: Element, trace: IterationTrace):
        super().__init__(
            f"Direct-method limit at {point.to_json()} failed: "
            f"{trace.verdict.describe()}"
        )
        self.point = point
        self.trace = trace


def scaled_iterate(f: MapSpec, a: Element, sched: Schedule, j: int) -> Element:
    """h_j(a) = lambda^{-s} f(lambda^s a) with lambda the j-th schedule scale."""
    if f.homogeneous:
        return evaluate(f, a)
    lam = sched.scale(j)
    if sched.s == 1:
        return evaluate(f, a.scaled(lam)).scaled(1.0 / lam)
    return evaluate(f, a.scaled(1.0 / lam)).scaled(lam)


def _settled(steps: Sequence[float], tol: float) -> bool:
    return len(steps) >= CONVERGENCE_RUN and all(
        s <= tol for s in steps[-CONVERGENCE_RUN:]
    )


def _growing(norms: Sequence[float], steps: Sequence[float], tol: float) -> bool:
    if len(steps) < DIVERGENCE_WINDOW:
        return False
    recent_steps = steps[-DIVERGENCE_WINDOW:]
    if min(recent_steps) <= tol:
        return False
    norms_up = all(b > a for a, b in pairwise(norms[-(DIVERGENCE_WINDOW + 1) :]))
    steps_up = all(
        b >= a * (1.0 - STEP_GROWTH_SLACK) for a, b in pairwise(recent_steps)
    )
    return norms_up and steps_up


def direct_limit(
    f: MapSpec,
    a: Element,
    sched: Schedule,
    budget: Optional[DefectBudget] = None,
) -> IterationTrace:
    first = evaluate(f, a)
    a_norm = norm(a)
    if budget is not None:
        residual_bound(budget.eps, budget.p, sched, sched.label(0), a_norm)

    if f.homogeneous:
        records = [
            IterateRecord(sched.label(j), first, 0.0) for j in range(CONVERGENCE_RUN)
        ]
        records.append(IterateRecord(sched.label(CONVERGENCE_RUN), first, None))
        bound = 0.0 if budget is not None else None
        return IterationTrace(
            a, sched, records, Converged(first, bound, sched.label(0))
        )

    current = scaled_iterate(f, a, sched, 0)
    ceiling = DIVERGENCE_FACTOR * (1.0 + norm(first))
    records: List[IterateRecord] = []
    norms = [norm(current)]
    steps: List[float] = []
    verdict: Verdict = Inconclusive()
    for j in range(sched.m_max):
        following = scaled_iterate(f, a, sched, j + 1)
        step = norm(following - current)
        records.append(IterateRecord(sched.label(j), current, step))
        steps.append(step)
        norms.append(norm(following))
        current = following
        if norms[-1] > ceiling:
            verdict = Diverged(norms[-1], "magnitude")
            break
        if _settled(steps, sched.tol):
            bound = (
                residual_bound(budget.eps, budget.p, sched, sched.label(j + 1), a_norm)
                if budget is not None
                else None
            )
            if bound is None or bound <= sched.tol:
                verdict = Converged(
                    current, bound, sched.label(j + 1 - CONVERGENCE_RUN)
                )
                break
        if _growing(norms, steps, sched.tol):
            verdict = Diverged(norms[-1], "monotone growth")
            break
    records.append(IterateRecord(sched.label(len(records)), current, None))
    return IterationTrace(a, sched, records, verdict)


class LimitConstruction:
    def __init__(
        self,
        limit_map: MapSpec,
        probe_traces: List[IterationTrace],
        check_traces: List[IterationTrace],
        check_gap: float,
    ):
        self.limit_map = limit_map
        self.probe_traces = probe_traces
        self.check_traces = check_traces
        self.check_gap = check_gap


def construct_limit(
    f: MapSpec,
    sched: Schedule,
    probe_basis: Optional[Sequence[Element]] = None,
    budget: Optional[DefectBudget] = None,
    check_points: int = 16,
    seed: int = 0,
) -> LimitConstruction:
    probes = list(probe_basis) if probe_basis is not None else f.domain.basis()
    probe_traces = []
    for e in probes:
        trace = direct_limit(f, e, sched, budget)
        if not trace.converged:
            raise LimitDiverged(e, trace)
        probe_traces.append(trace)

    limits = np.stack([t.limit.coords for t in probe_traces], axis=1)
    probe_coords = np.stack([e.coords for e in probes], axis=1)
    if np.array_equal(probe_coords, np.eye(f.domain.dim)):
        matrix = limits
    else:
        if probe_coords.shape != (f.domain.dim, f.domain.dim):
            raise DirectMethodError("Probe basis must have one element per dimension")
        try:
            matrix = np.linalg.solve(probe_coords.T, limits.T).T
        except np.linalg.LinAlgError as e:
            raise DirectMethodError("Probe basis does not span the domain") from e
    limit_map = MapSpec(
        f.domain, f.codomain, matrix, homogeneous=True, name=f"lim {f.name}"
    )

    check_traces = []
    worst = 0.0
    rng = rng_for(seed, "limit-check", f.name)
    for x in ball_points(f.domain, check_points, rng):
        trace = direct_limit(f, x, sched, budget)
        if not trace.converged:
            raise LimitDiverged(x, trace)
        gap = norm(trace.limit - limit_map(x))
        worst = max(worst, gap)
        if gap > LIMIT_CHECK_FACTOR * sched.tol:
            raise NotAdditive(
                f"Limit at {x.to_json()} is {gap:.3e} away from the linear "
                f"extension of the probe limits"
            )
        check_traces.append(trace)
    return LimitConstruction(limit_map, probe_traces, check_traces, worst)


def build_limit_map(
    f: MapSpec,
    sched: Schedule,
    probe_basis: Optional[Sequence[Element]] = None,
    budget: Optional[DefectBudget] = None,
    check_points: int = 16,
    seed: int = 0,
) -> MapSpec:
    """Linear map whose values on the probe basis are the direct-method limits of f."""
    return construct_limit(
        f, sched, probe_basis, budget, check_points, seed
    ).limit_map


def iterate_cauchy_defect(
    f: MapSpec, a: Element, b: Element, sched: Schedule, j: int
) -> float:
    return norm(
        scaled_iterate(f, a + b, sched, j)
        - (scaled_iterate(f, a, sched, j) + scaled_iterate(f, b, sched, j))
    )


def scaled_derivation_defect(
    f: MapSpec, elems: Sequence[Element], sched: Schedule, j: int
) -> float:
    """Derivational residual of the j-th iterate, which tends to 0 along the schedule."""
    if not acts_on(f.domain, f.codomain):
        raise DomainMismatch(
            f"{f.codomain.space_id} is not a bimodule over {f.domain.space_id}"
        )
    lam = sched.scale(j) ** len(elems)
    chain = product_chain(elems)
    if sched.s == 1:
        head = evaluate(f, chain.scaled(lam)).scaled(1.0 / lam)
    else:
        head = evaluate(f, chain.scaled(1.0 / lam)).scaled(lam)
    values = [scaled_iterate(f, a, sched, j) for a in elems]
    return norm(head - leibniz_sum(values, elems))
