"""Brute-force nearest additive map on an integer grid t*g, t in [-N, N].

Additive maps on the cyclic group generated by g are t -> t*x0, so the
nearest one in the sup norm minimizes max_t ||f(t g) - t x0||.
"""

import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from stability_lab.algebra import Element, NormedSpace, norm
from stability_lab.direct_method import (
    LIMIT_CHECK_FACTOR,
    LimitDiverged,
    Schedule,
    direct_limit,
)
from stability_lab.maps import MapSpec
from stability_lab.typedefs import FloatArray
from stability_lab.verifiers import DefectReport

MIN_SAMPLE_RADIUS = 8
GOLDEN_REL_TOL = 1e-13
POLISH_MIN_STEP = 1e-13

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2


class OracleError(Exception):
    pass


class InvalidSample(OracleError):
    pass


class SampledMap:
    def __init__(
        self,
        generator: Element,
        sample_points: Sequence[int],
        values: Sequence[Element],
    ):
        if not sample_points or len(sample_points) != len(values):
            raise InvalidSample("Sample points and values must be nonempty and aligned")
        radius = max(abs(t) for t in sample_points)
        if radius < MIN_SAMPLE_RADIUS:
            raise InvalidSample(
                f"Sample radius N = {radius} is below {MIN_SAMPLE_RADIUS}"
            )
        self.generator = generator
        self.sample_points = np.array(sample_points, dtype=float)
        self.values = np.stack([v.coords for v in values])
        self.codomain: NormedSpace = values[0].space
        self.N = radius

    def residuals(self, x: FloatArray) -> FloatArray:
        return np.asarray(self.values - self.sample_points[:, None] * x[None, :])


def sample_map(f: MapSpec, generator: Element, N: int) -> SampledMap:
    ts = list(range(-N, N + 1))
    return SampledMap(generator, ts, [f(generator.scaled(t)) for t in ts])


def minimax_distance(s: SampledMap, x: FloatArray) -> float:
    return float(np.max(s.codomain.norms(s.residuals(x))))


def golden_section(
    func: Callable[[float], float], lo: float, hi: float, tol: float
) -> float:
    """Minimizer of a unimodal ``func`` on [lo, hi], to within ``tol``."""
    lo, hi = min(lo, hi), max(lo, hi)
    width = hi - lo
    if width <= tol:
        return lo if func(lo) <= func(hi) else hi
    steps = int(math.ceil(math.log(tol / width) / math.log(INV_PHI)))
    c = lo + INV_PHI_SQUARE * width
    d = lo + INV_PHI * width
    fc, fd = func(c), func(d)
    for _ in range(steps):
        width *= INV_PHI
        if fc < fd:
            hi, d, fd = d, c, fc
            c = lo + INV_PHI_SQUARE * width
            fc = func(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * width
            fd = func(d)
    candidates = [lo, c, d, hi]
    return min(candidates, key=func)


def pattern_search(
    func: Callable[[FloatArray], float],
    x0: FloatArray,
    step: float,
    min_step: float,
) -> Tuple[FloatArray, float, float]:
    """Compass search from x0; returns (x, func(x), last unsuccessful poll step)."""
    x = np.array(x0, dtype=float)
    best = func(x)
    last_failed = step
    while step >= min_step:
        improved = False
        for i in range(len(x)):
            for sign in (1.0, -1.0):
                trial = x.copy()
                trial[i] += sign * step
                value = func(trial)
                if value < best:
                    x, best, improved = trial, value, True
        if not improved:
            last_failed = step
            step /= 2.0
    return x, best, last_failed


class OracleFit:
    def __init__(self, generator_image: Element, distance: float, grid_step: float):
        self.generator_image = generator_image
        self.distance = distance
        self.grid_step = grid_step


def fit_additive(s: SampledMap) -> OracleFit:
    nonzero = s.sample_points != 0
    slopes = s.values[nonzero] / s.sample_points[nonzero][:, None]
    lows, highs = slopes.min(axis=0), slopes.max(axis=0)
    x = np.zeros(s.values.shape[1])
    for i in range(len(x)):
        column = s.values[:, i]

        def coordinate_distance(v: float) -> float:
            return float(np.max(np.abs(column - s.sample_points * v)))

        scale = max(1.0, abs(lows[i]), abs(highs[i]))
        x[i] = golden_section(
            coordinate_distance, lows[i], highs[i], GOLDEN_REL_TOL * scale
        )

    scale = max(1.0, float(np.max(np.abs(x))))
    step = max(float(np.max(highs - lows)) / 8.0, 1e-6 * scale)
    x, distance, grid_step = pattern_search(
        lambda v: minimax_distance(s, v), x, step, POLISH_MIN_STEP * scale
    )
    return OracleFit(Element(s.codomain, x), distance, grid_step)


def nearest_additive_chebyshev(s: SampledMap) -> Tuple[Element, float]:
    fit = fit_additive(s)
    return fit.generator_image, fit.distance


def cross_validate(
    f: MapSpec,
    sched: Schedule,
    N: int,
    eps: Optional[float] = None,
    generator: Optional[Element] = None,
) -> DefectReport:
    """Distance between the oracle's x0 and the direct-method limit h(g).

    With a declared bounded budget eps the two agree within 2 eps / N.
    """
    g = generator if generator is not None else f.domain.basis()[0]
    trace = direct_limit(f, g, sched)
    if not trace.converged:
        raise LimitDiverged(g, trace)
    fit = fit_additive(sample_map(f, g, N))
    gap = norm(fit.generator_image - trace.limit)
    return DefectReport(
        "oracle_agreement",
        gap,
        [g],
        2.0 * eps / N if eps is not None else None,
        len(range(-N, N + 1)),
        LIMIT_CHECK_FACTOR * sched.tol,
        {
            "eps": eps,
            "N": N,
            "oracle_image": fit.generator_image.to_json(),
            "limit": trace.limit.to_json(),
            "distance": fit.distance,
        },
    )
