from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
import numpy.typing as npt
from mypy_extensions import TypedDict

FloatArray = npt.NDArray[np.float64]

NormKind = Union[Literal["abs"], Literal["frobenius"], Literal["weighted_l1"]]
ScheduleKind = Union[Literal["dyadic"], Literal["integer"]]
ReportFormat = Union[Literal["json"], Literal["csv"]]
Weight = Union[Literal["sum"], Literal["product"]]

# (i, j, k, value): e_i e_j contributes value * e_k
StructureEntry = List[Union[int, float]]


class AlgebraFile(TypedDict, total=False):
    name: str
    dim: int
    labels: List[str]
    structure: List[StructureEntry]
    norm_kind: NormKind
    weights: List[float]
    matrix_embedding: int


class ExperimentConfigFile(TypedDict, total=False):
    experiment: str
    domain: str
    codomain: str
    base: str
    family: str
    eps: float
    delta: float
    p: Optional[float]
    q: Optional[float]
    n: int
    seed: int
    amplitude: float
    quantization_step: float
    coefficients: List[float]
    schedule_kind: ScheduleKind
    schedule_s: int
    m_max: int
    tol: float
    integer_ratio: int
    lattice_radius: int
    random_count: int
    tuple_count: int
    weight: Weight
    oracle_n: int
    trials: int
    profile_m_max: int
    premise_radii: List[float]
    oracle_sizes: List[int]
    agreement_points: int
    output: str
    format: ReportFormat


class DefectReportJson(TypedDict):
    functional_name: str
    sup_value: float
    witness: List[List[float]]
    bound_value: Optional[float]
    satisfied: bool
    samples: int
    tolerance: float
    params: Dict[str, Any]


class IterateJson(TypedDict):
    m: int
    value: List[float]
    step_norm: Optional[float]


class TraceJson(TypedDict, total=False):
    point: List[float]
    schedule: Dict[str, Any]
    iterates: List[IterateJson]
    verdict: str
    limit: List[float]
    residual_bound: Optional[float]
    converged_at: int
    growth_witness: float
    reason: str
