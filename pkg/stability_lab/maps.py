"""Deterministic maps f = base_linear + perturbation and their defect functionals."""

import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from stability_lab.algebra import (
    Algebra,
    Element,
    EmptyChain,
    NormedSpace,
    acts_on,
    from_matrix,
    left_multiply,
    make_scalar_algebra,
    matrix_unit,
    norm,
    product_chain,
    right_multiply,
)
from stability_lab.typedefs import FloatArray
from stability_lab.util import rng_for

DEFAULT_QUANTIZATION_STEP = 2.0**-20


class MapError(Exception):
    pass


class DomainMismatch(MapError):
    pass


class InvalidEps(MapError):
    pass


class InvalidBudget(MapError):
    pass


class InvalidMapSpec(MapError):
    pass


class TupleTooShort(MapError):
    pass


def x_log_abs(x: float) -> float:
    """0 on [-1, 1], x ln|x| outside."""
    if abs(x) <= 1.0:
        return 0.0
    return float(x * np.log(abs(x)))


def _quantized_label(x: FloatArray, step: float) -> str:
    # Quantize relative to the binary exponent of the largest coordinate, so
    # that rescaled arguments 2^m a keep distinct hash cells.
    top = float(np.max(np.abs(x)))
    exponent = math.frexp(top)[1] if top > 0.0 else 0
    cells = np.rint(x / math.ldexp(step, exponent)).astype(np.int64)
    return f"{exponent}:{cells.tobytes().hex()}"


class Perturbation:
    name = "none"
    scale_equivariant = True

    def apply(self, f: "MapSpec", x: FloatArray) -> FloatArray:
        return np.zeros(f.codomain.dim)

    def check(self, domain: NormedSpace, codomain: NormedSpace) -> None:
        pass

    def params(self) -> Dict[str, Any]:
        return {}


class NoPerturbation(Perturbation):
    pass


NO_PERTURBATION = NoPerturbation()


class SineBump(Perturbation):
    name = "sine_bump"
    scale_equivariant = False

    def __init__(self, amplitude: float):
        self.amplitude = amplitude

    def apply(self, f: "MapSpec", x: FloatArray) -> FloatArray:
        return np.asarray(self.amplitude * np.sin(f.base_linear @ x))

    def params(self) -> Dict[str, Any]:
        return {"amplitude": self.amplitude}


class _SupportedNoise(Perturbation):
    scale_equivariant = False

    def __init__(
        self,
        eps: float,
        quantization_step: float,
        seed: int,
        support: Optional[Sequence[int]],
    ):
        if not math.isfinite(eps) or eps < 0:
            raise InvalidEps(f"Noise amplitude must be finite and >= 0, got {eps}")
        if quantization_step <= 0:
            raise InvalidMapSpec(
                f"Quantization step must be positive, got {quantization_step}"
            )
        self.eps = eps
        self.quantization_step = quantization_step
        self.seed = seed
        self.support = tuple(support) if support is not None else None

    def check(self, domain: NormedSpace, codomain: NormedSpace) -> None:
        if self.support is not None and (
            not self.support or max(self.support) >= codomain.dim
        ):
            raise InvalidMapSpec(
                f"Noise support {self.support} does not fit {codomain.space_id}"
            )

    def draw(self, f: "MapSpec", x: FloatArray, radius: float) -> FloatArray:
        """A vector of norm at most ``radius`` that depends only on the hash cell of x."""
        out = np.zeros(f.codomain.dim)
        if radius == 0.0:
            return out
        rng = rng_for(
            self.seed, self.name, _quantized_label(x, self.quantization_step)
        )
        support = (
            list(self.support) if self.support is not None else list(range(len(out)))
        )
        out[support] = rng.standard_normal(len(support))
        length = f.codomain.norm_of(out)
        if length == 0.0:
            return np.zeros(f.codomain.dim)
        return np.asarray(out * (radius * rng.random() / length))

    def params(self) -> Dict[str, Any]:
        return {
            "eps": self.eps,
            "quantization_step": self.quantization_step,
            "seed": self.seed,
            "support": list(self.support) if self.support is not None else None,
        }


class HashNoise(_SupportedNoise):
    """Bounded noise: ||nu(a)|| <= eps for every a."""

    name = "hash_noise"

    def __init__(
        self,
        eps: float,
        quantization_step: float = DEFAULT_QUANTIZATION_STEP,
        seed: int = 0,
        support: Optional[Sequence[int]] = None,
    ):
        super().__init__(eps, quantization_step, seed, support)

    def apply(self, f: "MapSpec", x: FloatArray) -> FloatArray:
        return self.draw(f, x, self.eps)


class PowerNoise(_SupportedNoise):
    """Rassias noise: ||nu(a)|| <= eps ||a||^p, and nu(0) = 0."""

    name = "power_noise"

    def __init__(
        self,
        eps: float,
        p: float,
        quantization_step: float = DEFAULT_QUANTIZATION_STEP,
        seed: int = 0,
        support: Optional[Sequence[int]] = None,
    ):
        if not math.isfinite(p) or p < 0:
            raise InvalidMapSpec(f"Power noise exponent must be >= 0, got {p}")
        super().__init__(eps, quantization_step, seed, support)
        self.p = p

    def apply(self, f: "MapSpec", x: FloatArray) -> FloatArray:
        size = f.domain.norm_of(x)
        if size == 0.0:
            return np.zeros(f.codomain.dim)
        return self.draw(f, x, self.eps * size**self.p)

    def params(self) -> Dict[str, Any]:
        return {**super().params(), "p": self.p}


class LogMap(Perturbation):
    """Places x ln|x| (0 on [-1, 1]) in one codomain coordinate of a scalar map."""

    name = "log_map"
    scale_equivariant = False

    def __init__(self, slot: int):
        self.slot = slot

    def check(self, domain: NormedSpace, codomain: NormedSpace) -> None:
        if domain.dim != 1:
            raise InvalidMapSpec("log_map needs a scalar domain")
        if not 0 <= self.slot < codomain.dim:
            raise InvalidMapSpec(f"Slot {self.slot} outside {codomain.space_id}")

    def apply(self, f: "MapSpec", x: FloatArray) -> FloatArray:
        out = np.zeros(f.codomain.dim)
        out[self.slot] = x_log_abs(float(x[0]))
        return out

    def params(self) -> Dict[str, Any]:
        return {"slot": self.slot}


class CustomPolynomial(Perturbation):
    """Sum of coefficient matrices applied to algebra powers a^d.

    A degree-0 term carries a constant codomain vector instead of a matrix.
    """

    name = "custom_polynomial"

    def __init__(self, terms: Sequence[Tuple[int, Any]]):
        self.terms = [(int(d), np.array(m, dtype=float)) for d, m in terms]
        self.scale_equivariant = all(d == 1 for d, _ in self.terms)

    def check(self, domain: NormedSpace, codomain: NormedSpace) -> None:
        for d, m in self.terms:
            if d < 0:
                raise InvalidMapSpec(f"Negative polynomial degree {d}")
            if d >= 2 and not isinstance(domain, Algebra):
                raise InvalidMapSpec("Powers need an algebra domain")
            expected = (codomain.dim,) if d == 0 else (codomain.dim, domain.dim)
            if m.shape != expected:
                raise InvalidMapSpec(
                    f"Degree {d} coefficient has shape {m.shape}, expected {expected}"
                )

    def apply(self, f: "MapSpec", x: FloatArray) -> FloatArray:
        out = np.zeros(f.codomain.dim)
        powers: Dict[int, FloatArray] = {1: x}
        for d, m in self.terms:
            if d == 0:
                out = out + m
                continue
            if d not in powers:
                assert isinstance(f.domain, Algebra)
                top = max(k for k in powers if k < d)
                value = powers[top]
                for k in range(top + 1, d + 1):
                    value = f.domain.products(value, x)
                    powers[k] = value
            out = out + m @ powers[d]
        return out

    def params(self) -> Dict[str, Any]:
        return {"terms": [[d, m.tolist()] for d, m in self.terms]}


class MapSpec:
    """f(a) = base_linear @ a + perturbation(a); a pure function of the coordinates."""

    def __init__(
        self,
        domain: NormedSpace,
        codomain: NormedSpace,
        base_linear: Any,
        perturbation: Perturbation = NO_PERTURBATION,
        homogeneous: bool = False,
        name: str = "f",
    ):
        base = np.array(base_linear, dtype=float)
        if base.shape != (codomain.dim, domain.dim):
            raise InvalidMapSpec(
                f"{name}: base_linear has shape {base.shape}, "
                f"expected {(codomain.dim, domain.dim)}"
            )
        if homogeneous and not perturbation.scale_equivariant:
            raise InvalidMapSpec(
                f"{name}: {perturbation.name} perturbation is not homogeneous"
            )
        perturbation.check(domain, codomain)
        base.setflags(write=False)
        self.domain = domain
        self.codomain = codomain
        self.base_linear = base
        self.perturbation = perturbation
        self.homogeneous = homogeneous
        self.name = name

    def values(self, x: Any) -> FloatArray:
        x = np.asarray(x, dtype=float)
        return np.asarray(self.base_linear @ x + self.perturbation.apply(self, x))

    def __call__(self, a: Element) -> Element:
        return evaluate(self, a)

    def with_perturbation(
        self, perturbation: Perturbation, name: Optional[str] = None
    ) -> "MapSpec":
        return MapSpec(
            self.domain,
            self.codomain,
            self.base_linear,
            perturbation,
            homogeneous=False,
            name=name or self.name,
        )

    def is_linear(self) -> bool:
        return isinstance(self.perturbation, NoPerturbation)

    def describe(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "domain": self.domain.space_id,
            "codomain": self.codomain.space_id,
            "perturbation": self.perturbation.name,
            "perturbation_params": self.perturbation.params(),
            "homogeneous": self.homogeneous,
        }


class DefectBudget:
    """Declared defects: eps, delta, exponents p and q (None when bounded), arity n."""

    def __init__(
        self,
        eps: float,
        delta: float = 0.0,
        p: Optional[float] = None,
        q: Optional[float] = None,
        n: int = 2,
    ):
        if n < 2:
            raise InvalidBudget(f"n must be >= 2, got {n}")
        for label, v in (("eps", eps), ("delta", delta)):
            if not math.isfinite(v) or v < 0:
                raise InvalidBudget(f"{label} must be finite and >= 0, got {v}")
        self.eps = eps
        self.delta = delta
        self.p = p
        self.q = q
        self.n = n

    def to_json(self) -> Dict[str, Any]:
        return {
            "eps": self.eps,
            "delta": self.delta,
            "p": self.p,
            "q": self.q,
            "n": self.n,
        }


def _check_domain(f: MapSpec, a: Element) -> None:
    if not f.domain.same_as(a.space):
        raise DomainMismatch(
            f"{a.space.space_id} element passed to {f.name} on {f.domain.space_id}"
        )


def evaluate(f: MapSpec, a: Element) -> Element:
    _check_domain(f, a)
    return Element(f.codomain, f.values(a.coords))


def cauchy_defect(f: MapSpec, a: Element, b: Element) -> float:
    """||f(a+b) - f(a) - f(b)||."""
    _check_domain(f, a)
    _check_domain(f, b)
    return norm(f(a + b) - (f(a) + f(b)))


def _check_tuple(f: MapSpec, elems: Sequence[Element]) -> None:
    if not elems:
        raise EmptyChain("Defect tuple is empty")
    if len(elems) < 2:
        raise TupleTooShort(f"Defect tuples need n >= 2 elements, got {len(elems)}")
    for a in elems:
        _check_domain(f, a)


def hom_defect(f: MapSpec, elems: Sequence[Element]) -> float:
    """||f(a_1 ... a_n) - f(a_1) ... f(a_n)||."""
    _check_tuple(f, elems)
    if not isinstance(f.codomain, Algebra):
        raise DomainMismatch(f"{f.name}: hom_defect needs an algebra codomain")
    return norm(f(product_chain(elems)) - product_chain([f(a) for a in elems]))


def leibniz_sum(values: Sequence[Element], elems: Sequence[Element]) -> Element:
    """sum_j (a_1 ... a_{j-1}) . values[j] . (a_{j+1} ... a_n)."""
    n = len(elems)
    total = values[0].space.zero()
    for j, term in enumerate(values):
        if j > 0:
            term = left_multiply(product_chain(elems[:j]), term)
        if j < n - 1:
            term = right_multiply(term, product_chain(elems[j + 1 :]))
        total = total + term
    return total


def der_defect(f: MapSpec, elems: Sequence[Element]) -> float:
    """||f(a_1 ... a_n) - sum_j (a_1 ... a_{j-1}) f(a_j) (a_{j+1} ... a_n)||."""
    _check_tuple(f, elems)
    if not acts_on(f.domain, f.codomain):
        raise DomainMismatch(
            f"{f.name}: {f.codomain.space_id} is not a bimodule over "
            f"{f.domain.space_id}"
        )
    return norm(f(product_chain(elems)) - leibniz_sum([f(a) for a in elems], elems))


def linear_map(
    domain: NormedSpace, codomain: NormedSpace, matrix: Any, name: str = "L"
) -> MapSpec:
    return MapSpec(domain, codomain, matrix, homogeneous=True, name=name)


def identity_map(space: NormedSpace) -> MapSpec:
    return linear_map(space, space, np.eye(space.dim), name="id")


def scalar_multiple_map(space: NormedSpace, c: float) -> MapSpec:
    return linear_map(space, space, c * np.eye(space.dim), name=f"{c:g}*id")


def corner_embedding(codomain: Algebra) -> MapSpec:
    """x -> x E_11, an exact n-ring homomorphism R -> codomain for every n."""
    if codomain.matrix_embedding is None:
        raise InvalidMapSpec(f"{codomain.space_id} has no matrix embedding")
    k = codomain.matrix_embedding
    column = from_matrix(codomain, matrix_unit(k, 0, 0)).coords
    return linear_map(
        make_scalar_algebra(), codomain, column.reshape(-1, 1), name="corner"
    )


def corner_complement(codomain: Algebra) -> List[int]:
    """Coordinates whose basis matrices annihilate E_11 from both sides."""
    if codomain.basis_matrices is None:
        raise InvalidMapSpec(f"{codomain.space_id} has no matrix embedding")
    return [
        j
        for j, b in enumerate(codomain.basis_matrices)
        if not b[0, :].any() and not b[:, 0].any()
    ]


def inner_derivation(domain: Algebra, x: Element) -> MapSpec:
    """a -> a.x - x.a, an exact n-ring derivation for every n."""
    if not acts_on(domain, x.space):
        raise DomainMismatch(
            f"{x.space.space_id} is not a bimodule over {domain.space_id}"
        )
    columns = [
        (left_multiply(e, x) - right_multiply(x, e)).coords for e in domain.basis()
    ]
    return linear_map(domain, x.space, np.stack(columns, axis=1), name="ad")


def log_map_slot(codomain: Algebra) -> int:
    """Coordinate index of the (2,1) matrix unit."""
    if codomain.basis_matrices is None or codomain.matrix_embedding is None:
        raise InvalidMapSpec(f"{codomain.space_id} has no matrix embedding")
    if codomain.matrix_embedding < 2:
        raise InvalidMapSpec("The (2,1) slot needs matrices of size >= 2")
    target = matrix_unit(codomain.matrix_embedding, 1, 0)
    for j, b in enumerate(codomain.basis_matrices):
        if np.array_equal(b, target):
            return j
    raise InvalidMapSpec(f"{codomain.space_id} has no (2,1) matrix unit in its basis")


def rassias_admissible_amplitude(eps: float, p: float) -> float:
    """Amplitude for which power noise keeps the Cauchy defect below eps(||a||^p+||b||^p)."""
    c_p = 1.0 if p <= 1 else 2.0 ** (p - 1)
    return eps / (c_p + 1.0)


def make_perturbed_hom(
    h0: MapSpec,
    eps: float,
    quantization_step: float = DEFAULT_QUANTIZATION_STEP,
    seed: int = 0,
    support: Optional[Sequence[int]] = None,
) -> MapSpec:
    """h0 + nu with ||nu(a)|| <= eps, nu a function of the hash cell of a."""
    if not math.isfinite(eps) or eps < 0:
        raise InvalidEps(f"eps must be finite and >= 0, got {eps}")
    if not h0.is_linear():
        raise InvalidMapSpec(f"{h0.name} must be linear to be perturbed")
    if eps == 0:
        return h0.with_perturbation(NO_PERTURBATION)
    return h0.with_perturbation(
        HashNoise(eps, quantization_step, seed, support),
        name=f"{h0.name}+hash_noise",
    )


def make_power_perturbed(
    h0: MapSpec,
    amplitude: float,
    p: float,
    quantization_step: float = DEFAULT_QUANTIZATION_STEP,
    seed: int = 0,
    support: Optional[Sequence[int]] = None,
) -> MapSpec:
    if not h0.is_linear():
        raise InvalidMapSpec(f"{h0.name} must be linear to be perturbed")
    return h0.with_perturbation(
        PowerNoise(amplitude, p, quantization_step, seed, support),
        name=f"{h0.name}+power_noise",
    )


def build_family(
    h0: MapSpec,
    family: str,
    amplitude: float,
    p: Optional[float] = None,
    quantization_step: float = DEFAULT_QUANTIZATION_STEP,
    seed: int = 0,
    support: Optional[Sequence[int]] = None,
    coefficients: Optional[Sequence[float]] = None,
) -> MapSpec:
    """Perturb the linear map h0 with a named family from the catalog."""
    match family:
        case "none":
            return h0
        case "sine_bump":
            return h0.with_perturbation(
                SineBump(amplitude), name=f"{h0.name}+sine_bump"
            )
        case "hash_noise":
            return make_perturbed_hom(h0, amplitude, quantization_step, seed, support)
        case "power_noise":
            if p is None:
                raise InvalidMapSpec("power_noise needs an exponent p")
            return make_power_perturbed(
                h0, amplitude, p, quantization_step, seed, support
            )
        case "log_map":
            if not isinstance(h0.codomain, Algebra):
                raise InvalidMapSpec("log_map needs a matrix codomain")
            return MapSpec(
                h0.domain,
                h0.codomain,
                np.zeros_like(h0.base_linear),
                LogMap(log_map_slot(h0.codomain)),
                name="x_log_abs",
            )
        case "custom_polynomial":
            if not coefficients:
                raise InvalidMapSpec("custom_polynomial needs coefficients")
            if h0.domain.dim != 1:
                raise InvalidMapSpec("custom_polynomial needs a scalar domain")
            terms: List[Tuple[int, Any]] = []
            for d, c in enumerate(coefficients):
                if c == 0:
                    continue
                terms.append(
                    (d, c * h0.base_linear[:, 0] if d == 0 else c * h0.base_linear)
                )
            return MapSpec(
                h0.domain,
                h0.codomain,
                np.zeros_like(h0.base_linear),
                CustomPolynomial(terms),
                name="polynomial",
            )
        case _:
            raise InvalidMapSpec(f"Unknown map family {family}")
