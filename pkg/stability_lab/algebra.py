"""Finite-dimensional real normed algebras, their elements and bimodules.

Products are computed from a dense structure tensor ``c`` with
``e_i e_j = sum_k c[i, j, k] e_k``. Every algebra and bimodule checks its
defining identities when it is constructed, so any value that exists is
safe to use as a Banach algebra (or Banach bimodule) in the stability
experiments.
"""

from functools import reduce
from pathlib import Path
from typing import Any, List, Optional, Sequence

import numpy as np

from stability_lab.typedefs import AlgebraFile, FloatArray, NormKind
from stability_lab.util import load_yaml_file, rng_for
from stability_lab.validation import ALGEBRA, check_conforms_to_schema

ASSOCIATIVITY_TOL = 1e-12
CLOSURE_TOL = 1e-12
SUBMULTIPLICATIVITY_PAIRS = 10_000
POSITIVITY_SAMPLES = 100
BOUND_SLACK = 1e-12


class AlgebraError(Exception):
    pass


class AlgebraMismatch(AlgebraError):
    pass


class EmptyChain(AlgebraError):
    pass


class NonFinite(AlgebraError):
    pass


class AlgebraConstructionError(AlgebraError):
    pass


def _frozen(a: Any) -> FloatArray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def _same_array(a: Optional[FloatArray], b: Optional[FloatArray]) -> bool:
    if a is None or b is None:
        return a is b
    return bool(np.array_equal(a, b))


class NormedSpace:
    """A finite-dimensional real vector space with one of the supported norms."""

    def __init__(
        self,
        space_id: str,
        dim: int,
        norm_kind: NormKind,
        weights: Optional[Sequence[float]] = None,
        gram: Optional[FloatArray] = None,
    ):
        if dim < 1:
            raise AlgebraConstructionError(f"{space_id}: dimension must be >= 1")
        if norm_kind == "abs" and dim != 1:
            raise AlgebraConstructionError(
                f"{space_id}: the abs norm needs dimension 1, got {dim}"
            )
        if norm_kind == "weighted_l1":
            if weights is None or len(weights) != dim:
                raise AlgebraConstructionError(
                    f"{space_id}: weighted_l1 needs {dim} weights"
                )
            if min(weights) <= 0:
                raise AlgebraConstructionError(
                    f"{space_id}: weighted_l1 weights must be positive"
                )
        self.space_id = space_id
        self.dim = dim
        self.norm_kind: NormKind = norm_kind
        self.weights = _frozen(weights) if weights is not None else None
        if gram is not None and np.array_equal(gram, np.eye(dim)):
            gram = None
        self.gram = _frozen(gram) if gram is not None else None

    def norms(self, rows: Any) -> FloatArray:
        rows = np.asarray(rows, dtype=float)
        if self.norm_kind == "abs":
            return np.asarray(np.abs(rows[..., 0]))
        if self.norm_kind == "weighted_l1":
            assert self.weights is not None
            return np.asarray(np.abs(rows) @ self.weights)
        if self.gram is None:
            return np.asarray(np.linalg.norm(rows, axis=-1))
        q = np.einsum("...i,ij,...j->...", rows, self.gram, rows)
        return np.asarray(np.sqrt(np.maximum(q, 0.0)))

    def norm_of(self, coords: Any) -> float:
        return float(self.norms(coords))

    def element(self, coords: Any) -> "Element":
        return Element(self, coords)

    def zero(self) -> "Element":
        return Element(self, np.zeros(self.dim))

    def basis(self) -> List["Element"]:
        return [Element(self, row) for row in np.eye(self.dim)]

    def same_as(self, other: "NormedSpace") -> bool:
        """Same type, id, dimension, norm and multiplication data."""
        return other is self or (
            type(other) is type(self)
            and other.space_id == self.space_id
            and other.dim == self.dim
            and other.norm_kind == self.norm_kind
            and _same_array(other.weights, self.weights)
            and _same_array(other.gram, self.gram)
            and self._same_structure(other)
        )

    def _same_structure(self, other: "NormedSpace") -> bool:
        return True

    def describe(self) -> str:
        return f"{self.space_id} (dim {self.dim}, {self.norm_kind} norm)"

    def _check_norm_positivity(self, seed: int) -> None:
        if self.norm_of(np.zeros(self.dim)) != 0.0:
            raise AlgebraConstructionError(f"{self.space_id}: norm of zero is not 0")
        rng = rng_for(seed, "norm-positivity", self.space_id)
        sample = rng.standard_normal((POSITIVITY_SAMPLES, self.dim))
        if np.any(self.norms(sample) <= 0.0):
            raise AlgebraConstructionError(
                f"{self.space_id}: norm vanishes on a nonzero element"
            )


class Algebra(NormedSpace):
    """An associative algebra given by structure constants.

    When ``basis_matrices`` is supplied the algebra is realized inside
    k x k matrices and the Frobenius norm is taken from that embedding, which
    makes the norm submultiplicative without sampling.
    """

    def __init__(
        self,
        space_id: str,
        structure: Any,
        basis_labels: Sequence[str],
        norm_kind: NormKind,
        weights: Optional[Sequence[float]] = None,
        matrix_embedding: Optional[int] = None,
        basis_matrices: Optional[Any] = None,
        seed: int = 0,
    ):
        c = np.array(structure, dtype=float)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]):
            raise AlgebraConstructionError(
                f"{space_id}: structure tensor must be dim x dim x dim, got {c.shape}"
            )
        dim = c.shape[0]
        if len(basis_labels) != dim:
            raise AlgebraConstructionError(
                f"{space_id}: {len(basis_labels)} labels for dimension {dim}"
            )
        gram = None
        mats = None
        if basis_matrices is not None:
            mats = _frozen(basis_matrices)
            if mats.shape[0] != dim or mats.ndim != 3:
                raise AlgebraConstructionError(
                    f"{space_id}: expected {dim} square basis matrices"
                )
            gram = np.einsum("iab,jab->ij", mats, mats)
            matrix_embedding = mats.shape[1]
        super().__init__(space_id, dim, norm_kind, weights=weights, gram=gram)
        self.structure = _frozen(c)
        self.basis_labels = tuple(basis_labels)
        self.matrix_embedding = matrix_embedding
        self.basis_matrices = mats
        self._check_associativity()
        self._check_norm_positivity(seed)
        if mats is None:
            self._check_submultiplicativity(seed)

    def _same_structure(self, other: NormedSpace) -> bool:
        assert isinstance(other, Algebra)
        return bool(np.array_equal(self.structure, other.structure))

    def products(self, left: Any, right: Any) -> FloatArray:
        return np.asarray(
            np.einsum("...i,...j,ijk->...k", left, right, self.structure)
        )

    def associativity_residual(self) -> float:
        c = self.structure
        left = np.einsum("ijl,lkm->ijkm", c, c)
        right = np.einsum("jkl,ilm->ijkm", c, c)
        return float(np.max(np.abs(left - right)))

    def _check_associativity(self) -> None:
        c = self.structure
        exact = bool(np.all(c == np.round(c)))
        residual = self.associativity_residual()
        if residual > (0.0 if exact else ASSOCIATIVITY_TOL):
            raise AlgebraConstructionError(
                f"{self.space_id}: structure constants are not associative "
                f"(residual {residual:.3e})"
            )

    def _check_submultiplicativity(self, seed: int) -> None:
        rng = rng_for(seed, "submultiplicativity", self.space_id)
        a = rng.standard_normal((SUBMULTIPLICATIVITY_PAIRS, self.dim))
        b = rng.standard_normal((SUBMULTIPLICATIVITY_PAIRS, self.dim))
        lhs = self.norms(self.products(a, b))
        rhs = self.norms(a) * self.norms(b)
        bad = np.nonzero(lhs > rhs * (1 + BOUND_SLACK))[0]
        if len(bad) > 0:
            i = int(bad[0])
            raise AlgebraConstructionError(
                f"{self.space_id}: norm is not submultiplicative, "
                f"||ab|| = {lhs[i]:.6g} > ||a||*||b|| = {rhs[i]:.6g}"
            )


class Bimodule(NormedSpace):
    """A two-sided module over ``base``.

    ``left_action[i, x, y]`` is the y-coordinate of e_i . m_x and
    ``right_action[x, i, y]`` the y-coordinate of m_x . e_i.
    """

    def __init__(
        self,
        space_id: str,
        base: Algebra,
        left_action: Any,
        right_action: Any,
        norm_kind: NormKind,
        weights: Optional[Sequence[float]] = None,
        gram: Optional[FloatArray] = None,
        basis_labels: Optional[Sequence[str]] = None,
        seed: int = 0,
    ):
        left = np.array(left_action, dtype=float)
        right = np.array(right_action, dtype=float)
        if left.ndim != 3 or left.shape[0] != base.dim:
            raise AlgebraConstructionError(
                f"{space_id}: left action must have shape "
                f"({base.dim}, dim, dim), got {left.shape}"
            )
        dim = left.shape[1]
        if left.shape != (base.dim, dim, dim) or right.shape != (dim, base.dim, dim):
            raise AlgebraConstructionError(
                f"{space_id}: inconsistent action shapes {left.shape}, {right.shape}"
            )
        super().__init__(space_id, dim, norm_kind, weights=weights, gram=gram)
        self.base = base
        self.left_action = _frozen(left)
        self.right_action = _frozen(right)
        self.basis_labels = tuple(
            basis_labels if basis_labels is not None else [f"m{x}" for x in range(dim)]
        )
        self._check_module_identities()
        self._check_norm_positivity(seed)
        self._check_bounded_actions(seed)

    def _same_structure(self, other: NormedSpace) -> bool:
        assert isinstance(other, Bimodule)
        return (
            self.base.same_as(other.base)
            and bool(np.array_equal(self.left_action, other.left_action))
            and bool(np.array_equal(self.right_action, other.right_action))
        )

    def acted_left(self, a: Any, x: Any) -> FloatArray:
        return np.asarray(np.einsum("...i,...x,ixy->...y", a, x, self.left_action))

    def acted_right(self, x: Any, a: Any) -> FloatArray:
        return np.asarray(np.einsum("...x,...i,xiy->...y", x, a, self.right_action))

    def _check_module_identities(self) -> None:
        c = self.base.structure
        L = self.left_action
        R = self.right_action
        residuals = {
            "left action": np.einsum("ijl,lxy->ijxy", c, L)
            - np.einsum("jxz,izy->ijxy", L, L),
            "right action": np.einsum("ijl,xly->xijy", c, R)
            - np.einsum("xiz,zjy->xijy", R, R),
            "left/right compatibility": np.einsum("ixz,zjy->ixjy", L, R)
            - np.einsum("xjz,izy->ixjy", R, L),
        }
        for name, residual in residuals.items():
            worst = float(np.max(np.abs(residual)))
            if worst > ASSOCIATIVITY_TOL:
                raise AlgebraConstructionError(
                    f"{self.space_id}: {name} is not associative "
                    f"(residual {worst:.3e})"
                )

    def _check_bounded_actions(self, seed: int) -> None:
        rng = rng_for(seed, "bounded-actions", self.space_id)
        a = rng.standard_normal((SUBMULTIPLICATIVITY_PAIRS, self.base.dim))
        x = rng.standard_normal((SUBMULTIPLICATIVITY_PAIRS, self.dim))
        rhs = self.base.norms(a) * self.norms(x) * (1 + BOUND_SLACK)
        for name, lhs in (
            ("left", self.norms(self.acted_left(a, x))),
            ("right", self.norms(self.acted_right(x, a))),
        ):
            if np.any(lhs > rhs):
                raise AlgebraConstructionError(
                    f"{self.space_id}: {name} action is not bounded by the norms"
                )


class Element:
    """Coordinates of a vector relative to the basis of ``space``."""

    __slots__ = ("space", "coords")

    def __init__(self, space: NormedSpace, coords: Any):
        arr = np.array(coords, dtype=float).reshape(-1)
        if arr.shape != (space.dim,):
            raise AlgebraMismatch(
                f"Expected {space.dim} coordinates for {space.space_id}, "
                f"got {arr.shape[0]}"
            )
        if not np.all(np.isfinite(arr)):
            raise NonFinite(f"Non-finite coordinates {arr.tolist()} in {space.space_id}")
        arr.setflags(write=False)
        self.space = space
        self.coords = arr

    def _check_same(self, other: "Element") -> None:
        if not self.space.same_as(other.space):
            raise AlgebraMismatch(
                f"Cannot combine elements of {self.space.space_id} "
                f"and {other.space.space_id}"
            )

    def __add__(self, other: "Element") -> "Element":
        self._check_same(other)
        return Element(self.space, self.coords + other.coords)

    def __sub__(self, other: "Element") -> "Element":
        self._check_same(other)
        return Element(self.space, self.coords - other.coords)

    def __neg__(self) -> "Element":
        return Element(self.space, -self.coords)

    def scaled(self, t: float) -> "Element":
        return Element(self.space, t * self.coords)

    def to_json(self) -> List[float]:
        return [float(x) for x in self.coords]

    def __repr__(self) -> str:
        return f"Element({self.space.space_id}, {self.coords.tolist()})"


def _algebra_of(a: Element) -> Algebra:
    if not isinstance(a.space, Algebra):
        raise AlgebraMismatch(f"{a.space.space_id} is not an algebra")
    return a.space


def mul(a: Element, b: Element) -> Element:
    alg = _algebra_of(a)
    a._check_same(b)
    return Element(alg, alg.products(a.coords, b.coords))


def norm(a: Element) -> float:
    return a.space.norm_of(a.coords)


def product_chain(elems: Sequence[Element]) -> Element:
    """Left-to-right product a_1 a_2 ... a_n."""
    if not elems:
        raise EmptyChain("Cannot multiply an empty list of elements")
    _algebra_of(elems[0])
    return reduce(mul, elems[1:], elems[0])


def left_act(a: Element, x: Element) -> Element:
    module = x.space
    if not isinstance(module, Bimodule) or not module.base.same_as(a.space):
        raise AlgebraMismatch(
            f"{a.space.space_id} does not act on {x.space.space_id} from the left"
        )
    return Element(module, module.acted_left(a.coords, x.coords))


def right_act(x: Element, a: Element) -> Element:
    module = x.space
    if not isinstance(module, Bimodule) or not module.base.same_as(a.space):
        raise AlgebraMismatch(
            f"{a.space.space_id} does not act on {x.space.space_id} from the right"
        )
    return Element(module, module.acted_right(x.coords, a.coords))


def left_multiply(a: Element, x: Element) -> Element:
    """a . x, where x lives in the algebra of a or in a bimodule over it."""
    if isinstance(x.space, Bimodule):
        return left_act(a, x)
    return mul(a, x)


def right_multiply(x: Element, a: Element) -> Element:
    if isinstance(x.space, Bimodule):
        return right_act(x, a)
    return mul(x, a)


def acts_on(base: NormedSpace, target: NormedSpace) -> bool:
    """Whether ``target`` is ``base`` itself or a bimodule over it."""
    if isinstance(target, Bimodule):
        return target.base.same_as(base)
    return isinstance(base, Algebra) and base.same_as(target)


def make_scalar_algebra() -> Algebra:
    return Algebra("R", [[[1.0]]], ["1"], "abs")


def _matrix_label(k: int, i: int, j: int) -> str:
    if k < 10:
        return f"e{i + 1}{j + 1}"
    return f"e{i + 1}_{j + 1}"


def matrix_unit(k: int, i: int, j: int) -> FloatArray:
    e = np.zeros((k, k))
    e[i, j] = 1.0
    return e


def make_matrix_algebra(k: int) -> Algebra:
    """Full k x k real matrices, basis of matrix units in row-major order."""
    if k < 1:
        raise AlgebraConstructionError(f"Matrix size must be >= 1, got {k}")
    mats = [matrix_unit(k, i, j) for i in range(k) for j in range(k)]
    labels = [_matrix_label(k, i, j) for i in range(k) for j in range(k)]
    return from_basis_matrices(f"M{k}", mats, labels)


def _coordinates_in(mats: FloatArray, gram: FloatArray, flat_targets: Any) -> Any:
    flat_basis = mats.reshape(mats.shape[0], -1)
    coords = np.asarray(flat_targets) @ flat_basis.T
    if not np.array_equal(gram, np.eye(len(gram))):
        coords = np.linalg.solve(gram, coords.T).T
    return coords


def from_basis_matrices(
    space_id: str, matrices: Sequence[Any], labels: Sequence[str], seed: int = 0
) -> Algebra:
    """The subalgebra spanned by ``matrices``, with the Frobenius norm."""
    mats = np.array(matrices, dtype=float)
    d = mats.shape[0]
    gram = np.einsum("iab,jab->ij", mats, mats)
    if np.linalg.matrix_rank(gram) < d:
        raise AlgebraConstructionError(f"{space_id}: basis matrices are dependent")
    products = np.einsum("iab,jbc->ijac", mats, mats).reshape(d * d, -1)
    coords = _coordinates_in(mats, gram, products)
    rebuilt = coords @ mats.reshape(d, -1)
    if float(np.max(np.abs(rebuilt - products), initial=0.0)) > CLOSURE_TOL:
        raise AlgebraConstructionError(
            f"{space_id}: span of the basis matrices is not closed under products"
        )
    structure = coords.reshape(d, d, d)
    return Algebra(
        space_id, structure, labels, "frobenius", basis_matrices=mats, seed=seed
    )


def as_matrix(a: Element) -> FloatArray:
    alg = _algebra_of(a)
    if alg.basis_matrices is None:
        raise AlgebraMismatch(f"{alg.space_id} has no matrix embedding")
    return np.asarray(np.einsum("i,iab->ab", a.coords, alg.basis_matrices))


def from_matrix(alg: Algebra, m: Any) -> Element:
    if alg.basis_matrices is None:
        raise AlgebraMismatch(f"{alg.space_id} has no matrix embedding")
    mats = alg.basis_matrices
    target = np.asarray(m, dtype=float).reshape(-1)
    gram = np.einsum("iab,jab->ij", mats, mats)
    coords = _coordinates_in(mats, gram, target)
    if float(np.max(np.abs(coords @ mats.reshape(alg.dim, -1) - target))) > CLOSURE_TOL:
        raise AlgebraMismatch(f"Matrix does not lie in {alg.space_id}")
    return Element(alg, coords)


def regular_bimodule(alg: Algebra) -> Bimodule:
    """``alg`` as a bimodule over itself, acting by multiplication."""
    return Bimodule(
        f"{alg.space_id}-bimodule",
        alg,
        alg.structure,
        alg.structure,
        alg.norm_kind,
        weights=alg.weights,
        gram=alg.gram,
        basis_labels=alg.basis_labels,
    )


def load_algebra_file(path: str, seed: int = 0) -> Algebra:
    data: AlgebraFile = load_yaml_file(path)
    check_conforms_to_schema(ALGEBRA, data, file=path)
    dim = data["dim"]
    c = np.zeros((dim, dim, dim))
    for i, j, k, value in data["structure"]:
        if max(i, j, k) >= dim:
            raise AlgebraConstructionError(
                f"{path}: structure entry ({i}, {j}, {k}) out of range for dim {dim}"
            )
        c[int(i), int(j), int(k)] += float(value)
    weights = data.get("weights")
    return Algebra(
        data.get("name", Path(path).stem),
        c,
        list(data["labels"]),
        data["norm_kind"],
        weights=list(weights) if weights is not None else None,
        matrix_embedding=data.get("matrix_embedding"),
        seed=seed,
    )
