"""Flat YAML experiment configs and the algebras and maps they describe."""

import os
from copy import deepcopy
from typing import Any, Dict, List, Optional, Tuple, cast

import numpy as np

from stability_lab.algebra import (
    Algebra,
    Element,
    NormedSpace,
    load_algebra_file,
    make_matrix_algebra,
    make_scalar_algebra,
    regular_bimodule,
)
from stability_lab.counterexamples import build_luminet_map, build_nilpotent_algebra
from stability_lab.direct_method import Schedule, schedule_sign
from stability_lab.grid import Grid, default_grid, scaled_grid
from stability_lab.maps import (
    DEFAULT_QUANTIZATION_STEP,
    DefectBudget,
    MapSpec,
    build_family,
    corner_complement,
    corner_embedding,
    inner_derivation,
    linear_map,
    rassias_admissible_amplitude,
)
from stability_lab.typedefs import ExperimentConfigFile
from stability_lab.util import CONFIG_DIR, file_to_yaml_map, rng_for, to_plain
from stability_lab.validation import EXPERIMENT, check_conforms_to_schema

DEFAULTS: ExperimentConfigFile = {
    "domain": "real",
    "codomain": "matrix:2",
    "base": "corner",
    "family": "hash_noise",
    "eps": 0.5,
    "delta": 0.0,
    "p": None,
    "q": None,
    "n": 3,
    "seed": 0,
    "quantization_step": DEFAULT_QUANTIZATION_STEP,
    "coefficients": [],
    "schedule_kind": "dyadic",
    "schedule_s": 1,
    "m_max": 60,
    "tol": 1e-10,
    "integer_ratio": 3,
    "lattice_radius": 10,
    "random_count": 256,
    "tuple_count": 512,
    "weight": "sum",
    "oracle_n": 512,
    "trials": 100,
    "profile_m_max": 50,
    "premise_radii": [32.0, 1024.0],
    "oracle_sizes": [128, 512],
    "agreement_points": 32,
    "format": "json",
}


class ConfigError(Exception):
    pass


class UnknownExperiment(ConfigError):
    pass


class InvalidConfig(ConfigError):
    pass


def resolve_config_path(name_or_path: str) -> str:
    """A config file path, or the built-in config of a catalog experiment."""
    if os.path.isfile(name_or_path):
        return name_or_path
    builtin = CONFIG_DIR / f"{name_or_path}.yaml"
    if builtin.is_file():
        return str(builtin)
    raise UnknownExperiment(
        f"'{name_or_path}' is neither a config file nor a built-in experiment"
    )


class ExperimentConfig:
    def __init__(self, source: str, values: ExperimentConfigFile):
        given = to_plain(values)
        merged: Dict[str, Any] = {**deepcopy(DEFAULTS), **given}
        self.source = source
        self.given = set(given)
        self.values = merged
        self.experiment: str = merged["experiment"]
        self.seed: int = merged["seed"]
        self.n: int = merged["n"]
        self.eps: float = merged["eps"]
        self.delta: float = merged["delta"]
        self.p: Optional[float] = merged["p"]
        self.q: Optional[float] = merged["q"]
        self.amplitude: Optional[float] = merged.get("amplitude")
        self.tol: float = merged["tol"]
        self.output: Optional[str] = merged.get("output")
        self.format: str = merged["format"]

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def echo(self) -> Dict[str, Any]:
        return dict(sorted(self.values.items()))

    def schedule(self, s: Optional[int] = None) -> Schedule:
        """The configured schedule; without an explicit sign it follows p."""
        if s is None:
            s = self.values["schedule_s"]
            if "schedule_s" not in self.given and self.p is not None:
                s = schedule_sign(self.p)
        return Schedule(
            self.values["schedule_kind"],
            s,
            self.values["m_max"],
            self.tol,
            self.values["integer_ratio"],
        )

    def noise_amplitude(self) -> float:
        """The explicit amplitude, else eps (bounded) or the admissible Rassias amplitude."""
        if self.amplitude is not None:
            return self.amplitude
        if self.p is None:
            return self.eps
        return rassias_admissible_amplitude(self.eps, self.p)

    def budget(self) -> DefectBudget:
        return DefectBudget(self.eps, self.delta, self.p, self.q, self.n)

    def grid(self, space: NormedSpace, radius: Optional[float] = None) -> Grid:
        if radius is None:
            return default_grid(
                space,
                self.values["lattice_radius"],
                self.values["random_count"],
                self.seed,
            )
        return scaled_grid(
            space,
            radius,
            self.values["lattice_radius"],
            self.values["random_count"],
            self.seed,
        )


def load_config(
    name_or_path: str,
    seed: Optional[int] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    path = resolve_config_path(name_or_path)
    data = dict(file_to_yaml_map(path))
    if seed is not None:
        data["seed"] = seed
    data.update(overrides or {})
    check_conforms_to_schema(EXPERIMENT, data, file=path)
    return ExperimentConfig(path, cast(ExperimentConfigFile, data))


def build_space(
    spec: str, seed: int = 0, domain: Optional[NormedSpace] = None
) -> NormedSpace:
    """Resolve an algebra specifier: real, matrix:K, nilpotent-ut4, regular or a file."""
    match spec.split(":"):
        case ["real"]:
            return make_scalar_algebra()
        case ["matrix", k] if k.isdigit():
            return make_matrix_algebra(int(k))
        case ["nilpotent-ut4"]:
            return build_nilpotent_algebra(seed)
        case ["regular"]:
            if not isinstance(domain, Algebra):
                raise InvalidConfig("'regular' codomain needs an algebra domain")
            return regular_bimodule(domain)
        case _:
            if os.path.isfile(spec):
                return load_algebra_file(spec, seed)
            raise InvalidConfig(f"Unknown algebra specifier '{spec}'")


def _square_base(
    domain: NormedSpace, codomain: NormedSpace, c: float, name: str
) -> MapSpec:
    if domain.dim != codomain.dim:
        raise InvalidConfig(
            f"Base '{name}' needs domain and codomain of equal dimension, "
            f"got {domain.dim} and {codomain.dim}"
        )
    return linear_map(domain, codomain, c * np.eye(domain.dim), name=name)


def build_base(cfg: ExperimentConfig) -> MapSpec:
    """The exact linear map h0 the config perturbs."""
    base: str = cfg["base"]
    if base == "luminet":
        return build_luminet_map()
    domain = build_space(cfg["domain"], cfg.seed)
    codomain = build_space(cfg["codomain"], cfg.seed, domain)
    match base.split(":"):
        case ["identity"]:
            return _square_base(domain, codomain, 1.0, "id")
        case ["scalar", c]:
            return _square_base(domain, codomain, float(c), f"{float(c):g}*id")
        case ["zero"]:
            return linear_map(
                domain, codomain, np.zeros((codomain.dim, domain.dim)), name="zero"
            )
        case ["corner"]:
            if domain.dim != 1 or not isinstance(codomain, Algebra):
                raise InvalidConfig("Base 'corner' maps real into a matrix algebra")
            return corner_embedding(codomain)
        case ["inner"]:
            if not isinstance(domain, Algebra):
                raise InvalidConfig("Base 'inner' needs an algebra domain")
            rng = rng_for(cfg.seed, "inner-derivation", codomain.space_id)
            return inner_derivation(
                domain, Element(codomain, rng.standard_normal(codomain.dim))
            )
        case _:
            raise InvalidConfig(f"Unknown base map '{base}'")


def noise_support(h0: MapSpec) -> Optional[List[int]]:
    """Noise of a corner base stays in the block that annihilates E_11."""
    if h0.name == "corner" and isinstance(h0.codomain, Algebra):
        return corner_complement(h0.codomain)
    return None


def build_maps(cfg: ExperimentConfig, amplitude: float) -> Tuple[MapSpec, MapSpec]:
    """(h0, f): the exact base map and its perturbation by the configured family."""
    h0 = build_base(cfg)
    if not h0.is_linear():
        return h0, h0
    f = build_family(
        h0,
        cfg["family"],
        amplitude,
        cfg.p,
        cfg["quantization_step"],
        cfg.seed,
        noise_support(h0),
        cfg["coefficients"],
    )
    return h0, f
