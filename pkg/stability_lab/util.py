import hashlib
import json
from pathlib import Path
from typing import Any, List, Mapping

import numpy as np
from ruamel.yaml import YAML
from termcolor import colored

PACKAGE_DIR = Path(__file__).parent
SCHEMA_FILE = PACKAGE_DIR / "schema.yaml"
CONFIG_DIR = PACKAGE_DIR / "configs"
EXPERIMENTS_DIR = PACKAGE_DIR / "experiments"

_yaml = YAML()


def info(s: str) -> None:
    print(s)


def err(s: str) -> None:
    print(colored(s, "red"))


def status(passed: bool) -> str:
    return colored("PASS", "green") if passed else colored("FAIL", "red")


def load_yaml_file(f_name: str) -> Any:
    with open(f_name) as f:
        return load_yaml_value(f)


def load_yaml_value(v: Any) -> Any:
    return _yaml.load(v)


def file_to_yaml_map(path: str) -> Mapping[str, Any]:
    v = load_yaml_file(path)
    assert isinstance(v, dict), "Expected YAML key-value mapping"
    return v


def to_plain(v: Any) -> Any:
    """Convert ruamel and numpy containers into plain JSON-compatible values."""
    if isinstance(v, Mapping):
        return {str(k): to_plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [to_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return [to_plain(x) for x in v.tolist()]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def dump_json_string(obj: Any) -> str:
    return json.dumps(to_plain(obj), indent=2, sort_keys=True) + "\n"


def stable_key(seed: int, *labels: str) -> int:
    """Process-independent 128-bit key for a (seed, labels...) stream."""
    text = ":".join([str(seed), *labels])
    return int.from_bytes(
        hashlib.blake2b(text.encode(), digest_size=16).digest(), "little"
    )


def rng_for(seed: int, *labels: str) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=stable_key(seed, *labels)))


def str_to_point(val: str) -> List[float]:
    v = load_yaml_value(val)
    if isinstance(v, (int, float)):
        return [float(v)]
    assert isinstance(v, list), "Expected a number or a YAML list of numbers"
    return [float(x) for x in v]
