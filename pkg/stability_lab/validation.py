from typing import Any, Dict, Optional

import jsonschema
from jsonschema.exceptions import best_match

from stability_lab.util import SCHEMA_FILE, load_yaml_file

ALGEBRA = "algebra"
EXPERIMENT = "experiment"


class SchemaValidationError(Exception):
    def __init__(
        self,
        parent: Any,
        file: Optional[str] = None,
        key: Optional[str] = None,
        count: int = 1,
    ):
        self._parent = parent
        self._file = file
        self._key = key
        self._count = count

    def __str__(self) -> str:
        where = self._file if self._key is None else f"{self._file}#{self._key}"
        return f"""Validation error: {self._parent.message}
        in {self._parent.json_path}

        (Best match of {self._count} errors found while validating {where})
        """


# Memoize the JSON Schema definitions.
loaded_schemas: Dict[str, Any] = {}


def load_schema(kind: str) -> Any:
    if not loaded_schemas:
        schemas = load_yaml_file(str(SCHEMA_FILE))
        loaded_schemas[ALGEBRA] = schemas["algebra_schema"]
        loaded_schemas[EXPERIMENT] = schemas["experiment_schema"]
    if kind not in loaded_schemas:
        raise Exception(f"Unknown schema kind {kind}")
    return loaded_schemas[kind]


def check_conforms_to_schema(
    kind: str, document: Any, file: str, key: Optional[str] = None
) -> None:
    schema = load_schema(kind)
    errs = list(jsonschema.Draft7Validator(schema).iter_errors(document))  # type: ignore
    if errs:
        raise SchemaValidationError(
            best_match(errs), file=file, key=key, count=len(errs)
        )
