import pytest

from stability_lab.util import CONFIG_DIR, load_yaml_file
from stability_lab.validation import (
    ALGEBRA,
    EXPERIMENT,
    SchemaValidationError,
    check_conforms_to_schema,
)


@pytest.mark.parametrize(
    "path", sorted(CONFIG_DIR.glob("*.yaml")), ids=lambda p: p.stem
)
def test_builtin_configs_are_valid(path):
    check_conforms_to_schema(EXPERIMENT, load_yaml_file(str(path)), file=str(path))


def test_builtin_config_names_match_their_experiment():
    for path in CONFIG_DIR.glob("*.yaml"):
        assert load_yaml_file(str(path))["experiment"] == path.stem


def test_valid_algebra_file():
    path = "test/example_data/dual_numbers.yaml"
    check_conforms_to_schema(ALGEBRA, load_yaml_file(path), file=path)


def test_algebra_file_without_norm_is_rejected():
    path = "test/example_data/missing_norm.yaml"
    with pytest.raises(SchemaValidationError) as e:
        check_conforms_to_schema(ALGEBRA, load_yaml_file(path), file=path)
    assert "norm_kind" in str(e.value)


@pytest.mark.parametrize(
    "document",
    [
        {},
        {"experiment": "hyers-hom", "epsilon": 0.5},
        {"experiment": "hyers-hom", "n": 1},
        {"experiment": "hyers-hom", "schedule_s": 0},
        {"experiment": "hyers-hom", "family": "gaussian"},
        {"experiment": "hyers-hom", "base": "rotation"},
        {"experiment": "hyers-hom", "format": "xml"},
    ],
)
def test_broken_experiment_configs(document):
    with pytest.raises(SchemaValidationError):
        check_conforms_to_schema(EXPERIMENT, document, file="inline")


def test_error_message_names_the_file_and_key():
    with pytest.raises(SchemaValidationError) as e:
        check_conforms_to_schema(EXPERIMENT, {"n": 1}, file="cfg.yaml", key="bad")
    assert "cfg.yaml#bad" in str(e.value)
