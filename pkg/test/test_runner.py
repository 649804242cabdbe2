import json

import pytest

from stability_lab.config import UnknownExperiment, load_config
from stability_lab.direct_method import UnsupportedExponent
from stability_lab.experiments import CATALOG_ORDER, load_experiments, lookup_experiment
from stability_lab.runner import FAILED, PASSED, build_report, execute, run
from stability_lab.verifiers import CSV_COLUMNS

REPORT_KEYS = {
    "experiment",
    "theorem",
    "config_echo",
    "reports",
    "traces",
    "tables",
    "expectations",
    "verdict",
}


def test_catalog_lists_every_experiment_in_order():
    assert list(load_experiments()) == CATALOG_ORDER
    assert lookup_experiment("no-such-experiment") is None


def test_nilpotent_report(tmp_path):
    out = tmp_path / "nilpotent.json"
    cfg = load_config("nilpotent", overrides={"trials": 5})
    assert run(cfg, timestamp=False, out_path=str(out)) == 0

    report = json.loads(out.read_text())
    assert set(report) == REPORT_KEYS
    assert report["verdict"] == PASSED
    assert report["tables"]["power_ideal_dims"]["rows"] == [
        [1, 6, 6],
        [2, 3, 3],
        [3, 1, 1],
        [4, 0, 0],
    ]
    names = [r["functional_name"] for r in report["reports"]]
    assert names == ["four_derivation_defect", "two_derivation_witness"]
    assert all(e["passed"] for e in report["expectations"])


@pytest.mark.parametrize("name", list(load_experiments()))
def test_reports_are_reproducible(tmp_path, name):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for path in (first, second):
        run(load_config(name), timestamp=False, out_path=str(path))
    assert first.read_text() == second.read_text()


def test_timestamps_are_optional():
    cfg = load_config("nilpotent", overrides={"trials": 1})
    experiment = lookup_experiment("nilpotent")
    outcome = execute(experiment, cfg)
    assert "generated_at" in build_report(experiment, cfg, outcome)
    assert "generated_at" not in build_report(experiment, cfg, outcome, False)


def test_oracle_crosscheck_writes_csv(tmp_path):
    out = tmp_path / "oracle.csv"
    cfg = load_config("oracle-crosscheck", overrides={"oracle_n": 128})
    assert run(cfg, timestamp=False, out_path=str(out), fmt="csv") == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1].startswith("oracle_agreement,")


def test_csv_reports_carry_every_table(tmp_path):
    out = tmp_path / "luminet.csv"
    cfg = load_config("luminet")
    assert run(cfg, timestamp=False, out_path=str(out), fmt="csv") == 0
    sections = out.read_text().split("\n\n")
    assert sections[0].startswith(",".join(CSV_COLUMNS))
    tables = {s.splitlines()[0]: s.splitlines()[1:] for s in sections[1:]}
    assert "premise_constants" in tables
    profile = tables["divergence_profile"]
    assert profile[0] == "m,||h_m(1)||,m ln 2"
    assert len(profile) == 1 + 51
    assert profile[1] == "0,0.0,0.0"


def test_contracting_rassias_run_passes():
    cfg = load_config("test/example_data/rassias_contracting.yaml")
    assert run(cfg, timestamp=False) == 0


def test_failed_expectations_fail_the_run():
    cfg = load_config("oracle-crosscheck", overrides={"oracle_n": 128})
    experiment = lookup_experiment("oracle-crosscheck")
    outcome = execute(experiment, cfg)
    outcome.expect("forced", False)
    assert build_report(experiment, cfg, outcome, False)["verdict"] == FAILED


def test_critical_exponent_is_unsupported():
    cfg = load_config("test/example_data/critical_exponent.yaml")
    with pytest.raises(UnsupportedExponent):
        run(cfg)


def test_unknown_experiment():
    cfg = load_config("test/example_data/unknown_experiment.yaml")
    with pytest.raises(UnknownExperiment):
        run(cfg)


def test_hyers_run_stays_within_eps(tmp_path):
    out = tmp_path / "hyers.json"
    cfg = load_config("hyers-hom", overrides={"tuple_count": 64, "random_count": 32})
    assert run(cfg, timestamp=False, out_path=str(out)) == 0
    report = json.loads(out.read_text())
    reports = {r["functional_name"]: r for r in report["reports"]}
    assert reports["hyers_bound"]["sup_value"] <= 0.5
    assert reports["hyers_bound"]["satisfied"]
    assert reports["orthogonality"]["satisfied"]
    deadlines = [
        e for e in report["expectations"] if e["name"].startswith("converged_by_m_40")
    ]
    assert deadlines and all(e["passed"] for e in deadlines)
