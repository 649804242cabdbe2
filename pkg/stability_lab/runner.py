"""Run a catalog experiment from its config and write the report."""

import csv
from datetime import datetime, timezone
from io import StringIO
from pathlib import Path
from typing import Any, Dict, Optional, cast

from tabulate import tabulate

from stability_lab.algebra import norm
from stability_lab.config import ExperimentConfig, UnknownExperiment
from stability_lab.direct_method import Diverged, LimitDiverged
from stability_lab.experiments import Experiment, ExperimentOutcome, lookup_experiment
from stability_lab.typedefs import ReportFormat
from stability_lab.util import dump_json_string, err, info, status, to_plain
from stability_lab.verifiers import CSV_COLUMNS, DefectReport

PASSED = "passed"
FAILED = "failed"


def diverged_report(e: LimitDiverged) -> DefectReport:
    """A failing report row standing in for a limit that does not exist."""
    verdict = e.trace.verdict
    growth = (
        verdict.growth_witness
        if isinstance(verdict, Diverged)
        else norm(e.trace.iterates[-1].value)
    )
    return DefectReport(
        "limit_diverged",
        growth,
        [e.point],
        0.0,
        len(e.trace.iterates),
        params={"verdict": verdict.kind},
    )


def execute(experiment: Experiment, cfg: ExperimentConfig) -> ExperimentOutcome:
    outcome = ExperimentOutcome()
    try:
        experiment.function(cfg, outcome)
    except LimitDiverged as e:
        if not experiment.asserts_convergence:
            raise
        err(f"Error: {e}")
        outcome.trace(e.trace)
        outcome.check(diverged_report(e))
    return outcome


def build_report(
    experiment: Experiment,
    cfg: ExperimentConfig,
    outcome: ExperimentOutcome,
    timestamp: bool = True,
) -> Dict[str, Any]:
    report: Dict[str, Any] = {
        "experiment": experiment.name,
        "theorem": experiment.theorem,
        "config_echo": cfg.echo(),
        "reports": [r.to_json() for r in outcome.reports],
        "traces": [t.to_json() for t in outcome.traces],
        "tables": {name: t.to_json() for name, t in outcome.tables.items()},
        "expectations": [e.to_json() for e in outcome.expectations],
        "verdict": PASSED if outcome.passed else FAILED,
    }
    if timestamp:
        report["generated_at"] = datetime.now(timezone.utc).isoformat()
    return report


def reports_to_csv(outcome: ExperimentOutcome) -> str:
    """Report rows first, then one section per table: a blank line, its name, its rows."""
    with StringIO() as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in outcome.reports:
            writer.writerow(r.csv_row())
        for name, table in outcome.tables.items():
            writer.writerow([])
            writer.writerow([name])
            writer.writerow(table.headers)
            writer.writerows(to_plain(table.rows))
        return stream.getvalue()


def render(
    report: Dict[str, Any], outcome: ExperimentOutcome, fmt: ReportFormat
) -> str:
    if fmt == "csv":
        return reports_to_csv(outcome)
    return dump_json_string(report)


def print_summary(experiment: Experiment, outcome: ExperimentOutcome) -> None:
    rows = [
        [r.functional_name, r.sup_value, r.bound_value, status(r.satisfied)]
        for r in outcome.reports
    ]
    info(f"\n{experiment.name} ({experiment.theorem}):")
    info(tabulate(rows, headers=["functional", "sup", "bound", "ok"], floatfmt=".6g"))
    info(f"Verdict: {status(outcome.passed)}")


def run(
    cfg: ExperimentConfig,
    timestamp: bool = True,
    out_path: Optional[str] = None,
    fmt: Optional[ReportFormat] = None,
) -> int:
    """Run the experiment the config names; 0 iff every asserted check holds."""
    experiment = lookup_experiment(cfg.experiment)
    if experiment is None:
        raise UnknownExperiment(f"Unknown experiment '{cfg.experiment}'")
    info(f"Running {experiment.name} from {cfg.source}")
    outcome = execute(experiment, cfg)
    report = build_report(experiment, cfg, outcome, timestamp)

    target = out_path or cfg.output
    if target is not None:
        path = Path(target)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(render(report, outcome, fmt or cast(ReportFormat, cfg.format)))
        info(f"Wrote report to {path}")
    print_summary(experiment, outcome)
    return 0 if outcome.passed else 1
