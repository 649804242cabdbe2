import importlib
from typing import Any, Callable, Dict, List, Optional, Sequence

from tabulate import tabulate

from stability_lab.config import ExperimentConfig
from stability_lab.direct_method import IterationTrace
from stability_lab.util import EXPERIMENTS_DIR, info, status
from stability_lab.verifiers import DefectReport

CATALOG_ORDER = [
    "hyers-hom",
    "rassias-hom",
    "rassias-der-sum",
    "rassias-der-prod",
    "luminet",
    "nilpotent",
    "oracle-crosscheck",
]


class Expectation:
    def __init__(self, name: str, passed: bool, detail: str = ""):
        self.name = name
        self.passed = passed
        self.detail = detail

    def to_json(self) -> Dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


class Table:
    def __init__(self, headers: Sequence[str], rows: Sequence[Sequence[Any]]):
        self.headers = list(headers)
        self.rows = [list(r) for r in rows]

    def to_json(self) -> Dict[str, Any]:
        return {"headers": self.headers, "rows": self.rows}


class ExperimentOutcome:
    """Everything an experiment verified, in the order it was verified."""

    def __init__(self) -> None:
        self.reports: List[DefectReport] = []
        self.asserted: List[DefectReport] = []
        self.traces: List[IterationTrace] = []
        self.tables: Dict[str, Table] = {}
        self.expectations: List[Expectation] = []

    def check(self, report: DefectReport) -> DefectReport:
        self.reports.append(report)
        self.asserted.append(report)
        info(f"Check {report.functional_name} ... {status(report.satisfied)}")
        return report

    def record(self, report: DefectReport) -> DefectReport:
        """Keep a report without asserting it; its bound is informational."""
        self.reports.append(report)
        return report

    def expect(self, name: str, passed: bool, detail: str = "") -> bool:
        self.expectations.append(Expectation(name, passed, detail))
        info(f"Expectation {name} ... {status(passed)}")
        return passed

    def trace(self, trace: IterationTrace) -> IterationTrace:
        self.traces.append(trace)
        return trace

    def table(
        self, name: str, headers: Sequence[str], rows: Sequence[Sequence[Any]]
    ) -> Table:
        t = Table(headers, rows)
        self.tables[name] = t
        info(f"\n{name}:")
        info(tabulate(t.rows, headers=t.headers, floatfmt=".6g"))
        return t

    @property
    def passed(self) -> bool:
        return all(r.satisfied for r in self.asserted) and all(
            e.passed for e in self.expectations
        )


ExperimentFunction = Callable[[ExperimentConfig, ExperimentOutcome], None]


class Experiment:
    def __init__(
        self,
        name: str,
        theorem: str,
        description: str,
        function: ExperimentFunction,
        asserts_convergence: bool,
    ):
        self.name = name
        self.theorem = theorem
        self.description = description
        self.function = function
        self.asserts_convergence = asserts_convergence


experiments: Dict[str, Experiment] = {}


def experiment(
    name: str, theorem: str, description: str, asserts_convergence: bool = True
) -> Callable[[ExperimentFunction], ExperimentFunction]:
    def decorator(func: ExperimentFunction) -> ExperimentFunction:
        experiments[name] = Experiment(
            name, theorem, description, func, asserts_convergence
        )
        return func

    return decorator


def load_experiments() -> Dict[str, Experiment]:
    """Import every experiment module and return the catalog in its listing order."""
    for path in sorted(EXPERIMENTS_DIR.glob("*.py")):
        if path.stem != "__init__":
            importlib.import_module(f"stability_lab.experiments.{path.stem}")
    ordered = [n for n in CATALOG_ORDER if n in experiments]
    ordered += sorted(n for n in experiments if n not in CATALOG_ORDER)
    return {n: experiments[n] for n in ordered}


def lookup_experiment(name: str) -> Optional[Experiment]:
    return load_experiments().get(name)
