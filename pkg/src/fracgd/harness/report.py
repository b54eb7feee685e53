"""Condition-number reports for the closed-form quadratic operator.

Report specs are TOML::

    diag = [20.0, 2.0]        # or A = [[...]]
    convention = "half"
    alpha = 0.5
    beta = -0.4
    deltas = [0.0, 0.25, 0.5]
    x0 = [1.0, 1.0]           # optional; N(0, 1) with ``seed`` otherwise
    horizon = 2000
    tol = 1e-8
"""

from __future__ import annotations

import csv
import copy
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import FracGDError, InfeasibleError
from ..quadratic import QuadraticForm, closed_form_operator, run_quadratic_frac
from .config import ConfigError, tomllib
from .runner import fmt

REPORT_COLUMNS = (
    "Delta", "feasible", "kappa_A", "kappa_Aprime", "frac_faster", "predicted_rate",
    "iterations_frac", "iterations_gd", "max_observed_ratio", "bound_ok",
)

REPORT_BUILTINS = {
    "diag20-2": {"diag": [20.0, 2.0], "convention": "half", "alpha": 0.5, "beta": -0.4,
                 "deltas": [0.0, 0.25, 0.5], "x0": [1.0, -10.0]},
    "fig3": {"diag": [10.0, 1.0, 1.0, 1.0, 1.0], "convention": "plain", "alpha": 0.5, "beta": -0.4,
             "deltas": [0.0, 0.5, 0.99], "x0": [1.0, -10.0, 5.0, 8.0, -6.0]},
    "fig4": {"diag": [10.0, 1.0, 7.0, 9.0, 4.0], "convention": "plain", "alpha": 0.5, "beta": -0.4,
             "deltas": [0.0, 0.25, 0.5, 0.75, 0.99, 1.2], "x0": [1.0, -10.0, 5.0, 8.0, -6.0]},
}


@dataclass
class ReportRow:
    Delta: float
    feasible: bool
    kappa_A: float
    kappa_Aprime: float = math.nan
    predicted_rate: float = math.nan
    iterations_frac: Optional[int] = None
    iterations_gd: Optional[int] = None
    max_observed_ratio: float = math.nan
    bound_ok: Optional[bool] = None

    @property
    def frac_faster(self) -> Optional[bool]:
        return None if not self.feasible else self.kappa_Aprime < self.kappa_A

    def row(self) -> list[str]:
        b = lambda v: "" if v is None else str(v).lower()  # noqa: E731
        i = lambda v: "" if v is None else str(v)  # noqa: E731
        return [fmt(self.Delta), b(self.feasible), fmt(self.kappa_A), fmt(self.kappa_Aprime),
                b(self.frac_faster), fmt(self.predicted_rate), i(self.iterations_frac),
                i(self.iterations_gd), fmt(self.max_observed_ratio), b(self.bound_ok)]


@dataclass
class QuadraticReport:
    rows: list[ReportRow]

    @property
    def passed(self) -> bool:
        return all(r.bound_ok is not False for r in self.rows)

    def write(self, path: Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(REPORT_COLUMNS)
            for r in self.rows:
                w.writerow(r.row())


def load_report_spec(source: str) -> dict:
    if source in REPORT_BUILTINS:
        return copy.deepcopy(REPORT_BUILTINS[source])
    path = Path(source)
    if not path.is_file():
        raise ConfigError(f"no such report spec or builtin: {source!r} (builtins: {sorted(REPORT_BUILTINS)})")
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def quadratic_report(spec: dict, tol: Optional[float] = None) -> QuadraticReport:
    known = {"A", "diag", "b", "convention", "alpha", "beta", "deltas", "x0", "horizon", "tol", "seed"}
    unknown = set(spec) - known
    if unknown:
        raise ConfigError(f"unknown report keys {sorted(unknown)}")
    if ("A" in spec) == ("diag" in spec):
        raise ConfigError("report spec needs exactly one of 'A' or 'diag'")
    try:
        A = np.diag(np.array(spec["diag"], dtype=float)) if "diag" in spec else np.array(spec["A"], dtype=float)
        Q = QuadraticForm(A, b=spec.get("b"), convention=spec.get("convention", "half"))
        alpha, beta = float(spec["alpha"]), float(spec["beta"])
        deltas = [float(d) for d in spec["deltas"]]
    except KeyError as exc:
        raise ConfigError(f"report spec is missing {exc.args[0]!r}") from None
    except (FracGDError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid report spec: {exc}") from None
    if not deltas:
        raise ConfigError("deltas must be non-empty")
    horizon = int(spec.get("horizon", 2000))
    tol = float(spec.get("tol", 1e-8)) if tol is None else tol
    if "x0" in spec:
        x0 = np.array(spec["x0"], dtype=float)
    else:
        x0 = np.random.default_rng(int(spec.get("seed", 0))).normal(size=Q.dim)
    if x0.shape != (Q.dim,):
        raise ConfigError(f"x0 must have {Q.dim} entries")

    # gradient descent with eta = 1/L is the Delta = 0 run
    gd = run_quadratic_frac(Q, alpha, beta, 0.0, horizon, x0, label="gd")
    gd_its = gd.trace.iterations_to(tol)
    rows = []
    for delta in deltas:
        try:
            closed_form_operator(Q, alpha, beta, delta, verify=0)
        except InfeasibleError:
            rows.append(ReportRow(delta, False, Q.kappa))
            continue
        run = run_quadratic_frac(Q, alpha, beta, delta, horizon, x0)
        rows.append(ReportRow(
            Delta=delta,
            feasible=True,
            kappa_A=Q.kappa,
            kappa_Aprime=run.operator.kappa,
            predicted_rate=run.bound,
            iterations_frac=run.trace.iterations_to(tol),
            iterations_gd=gd_its,
            max_observed_ratio=float(run.ratios.max()) if run.ratios.size else math.nan,
            bound_ok=run.bound_ok,
        ))
    return QuadraticReport(rows)
