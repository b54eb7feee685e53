"""Run an experiment, write per-method traces and a summary table."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..descent import IterateTrace, run_descent
from .config import ExperimentConfig

TRACE_COLUMNS = ("t", "f", "grad_norm_2", "dist_sq_to_opt", "eta_t", "lambda_t", "rho_t")
SUMMARY_COLUMNS = (
    "method", "trace_file", "f_opt", "iterations_to_tol", "final_error", "mean_contraction",
    "contraction_ok", "sandwich_ok", "rate_ok", "bound_ok",
)
SANDWICH_TOL = 1e-6


def fmt(value) -> str:
    """Shortest round-trip text for a float; empty for NaN or None."""
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return ""
    return repr(value)


def slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name).strip("_") or "method"


@dataclass
class RunSummary:
    method: str
    iterations_to_tol: Optional[int]
    final_error: float
    mean_contraction: float
    contraction_ok: bool
    sandwich_ok: bool
    rate_ok: Optional[bool]
    f_opt: Optional[float] = None
    trace_file: str = ""

    @property
    def bound_ok(self) -> bool:
        return self.contraction_ok and self.sandwich_ok and self.rate_ok is not False

    def row(self) -> list[str]:
        opt = lambda b: "" if b is None else str(b).lower()  # noqa: E731
        return [
            self.method,
            self.trace_file,
            fmt(self.f_opt),
            "" if self.iterations_to_tol is None else str(self.iterations_to_tol),
            fmt(self.final_error),
            fmt(self.mean_contraction),
            opt(self.contraction_ok),
            opt(self.sandwich_ok),
            opt(self.rate_ok),
            opt(self.bound_ok),
        ]


def rate_bound_ok(trace: IterateTrace, problem) -> Optional[bool]:
    """Check the trace's own rate certificate, if it carries one."""
    if trace.rate_constant is not None and trace.xbar is not None and trace.f_opt is not None:
        T = len(trace) - 1
        gap = float(problem.value(trace.xbar)) - trace.f_opt
        return gap <= trace.rate_constant / T + 1e-12 * (1.0 + abs(trace.f_opt))
    if trace.psi is not None and trace.min_grad_power and trace.f_opt is not None:
        T = len(trace) - 1
        limit = (trace.f[0] - trace.f_opt) / ((T + 1) * trace.psi)
        return trace.min_grad_power[-1] <= limit + 1e-12
    return None


def summarize(trace: IterateTrace, problem, tol: float) -> RunSummary:
    arr = trace.as_arrays()
    if trace.f_opt is not None:
        err = arr["f"] - trace.f_opt
        its = trace.iterations_to(tol)
    else:
        err = arr["grad_norm"]
        hits = np.flatnonzero(err <= tol)
        its = int(hits[0]) if hits.size else None
    d = arr["dist_sq"]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = d[1:] / d[:-1]
    ratios = ratios[np.isfinite(ratios) & (d[:-1] > 1e-300)]
    slack = np.array(trace.sandwich_slack)
    return RunSummary(
        method=trace.method,
        iterations_to_tol=its,
        final_error=float(err[-1]),
        mean_contraction=float(ratios.mean()) if ratios.size else math.nan,
        contraction_ok=trace.contraction_ok(),
        sandwich_ok=bool(slack.size == 0 or slack.min() >= -SANDWICH_TOL),
        rate_ok=rate_bound_ok(trace, problem),
        f_opt=trace.f_opt,
    )


def write_trace(trace: IterateTrace, path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for t in range(len(trace)):
            w.writerow([
                str(t), fmt(trace.f[t]), fmt(trace.grad_norm[t]), fmt(trace.dist_sq[t]),
                fmt(trace.eta[t]), fmt(trace.lam[t]), fmt(trace.rho[t]),
            ])


def write_summary(summaries: list[RunSummary], path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for s in summaries:
            w.writerow(s.row())


@dataclass
class ExperimentResult:
    traces: dict[str, IterateTrace]
    summaries: list[RunSummary]
    files: list[Path]

    @property
    def all_ok(self) -> bool:
        return all(s.bound_ok for s in self.summaries)


def run_experiment(exp: ExperimentConfig, out_dir: Optional[Path] = None, tol: Optional[float] = None,
                   emit_plots: Optional[bool] = None) -> ExperimentResult:
    """Run every method from ``exp.x0``; write files when ``out_dir`` is given."""
    tol = exp.tol if tol is None else tol
    traces: dict[str, IterateTrace] = {}
    summaries = []
    for cfg in exp.methods:
        name = cfg.name
        if name in traces:
            name = f"{name}-{len(traces)}"
        trace = run_descent(exp.problem, cfg, exp.x0)
        trace.method = name
        traces[name] = trace
        summaries.append(summarize(trace, exp.problem, tol))

    files: list[Path] = []
    if out_dir is not None:
        out = Path(out_dir) / slug(exp.name)
        out.mkdir(parents=True, exist_ok=True)
        for (name, trace), summary in zip(traces.items(), summaries):
            p = out / f"{slug(name)}.csv"
            write_trace(trace, p)
            summary.trace_file = p.name
            files.append(p)
        p = out / "summary.csv"
        write_summary(summaries, p)
        files.append(p)
        if exp.emit_plots if emit_plots is None else emit_plots:
            from .plots import plot_directory

            files.extend(plot_directory(out))
    return ExperimentResult(traces, summaries, files)
