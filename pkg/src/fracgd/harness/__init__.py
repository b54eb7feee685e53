"""Experiment configs, runs, certificate sweeps, reports and the CLI."""

from .certify import CertReport, run_certify
from .cli import main
from .config import BUILTINS, ConfigError, ExperimentConfig, load_experiment, parse_experiment
from .plots import plot_directory
from .report import QuadraticReport, load_report_spec, quadratic_report
from .runner import RunSummary, run_experiment

__all__ = [
    "BUILTINS",
    "CertReport",
    "ConfigError",
    "ExperimentConfig",
    "QuadraticReport",
    "RunSummary",
    "load_experiment",
    "load_report_spec",
    "main",
    "parse_experiment",
    "plot_directory",
    "quadratic_report",
    "run_certify",
    "run_experiment",
]
