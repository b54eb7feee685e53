"""Experiment configuration files.

Experiments are TOML documents::

    name = "fig1"
    seed = 0
    horizon = 200
    tol = 1e-8              # optional; defaults per problem kind
    x0 = [1.0, -10.0]       # optional; drawn from N(0, 1) with ``seed`` otherwise

    [problem]
    kind = "quadratic"      # quadratic | rotated-quadratic | holder | cosine-well
    diag = [10.0, 1.0]      # or A = [[...], ...]
    convention = "plain"    # half: 1/2 x'Ax, plain: x'Ax

    [[methods]]
    method = "FracSC-separable"
    alpha = 0.5
    beta = -0.4
    step = "optimal"
    lambda = { kind = "power", lambda0 = -0.0675, q = 0.2 }

Keys of ``[[methods]]`` mirror :class:`fracgd.descent.DescentConfig`;
``horizon`` inside a method overrides the top-level one.
"""

from __future__ import annotations

import copy
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np

from ..caputo import QuadratureConfig
from ..catalog import cosine_well_problem, holder_problem, rotated_quadratic
from ..descent import DescentConfig, LambdaSchedule, ProblemOracle
from ..errors import FracGDError
from ..quadratic import QuadraticForm

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(FracGDError):
    """The experiment description is malformed."""


PROBLEM_KINDS = ("quadratic", "rotated-quadratic", "holder", "cosine-well")
_METHOD_KEYS = {
    "method", "alpha", "beta", "phi", "epsilon", "lambda", "s0", "lambda_sign",
    "m", "x_prev", "step", "eta", "horizon", "nodes", "label",
}

_FIG_METHODS = [
    {"method": "GD", "step": "optimal", "label": "GD-optimal"},
    {"method": "FracSC-separable", "alpha": 0.5, "beta": -0.4, "step": "optimal",
     "lambda": {"kind": "constant", "lambda0": -0.0675}, "label": "Frac-optimal"},
    {"method": "GD", "step": "theory", "label": "GD-theory"},
    {"method": "FracSC-separable", "alpha": 0.5, "beta": -0.4, "step": "theory",
     "lambda": {"kind": "constant", "lambda0": -0.0675}, "label": "Frac-theory"},
]

BUILTINS: dict[str, dict[str, Any]] = {
    "fig1": {
        "name": "fig1",
        "seed": 0,
        "horizon": 100,
        "x0": [1.0, -10.0],
        "problem": {"kind": "quadratic", "diag": [10.0, 1.0], "convention": "plain"},
        "methods": [
            {"method": "GD", "step": "optimal", "label": "GD-optimal"},
            {"method": "AT-CFGD", "alpha": 0.5, "beta": -0.4, "m": 1, "x_prev": [1.5, -10.5],
             "step": "optimal", "label": "AT-CFGD"},
            {"method": "FracSC-separable", "alpha": 0.5, "beta": -0.4, "step": "optimal",
             "lambda": {"kind": "power", "lambda0": -0.0675, "q": 0.2}, "label": "Frac-optimal"},
            {"method": "FracSC-separable", "alpha": 0.5, "beta": -0.4, "step": "theory",
             "lambda": {"kind": "power", "lambda0": -0.0675, "q": 0.2}, "label": "Frac-theory"},
        ],
    },
    "fig3": {
        "name": "fig3",
        "seed": 0,
        "horizon": 300,
        "x0": [1.0, -10.0, 5.0, 8.0, -6.0],
        "problem": {"kind": "quadratic", "diag": [10.0, 1.0, 1.0, 1.0, 1.0], "convention": "plain"},
        "methods": _FIG_METHODS,
    },
    "fig4": {
        "name": "fig4",
        "seed": 0,
        "horizon": 300,
        "x0": [1.0, -10.0, 5.0, 8.0, -6.0],
        "problem": {"kind": "quadratic", "diag": [10.0, 1.0, 7.0, 9.0, 4.0], "convention": "plain"},
        "methods": _FIG_METHODS,
    },
}


@dataclass
class ExperimentConfig:
    name: str
    problem: ProblemOracle
    problem_spec: dict
    methods: list[DescentConfig]
    x0: np.ndarray
    horizon: int
    seed: int = 0
    tol: float = 1e-8
    emit_plots: bool = False
    quadratic: Optional[QuadraticForm] = field(default=None, repr=False)


def _float_array(value, what: str) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what} must be numeric: {exc}") from None
    return arr


def build_problem(spec: dict) -> tuple[ProblemOracle, Optional[QuadraticForm]]:
    kind = spec.get("kind")
    if kind not in PROBLEM_KINDS:
        raise ConfigError(f"problem.kind must be one of {PROBLEM_KINDS}, got {kind!r}")
    try:
        if kind == "quadratic":
            if ("A" in spec) == ("diag" in spec):
                raise ConfigError("quadratic problem needs exactly one of 'A' or 'diag'")
            A = np.diag(_float_array(spec["diag"], "diag")) if "diag" in spec else _float_array(spec["A"], "A")
            b = _float_array(spec["b"], "b") if "b" in spec else None
            Q = QuadraticForm(A, b=b, convention=spec.get("convention", "half"))
            return Q.problem(spec.get("name", "quadratic")), Q
        if kind == "rotated-quadratic":
            eig = _float_array(spec["eigenvalues"], "eigenvalues")
            b = _float_array(spec["b"], "b") if "b" in spec else None
            Q = rotated_quadratic(eig, seed=int(spec.get("seed", 0)), b=b)
            return Q.problem("rotated-quadratic"), Q
        if kind == "holder":
            return holder_problem(int(spec["dim"]), float(spec["p"])), None
        return cosine_well_problem(int(spec["dim"]), float(spec.get("amplitude", 2.0))), None
    except KeyError as exc:
        raise ConfigError(f"problem of kind {kind!r} is missing key {exc.args[0]!r}") from None
    except FracGDError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid problem: {exc}") from None


def build_method(entry: dict, horizon: int) -> DescentConfig:
    unknown = set(entry) - _METHOD_KEYS
    if unknown:
        raise ConfigError(f"unknown method keys {sorted(unknown)}")
    if "method" not in entry:
        raise ConfigError("each [[methods]] entry needs a 'method'")
    kw = {k: v for k, v in entry.items() if k not in ("lambda", "nodes", "x_prev", "horizon")}
    lam = entry.get("lambda")
    if lam is not None:
        if isinstance(lam, (int, float)):
            lam = {"kind": "constant", "lambda0": lam}
        if not isinstance(lam, dict):
            raise ConfigError("lambda must be a number or a table")
        extra = set(lam) - {"kind", "lambda0", "q"}
        if extra:
            raise ConfigError(f"unknown lambda keys {sorted(extra)}")
        kw["lam"] = LambdaSchedule(lam.get("kind", "constant"), float(lam.get("lambda0", 0.0)), float(lam.get("q", 0.0)))
    if "x_prev" in entry:
        kw["x_prev"] = tuple(float(v) for v in entry["x_prev"])
    if "nodes" in entry:
        kw["quad"] = QuadratureConfig(int(entry["nodes"]))
    kw["horizon"] = int(entry.get("horizon", horizon))
    return DescentConfig(**kw)


def parse_experiment(doc: dict) -> ExperimentConfig:
    doc = copy.deepcopy(doc)
    known = {"name", "seed", "horizon", "tol", "x0", "problem", "methods", "emit_plots"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    if "problem" not in doc or not isinstance(doc["problem"], dict):
        raise ConfigError("missing [problem] table")
    methods = doc.get("methods")
    if not methods:
        raise ConfigError("no [[methods]] given")
    seed = int(doc.get("seed", 0))
    horizon = int(doc.get("horizon", 100))
    problem, Q = build_problem(doc["problem"])
    try:
        configs = [build_method(m, horizon) for m in methods]
    except FracGDError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid method: {exc}") from None
    except TypeError as exc:
        raise ConfigError(f"invalid method: {exc}") from None
    if "x0" in doc:
        x0 = _float_array(doc["x0"], "x0")
    else:
        x0 = np.random.default_rng(seed).normal(size=problem.dim)
    if x0.shape != (problem.dim,):
        raise ConfigError(f"x0 must have {problem.dim} entries")
    default_tol = 1e-8 if doc["problem"].get("kind") in ("quadratic", "rotated-quadratic") else 1e-6
    return ExperimentConfig(
        name=str(doc.get("name", "experiment")),
        problem=problem,
        problem_spec=doc["problem"],
        methods=configs,
        x0=x0,
        horizon=horizon,
        seed=seed,
        tol=float(doc.get("tol", default_tol)),
        emit_plots=bool(doc.get("emit_plots", False)),
        quadratic=Q,
    )


def load_document(source: str) -> dict:
    """A builtin name or a path to a TOML file."""
    if source in BUILTINS:
        return copy.deepcopy(BUILTINS[source])
    path = Path(source)
    if not path.is_file():
        raise ConfigError(f"no such config file or builtin: {source!r} (builtins: {sorted(BUILTINS)})")
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def load_experiment(source: str) -> ExperimentConfig:
    return parse_experiment(load_document(source))


def with_horizon(exp: ExperimentConfig, horizon: int) -> ExperimentConfig:
    """Copy of ``exp`` with every method's horizon replaced."""
    return replace(exp, horizon=horizon, methods=[replace(m, horizon=horizon) for m in exp.methods])
