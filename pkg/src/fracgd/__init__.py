"""Fractional gradient descent with Caputo derivatives.

Numerical Caputo derivatives, derived bound constants with executable
certificates, the fractional descent methods and their step schedules,
closed forms on quadratics, and an experiment harness.
"""

from .bounds import BoundConstants, SmoothnessProfile, k_constants
from .caputo import CaputoSpec, QuadratureConfig, ScalarOracle, caputo, relation_residual
from .descent import (
    DescentConfig,
    IterateTrace,
    LambdaSchedule,
    ProblemOracle,
    frac_grad_operator,
    frac_grad_operator_1d,
    frac_grad_operator_p,
    run_descent,
)
from .errors import (
    DivergenceError,
    FracGDError,
    InfeasibleError,
    ParameterError,
    TerminalLimitError,
    UnsupportedSettingError,
)
from .quadratic import QuadraticForm, closed_form_operator, condition_compare, run_quadratic_frac

__version__ = "0.1.0"

__all__ = [
    "BoundConstants",
    "CaputoSpec",
    "DescentConfig",
    "DivergenceError",
    "FracGDError",
    "InfeasibleError",
    "IterateTrace",
    "LambdaSchedule",
    "ParameterError",
    "ProblemOracle",
    "QuadraticForm",
    "QuadratureConfig",
    "ScalarOracle",
    "SmoothnessProfile",
    "TerminalLimitError",
    "UnsupportedSettingError",
    "caputo",
    "closed_form_operator",
    "condition_compare",
    "frac_grad_operator",
    "frac_grad_operator_1d",
    "frac_grad_operator_p",
    "k_constants",
    "relation_residual",
    "run_descent",
    "run_quadratic_frac",
]
