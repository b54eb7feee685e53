"""Fractional gradient descent operators and the method driver.

The operators are evaluated coordinate-wise. For coordinate ``j`` the
objective is restricted to the line ``y -> f(x + (y - x_j) e_j)`` and the
Caputo integrals along ``[c_j, x_j]`` are taken with the singular-weight rule
from :mod:`fracgd.caputo`. Coordinates with ``c_j == x_j`` use the ``c -> x``
continuation, which is the plain partial derivative.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .bounds import BoundConstants, SmoothnessProfile, k_constants
from .caputo import DEFAULT_QUAD, QuadratureConfig, ScalarOracle, kernel_mean, point_value
from .errors import DivergenceError, InfeasibleError, ParameterError, UnsupportedSettingError
from .schedules import (
    S_MIN,
    cvx_general_rate_constant,
    cvx_separable_rate_constant,
    eta_cvx_general,
    eta_cvx_separable,
    eta_sc,
    eta_sc_general,
    feasible_lambda_interval,
    lambda_from_s,
    nonconvex_schedule,
    nonconvex_terminal,
    s_sequence_next,
)

log = logging.getLogger(__name__)

METHODS = (
    "GD",
    "FracSC-separable",
    "FracSC-general",
    "FracCvx-separable",
    "FracCvx-general",
    "FracNonconvex",
    "AT-CFGD",
)
STEPS = ("theory", "optimal", "constant")

PartialFn = Callable[[int, np.ndarray, np.ndarray], np.ndarray]


@dataclass
class ProblemOracle:
    """A k-dimensional objective with coordinate-line access.

    ``partial(j, x, y)`` returns the j-th partial derivative at ``x`` with its
    j-th coordinate replaced by each entry of ``y``; ``partial2`` is the same
    for the second partial. When ``partial`` is omitted it falls back to
    looping over ``gradient``. ``hessian`` (constant, quadratics only)
    enables the exact line-search step.
    """

    dim: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    profile: SmoothnessProfile
    partial: Optional[PartialFn] = None
    partial2: Optional[PartialFn] = None
    x_opt: Optional[np.ndarray] = None
    f_opt: Optional[float] = None
    hessian: Optional[np.ndarray] = None
    kinks: Sequence[float] = ()
    separable: bool = False
    name: str = "problem"

    def _line_partial(self, j: int, x: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
        if self.partial is not None:
            return lambda y: self.partial(j, x, np.asarray(y, dtype=float))

        def fallback(y):
            y = np.asarray(y, dtype=float)
            out = np.empty(y.shape)
            z = x.copy()
            for i, yi in np.ndenumerate(y):
                z[j] = yi
                out[i] = self.gradient(z)[j]
            return out

        return fallback

    def coordinate_oracle(self, j: int, x) -> ScalarOracle:
        x = np.asarray(x, dtype=float)

        def value(y):
            y = np.asarray(y, dtype=float)
            out = np.empty(y.shape)
            z = x.copy()
            for i, yi in np.ndenumerate(y):
                z[j] = yi
                out[i] = self.value(z)
            return out

        d2 = None
        if self.partial2 is not None:
            d2 = lambda y: self.partial2(j, x, np.asarray(y, dtype=float))  # noqa: E731
        return ScalarOracle(value, self._line_partial(j, x), d2, kinks=tuple(self.kinks))


def _first_order_mean(g, c, x, alpha, quad, kinks) -> float:
    """``CD^alpha_c f(x) Gamma(2-alpha) |x-c|^alpha / (x-c)`` as a weighted mean of ``f'``."""
    if alpha == 1.0:
        return point_value(g, x)
    return kernel_mean(g, c, x, -alpha, quad, kinks)


def _check_alpha_open(alpha):
    if not (0.0 < alpha < 1.0):
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")


def frac_grad_operator_1d(
    oracle: ScalarOracle,
    alpha: float,
    beta: float,
    c: float,
    x: float,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> float:
    """Fractional descent direction for a single-variable function.

    Equals ``(CD^alpha f(x) + beta |x-c| CD^(1+alpha) f(x)) / CD^alpha (id)(x)``;
    both Caputo terms share the weight ``(1-u)^(-alpha)``, so the direction
    reduces to ``E[f'] + beta (x - c) E[f'']`` under that weight.
    """
    _check_alpha_open(alpha)
    c, x = float(c), float(x)
    if x == c:
        return point_value(oracle.deriv1, x)
    out = kernel_mean(oracle.deriv1, c, x, -alpha, quad, oracle.kinks)
    if beta != 0:
        out += beta * (x - c) * kernel_mean(oracle.derivative(2), c, x, -alpha, quad, oracle.kinks)
    return out


def frac_grad_operator(
    problem: ProblemOracle,
    alpha: float,
    beta: float,
    c,
    x,
    quad: QuadratureConfig = DEFAULT_QUAD,
    grad: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Coordinate-wise fractional descent direction in k dimensions."""
    _check_alpha_open(alpha)
    x = np.asarray(x, dtype=float)
    c = np.asarray(c, dtype=float)
    g = problem.gradient(x) if grad is None else grad
    out = np.array(g, dtype=float, copy=True)
    for j in np.flatnonzero(c != x):
        oracle = problem.coordinate_oracle(j, x)
        val = kernel_mean(oracle.deriv1, c[j], x[j], -alpha, quad, oracle.kinks)
        if beta != 0:
            if oracle.deriv2 is None:
                raise ParameterError("beta != 0 needs second partial derivatives")
            val += beta * (x[j] - c[j]) * kernel_mean(oracle.deriv2, c[j], x[j], -alpha, quad, oracle.kinks)
        out[j] = val
    return out


def frac_grad_operator_p(
    problem: ProblemOracle,
    alpha: float,
    p: float,
    c,
    x,
    quad: QuadratureConfig = DEFAULT_QUAD,
    grad: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Order-p variant ``CD f(x) Gamma(2-alpha) |x-c|^(alpha-p+1) / (x-c)``.

    ``alpha = 1`` is accepted as the integer-order closure.
    """
    if not (0.0 < alpha <= 1.0):
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha!r}")
    if not p > 0:
        raise ParameterError(f"p must be positive, got {p!r}")
    x = np.asarray(x, dtype=float)
    c = np.asarray(c, dtype=float)
    g = problem.gradient(x) if grad is None else grad
    out = np.array(g, dtype=float, copy=True) if p == 1 else np.zeros_like(x)
    for j in np.flatnonzero(c != x):
        line = problem._line_partial(j, x)
        mean = _first_order_mean(line, c[j], x[j], alpha, quad, problem.kinks)
        out[j] = mean * abs(x[j] - c[j]) ** (1.0 - p)
    return out


@dataclass(frozen=True)
class LambdaSchedule:
    """Terminal scale ``lam_t``: constant, ``lam0 / (t+1)^q`` or driven by ``s_t``."""

    kind: str = "constant"
    lambda0: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "power", "s-driven"):
            raise ParameterError(f"unknown lambda schedule {self.kind!r}")

    def at(self, t: int) -> float:
        if self.kind == "power":
            return self.lambda0 / (t + 1.0) ** self.q
        return self.lambda0


@dataclass(frozen=True)
class DescentConfig:
    method: str = "GD"
    alpha: float = 0.5
    beta: float = 0.0
    phi: float = 1.0
    epsilon: float = 1e-3
    lam: Optional[LambdaSchedule] = None
    s0: float = 5.0
    lambda_sign: str = "auto"
    m: int = 1
    x_prev: Optional[tuple[float, ...]] = None
    step: str = "theory"
    eta: Optional[float] = None
    horizon: int = 100
    quad: QuadratureConfig = DEFAULT_QUAD
    label: str = ""

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.lam is None:
            kind = "s-driven" if self.method == "FracCvx-general" else "constant"
            object.__setattr__(self, "lam", LambdaSchedule(kind))
        if self.lam.kind == "s-driven" and self.method != "FracCvx-general":
            raise ParameterError("an s-driven lambda schedule only applies to FracCvx-general")
        if self.method == "FracCvx-general" and self.lam.kind != "s-driven" and (
            self.lam.kind != "constant" or self.lam.lambda0 != 0
        ):
            raise ParameterError("FracCvx-general takes an s-driven lambda (or constant 0)")
        if self.step not in STEPS:
            raise ParameterError(f"unknown step rule {self.step!r}; choose from {STEPS}")
        if self.method != "GD":
            hi_ok = self.method == "FracNonconvex"
            if not (0.0 < self.alpha < 1.0 or (hi_ok and self.alpha == 1.0)):
                raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not (0.0 < self.phi < 2.0):
            raise ParameterError(f"phi must lie in (0, 2), got {self.phi!r}")
        if not self.epsilon > 0:
            raise ParameterError("epsilon must be positive")
        if self.horizon < 0:
            raise ParameterError("horizon must be non-negative")
        if self.step == "constant" and not (self.eta and self.eta > 0):
            raise ParameterError("step='constant' requires a positive eta")
        if self.method == "AT-CFGD" and self.step == "theory":
            raise ParameterError("AT-CFGD has no theoretical step; use 'optimal' or 'constant'")
        if self.method == "FracCvx-general" and not self.s0 > S_MIN:
            raise ParameterError(f"s0 must exceed sqrt(5)+2, got {self.s0!r}")
        if self.lambda_sign not in ("auto", "positive", "negative"):
            raise ParameterError(f"lambda_sign must be auto/positive/negative, got {self.lambda_sign!r}")
        if self.m < 1:
            raise ParameterError("AT-CFGD memory m must be >= 1")

    @property
    def name(self) -> str:
        return self.label or self.method


@dataclass
class IterateTrace:
    """Per-iteration record; row ``t`` describes ``x_t`` and the step leaving it."""

    method: str
    x: list = field(default_factory=list)
    f: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    eta: list = field(default_factory=list)
    lam: list = field(default_factory=list)
    rho: list = field(default_factory=list)
    dist_sq: list = field(default_factory=list)
    sandwich_slack: list = field(default_factory=list)
    s: list = field(default_factory=list)
    xbar: Optional[np.ndarray] = None
    rate_constant: Optional[float] = None
    psi: Optional[float] = None
    min_grad_power: list = field(default_factory=list)
    f_opt: Optional[float] = None

    def __len__(self):
        return len(self.f)

    def as_arrays(self) -> dict[str, np.ndarray]:
        return {
            "x": np.array(self.x),
            "f": np.array(self.f),
            "grad_norm": np.array(self.grad_norm),
            "eta": np.array(self.eta),
            "lam": np.array(self.lam),
            "rho": np.array(self.rho),
            "dist_sq": np.array(self.dist_sq),
        }

    def contraction_ok(self, atol: float = 1e-9) -> bool:
        """``dist_{t+1} <= rho_t dist_t + atol`` wherever ``rho_t`` is recorded."""
        d, r = np.array(self.dist_sq), np.array(self.rho)
        steps = ~np.isnan(r[:-1])
        return bool(np.all(d[1:][steps] <= r[:-1][steps] * d[:-1][steps] + atol))

    def iterations_to(self, tol: float) -> Optional[int]:
        """First ``t`` with ``f(x_t) - f* <= tol``."""
        if self.f_opt is None:
            return None
        gap = np.array(self.f) - self.f_opt
        hits = np.flatnonzero(gap <= tol)
        return int(hits[0]) if hits.size else None


def optimal_eta(hessian: np.ndarray, grad: np.ndarray, d: np.ndarray) -> float:
    """Exact minimiser of a quadratic along ``-d``; zero when ``d`` vanishes."""
    curv = float(d @ hessian @ d)
    if curv <= 0.0:
        return 0.0
    return float(grad @ d) / curv


def _dual_norm_power(g: np.ndarray, p: float) -> float:
    return float(np.sum(np.abs(g) ** (1.0 + 1.0 / p)))


def run_descent(problem: ProblemOracle, config: DescentConfig, x0) -> IterateTrace:
    """Run ``config.horizon`` steps of the configured method from ``x0``."""
    x = np.array(x0, dtype=float)
    if x.shape != (problem.dim,):
        raise ParameterError(f"x0 must have shape ({problem.dim},), got {x.shape}")
    method, T = config.method, config.horizon
    prof = problem.profile
    L, mu, p = prof.L, prof.mu, prof.p
    alpha, beta = config.alpha, config.beta
    quad = config.quad
    if config.step == "optimal" and problem.hessian is None:
        raise ParameterError("step='optimal' needs a quadratic problem (hessian)")
    if method not in ("GD", "FracNonconvex") and p != 1:
        raise UnsupportedSettingError(f"{method} is only analysed for p = 1")

    trace = IterateTrace(method=config.name, f_opt=problem.f_opt)
    has_opt = problem.x_opt is not None
    f0 = float(problem.value(x))
    guard = 1e6 * (1.0 + abs(f0))

    # constants for the sandwich: the strong-convexity ones for SC methods and
    # diagnostics, the mu = 0 ones for the convex methods
    sandwich: Optional[BoundConstants] = None
    consts: Optional[BoundConstants] = None
    if method != "GD" and p == 1 and alpha < 1:
        sandwich = k_constants(prof, alpha, beta)
        if method.startswith("FracCvx"):
            consts = k_constants(SmoothnessProfile(L, 0.0, 1.0), alpha, beta)
        else:
            consts = sandwich
    if method in ("FracSC-separable", "FracSC-general"):
        lo, hi = feasible_lambda_interval(consts, config.epsilon)
        log.debug("%s feasible lambda interval (%g, %g)", method, lo, hi)
    if method == "FracSC-general" and not mu > 0:
        raise UnsupportedSettingError("FracSC-general needs mu > 0")

    dist0_sq = float(np.sum((x - problem.x_opt) ** 2)) if has_opt else None
    cvx_zero = method == "FracCvx-general" and config.lam.kind == "constant"
    if method == "FracCvx-separable":
        lam_c = config.lam.at(0)
        if config.lam.kind != "constant":
            raise ParameterError("FracCvx-separable uses a constant lambda")
        if has_opt:
            trace.rate_constant = cvx_separable_rate_constant(consts, lam_c, L, dist0_sq)
    if method == "FracCvx-general" and has_opt and not cvx_zero:
        trace.rate_constant = cvx_general_rate_constant(config.s0, L, dist0_sq)
    if method == "FracCvx-general" and cvx_zero and has_opt:
        # s -> infinity limit of the constant
        trace.rate_constant = 0.5 * L * dist0_sq
    nonconvex_eta = None
    if method == "FracNonconvex":
        if config.lam.kind != "constant":
            raise ParameterError("FracNonconvex uses a constant lambda")
        eta_max, nonconvex_eta, trace.psi = nonconvex_schedule(prof, alpha, config.lam.at(0), config.eta)

    history = []
    if method == "AT-CFGD":
        prev = np.array(config.x_prev if config.x_prev is not None else x, dtype=float)
        if prev.shape != x.shape:
            raise ParameterError("x_prev must match the problem dimension")
        history = [prev] * config.m

    s_t = config.s0
    best = math.inf
    xsum = np.zeros_like(x)

    def record(x, g, fval):
        trace.x.append(x.copy())
        trace.f.append(fval)
        trace.grad_norm.append(float(np.linalg.norm(g)))
        trace.dist_sq.append(float(np.sum((x - problem.x_opt) ** 2)) if has_opt else math.nan)

    for t in range(T + 1):
        g = np.asarray(problem.gradient(x), dtype=float)
        fval = float(problem.value(x))
        if not np.isfinite(fval) or fval - f0 > guard:
            raise DivergenceError(f"{config.name}: f grew to {fval!r} at t={t}")
        record(x, g, fval)
        if method == "FracNonconvex":
            best = min(best, _dual_norm_power(g, p))
            trace.min_grad_power.append(best)
        if t == T:
            break

        lam_t, rho_t = 0.0, None
        c = x
        if method == "GD":
            d = g
        elif method == "AT-CFGD":
            c = history[0]
            d = frac_grad_operator(problem, alpha, beta, c, x, quad, grad=g)
            lam_t = math.nan
        elif method == "FracNonconvex":
            lam_t = config.lam.at(t)
            c = x - nonconvex_terminal(g, lam_t, p)
            d = frac_grad_operator_p(problem, alpha, p, c, x, quad, grad=g)
        else:
            if method == "FracCvx-general":
                if cvx_zero:
                    lam_t = 0.0
                else:
                    pos, neg = lambda_from_s(s_t, consts)
                    want_neg = config.lambda_sign == "negative" or (
                        config.lambda_sign == "auto" and beta < 0
                    )
                    lam_t = neg if want_neg else pos
                    if lam_t is None:
                        side = "negative" if want_neg else "positive"
                        raise InfeasibleError("1 - lam*K1 = s*|lam|*K2", f"no {side} solution at s={s_t!r}")
                    trace.s.append(s_t)
            else:
                lam_t = config.lam.at(t)
            c = x + lam_t * g
            d = frac_grad_operator(problem, alpha, beta, c, x, quad, grad=g)

        if sandwich is not None and method != "FracNonconvex":
            gap = np.abs(x - c)
            if np.any(gap > 0):
                slack = sandwich.K2 * gap - np.abs(d - g - sandwich.K1 * (x - c))
                trace.sandwich_slack.append(float(slack.min()))
            else:
                trace.sandwich_slack.append(0.0)

        # theoretical step (also validates the per-step conditions)
        theory_eta = None
        if method == "GD":
            theory_eta = config.phi / L
            if mu > 0 and p == 1:
                rho_t = 1.0 - (2.0 - config.phi) * config.phi * mu / L
        elif method == "FracSC-separable":
            theory_eta, rho_t = eta_sc(consts, lam_t, config.phi, L, mu if mu > 0 else None, config.epsilon)
        elif method == "FracSC-general":
            theory_eta, rho_t = eta_sc_general(consts, lam_t, config.phi, L, mu, config.epsilon)
        elif method == "FracCvx-separable":
            theory_eta = eta_cvx_separable(consts, lam_t, L)
        elif method == "FracCvx-general":
            theory_eta = 1.0 / L if cvx_zero else eta_cvx_general(s_t, lam_t, consts, L)
        elif method == "FracNonconvex":
            theory_eta = nonconvex_eta

        if config.step == "theory":
            eta_t = theory_eta
        elif config.step == "optimal":
            eta_t = optimal_eta(problem.hessian, g, d)
            rho_t = None
        else:
            eta_t = config.eta
            rho_t = None

        trace.eta.append(eta_t)
        trace.lam.append(lam_t)
        trace.rho.append(math.nan if rho_t is None else rho_t)
        x = x - eta_t * d
        if method == "AT-CFGD":
            history = history[1:] + [trace.x[-1]]
        if method.startswith("FracCvx"):
            xsum += x
        if method == "FracCvx-general" and not cvx_zero:
            s_t = s_sequence_next(s_t)

    trace.eta.append(math.nan)
    trace.lam.append(math.nan)
    trace.rho.append(math.nan)
    if method.startswith("FracCvx") and T > 0:
        trace.xbar = xsum / T
    return trace

