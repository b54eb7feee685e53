"""Derived constants and executable inequality certificates.

Every certificate returns a signed margin: non-negative means the inequality
holds at the sampled point, negative values report by how much it failed.
Use :func:`margin_scale` to get the default tolerance a margin is judged at.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .caputo import (
    DEFAULT_QUAD,
    CaputoSpec,
    QuadratureConfig,
    ScalarOracle,
    caputo,
    gamma_fn,
    point_value,
)
from .errors import ParameterError, UnsupportedSettingError

CERT_TOL = 1e-6


@dataclass(frozen=True)
class SmoothnessProfile:
    """(L, p)-Hölder smoothness and (mu, p)-uniform convexity constants."""

    L: float
    mu: float = 0.0
    p: float = 1.0

    def __post_init__(self):
        if not self.L > 0:
            raise ParameterError(f"L must be positive, got {self.L!r}")
        if not (0 <= self.mu <= self.L):
            raise ParameterError(f"need 0 <= mu <= L, got mu={self.mu!r}, L={self.L!r}")
        if not self.p > 0:
            raise ParameterError(f"p must be positive, got {self.p!r}")


@dataclass(frozen=True)
class BoundConstants:
    """Constants of the sandwich ``|op - f' - K1 (x-c)| <= K2 |x-c|``."""

    gamma: float
    K1: float
    K2: float
    branch: str  # "beta>=0" or "beta<=0"


def _check_alpha(alpha):
    if not (0.0 < alpha <= 1.0):
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha!r}")


def gamma_ratio(alpha: float) -> float:
    """``(1 - alpha) / (2 - alpha)``."""
    _check_alpha(alpha)
    return (1.0 - alpha) / (2.0 - alpha)


def k_constants(profile: SmoothnessProfile, alpha: float, beta: float) -> BoundConstants:
    if profile.p != 1:
        raise UnsupportedSettingError("sandwich constants are only defined for p = 1")
    g = gamma_ratio(alpha)
    L, mu = profile.L, profile.mu
    if beta >= 0:
        return BoundConstants(g, 0.5 * (L + mu) * (beta - g), 0.5 * (L - mu) * (beta + g), "beta>=0")
    gab = beta - g
    return BoundConstants(g, 0.5 * (L + mu) * gab, 0.5 * (mu - L) * gab, "beta<=0")


def holder_K(L: float, p: float, alpha: float) -> float:
    """``L (1 - alpha) / (1 + p - alpha)``."""
    _check_alpha(alpha)
    if not p > 0:
        raise ParameterError(f"p must be positive, got {p!r}")
    return L * (1.0 - alpha) / (1.0 + p - alpha)


def smoothing_coefficient(k: int, alpha: float, beta: float) -> float:
    """Scale applied to the k-th Taylor term by the fractional operator."""
    if k < 2:
        raise ParameterError("smoothing coefficient is defined for k >= 2")
    _check_alpha(alpha)
    # log-gamma keeps large k finite
    g2 = math.lgamma(2.0 - alpha) + math.lgamma(k)
    first = math.exp(g2 - math.lgamma(k + 1.0 - alpha))
    second = math.exp(g2 - math.lgamma(k - alpha))
    return first + beta * second


def margin_scale(alpha: float, c: float, x: float, p: float = 1.0, tol: float = CERT_TOL) -> float:
    """Default tolerance for a margin at ``(c, x)``."""
    return tol * (1.0 + abs(x - c) ** (1.0 + p - alpha))


def _first_order_gap(oracle: ScalarOracle, alpha: float, c: float, x: float, quad) -> float:
    """``f'(x)(x-c) / (Gamma(2-alpha)|x-c|^alpha) - CD f(x)``."""
    dfx = point_value(oracle.deriv1, x)
    lin = dfx * (x - c) / (gamma_fn(2.0 - alpha) * abs(x - c) ** alpha)
    return lin - caputo(oracle, CaputoSpec(alpha, c), x, quad)


def _holder_term(const: float, alpha: float, p: float, c: float, x: float) -> float:
    if alpha == 1.0:
        return 0.0
    return const / (gamma_fn(1.0 - alpha) * (1.0 + p - alpha)) * abs(x - c) ** (1.0 + p - alpha)


def certify_smooth_bound(
    oracle: ScalarOracle,
    profile: SmoothnessProfile,
    alpha: float,
    c: float,
    x: float,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> float:
    _check_alpha(alpha)
    bound = _holder_term(profile.L, alpha, profile.p, c, x)
    return bound - abs(_first_order_gap(oracle, alpha, c, x, quad))


def certify_uniform_convex_bound(
    oracle: ScalarOracle,
    profile: SmoothnessProfile,
    alpha: float,
    c: float,
    x: float,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> float:
    _check_alpha(alpha)
    bound = _holder_term(profile.mu, alpha, profile.p, c, x)
    return _first_order_gap(oracle, alpha, c, x, quad) - bound


def certify_order2_bound(
    oracle: ScalarOracle,
    profile: SmoothnessProfile,
    alpha: float,
    c: float,
    x: float,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> tuple[float, float]:
    """Upper and lower margins for the order-(1, 2] Caputo derivative."""
    if not (1.0 < alpha <= 2.0):
        raise ParameterError(f"alpha must lie in (1, 2], got {alpha!r}")
    val = caputo(oracle, CaputoSpec(alpha, c), x, quad)
    scale = abs(x - c) ** (2.0 - alpha) / gamma_fn(3.0 - alpha)
    return profile.L * scale - val, val - profile.mu * scale


def certify_sandwich(
    oracle: ScalarOracle,
    constants: BoundConstants,
    alpha: float,
    beta: float,
    c: float,
    x: float,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> float:
    from .descent import frac_grad_operator_1d  # descent depends on this module

    op = frac_grad_operator_1d(oracle, alpha, beta, c, x, quad)
    dfx = point_value(oracle.deriv1, x)
    return constants.K2 * abs(x - c) - abs(op - dfx - constants.K1 * (x - c))
