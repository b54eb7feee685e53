"""Step sizes, terminal offsets and contraction factors for the descent methods.

All functions are pure. ``constants`` is always a
:class:`fracgd.bounds.BoundConstants` built for the problem's (L, mu).
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional

import numpy as np

from .bounds import BoundConstants, SmoothnessProfile, holder_K
from .errors import InfeasibleError, ParameterError, UnsupportedSettingError

S_MIN = math.sqrt(5.0) + 2.0
_SQRT2_RATIO = (math.sqrt(2.0) + 1.0) / (math.sqrt(2.0) - 1.0)


class StepRule(NamedTuple):
    eta: float
    rho: Optional[float]


def _slack(constants: BoundConstants, lam: float) -> tuple[float, float]:
    """``(1 - K1 lam - K2|lam|, 1 - K1 lam + K2|lam|)``."""
    base = 1.0 - constants.K1 * lam
    spread = constants.K2 * abs(lam)
    return base - spread, base + spread


def feasible_lambda_interval(constants: BoundConstants, epsilon: float = 1e-3) -> tuple[float, float]:
    """Open interval of ``lam`` with ``1 - K1 lam - K2 |lam| > epsilon``.

    The left-hand side is concave and piecewise linear with value 1 at 0, so
    the feasible set is an interval around zero (empty if ``epsilon >= 1``).
    """
    if not epsilon > 0:
        raise ParameterError("epsilon must be positive")
    room = 1.0 - epsilon
    if room <= 0:
        raise InfeasibleError("1 - K1*lam - K2*|lam| > epsilon", "no lambda satisfies it for epsilon >= 1")
    up = constants.K1 + constants.K2
    down = constants.K2 - constants.K1
    hi = room / up if up > 0 else math.inf
    lo = -room / down if down > 0 else -math.inf
    return lo, hi


def eta_sc(
    constants: BoundConstants,
    lam: float,
    phi: float,
    L: float,
    mu: Optional[float] = None,
    epsilon: float = 0.0,
) -> StepRule:
    """Step size and contraction for the separable strongly convex method."""
    if not (0 < phi < 2):
        raise ParameterError(f"phi must lie in (0, 2), got {phi!r}")
    lo, hi = _slack(constants, lam)
    if not lo > epsilon:
        raise InfeasibleError(
            "1 - K1*lam - K2*|lam| > epsilon", f"lam={lam!r} gives {lo!r} (epsilon={epsilon!r})"
        )
    eta = lo * phi / (hi * hi * L)
    rho = None
    if mu is not None:
        rho = 1.0 - (2.0 - phi) * phi * (mu / L) * (lo / hi) ** 2
    return StepRule(eta, rho)


def eta_sc_general(
    constants: BoundConstants,
    lam: float,
    phi: float,
    L: float,
    mu: float,
    epsilon: float = 0.0,
) -> StepRule:
    """Step size and contraction for the general strongly convex method.

    Uses the dimension-free feasibility condition
    ``(phi/L)(1 - K1 lam) - 2 K2 |lam| / mu > epsilon``.
    """
    if not (0 < phi < 2):
        raise ParameterError(f"phi must lie in (0, 2), got {phi!r}")
    if not mu > 0:
        raise UnsupportedSettingError("the general strongly convex schedule needs mu > 0")
    base = 1.0 - constants.K1 * lam
    numer = (phi / L) * base - 2.0 * constants.K2 * abs(lam) / mu
    if not numer > epsilon:
        raise InfeasibleError(
            "(phi/L)(1 - K1*lam) - 2*K2*|lam|/mu > epsilon", f"lam={lam!r} gives {numer!r}"
        )
    denom = (base + constants.K2 * abs(lam)) ** 2
    eta = numer / denom
    rho = 1.0 - (2.0 - phi) * mu * base * numer / denom
    return StepRule(eta, rho)


def eta_cvx_separable(constants: BoundConstants, lam: float, L: float) -> float:
    base = 1.0 - constants.K1 * lam
    if not base > _SQRT2_RATIO * abs(lam) * constants.K2:
        raise InfeasibleError(
            "1 - lam*K1 > (sqrt2+1)/(sqrt2-1) * |lam|*K2", f"lam={lam!r}"
        )
    lo, hi = _slack(constants, lam)
    eta = (2.0 * lo / (hi * hi) - 1.0 / lo) / L
    if not eta > 0:
        raise InfeasibleError("eta > 0", f"lam={lam!r} gives eta={eta!r}")
    return eta


def cvx_separable_rate_constant(constants: BoundConstants, lam: float, L: float, dist0_sq: float) -> float:
    """``C`` in ``f(xbar_T) - f* <= C / T`` for the separable convex method."""
    lo, hi = _slack(constants, lam)
    r = lo / hi
    return L * dist0_sq / (4.0 * r * r - 2.0)


def _excess(s: float) -> float:
    """``(s+1)^2 / (s^2 - 4s - 1) - 1`` without cancellation for large ``s``."""
    return (6.0 * s + 2.0) / ((s - 4.0) * s - 1.0)


def telescoping_lhs(s_next: float) -> float:
    """Left side of the telescoping condition, minus one."""
    return _excess(s_next) + 2.0 / s_next


def telescoping_rhs(s: float) -> float:
    """Right side of the telescoping condition, minus one."""
    return _excess(s)


def s_sequence_next(s: float, rtol: float = 1e-10) -> float:
    """Smallest ``s_next`` (to within ``rtol * max(1, s)``) meeting the telescoping condition.

    Both sides are compared after subtracting one, which is exact algebra
    but keeps the comparison meaningful once ``s`` exceeds ~1e8.
    """
    if not s > S_MIN:
        raise ParameterError(f"s must exceed sqrt(5)+2, got {s!r}")
    target = telescoping_rhs(s)
    lo, hi = s, s * 1e6
    while telescoping_lhs(hi) > target:
        lo, hi = hi, hi * 1e6
    tol = rtol * max(1.0, s)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if telescoping_lhs(mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def s_sequence(s0: float, length: int) -> np.ndarray:
    out = np.empty(length)
    s = float(s0)
    for i in range(length):
        out[i] = s
        s = s_sequence_next(s)
    return out


def lambda_from_s(s: float, constants: BoundConstants) -> tuple[Optional[float], Optional[float]]:
    """Positive and negative solutions of ``1 - lam K1 = s |lam| K2``."""
    K1, K2 = constants.K1, constants.K2
    if K2 == 0:
        raise UnsupportedSettingError(
            "K2 = 0 leaves 1 - lam*K1 = s*|lam|*K2 without a finite solution; use lam = 0 (plain GD)"
        )
    pos = 1.0 / (K1 + s * K2) if K1 + s * K2 > 0 else None
    neg = -1.0 / (s * K2 - K1) if s * K2 - K1 > 0 else None
    return pos, neg


def eta_cvx_general(s: float, lam: float, constants: BoundConstants, L: float) -> float:
    if not s > S_MIN:
        raise InfeasibleError("s_t > sqrt(5)+2", f"s={s!r}")
    bracket = 1.0 - (6.0 * s + 2.0) / (s + 1.0) ** 2
    return bracket / (L * (1.0 - lam * constants.K1))


def cvx_general_rate_constant(s0: float, L: float, dist0_sq: float) -> float:
    return 0.5 * L * (1.0 + telescoping_lhs(s0)) * dist0_sq


def nonconvex_schedule(
    profile: SmoothnessProfile,
    alpha: float,
    lam: float,
    eta: Optional[float] = None,
) -> tuple[float, float, float]:
    """``(eta_max, eta, psi)`` for the Hölder-smooth non-convex method.

    ``eta`` defaults to ``eta_max / 2``. For ``p = 1`` the limit ``lam = 0``
    is accepted and reproduces gradient descent.
    """
    L, p = profile.L, profile.p
    K = holder_K(L, p, alpha)
    if lam < 0 or (lam == 0 and p != 1):
        raise InfeasibleError("0 < lam", f"lam={lam!r}")
    if K > 0 and not lam < (1.0 / K) ** (1.0 / p):
        raise InfeasibleError("lam < (1/K)^(1/p)", f"lam={lam!r}, K={K!r}")
    lead = 1.0 if p == 1 else lam ** (1.0 - p)
    minus, plus = lead - K * lam, lead + K * lam
    if not minus > 0:
        raise InfeasibleError("lam^(1-p) - K*lam > 0", f"lam={lam!r}")
    eta_max = ((1.0 + p) * minus / (L * plus ** (1.0 + p))) ** (1.0 / p)
    if eta is None:
        eta = 0.5 * eta_max
    if not (0 < eta < eta_max):
        raise InfeasibleError("0 < eta < eta_max", f"eta={eta!r}, eta_max={eta_max!r}")
    psi = eta * (minus - L / (1.0 + p) * eta**p * plus ** (1.0 + p))
    return eta_max, eta, psi


def nonconvex_terminal(grad, lam: float, p: float):
    """Offset ``x - c`` that opposes the gradient with magnitude ``lam |g|^(1/p)``."""
    g = np.asarray(grad, dtype=float)
    out = -lam * np.sign(g) * np.abs(g) ** (1.0 / p)
    return float(out) if out.ndim == 0 else out
