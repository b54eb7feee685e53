"""Caputo fractional derivatives of single-variable callables.

The unified (two-sided) Caputo derivative of order ``alpha`` with terminal
``c`` is

.. math::

    {}^C D^\\alpha_c f(x) = \\frac{\\operatorname{sgn}(x-c)^{n-1}}{\\Gamma(n-\\alpha)}
        \\int_c^x \\frac{f^{(n)}(t)}{|x-t|^{\\alpha-n+1}}\\,dt,
    \\qquad n = \\lceil \\alpha \\rceil .

Substituting ``t = c + (x - c) u`` turns the kernel into ``(1 - u)^(n-alpha-1)``.
We absorb that factor into a Gauss-Jacobi rule and normalise its weights so
the rule returns the *mean* of ``f^(n)`` under the Beta(1, n - alpha) density.
The derivative is then

.. math::

    {}^C D^\\alpha_c f(x) = \\frac{\\operatorname{sgn}(x-c)^{n-1}(x-c)|x-c|^{n-\\alpha-1}}
        {\\Gamma(n-\\alpha+1)} \\, \\mathbb{E}[f^{(n)}],

which stays well conditioned as ``alpha`` approaches an integer.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.special import roots_jacobi

from .errors import ParameterError, TerminalLimitError

RealFn = Callable[[np.ndarray], np.ndarray]


def gamma_fn(z: float) -> float:
    """Euler gamma for ``z > 0``."""
    z = float(z)
    if not z > 0.0:
        raise ParameterError(f"gamma_fn requires z > 0, got {z!r}")
    return math.gamma(z)


@dataclass(frozen=True)
class ScalarOracle:
    """Value and derivatives of a single-variable function.

    All callables must accept a numpy array and evaluate elementwise.
    ``kinks`` lists points where the highest supplied derivative is not
    smooth; quadrature splits the integration interval there.
    """

    value: RealFn
    deriv1: RealFn
    deriv2: Optional[RealFn] = None
    domain: tuple[float, float] = (-math.inf, math.inf)
    kinks: tuple[float, ...] = ()

    def derivative(self, n: int) -> RealFn:
        if n == 0:
            return self.value
        if n == 1:
            return self.deriv1
        if n == 2:
            if self.deriv2 is None:
                raise ParameterError("second derivative required but oracle has none")
            return self.deriv2
        raise ParameterError(f"derivative order {n} not supported")

    def contains(self, *points: float) -> bool:
        lo, hi = self.domain
        return all(lo <= p <= hi for p in points)


@dataclass(frozen=True)
class CaputoSpec:
    """Order and terminal of a Caputo derivative."""

    alpha: float
    terminal: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 2.0):
            raise ParameterError(f"alpha must lie in (0, 2], got {self.alpha!r}")

    @property
    def n(self) -> int:
        return math.ceil(self.alpha)


@dataclass(frozen=True)
class QuadratureConfig:
    """Singular-endpoint Gauss-Jacobi rule settings.

    With no kinks inside the bracket, one derivative evaluation touches the
    oracle at exactly ``node_count`` points.
    """

    node_count: int = 64
    scheme: str = field(default="gauss-jacobi", repr=False)

    def __post_init__(self):
        if int(self.node_count) != self.node_count or self.node_count < 8:
            raise ParameterError(f"node_count must be an integer >= 8, got {self.node_count!r}")
        if self.scheme != "gauss-jacobi":
            raise ParameterError(f"unknown quadrature scheme {self.scheme!r}")


DEFAULT_QUAD = QuadratureConfig()


@functools.lru_cache(maxsize=256)
def jacobi_rule(node_count: int, exponent: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes ``u`` in (0, 1) and weights summing to one for the density
    proportional to ``(1 - u)**exponent``."""
    if not exponent > -1.0:
        raise ParameterError(f"Jacobi exponent must exceed -1, got {exponent!r}")
    s, w = roots_jacobi(node_count, exponent, 0.0)
    u = 0.5 * (1.0 + s)
    w = w / w.sum()
    u.setflags(write=False)
    w.setflags(write=False)
    return u, w


@functools.lru_cache(maxsize=32)
def legendre_rule(node_count: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    s, w = np.polynomial.legendre.leggauss(node_count)
    u, w = 0.5 * (1.0 + s), 0.5 * w
    u.setflags(write=False)
    w.setflags(write=False)
    return u, w


def _evaluate(fn: RealFn, t: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(fn(t), dtype=float), t.shape)


def point_value(fn: RealFn, x: float) -> float:
    """Evaluate a vectorised callable at a single point."""
    return float(_evaluate(fn, np.array([float(x)]))[0])


def _graded_mesh(lo: float, hi: float, x: float, kinks: Sequence[float]) -> list[tuple[float, float]]:
    """Split ``[lo, hi]`` so no piece lies closer to a kink (or to ``x``) than its length.

    Pieces that end on a kink are bisected toward it until they are
    negligible, which gives a dyadic mesh graded toward each kink.
    """
    tiny = 1e-13 * (hi - lo)
    near = [k for k in kinks if lo - (hi - lo) <= k <= hi + (hi - lo)]
    start = [lo, *sorted(k for k in near if lo < k < hi), hi]
    stack = list(zip(start[:-1], start[1:]))
    out = []
    while stack:
        p, q = stack.pop()
        L = q - p
        split = False
        if L > tiny:
            for k in near:
                if k < p - L or k > q + L:
                    continue
                split = True
                break
            if not split and x not in (p, q):
                split = min(abs(x - p), abs(x - q)) < L
        if split:
            m = 0.5 * (p + q)
            stack.extend([(p, m), (m, q)])
        else:
            out.append((p, q))
    return out


def kernel_mean(
    g: RealFn,
    c: float,
    x: float,
    exponent: float,
    quad: QuadratureConfig = DEFAULT_QUAD,
    kinks: Sequence[float] = (),
) -> float:
    """Mean of ``g`` over the segment from ``c`` to ``x`` under ``|x - t|**exponent``.

    Returns ``R`` with ``int_c^x g(t) |x-t|^a dt = (x-c)|x-c|^a R / (a+1)``.
    For a constant ``g`` the result is that constant.
    """
    span = abs(x - c)
    lo, hi = min(c, x), max(c, x)
    if not any(lo - span <= k <= hi + span for k in kinks):
        u, w = jacobi_rule(quad.node_count, exponent)
        return float(w @ _evaluate(g, c + (x - c) * u))

    # the piece ending at x keeps the singular weight; the rest get Gauss-Legendre
    v, wl = legendre_rule(quad.node_count)
    u, wj = jacobi_rule(quad.node_count, exponent)
    nodes, weights = [], []
    for p, q in _graded_mesh(lo, hi, x, kinks):
        length = q - p
        if x in (p, q):
            b = q if x == p else p
            nodes.append(b + (x - b) * u)
            weights.append(wj * (length / span) ** (exponent + 1.0))
        else:
            t = p + length * v
            nodes.append(t)
            # distance to x from the piece geometry; x - t cancels badly on pieces next to x
            dist = (x - q) + length * (1.0 - v) if x >= q else (p - x) + length * v
            weights.append(wl * (exponent + 1.0) * (length / span) * (dist / span) ** exponent)
    t = np.concatenate(nodes)
    return float(np.concatenate(weights) @ _evaluate(g, t))


def _check_points(oracle: ScalarOracle, c: float, x: float):
    if not oracle.contains(c, x):
        raise ParameterError(f"points c={c!r}, x={x!r} outside oracle domain {oracle.domain}")
    if x == c:
        raise TerminalLimitError(
            "Caputo derivative is undefined at x == c; use caputo_at_terminal_limit"
        )


def caputo(
    oracle: ScalarOracle,
    spec: CaputoSpec,
    x: float,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> float:
    """Unified Caputo derivative of order ``spec.alpha`` at ``x``.

    Integer orders 1 and 2 return the closure value
    ``sgn(x - c)**n * f^(n)(x)``.
    """
    alpha, c, n = spec.alpha, spec.terminal, spec.n
    x = float(x)
    _check_points(oracle, c, x)
    fn = oracle.derivative(n)
    sgn = math.copysign(1.0, x - c)
    if alpha == n:
        return sgn**n * point_value(fn, x)
    a = n - alpha - 1.0
    mean = kernel_mean(fn, c, x, a, quad, oracle.kinks)
    return sgn ** (n - 1) * (x - c) * abs(x - c) ** a / gamma_fn(n - alpha + 1.0) * mean


def caputo_at_terminal_limit(oracle: ScalarOracle, alpha: float, x: float) -> float:
    """First-order factor of the Caputo derivative as ``c -> x``; equals ``f'(x)``."""
    if not (0.0 < alpha < 1.0):
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not oracle.contains(x):
        raise ParameterError(f"x={x!r} outside oracle domain {oracle.domain}")
    return point_value(oracle.deriv1, x)


def zeta(oracle: ScalarOracle, x: float, t):
    """First-order Taylor remainder ``f(t) - f(x) - f'(x)(t - x)``."""
    t_arr = np.asarray(t, dtype=float)
    xa = np.array([float(x)])
    fx = _evaluate(oracle.value, xa)[0]
    dfx = _evaluate(oracle.deriv1, xa)[0]
    out = _evaluate(oracle.value, np.atleast_1d(t_arr)) - fx - dfx * (np.atleast_1d(t_arr) - x)
    return float(out[0]) if t_arr.ndim == 0 else out


def _taylor_quotient(oracle: ScalarOracle, x: float, quad: QuadratureConfig) -> RealFn:
    """``zeta_x(t) / (t - x)**2`` as the integral of ``(1-s) f''(x + s(t-x))``."""
    s, w = legendre_rule(max(8, quad.node_count // 2))
    kernel = w * (1.0 - s)
    f2 = oracle.deriv2

    def q(t):
        t = np.asarray(t, dtype=float)
        pts = x + np.multiply.outer(t - x, s)
        vals = np.asarray(f2(pts.ravel()), dtype=float)
        vals = np.broadcast_to(vals, pts.size).reshape(pts.shape)
        return vals @ kernel

    return q


def _singular_zeta_integral(oracle: ScalarOracle, c: float, x: float, alpha: float) -> float:
    """``int |zeta_x(t)| / |x-t|^(alpha+1) dt`` over the segment, with its sign.

    On a kink-free piece next to ``x`` the integrand is written as
    ``(zeta_x(t) / |x-t|) * |x-t|^(-alpha)`` and the algebraic weight goes to
    QUADPACK's QAWS rule; the remainder is regular and uses QAGS with the
    kinks as breakpoints.
    """
    dist = abs(x - c)
    gaps = [abs(x - k) for k in oracle.kinks if k != x]
    h = min([dist, *(0.5 * g for g in gaps)])
    u, w = legendre_rule(32)
    dfx = point_value(oracle.deriv1, x)
    direction = math.copysign(1.0, c - x)

    def reduced_near(t):
        # zeta_x(t) / |x - t| as a mean of f' differences; the direct form
        # cancels catastrophically as t -> x
        return direction * float(w @ (_evaluate(oracle.deriv1, x + u * (t - x)) - dfx))

    kw = dict(limit=200, epsabs=1e-14, epsrel=1e-12)
    a, b = sorted((x, x + direction * h))
    wvar = (0.0, -alpha) if b == x else (-alpha, 0.0)
    total, _ = integrate.quad(reduced_near, a, b, weight="alg", wvar=wvar, **kw)
    if h < dist:
        lo, hi = sorted((x + direction * h, c))
        pts = [k for k in oracle.kinks if lo < k < hi] or None

        fx = point_value(oracle.value, x)
        value = oracle.value

        def regular(t):
            ft = float(np.asarray(value(np.array([t])), dtype=float).reshape(-1)[0])
            return (ft - fx - dfx * (t - x)) / abs(x - t) ** (alpha + 1.0)

        val, _ = integrate.quad(regular, lo, hi, points=pts, **kw)
        total += val
    return total


def relation_residual(
    oracle: ScalarOracle,
    alpha: float,
    c: float,
    x: float,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> tuple[float, float]:
    """Both sides of the identity linking the Caputo derivative and ``f'``.

    lhs: ``CD f(x) - f'(x)(x-c) / (Gamma(2-alpha)|x-c|^alpha)``.
    rhs: ``-zeta_x(c) / (Gamma(1-alpha)|x-c|^alpha)
    - alpha sgn(x-c) / Gamma(1-alpha) * int_c^x zeta_x(t) / |x-t|^(alpha+1) dt``.

    The two sides use independent quadratures, so ``|lhs - rhs|`` measures
    the numerical error of the pair.
    """
    if not (0.0 < alpha <= 1.0):
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha!r}")
    c, x = float(c), float(x)
    _check_points(oracle, c, x)
    dfx = point_value(oracle.deriv1, x)
    dist = abs(x - c)
    lhs = caputo(oracle, CaputoSpec(alpha, c), x, quad) - dfx * (x - c) / (
        gamma_fn(2.0 - alpha) * dist**alpha
    )
    if alpha == 1.0:
        return lhs, 0.0

    g1 = gamma_fn(1.0 - alpha)
    boundary = -zeta(oracle, x, c) / (g1 * dist**alpha)
    if oracle.deriv2 is not None:
        q = _taylor_quotient(oracle, x, quad)
        mean = kernel_mean(q, c, x, 1.0 - alpha, quad)
        body = alpha * dist ** (2.0 - alpha) / (g1 * (2.0 - alpha)) * mean
    else:
        body = alpha / g1 * _singular_zeta_integral(oracle, c, x, alpha)
    return lhs, boundary - body
