"""Fractional descent on quadratics in closed form.

With the terminal coupled to the gradient by ``x - c = -lam * grad f(x)`` and
``lam = Delta / ((beta - gamma) L)``, the fractional operator of a quadratic
is the affine map ``D (H x + b)`` with ``D = I - (Delta / L) diag(H)``. The
preconditioned matrix ``A' = D H`` may have a better condition number than
``H``, which is where the fractional method can beat gradient descent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bounds import SmoothnessProfile, gamma_ratio
from .caputo import DEFAULT_QUAD, QuadratureConfig
from .descent import IterateTrace, ProblemOracle, frac_grad_operator
from .errors import FracGDError, InfeasibleError, ParameterError, UnsupportedSettingError

CONVENTIONS = ("half", "plain")


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """``f(x) = s x'Ax + b'x + y0`` with ``s = 1/2`` (``half``) or ``s = 1`` (``plain``)."""

    A: np.ndarray
    b: Optional[np.ndarray] = None
    y0: float = 0.0
    convention: str = "half"

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ParameterError(f"A must be square, got shape {A.shape}")
        if not np.allclose(A, A.T, rtol=1e-12, atol=1e-12):
            raise ParameterError("A must be symmetric")
        if self.convention not in CONVENTIONS:
            raise ParameterError(f"convention must be one of {CONVENTIONS}, got {self.convention!r}")
        b = np.zeros(A.shape[0]) if self.b is None else np.array(self.b, dtype=float)
        if b.shape != (A.shape[0],):
            raise ParameterError("b must match the dimension of A")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        eig = np.linalg.eigvalsh(self.hessian)
        if not eig[0] > 0:
            raise ParameterError(f"A must be positive definite, smallest eigenvalue {eig[0]!r}")
        object.__setattr__(self, "_eig", eig)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def hessian(self) -> np.ndarray:
        return self.A if self.convention == "half" else 2.0 * self.A

    @property
    def mu(self) -> float:
        return float(self._eig[0])

    @property
    def L(self) -> float:
        return float(self._eig[-1])

    @property
    def kappa(self) -> float:
        return self.L / self.mu

    @property
    def x_opt(self) -> np.ndarray:
        return -np.linalg.solve(self.hessian, self.b)

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.hessian @ x + self.b @ x + self.y0)

    @property
    def f_opt(self) -> float:
        return self.value(self.x_opt)

    def gradient(self, x) -> np.ndarray:
        return self.hessian @ np.asarray(x, dtype=float) + self.b

    def problem(self, name: str = "quadratic") -> ProblemOracle:
        H = self.hessian
        diag_h = np.diag(H).copy()

        def partial(j, x, y):
            # the j-th partial is affine in the j-th coordinate
            return self.gradient(x)[j] + diag_h[j] * (y - x[j])

        def partial2(j, x, y):
            return np.full(np.shape(y), diag_h[j])

        off = H - np.diag(diag_h)
        return ProblemOracle(
            dim=self.dim,
            value=self.value,
            gradient=self.gradient,
            profile=SmoothnessProfile(self.L, self.mu, 1.0),
            partial=partial,
            partial2=partial2,
            x_opt=self.x_opt,
            f_opt=self.f_opt,
            hessian=H,
            separable=not np.any(off),
            name=name,
        )


def quadratic_form_bounds(Aprime) -> tuple[float, float]:
    """Extreme eigenvalues of the symmetric part of ``Aprime``."""
    M = np.asarray(Aprime, dtype=float)
    eig = np.linalg.eigvalsh(0.5 * (M + M.T))
    return float(eig[0]), float(eig[-1])


@dataclass(frozen=True, eq=False)
class FracLinearOperator:
    """The affine map ``x -> A' x + b'`` equal to the fractional operator on a quadratic."""

    D: np.ndarray
    Aprime: np.ndarray
    bprime: np.ndarray
    mu_prime: float
    L_prime: float
    Delta: float
    lam: float

    def __call__(self, x) -> np.ndarray:
        return self.Aprime @ np.asarray(x, dtype=float) + self.bprime

    @property
    def kappa(self) -> float:
        return self.L_prime / self.mu_prime if self.mu_prime > 0 else math.inf

    @property
    def symmetric(self) -> bool:
        return bool(np.allclose(self.Aprime, self.Aprime.T, rtol=1e-12, atol=1e-14))


def coupled_lambda(L: float, alpha: float, beta: float, Delta: float) -> float:
    """``lam`` with ``Delta = lam (beta - gamma) L``."""
    return Delta / ((beta - gamma_ratio(alpha)) * L)


def closed_form_operator(
    Q: QuadraticForm,
    alpha: float,
    beta: float,
    Delta: float,
    require_positive: bool = True,
    verify: int = 3,
    seed: int = 0,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> FracLinearOperator:
    """Build ``D``, ``A' = D H`` and ``b' = D b`` for the coupled terminal.

    ``verify`` random points are checked against the quadrature operator;
    a mismatch beyond ``1e-8 (1 + |.|)`` raises :class:`FracGDError`.
    """
    if beta > 0:
        raise UnsupportedSettingError("the closed form assumes beta <= 0")
    if not (0.0 < alpha < 1.0):
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")
    H = Q.hessian
    L = Q.L
    D = np.diag(1.0 - (Delta / L) * np.diag(H))
    if require_positive and not np.all(np.diag(D) > 0):
        raise InfeasibleError("D_ii = 1 - (Delta/L) H_ii > 0", f"Delta={Delta!r} gives diag(D)={np.diag(D)}")
    Aprime = D @ H
    bprime = D @ Q.b
    mu_p, L_p = quadratic_form_bounds(Aprime)
    op = FracLinearOperator(D, Aprime, bprime, mu_p, L_p, float(Delta), coupled_lambda(L, alpha, beta, Delta))
    if verify:
        rng = np.random.default_rng(seed)
        problem = Q.problem()
        for _ in range(verify):
            x = rng.normal(size=Q.dim)
            want = op(x)
            got = frac_grad_operator(problem, alpha, beta, x + op.lam * Q.gradient(x), x, quad)
            if np.max(np.abs(got - want)) > 1e-8 * (1.0 + np.max(np.abs(want))):
                raise FracGDError(f"closed form disagrees with quadrature: {got} vs {want}")
    return op


@dataclass(frozen=True)
class ConditionReport:
    Delta: float
    kappa_A: float
    kappa_Aprime: float
    mu_prime: float
    L_prime: float

    @property
    def frac_faster(self) -> bool:
        return self.kappa_Aprime < self.kappa_A


def condition_compare(Q: QuadraticForm, alpha: float, beta: float, Delta: float) -> ConditionReport:
    op = closed_form_operator(Q, alpha, beta, Delta, verify=0)
    return ConditionReport(float(Delta), Q.kappa, op.kappa, op.mu_prime, op.L_prime)


def delta_sweep(Q: QuadraticForm, alpha: float, beta: float, deltas: Sequence[float]) -> list[ConditionReport]:
    """Condition comparison over a grid of ``Delta``; infeasible entries are skipped."""
    out = []
    for delta in deltas:
        try:
            out.append(condition_compare(Q, alpha, beta, delta))
        except InfeasibleError:
            continue
    return out


def optimal_eta_quadratic(Q: QuadraticForm, x, d) -> float:
    """Exact minimiser of ``eta -> f(x - eta d)``."""
    d = np.asarray(d, dtype=float)
    curv = float(d @ Q.hessian @ d)
    if not curv > 0:
        raise ParameterError("direction must be nonzero")
    return float(Q.gradient(x) @ d) / curv


@dataclass
class QuadraticRun:
    trace: IterateTrace
    operator: FracLinearOperator
    ratios: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def bound(self) -> float:
        return 1.0 - self.operator.mu_prime / self.operator.L_prime

    @property
    def bound_ok(self) -> bool:
        """Every squared-distance ratio is within ``1 - mu'/L'`` (plus 1e-12)."""
        return bool(np.all(self.ratios <= self.bound + 1e-12))


def run_quadratic_frac(
    Q: QuadraticForm,
    alpha: float,
    beta: float,
    Delta: float,
    T: int,
    x0,
    eta: Optional[float] = None,
    label: str = "frac-quadratic",
) -> QuadraticRun:
    """Iterate ``x <- x - eta (A'x + b')`` with ``eta = 1/L'`` by default.

    The per-step squared-distance ratios are recorded rather than asserted:
    the contraction bound holds whenever ``A'`` is symmetric but can fail
    for non-normal ``A'``. ``bound_ok`` reports the outcome.
    """
    op = closed_form_operator(Q, alpha, beta, Delta, verify=0)
    step = 1.0 / op.L_prime if eta is None else float(eta)
    x = np.array(x0, dtype=float)
    xs = Q.x_opt
    trace = IterateTrace(method=label, f_opt=Q.f_opt)
    rho = 1.0 - op.mu_prime / op.L_prime
    ratios = []
    # below this the distance is rounding noise and its ratios mean nothing
    floor = (1e4 * np.finfo(float).eps * (1.0 + float(np.max(np.abs(xs))))) ** 2
    for t in range(T + 1):
        g = Q.gradient(x)
        trace.x.append(x.copy())
        trace.f.append(Q.value(x))
        trace.grad_norm.append(float(np.linalg.norm(g)))
        trace.dist_sq.append(float(np.sum((x - xs) ** 2)))
        if t == T:
            break
        trace.eta.append(step)
        trace.lam.append(op.lam)
        trace.rho.append(rho)
        x = x - step * op(x)
        d_new = float(np.sum((x - xs) ** 2))
        if trace.dist_sq[-1] > floor:
            ratios.append(d_new / trace.dist_sq[-1])
    trace.eta.append(math.nan)
    trace.lam.append(math.nan)
    trace.rho.append(math.nan)
    return QuadraticRun(trace, op, np.array(ratios))


def operator_circulation(op: FracLinearOperator, i: int, j: int, center=None, radius: float = 1.0, nodes: int = 4) -> float:
    """Circulation of ``x -> A'x + b'`` around a square in the ``(i, j)`` plane.

    Zero for a gradient field; for an affine field it equals
    ``(A'_ji - A'_ij) (2 radius)^2``.
    """
    k = op.Aprime.shape[0]
    if not (0 <= i < k and 0 <= j < k and i != j):
        raise ParameterError("need two distinct coordinates")
    center = np.zeros(k) if center is None else np.asarray(center, dtype=float)
    s, w = np.polynomial.legendre.leggauss(nodes)
    ei, ej = np.eye(k)[i], np.eye(k)[j]
    r = radius
    corners = [center + r * (-ei - ej), center + r * (ei - ej), center + r * (ei + ej), center + r * (-ei + ej)]
    total = 0.0
    for a, b in zip(corners, corners[1:] + corners[:1]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        for sk, wk in zip(s, w):
            total += wk * float(op(mid + sk * half) @ half)
    return total
