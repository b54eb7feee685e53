"""Test functions with analytically known smoothness constants.

Scalar entries feed the certificate sweeps; the ``*_problem`` builders return
:class:`fracgd.descent.ProblemOracle` instances for the descent runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from .bounds import SmoothnessProfile
from .caputo import ScalarOracle
from .descent import ProblemOracle
from .errors import ParameterError
from .quadratic import QuadraticForm


@dataclass(frozen=True)
class CatalogEntry:
    """A scalar test function, its constants and the interval to sample from."""

    name: str
    oracle: ScalarOracle
    profile: SmoothnessProfile
    interval: tuple[float, float]

    @property
    def has_second(self) -> bool:
        return self.oracle.deriv2 is not None


def polynomial_oracle(coeffs, domain=(-math.inf, math.inf)) -> ScalarOracle:
    """Oracle for ``sum coeffs[i] t^i``."""
    p = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
    d1, d2 = p.deriv(1), p.deriv(2)
    return ScalarOracle(p, d1, d2, domain=domain)


def quadratic_entry(a: float, b: float = 0.0, name: Optional[str] = None) -> CatalogEntry:
    """``a/2 t^2 + b t``."""
    if not a > 0:
        raise ParameterError("curvature must be positive")
    return CatalogEntry(
        name or f"quadratic(a={a:g},b={b:g})",
        polynomial_oracle([0.0, b, 0.5 * a]),
        SmoothnessProfile(a, a, 1.0),
        (-5.0, 5.0),
    )


def quartic_entry() -> CatalogEntry:
    """``t^4 + t^2`` on [-1, 1]: ``f'' = 12 t^2 + 2`` in [2, 14]."""
    dom = (-1.0, 1.0)
    return CatalogEntry("quartic", polynomial_oracle([0, 0, 1, 0, 1], dom), SmoothnessProfile(14.0, 2.0), dom)


def sextic_entry() -> CatalogEntry:
    """``t^6 / 30 + t^2`` on [-1, 1]: ``f'' = t^4 + 2`` in [2, 3]."""
    dom = (-1.0, 1.0)
    return CatalogEntry(
        "sextic", polynomial_oracle([0, 0, 1, 0, 0, 0, 1 / 30], dom), SmoothnessProfile(3.0, 2.0), dom
    )


def random_even_polynomial(rng: np.random.Generator, index: int = 0) -> CatalogEntry:
    """``a t^2 + b t^4 + c t^6 + d t`` on [-1, 1] with positive ``a, b, c``.

    ``f''`` is increasing in ``t^2``, so its extremes on the interval are
    ``2a`` and ``2a + 12b + 30c``.
    """
    a, b, c = rng.uniform(0.2, 2.0, size=3)
    d = rng.uniform(-1.0, 1.0)
    dom = (-1.0, 1.0)
    prof = SmoothnessProfile(2 * a + 12 * b + 30 * c, 2 * a)
    return CatalogEntry(f"poly{index}", polynomial_oracle([0, d, a, 0, b, 0, c], dom), prof, dom)


def holder_entry(p: float) -> CatalogEntry:
    """``|t|^(1+p) / (1+p)``: derivative ``sgn(t)|t|^p`` is p-Hölder with constant ``2^(1-p)``."""
    if not (0 < p <= 1):
        raise ParameterError(f"p must lie in (0, 1], got {p!r}")

    def value(t):
        return np.abs(t) ** (1.0 + p) / (1.0 + p)

    def d1(t):
        return np.sign(t) * np.abs(t) ** p

    d2 = None
    if p == 1:
        d2 = lambda t: np.ones_like(np.asarray(t, dtype=float))  # noqa: E731
    oracle = ScalarOracle(value, d1, d2, kinks=(0.0,) if p < 1 else ())
    return CatalogEntry(f"holder(p={p:g})", oracle, SmoothnessProfile(2.0 ** (1.0 - p), 0.0, p), (-3.0, 3.0))


def affine_entry(b: float = 1.5) -> CatalogEntry:
    """``b t``: zero curvature, so any ``L`` is valid; use 1 with ``mu = 0``."""
    return CatalogEntry(f"affine(b={b:g})", polynomial_oracle([0.0, b]), SmoothnessProfile(1.0, 0.0), (-5.0, 5.0))


def _quadratics(rng):
    return [quadratic_entry(a, b) for a, b in ((1.0, 0.0), (20.0, 0.0), (2.0, -3.0), (0.5, 1.0))]


def _polynomials(rng):
    return [quartic_entry(), sextic_entry()] + [random_even_polynomial(rng, i) for i in range(4)]


def _holder(rng):
    return [holder_entry(0.5), holder_entry(0.75)]


def _affine(rng):
    return [affine_entry(1.5), affine_entry(-0.25)]


SCALAR_CATALOGS: dict[str, Callable[[np.random.Generator], list[CatalogEntry]]] = {
    "quadratics": _quadratics,
    "polynomials": _polynomials,
    "holder": _holder,
    "affine": _affine,
}


def scalar_catalog(selector: str, seed: int = 0) -> list[CatalogEntry]:
    """Entries for ``selector`` (a catalog name, ``all``, or a comma-separated list)."""
    rng = np.random.default_rng(seed)
    names = list(SCALAR_CATALOGS) if selector == "all" else [s.strip() for s in selector.split(",") if s.strip()]
    if not names:
        raise ParameterError("empty catalog selector")
    out = []
    for name in names:
        if name not in SCALAR_CATALOGS:
            raise ParameterError(f"unknown catalog {name!r}; choose from {sorted(SCALAR_CATALOGS)} or 'all'")
        out.extend(SCALAR_CATALOGS[name](rng))
    return out


# k-dimensional problems


def diagonal_quadratic(diag, convention: str = "half", b=None) -> QuadraticForm:
    return QuadraticForm(np.diag(np.asarray(diag, dtype=float)), b=b, convention=convention)


def rotated_quadratic(eigenvalues, seed: int = 0, b=None) -> QuadraticForm:
    """``Q diag(eigenvalues) Q'`` with a Haar-random orthogonal ``Q`` (half convention)."""
    eig = np.asarray(eigenvalues, dtype=float)
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.normal(size=(eig.size, eig.size)))
    q = q * np.sign(np.diag(r))
    A = q @ np.diag(eig) @ q.T
    return QuadraticForm(0.5 * (A + A.T), b=b)


def holder_problem(dim: int, p: float) -> ProblemOracle:
    """``sum_i |x_i|^(1+p) / (1+p)`` with its minimum 0 at the origin."""
    entry = holder_entry(p)
    o = entry.oracle

    def value(x):
        return float(np.sum(o.value(np.asarray(x, dtype=float))))

    def gradient(x):
        return o.deriv1(np.asarray(x, dtype=float))

    def partial(j, x, y):
        return o.deriv1(y)

    partial2 = (lambda j, x, y: o.deriv2(y)) if o.deriv2 is not None else None
    return ProblemOracle(
        dim=dim,
        value=value,
        gradient=gradient,
        profile=entry.profile,
        partial=partial,
        partial2=partial2,
        x_opt=np.zeros(dim),
        f_opt=0.0,
        kinks=o.kinks,
        separable=True,
        name=f"holder(p={p:g})",
    )


def cosine_well_problem(dim: int, amplitude: float = 2.0) -> ProblemOracle:
    """``sum_i x_i^2 / 2 + a cos x_i``: smooth with ``L = 1 + a``, non-convex for ``a > 1``."""
    a = float(amplitude)
    if not a > 0:
        raise ParameterError("amplitude must be positive")
    # minimisers solve t = a sin t
    t_min = optimize.brentq(lambda t: t - a * math.sin(t), 1e-6, a + 1.0) if a > 1 else 0.0
    f_line = 0.5 * t_min**2 + a * math.cos(t_min)

    def value(x):
        x = np.asarray(x, dtype=float)
        return float(np.sum(0.5 * x * x + a * np.cos(x)))

    def gradient(x):
        x = np.asarray(x, dtype=float)
        return x - a * np.sin(x)

    return ProblemOracle(
        dim=dim,
        value=value,
        gradient=gradient,
        profile=SmoothnessProfile(1.0 + a, 0.0, 1.0),
        partial=lambda j, x, y: y - a * np.sin(y),
        partial2=lambda j, x, y: 1.0 - a * np.cos(y),
        x_opt=np.full(dim, t_min),
        f_opt=dim * f_line,
        separable=True,
        name=f"cosine-well(a={a:g})",
    )
