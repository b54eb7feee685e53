"""Randomised certificate sweeps over the scalar test-function catalog."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..bounds import (
    CERT_TOL,
    certify_order2_bound,
    certify_sandwich,
    certify_smooth_bound,
    certify_uniform_convex_bound,
    k_constants,
    margin_scale,
)
from ..caputo import CaputoSpec, caputo, point_value, relation_residual
from ..catalog import CatalogEntry, scalar_catalog
from .runner import fmt

CERT_COLUMNS = ("function", "certificate", "checks", "worst_margin", "worst_ratio", "passed")
LIMIT_TOL = 1e-2
LIMIT_EPS = 1e-4
MIN_GAP = 1e-3


@dataclass
class CertRecord:
    """Worst result of one certificate on one function.

    ``ratio`` is margin over allowed slack, so a check passes iff ``ratio >= -1``.
    """

    function: str
    certificate: str
    checks: int = 0
    worst_margin: float = math.inf
    worst_ratio: float = math.inf

    def add(self, margin: float, allowed: float) -> None:
        self.checks += 1
        self.worst_margin = min(self.worst_margin, margin)
        self.worst_ratio = min(self.worst_ratio, margin / allowed)

    @property
    def passed(self) -> bool:
        return self.worst_ratio >= -1.0

    def row(self) -> list[str]:
        return [self.function, self.certificate, str(self.checks), fmt(self.worst_margin),
                fmt(self.worst_ratio), str(self.passed).lower()]


@dataclass
class CertReport:
    records: list[CertRecord] = field(default_factory=list)

    @property
    def total_checks(self) -> int:
        return sum(r.checks for r in self.records)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def write(self, path: Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CERT_COLUMNS)
            for r in self.records:
                w.writerow(r.row())


def _sample_pair(rng, interval) -> tuple[float, float]:
    lo, hi = interval
    while True:
        c, x = rng.uniform(lo, hi, size=2)
        if abs(x - c) >= MIN_GAP:
            return float(c), float(x)


def certify_entry(entry: CatalogEntry, samples: int, rng: np.random.Generator, tol: float = CERT_TOL) -> list[CertRecord]:
    """Run every applicable certificate ``samples`` times on one catalog entry."""
    o, prof = entry.oracle, entry.profile
    recs: dict[str, CertRecord] = {}

    def rec(name):
        return recs.setdefault(name, CertRecord(entry.name, name))

    second_order = entry.has_second and prof.p == 1
    for _ in range(samples):
        c, x = _sample_pair(rng, entry.interval)
        alpha = float(rng.uniform(0.05, 0.95))
        beta = float(rng.uniform(-1.0, 1.0))
        alpha2 = float(rng.uniform(1.05, 1.95))
        scale = margin_scale(alpha, c, x, prof.p, tol)

        rec("smooth").add(certify_smooth_bound(o, prof, alpha, c, x), scale)
        rec("uniform_convex").add(certify_uniform_convex_bound(o, prof, alpha, c, x), scale)
        if second_order:
            upper, lower = certify_order2_bound(o, prof, alpha2, c, x)
            scale2 = tol * (1.0 + abs(x - c) ** (2.0 - alpha2))
            rec("order2_upper").add(upper, scale2)
            rec("order2_lower").add(lower, scale2)
            rec("sandwich").add(certify_sandwich(o, k_constants(prof, alpha, beta), alpha, beta, c, x), scale)

        lhs, rhs = relation_residual(o, alpha, c, x)
        rec("relation").add(-abs(lhs - rhs), tol * (1.0 + abs(lhs)))

        # order -> 1 from below approaches f'(x) when x > c; order -> 0 approaches f(x) - f(c)
        lo, hi = min(c, x), max(c, x)
        near_one = caputo(o, CaputoSpec(1.0 - LIMIT_EPS, lo), hi)
        d1 = point_value(o.deriv1, hi)
        rec("limit_order_one").add(-abs(near_one - d1), LIMIT_TOL * (1.0 + abs(d1)))
        near_zero = caputo(o, CaputoSpec(LIMIT_EPS, c), x)
        jump = point_value(o.value, x) - point_value(o.value, c)
        rec("limit_order_zero").add(-abs(near_zero - jump), LIMIT_TOL * (1.0 + abs(jump)))
    return list(recs.values())


def run_certify(selector: str, samples: int = 50, seed: int = 0, tol: float = CERT_TOL,
                entries: Optional[list[CatalogEntry]] = None) -> CertReport:
    rng = np.random.default_rng(seed)
    if entries is None:
        entries = scalar_catalog(selector, seed)
    report = CertReport()
    for entry in entries:
        report.records.extend(certify_entry(entry, samples, rng, tol))
    return report
