"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest

from fracgd.bounds import k_constants
from fracgd.caputo import CaputoSpec, ScalarOracle, caputo, relation_residual
from fracgd.catalog import (
    diagonal_quadratic,
    holder_problem,
    polynomial_oracle,
    rotated_quadratic,
    scalar_catalog,
)
from fracgd.descent import DescentConfig, LambdaSchedule, frac_grad_operator, run_descent
from fracgd.harness.certify import run_certify
from fracgd.harness.cli import main as cli_main
from fracgd.harness.config import load_experiment
from fracgd.harness.runner import run_experiment
from fracgd.quadratic import QuadraticForm, closed_form_operator, run_quadratic_frac
from fracgd.schedules import feasible_lambda_interval, telescoping_lhs, telescoping_rhs


@pytest.fixture
def verdict(capsys):
    def report(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[criterion {number:>2}] {'PASS' if ok else 'FAIL'}  {title}  {detail}")
        assert ok, f"criterion {number} failed: {detail}"

    return report


def _ordered_pairs(rng, n, lo=-2.0, hi=2.0, gap=0.05):
    out = []
    while len(out) < n:
        a, b = rng.uniform(lo, hi, size=2)
        if abs(a - b) >= gap:
            out.append((min(a, b), max(a, b)))
    return out


def test_criterion_01_caputo_limits(verdict):
    funcs = {
        "t^2": ScalarOracle(lambda t: t * t, lambda t: 2 * t),
        "t^3": ScalarOracle(lambda t: t**3, lambda t: 3 * t * t),
        "sin": ScalarOracle(np.sin, np.cos),
    }
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for oracle in funcs.values():
        for c, x in _ordered_pairs(rng, 20):
            d1 = float(oracle.deriv1(np.array(x)))
            near_one = caputo(oracle, CaputoSpec(1 - 1e-4, c), x)
            worst = max(worst, abs(near_one - d1) / (1e-2 * (1 + abs(d1))))
            jump = float(oracle.value(np.array(x)) - oracle.value(np.array(c)))
            near_zero = caputo(oracle, CaputoSpec(1e-4, c), x)
            worst = max(worst, abs(near_zero - jump) / (1e-2 * (1 + abs(jump))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1.0 and elapsed < 1.0
    verdict(1, "Caputo order limits", ok, f"worst error/tol={worst:.3f}, runtime={elapsed:.3f}s")


def test_criterion_02_relation_identity(verdict):
    rng = np.random.default_rng(202)
    start = time.perf_counter()
    worst = 0.0
    for i in range(100):
        degree = int(rng.integers(1, 7))
        oracle = polynomial_oracle(rng.normal(size=degree + 1))
        if i % 2:
            # the independent route without second derivatives
            oracle = ScalarOracle(oracle.value, oracle.deriv1)
        alpha = float(rng.uniform(0.05, 0.95))
        c, x = rng.uniform(-2, 2, size=2)
        if abs(c - x) < 1e-3:
            x = c + 0.5
        lhs, rhs = relation_residual(oracle, alpha, float(c), float(x))
        worst = max(worst, abs(lhs - rhs))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 5.0
    verdict(2, "Caputo/derivative relation identity", ok, f"max |lhs-rhs|={worst:.2e}, runtime={elapsed:.2f}s")


def test_criterion_03_certificate_suite(verdict, tmp_path):
    report = run_certify("all", samples=50, seed=0)
    kinds = ("smooth", "uniform_convex", "order2_upper", "order2_lower", "sandwich")
    bound_rows = [r for r in report.records if r.certificate in kinds]
    raw_worst = min(r.worst_margin for r in bound_rows)
    code = cli_main(["certify", "all", "--out", str(tmp_path)])
    ok = report.total_checks >= 500 and raw_worst >= -1e-6 and report.passed and code == 0
    verdict(3, "certificate suite", ok,
            f"checks={report.total_checks}, worst bound margin={raw_worst:.2e}, cli exit={code}")


def test_criterion_04_separable_contraction(verdict):
    Q = diagonal_quadratic([10.0, 1.0], convention="plain")
    problem = Q.problem()
    consts = k_constants(problem.profile, 0.5, -0.4)
    lo, hi = feasible_lambda_interval(consts, 1e-3)
    # with K1 < 0 and K2 < |K1| every positive lambda is feasible
    upper = [hi * f for f in (0.1, 0.5, 0.99)] if math.isfinite(hi) else [0.01, 0.1, 1.0]
    lams = [lo * f for f in (0.99, 0.5, 0.1)] + [0.0] + upper
    worst = -math.inf
    for lam in lams:
        cfg = DescentConfig("FracSC-separable", alpha=0.5, beta=-0.4, phi=1.0,
                            lam=LambdaSchedule("constant", lam), horizon=200)
        tr = run_descent(problem, cfg, [1.0, -10.0])
        d, rho = np.array(tr.dist_sq), np.array(tr.rho[:-1])
        worst = max(worst, float(np.max(d[1:] - rho * d[:-1])))
    ok = worst <= 1e-9
    verdict(4, "separable strongly convex contraction", ok,
            f"{len(lams)} lambdas in ({lo:.4f}, {hi:.4f}), max excess={worst:.2e}")


def test_criterion_05_general_contraction(verdict):
    Q = rotated_quadratic([1.0, 2.0, 4.0, 7.0, 10.0], seed=5, b=[1.0, -2.0, 0.5, 0.0, 3.0])
    problem = Q.problem()
    worst, count = -math.inf, 0
    for lam in (-0.002, -0.0005, 0.0005, 0.002):
        cfg = DescentConfig("FracSC-general", alpha=0.5, beta=-0.4, lam=LambdaSchedule("constant", lam),
                            horizon=200)
        tr = run_descent(problem, cfg, np.ones(5))
        d, rho = np.array(tr.dist_sq), np.array(tr.rho[:-1])
        assert np.all((rho > 0) & (rho < 1))
        worst = max(worst, float(np.max(d[1:] - rho * d[:-1])))
        count += 1
    ok = worst <= 1e-9
    verdict(5, "general strongly convex contraction (k=5, rotated)", ok,
            f"{count} lambdas, max excess={worst:.2e}")


def _convex_problems():
    out = []
    for entry in scalar_catalog("quadratics"):
        # a/2 t^2 + b t in one dimension
        coef = entry.oracle.value.coef
        out.append(QuadraticForm([[2 * coef[2]]], b=[coef[1]]))
    out.append(diagonal_quadratic([20.0, 2.0, 0.5]))
    return out


def test_criterion_06_convex_rates(verdict):
    alpha, beta, s0 = 0.5, -0.4, 5.0
    checks, failures = 0, []
    pairs_ok = True
    for Q in _convex_problems():
        problem = Q.problem()
        L = Q.L
        x0 = Q.x_opt + np.linspace(1.0, -2.0, Q.dim)
        d0 = float(np.sum((x0 - Q.x_opt) ** 2))
        gamma = (1 - alpha) / (2 - alpha)
        K1, K2 = 0.5 * L * (beta - gamma), -0.5 * L * (beta - gamma)
        lam = -0.3 / (K2 * (1 + (math.sqrt(2) + 1) / (math.sqrt(2) - 1)))
        r = (1 - lam * K1 - abs(lam) * K2) / (1 - lam * K1 + abs(lam) * K2)
        constants = {
            "FracCvx-separable": L * d0 / (4 * r * r - 2),
            "FracCvx-general": 0.5 * L * ((s0 + 1) ** 2 / (s0 * s0 - 4 * s0 - 1) + 2 / s0) * d0,
        }
        for method, C in constants.items():
            lam_cfg = LambdaSchedule("constant", lam) if method == "FracCvx-separable" else None
            cfg = DescentConfig(method, alpha=alpha, beta=beta, lam=lam_cfg, s0=s0, horizon=1000)
            tr = run_descent(problem, cfg, x0)
            xs = np.array(tr.x)
            for T in (10, 100, 1000):
                xbar = xs[1:T + 1].mean(axis=0)
                gap = Q.value(xbar) - Q.f_opt
                checks += 1
                if not gap <= C / T:
                    failures.append((method, Q.dim, T, gap, C / T))
            if method == "FracCvx-general":
                s = tr.s
                pairs_ok &= all(telescoping_lhs(b) <= telescoping_rhs(a) for a, b in zip(s, s[1:]))
    ok = not failures and pairs_ok
    verdict(6, "convex average-iterate rates", ok,
            f"{checks} rate checks, failures={failures}, telescoping pairs ok={pairs_ok}")


def test_criterion_07_holder_nonconvex(verdict):
    rows = []
    for p, lam in ((0.5, 0.5), (1.0, 0.5)):
        problem = holder_problem(3, p)
        L = problem.profile.L
        cfg = DescentConfig("FracNonconvex", alpha=p, lam=LambdaSchedule("constant", lam), horizon=1000)
        x0 = np.array([1.5, -0.7, 2.0])
        tr = run_descent(problem, cfg, x0)
        K = L * (1 - p) / (1 + p - p)
        lead = lam ** (1 - p)
        m, P = lead - K * lam, lead + K * lam
        eta_max = ((1 + p) * m / (L * P ** (1 + p))) ** (1 / p)
        eta = eta_max / 2
        psi = eta * (m - L / (1 + p) * eta**p * P ** (1 + p))
        grads = np.abs(np.array([problem.gradient(x) for x in tr.x])) ** (1 + 1 / p)
        lhs = float(grads.sum(axis=1).min())
        rhs = (tr.f[0] - 0.0) / (1001 * psi)
        rows.append((p, lhs, rhs, lhs <= rhs))
    ok = all(r[-1] for r in rows)
    detail = ", ".join(f"p={p}: {lhs:.3e} <= {rhs:.3e}" for p, lhs, rhs, _ in rows)
    verdict(7, "Hölder non-convex min-gradient bound (T=1000)", ok, detail)


def test_criterion_08_quadratic_closed_form(verdict):
    rng = np.random.default_rng(808)
    worst_eq, bound_fail, instances = 0.0, 0, 0
    while instances < 100:
        k = int(rng.integers(2, 6))
        eig = rng.uniform(1.0, 10.0, size=k)
        b = rng.normal(size=k)
        Q = rotated_quadratic(eig, seed=instances, b=b) if instances % 2 else diagonal_quadratic(eig, b=b)
        alpha = float(rng.uniform(0.1, 0.9))
        beta = float(rng.uniform(-1.0, 0.0))
        delta = float(rng.uniform(0.0, 0.9))
        op = closed_form_operator(Q, alpha, beta, delta, verify=0)
        x = rng.normal(size=k)
        got = frac_grad_operator(Q.problem(), alpha, beta, x + op.lam * Q.gradient(x), x)
        worst_eq = max(worst_eq, float(np.max(np.abs(got - op(x)))))
        run = run_quadratic_frac(Q, alpha, beta, delta, 200, rng.normal(size=k))
        bound_fail += not run.bound_ok
        instances += 1

    kappa_fail = 0
    for _ in range(200):
        k = int(rng.integers(2, 7))
        diag = rng.uniform(0.1, 100.0, size=k)
        Q = diagonal_quadratic(diag)
        op = closed_form_operator(Q, 0.5, -0.4, float(rng.uniform(1e-6, 0.5)), verify=0)
        kappa_fail += not op.kappa <= Q.kappa * (1 + 1e-12)
    ok = worst_eq <= 1e-8 and bound_fail == 0 and kappa_fail == 0
    verdict(8, "quadratic closed form", ok,
            f"max |quad - closed|={worst_eq:.2e}, runs over bound={bound_fail}/100, "
            f"kappa(A')>kappa(A) cases={kappa_fail}/200")


def test_criterion_09_builtin_orderings(verdict):
    start = time.perf_counter()
    its = {}
    for name in ("fig1", "fig3", "fig4"):
        result = run_experiment(load_experiment(name))
        for s in result.summaries:
            its[(name, s.method)] = s.iterations_to_tol
    elapsed = time.perf_counter() - start

    def fewer(name, method):
        a, gd = its[(name, method)], its[(name, "GD-optimal")]
        return a is not None and gd is not None and a < gd

    fig1 = fewer("fig1", "AT-CFGD") and fewer("fig1", "Frac-optimal")
    fig3 = fewer("fig3", "Frac-optimal")
    fig4 = not fewer("fig4", "Frac-optimal")
    ok = fig1 and fig3 and fig4 and elapsed < 10.0
    detail = (f"fig1 GD={its[('fig1', 'GD-optimal')]} AT-CFGD={its[('fig1', 'AT-CFGD')]} "
              f"Frac={its[('fig1', 'Frac-optimal')]}; fig3 GD={its[('fig3', 'GD-optimal')]} "
              f"Frac={its[('fig3', 'Frac-optimal')]}; fig4 GD={its[('fig4', 'GD-optimal')]} "
              f"Frac={its[('fig4', 'Frac-optimal')]}; runtime={elapsed:.2f}s")
    verdict(9, "builtin experiment orderings", ok, detail)


def test_criterion_10_zero_lambda_degeneracy(verdict):
    zero = LambdaSchedule("constant", 0.0)
    problems = [diagonal_quadratic([20.0, 2.0]).problem(),
                rotated_quadratic([1.0, 3.0, 8.0], seed=3, b=[1.0, 0.0, -1.0]).problem()]
    worst = 0.0
    for problem in problems:
        x0 = np.linspace(1.0, -3.0, problem.dim)
        gd = np.array(run_descent(problem, DescentConfig("GD", horizon=100), x0).x)
        for method in ("FracSC-separable", "FracSC-general", "FracCvx-separable", "FracCvx-general",
                       "FracNonconvex"):
            cfg = DescentConfig(method, alpha=0.5, beta=-0.4, lam=zero, horizon=100)
            xs = np.array(run_descent(problem, cfg, x0).x)
            worst = max(worst, float(np.max(np.abs(xs - gd))))
    ok = worst <= 1e-10
    verdict(10, "zero-lambda traces equal gradient descent", ok, f"max deviation={worst:.2e}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
