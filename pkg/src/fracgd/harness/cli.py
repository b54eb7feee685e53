"""Command-line entry point.

Exit codes: 0 when every bound check passes, 1 when a check fails,
2 for configuration errors, 3 for infeasible hyperparameters and
4 when a run diverges.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from ..errors import DivergenceError, FracGDError, InfeasibleError, ParameterError, UnsupportedSettingError
from .certify import run_certify
from .config import ConfigError, load_experiment
from .report import load_report_spec, quadratic_report
from .runner import run_experiment, slug

EXIT_OK, EXIT_BOUND, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_DIVERGED = 0, 1, 2, 3, 4

log = logging.getLogger("fracgd")


def _cmd_run(args) -> int:
    exp = load_experiment(args.config)
    result = run_experiment(exp, Path(args.out), tol=args.tol, emit_plots=args.emit_plots or None)
    print(f"{'method':<20} {'iters':>7} {'final error':>12}  bounds")
    for s in result.summaries:
        its = "-" if s.iterations_to_tol is None else str(s.iterations_to_tol)
        print(f"{s.method:<20} {its:>7} {s.final_error:12.3e}  {'ok' if s.bound_ok else 'FAILED'}")
    print(f"wrote {len(result.files)} files to {Path(args.out) / slug(exp.name)}")
    return EXIT_OK if result.all_ok else EXIT_BOUND


def _cmd_certify(args) -> int:
    if args.samples < 1:
        raise ConfigError("--samples must be positive")
    kw = {} if args.tol is None else {"tol": args.tol}
    report = run_certify(args.catalog, samples=args.samples, seed=args.seed, **kw)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"certify_{slug(args.catalog)}.csv"
    report.write(path)
    bad = [r for r in report.records if not r.passed]
    for r in bad:
        print(f"FAILED {r.function} {r.certificate}: worst margin {r.worst_margin:.3e}")
    print(f"{report.total_checks} checks over {len(report.records)} certificate rows, "
          f"{len(bad)} failing; report at {path}")
    return EXIT_OK if report.passed else EXIT_BOUND


def _cmd_report(args) -> int:
    spec = load_report_spec(args.spec)
    report = quadratic_report(spec, tol=args.tol)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"quadratic_{slug(Path(args.spec).stem)}.csv"
    report.write(path)
    head = ("Delta", "kappa(A)", "kappa(A')", "faster", "iters", "gd")
    print("{:>7} {:>9} {:>10} {:>7} {:>6} {:>6}".format(*head))
    for r in report.rows:
        if not r.feasible:
            print(f"{r.Delta:7.3f} {r.kappa_A:9.3f}  infeasible: some D_ii <= 0")
            continue
        its = "-" if r.iterations_frac is None else str(r.iterations_frac)
        gd = "-" if r.iterations_gd is None else str(r.iterations_gd)
        print(f"{r.Delta:7.3f} {r.kappa_A:9.3f} {r.kappa_Aprime:10.3f} {str(r.frac_faster):>7} {its:>6} {gd:>6}")
    print(f"report at {path}")
    return EXIT_OK if report.passed else EXIT_BOUND


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="fracgd-out", help="output directory (default: %(default)s)")
    common.add_argument("--tol", type=float, default=None, help="convergence or certificate tolerance")
    common.add_argument("--emit-plots", action="store_true", help="write SVG plots next to the CSVs")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="fracgd", description="Fractional gradient descent experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="run an experiment config (path or builtin: fig1, fig3, fig4)")
    p.add_argument("config")
    p.set_defaults(func=_cmd_run)
    p = sub.add_parser("certify", parents=[common], help="certificate sweep over a function catalog")
    p.add_argument("catalog", help="quadratics, polynomials, holder, affine, all, or a comma-separated list")
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_certify)
    p = sub.add_parser("quadratic-report", parents=[common], help="condition-number sweep over Delta")
    p.add_argument("spec", help="report spec path or builtin: diag20-2, fig3, fig4")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc.condition} ({exc})", file=sys.stderr)
        return EXIT_INFEASIBLE
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ConfigError, ParameterError, UnsupportedSettingError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FracGDError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
