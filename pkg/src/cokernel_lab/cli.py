"""Command-line entry points.

Exit codes: 0 success, 2 a check suite failed, 3 an enumeration budget was
exceeded, 4 invalid configuration (bad flags, bad group, bad primes).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .abelian import make_group
from .diagnostics import (
    CheckResult,
    DiagnosticsReport,
    SUITES,
    run_diagnostics,
    suite_detection,
    suite_divergence,
    suite_laplace,
    suite_riemann,
)
from .errors import (
    BudgetExceeded,
    CokernelLabError,
    NumericalDegeneracy,
    OutOfRange,
    SuiteFailure,
)
from .harness import (
    ExperimentConfig,
    census_summary,
    moment_scan_summary,
    resolve_threads,
    run_hypertree_census,
    run_moment_scan,
    run_sylow_census,
)
from .hypertree import kalai_check
from .laplace import gaussian_riemann_sum, taylor_residual
from .seeds import derive_seed, make_rng


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; config errors must exit 4 instead
    def error(self, message):
        raise OutOfRange(message)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise OutOfRange(f"expected comma-separated integers, got {text!r}") from exc
    if not vals:
        raise OutOfRange(f"empty integer list {text!r}")
    return vals


def _add_common(p: argparse.ArgumentParser, *, out: bool = True):
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default COKERNEL_LAB_THREADS or 1)")
    if out:
        p.add_argument("--out", type=Path, default=None, help="output directory for records/report files")


def build_parser() -> _Parser:
    parser = _Parser(prog="cokernel-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("census", help="sample structured matrices, tally cokernel Sylow classes")
    p.add_argument("--n", type=int, required=True, help="matrix size")
    p.add_argument("--primes", type=_int_list, default=(5,), help="comma-separated primes, each >= 5")
    p.add_argument("--replicas", type=int, default=200)
    _add_common(p)

    p = sub.add_parser("hypertree-census", help="sample spanning hypertrees, tally homology Sylow classes")
    p.add_argument("--n", type=int, required=True, help="vertex count")
    p.add_argument("--primes", type=_int_list, default=(2, 3), help="comma-separated primes (p=2 comparison is study-only)")
    p.add_argument("--replicas", type=int, default=200)
    _add_common(p)

    p = sub.add_parser("moment-scan", help="exact surjection moments over an n grid, optional MC cross-check")
    p.add_argument("--n", type=_int_list, required=True, help="comma-separated n grid")
    p.add_argument("--group", type=_int_list, required=True, help="invariant factors, e.g. 5 or 5,5")
    p.add_argument("--replicas", type=int, default=0, help="MC replicas per n (0 = exact only)")
    p.add_argument("--window-constant", type=float, default=1.0, help="heuristic window scale C")
    p.add_argument("--budget", type=int, default=5_000_000, help="max type-space size")
    p.add_argument("--exact", action="store_true", help="force exact rational moments")
    _add_common(p)

    p = sub.add_parser("diagnostics", help="run cross-validation suites")
    p.add_argument("--suites", type=str, default=None, help=f"comma list from {sorted(SUITES)}")
    p.add_argument("--budget", type=int, default=2000, help="trial count scale")
    _add_common(p, out=False)

    p = sub.add_parser("laplace-check", help="derivative and lattice-sum checks for the rate function")
    p.add_argument("--group", type=_int_list, default=(5,), help="invariant factors")
    p.add_argument("--n", type=int, default=10_000, help="scale for the gaussian lattice sum")
    p.add_argument("--radius", type=float, default=8.0, help="box radius in units of sqrt(n)")
    p.add_argument("--budget", type=int, default=2000, help="trial count scale")
    _add_common(p, out=False)

    p = sub.add_parser("divergence-check", help="divergence inequality and subgroup-detection checks")
    p.add_argument("--group", type=_int_list, default=None, help="invariant factors (default: a spread of groups)")
    p.add_argument("--replicas", type=int, default=10_000, help="random trials")
    _add_common(p, out=False)

    p = sub.add_parser("kalai-check", help="weighted spanning-count identity over all top-cell subsets")
    p.add_argument("--n", type=int, default=6, help="vertex count")
    p.add_argument("--budget", type=int, default=300_000, help="max subsets to enumerate")
    _add_common(p, out=False)

    return parser


def _cmd_census(args) -> int:
    cfg = ExperimentConfig(
        n_grid=(args.n,),
        primes=tuple(args.primes),
        replicas=args.replicas,
        seed=args.seed,
        out_dir=args.out,
        threads=resolve_threads(args.threads),
    )
    report = run_sylow_census(cfg)
    print(census_summary(report))
    if args.out:
        print(f"  outputs: records.jsonl, report.csv, report.png in {args.out}")
    return 0


def _cmd_hypertree_census(args) -> int:
    cfg = ExperimentConfig(
        n_grid=(args.n,),
        primes=tuple(args.primes),
        replicas=args.replicas,
        seed=args.seed,
        out_dir=args.out,
        threads=resolve_threads(args.threads),
    )
    report = run_hypertree_census(cfg)
    print(census_summary(report))
    if args.out:
        print(f"  outputs: records.jsonl, report.csv, report.png in {args.out}")
    return 0


def _cmd_moment_scan(args) -> int:
    cfg = ExperimentConfig(
        n_grid=tuple(args.n),
        group_factors=tuple(args.group),
        replicas=args.replicas,
        seed=args.seed,
        out_dir=args.out,
        window_constant=args.window_constant,
        budget=args.budget,
        threads=resolve_threads(args.threads),
        exact=True if args.exact else None,
    )
    report = run_moment_scan(cfg)
    print(moment_scan_summary(report))
    if args.out:
        print(f"  outputs: scan.csv, scan.png in {args.out}")
    return 0


def _finish_checks(report: DiagnosticsReport) -> int:
    print(report.summary())
    if not report.ok:
        raise SuiteFailure(f"{len(report.failures)} checks failed")
    return 0


def _cmd_diagnostics(args) -> int:
    suites = None
    if args.suites:
        suites = [s.strip() for s in args.suites.split(",") if s.strip()]
    report = run_diagnostics(suites=suites, seed=args.seed, trials=args.budget)
    return _finish_checks(report)


def _cmd_laplace_check(args) -> int:
    group = make_group(args.group)
    report = DiagnosticsReport()
    report.results += suite_laplace(args.seed, args.budget)
    report.results += suite_riemann(args.seed, args.budget)

    val = gaussian_riemann_sum(group.order, args.n, args.radius)
    report.results.append(
        CheckResult(
            "laplace-check",
            f"lattice sum at order {group.order}, n={args.n}, radius {args.radius}",
            abs(val - 1.0) < 1e-2,
            f"value={val:.6f}",
        )
    )

    rng = make_rng(derive_seed(args.seed, 99))
    direction = rng.standard_normal(group.order - 1)
    direction /= max(1e-12, np.abs(direction).max())
    prev = None
    decay_ok = True
    details = []
    for n in (256, 1024, 4096, 16384):
        res = taylor_residual(group, n, direction * 0.05 / np.sqrt(n))
        details.append(f"n={n}: {res:.3e}")
        if prev is not None and res > prev * 0.75:
            decay_ok = False
        prev = res
    report.results.append(
        CheckResult(
            "laplace-check",
            "cubic remainder decays along shrinking shifts",
            decay_ok,
            "; ".join(details),
        )
    )
    return _finish_checks(report)


def _cmd_divergence_check(args) -> int:
    report = DiagnosticsReport()
    factors = tuple(args.group) if args.group else None
    report.results += suite_divergence(args.seed, args.replicas, group_factors=factors)
    report.results += suite_detection(args.seed, args.replicas)
    return _finish_checks(report)


def _cmd_kalai_check(args) -> int:
    chk = kalai_check(args.n, budget=args.budget)
    print(
        f"kalai-check: n={chk.n} subsets={chk.subset_count} "
        f"spanning={chk.spanning_count}\n"
        f"  sum of squared determinants = {chk.total}\n"
        f"  weighted spanning count    = {chk.expected}"
    )
    if not chk.matches:
        raise SuiteFailure("squared-determinant total does not match weighted count")
    print("  identity holds")
    return 0


_COMMANDS = {
    "census": _cmd_census,
    "hypertree-census": _cmd_hypertree_census,
    "moment-scan": _cmd_moment_scan,
    "diagnostics": _cmd_diagnostics,
    "laplace-check": _cmd_laplace_check,
    "divergence-check": _cmd_divergence_check,
    "kalai-check": _cmd_kalai_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SuiteFailure as exc:
        print(f"check failure: {exc}", file=sys.stderr)
        return 2
    except NumericalDegeneracy as exc:
        print(f"degenerate run: {exc}", file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    except CokernelLabError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
