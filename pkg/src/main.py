"""
Main Application Module

Command-line entry point for kreiss-lab. Parses arguments, merges them with
the configuration file and dispatches to one subcommand:

growth, kreiss, lp, technical, bootstrap, exponents, config

Exit codes: 0 success, 1 internal or convergence error, 2 usage error.
"""

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import bounds, experiments, kreiss
from .config import Settings, apply_env_overrides, load_config, merge_cli_args
from .errors import DomainError, KreissLabError
from .symbols import mobius_symbol, scalar_operator, shift_operator
from .torus import FourierSeries

logger = logging.getLogger(__name__)

LOG_LEVELS = ['debug', 'info', 'warning', 'error', 'critical']


def configure_logging(log_level: str = None):
    """
    Configure logging based on the specified level.

    Args:
        log_level: Logging level ('debug', 'info', 'warning', 'error', 'critical')
                  If None, logging is effectively disabled (level 100)
    """
    if log_level is None:
        level = 100
    else:
        level = getattr(logging, log_level.upper(), 100)

    # stderr only: stdout carries reports
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True
    )


def p_value(text: str) -> float:
    """argparse type for an exponent in [1, inf]."""
    try:
        p = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid exponent {text!r}")
    if math.isnan(p) or p < 1.0:
        raise argparse.ArgumentTypeError(f"p must be >= 1 (got {text})")
    return p


def int_list(text: str) -> List[int]:
    """'16..4096' (doubling), '10,20,40' or a single integer."""
    try:
        if ".." in text:
            start, stop = (int(part) for part in text.split("..", 1))
            if start < 1 or stop < start:
                raise ValueError
            values = []
            value = start
            while value <= stop:
                values.append(value)
                value *= 2
            return values
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START..STOP or a comma list of integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty integer list")
    return values


def float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list of numbers, got {text!r}")


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, default=None, help="Path to configuration file")
    common.add_argument('--seed', type=int, default=None, help="Base seed (default from config)")
    common.add_argument('--trials', type=int, default=None, help="Random trials per setting")
    common.add_argument('--threads', type=int, default=None, help="Worker threads (env KREISSLAB_THREADS)")
    common.add_argument('--tol', type=float, default=None, help="FFT stability tolerance")
    common.add_argument('--m-max', dest='m_max', type=int, default=None, help="Largest FFT grid")
    common.add_argument('--out', type=str, default=None, help="Write the report to FILE (CSV, or JSON with --json)")
    common.add_argument('--json', action='store_true', help="Emit a JSON report")

    log_group = common.add_mutually_exclusive_group()
    log_group.add_argument('--log-level', type=str, choices=LOG_LEVELS, help="Set logging level (default: no logging)")
    log_group.add_argument('--verbose', '-v', action='store_true', help="Enable verbose (info level) logging")
    log_group.add_argument('--debug', action='store_true', help="Enable debug level logging")
    return common


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per experiment."""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="kreiss-lab",
        description="Numerical lab for Kreiss-type conditions and power growth of convolution operators",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  kreiss-lab growth --a 0.5 --p 1 --n 16..4096 --out growth.csv
  kreiss-lab kreiss --kind strong --operator mobius --a 0.5 --p 1
  kreiss-lab lp --kind forward --p 2 --L 1..16 --trials 1000 --json
  kreiss-lab technical --N 100,1000,10000 --json
  kreiss-lab bootstrap --p 4 --N 1000000
  kreiss-lab exponents --p 1.3333333333333333,2,4
        """
    )
    sub = parser.add_subparsers(dest="command", required=True)

    growth = sub.add_parser("growth", parents=[common], help="Norm brackets of q_a(S)^N")
    growth.add_argument('--a', type=float, default=0.5, help="Moebius parameter in [0, 1)")
    growth.add_argument('--p', type=p_value, default=1.0, help="Exponent in [1, inf]")
    growth.add_argument('--n', type=int_list, default=int_list("16..4096"), help="Powers: START..STOP (doubling) or a list")
    growth.add_argument('--no-refine', action='store_true', help="Skip dual power iteration")
    growth.add_argument('--log-correction', action='store_true', help="Fit a log log N term as well")

    kr = sub.add_parser("kreiss", parents=[common], help="Kreiss-type constants")
    kr.add_argument('--kind', choices=["kreiss", "iterated", "strong", "absolute", "window"], default="kreiss")
    kr.add_argument('--operator', choices=["mobius", "shift", "scalar"], default="mobius")
    kr.add_argument('--a', type=float, default=0.5, help="Moebius parameter")
    kr.add_argument('--scale', type=float, default=1.0, help="Scale of the shift / value of the scalar")
    kr.add_argument('--p', type=p_value, default=1.0)
    kr.add_argument('--k-max', dest='k_max', type=int, default=5, help="Highest resolvent power (iterated)")
    kr.add_argument('--depth', type=int, default=None, help="Moduli reach 1 + 2^-depth")
    kr.add_argument('--phases', type=int, default=None)
    kr.add_argument('--radii', type=float_list, default=None, help="Comma list of radii (default 40 geometric in [1, 100])")
    kr.add_argument('--n', type=int_list, default=None, help="N values for the window sum")
    kr.add_argument('--n-max', dest='n_max', type=int, default=None, help="Orbit length for the absolute condition")

    lp = sub.add_parser("lp", parents=[common], help="Square-function inequality search")
    lp.add_argument('--kind', choices=["forward", "weak-l1", "reverse", "blocks", "stechkin"], default="forward")
    lp.add_argument('--p', type=p_value, default=2.0)
    lp.add_argument('--L', dest='L', type=int_list, default=int_list("1..16"), help="Family sizes")
    lp.add_argument('--freq-range', dest='freq_range', type=int, default=256)
    lp.add_argument('--support-size', dest='support_size', type=int, default=32)
    lp.add_argument('--m', type=int, default=None, help="Quadrature grid size")
    lp.add_argument('--repeat-interval', dest='repeat_interval', action='store_true', help="weak-l1: L copies of one interval")

    tech = sub.add_parser("technical", parents=[common], help="Stirling ratios and window masses")
    tech.add_argument('--N', dest='N', type=int_list, default=[100, 1000, 10000])

    boot = sub.add_parser("bootstrap", parents=[common], help="Exponent bootstrap trajectory")
    boot.add_argument('--p', type=p_value, default=2.0)
    boot.add_argument('--N', dest='N', type=int, default=10**6)
    boot.add_argument('--alpha0', type=float, default=None, help="Starting exponent (1, or 1/2 with --window)")
    boot.add_argument('--K', dest='K', type=int, default=None, help="Override the number of steps")
    boot.add_argument('--log-ep', dest='log_ep', type=float, default=0.0)
    boot.add_argument('--log-c', dest='log_c', type=float, default=0.0)
    boot.add_argument('--slack', type=float, default=0.0)
    boot.add_argument('--window', action='store_true', help="Windowed power-sum iteration (1 <= p <= 2)")

    expo = sub.add_parser("exponents", parents=[common], help="delta_p, tau_p and friends")
    expo.add_argument('--p', type=float_list, default=[4 / 3, 1.5, 2.0, 3.0, 4.0])

    sub.add_parser("config", parents=[common], help="Print the merged settings")
    return parser


def _resolve_out(settings: Settings, out: Optional[str]) -> Optional[Path]:
    if out is None:
        return None
    path = Path(out)
    return path if path.is_absolute() else Path(settings.output_dir) / path


def _emit(args, settings: Settings, payload: dict, columns: Optional[Sequence[str]] = None, rows=None, summary: str = "") -> None:
    """Write CSV/JSON to --out and/or print to stdout."""
    out = _resolve_out(settings, args.out)
    if out is not None:
        if args.json or columns is None:
            experiments.write_json(payload, out)
        else:
            experiments.write_rows(columns, rows, out)
    if args.json and out is None:
        sys.stdout.write(experiments.dumps_report(payload))
    elif summary:
        print(summary)


def _run_config(args, settings: Settings) -> int:
    sys.stdout.write(experiments.dumps_report(settings.as_dict()))
    return 0


def _run_growth(args, settings: Settings) -> int:
    series = experiments.growth_experiment(
        args.a, args.p, args.n, tol=settings.tol, m_max=settings.m_max,
        refine=not args.no_refine, seed=settings.seed, threads=settings.resolved_threads(),
    )
    result = series.as_dict()
    if len(series.entries) >= 3 and all(b.lower > 0 for _, b in series.entries):
        result["fits"] = {
            member: experiments.fit_exponent(series, args.log_correction, member).as_dict()
            for member in ("lower", "mid", "upper")
        }
    config = {"a": args.a, "p": args.p, "Ns": args.n, "tol": settings.tol, "refine": not args.no_refine, "seed": settings.seed}
    lines = [f"{N:>8d}  [{b.lower:.10g}, {b.upper:.10g}]  {b.lower_method}/{b.upper_method}" for N, b in series.entries]
    _emit(args, settings, experiments.json_report("growth", config, result), experiments.GROWTH_COLUMNS, series.rows(), "\n".join(lines))
    return 0


def _operator(args):
    if args.operator == "mobius":
        return mobius_symbol(args.a)
    if args.operator == "shift":
        return shift_operator(1, args.scale)
    return scalar_operator(args.scale)


def _run_kreiss(args, settings: Settings) -> int:
    T = _operator(args)
    phases = args.phases or settings.phases
    common = dict(tol=settings.tol, m_max=settings.m_max)
    e0 = FourierSeries.monomial(0)
    if args.kind in ("kreiss", "iterated"):
        depth = settings.kreiss_depth if args.depth is None else args.depth
        report = kreiss.kreiss_constant(
            T, args.p, k_max=1 if args.kind == "kreiss" else args.k_max,
            moduli=kreiss.default_moduli(depth), phases=phases,
            floor=settings.singularity_floor, threads=settings.resolved_threads(),
            divergence_slope=settings.divergence_slope, **common,
        )
        anchor = "kreiss"
    elif args.kind == "strong":
        report = kreiss.strong_kreiss_constant(
            T, args.p, radii=args.radii, phases=phases, threads=settings.resolved_threads(),
            divergence_slope=settings.divergence_slope, **common,
        )
        anchor = "strong_kreiss"
    elif args.kind == "absolute":
        report = kreiss.absolute_strong_kreiss_constant(
            T, args.p, e0, radii=args.radii, n_max=args.n_max,
            divergence_slope=settings.divergence_slope, **common,
        )
        anchor = "absolute_strong_kreiss"
    else:
        report = kreiss.window_power_sum_constant(
            T, args.p, e0, args.n or int_list("16..1024"),
            divergence_slope=settings.divergence_slope, **common,
        )
        anchor = "window_power_sum"

    config = {"operator": T.descriptor, "kind": args.kind, "p": args.p, "phases": phases, "tol": settings.tol}
    summary = (
        f"{report.kind.value} constant of {T.descriptor} at p={args.p}: {report.constant:.10g}"
        f"{' (diverging: lower estimate only)' if report.diverging else ''}"
        f"{f' ({len(report.unresolved)} moduli unresolved)' if report.unresolved else ''}"
    )
    rows = [[param, value] for param, value in report.samples]
    _emit(args, settings, experiments.json_report(anchor, config, report.as_dict()), ["parameter", "value"], rows, summary)
    return 0


def _run_lp(args, settings: Settings) -> int:
    cfg = experiments.ExperimentConfig(
        seed=settings.seed, trials=settings.trials, p=args.p, Ls=tuple(args.L),
        freq_range=args.freq_range, m=args.m, support_size=args.support_size,
        repeat_interval=args.repeat_interval, tol=settings.tol, threads=settings.resolved_threads(),
    )
    kind = args.kind.replace("-", "_")
    report = experiments.lp_inequality_experiment(kind, cfg)
    rows = experiments.lp_rows(report)
    summary = "\n".join(
        [f"L={row[0]:>4d}  worst {row[1]:.10g}  mean {row[2]:.10g}  witness {row[3]}" for row in rows]
        + [f"finding: {finding}" for finding in report.findings]
    )
    _emit(args, settings, experiments.json_report(kind, cfg.as_dict(), report.as_dict()), experiments.LP_COLUMNS, rows, summary)
    return 0


def _run_technical(args, settings: Settings) -> int:
    reports = [bounds.technical_check(N) for N in args.N]
    result = {"reports": [r.as_dict() for r in reports]}
    if len(reports) == 1:
        result.update(reports[0].as_dict())
    summary = "\n".join(
        f"N={r.N}: ratios [{r.min_ratio:.6g}, {r.max_ratio:.6g}], r_0={r.ratio_at_zero:.6g}, "
        f"variation {r.variation_sum_scaled:.6g}"
        for r in reports
    )
    _emit(args, settings, experiments.json_report("technical", {"N": args.N}, result), summary=summary)
    return 0


def _run_bootstrap(args, settings: Settings) -> int:
    if args.window:
        alpha0 = 0.5 if args.alpha0 is None else args.alpha0
        state = bounds.window_bootstrap_trajectory(alpha0, args.p, log_C=args.log_c, N=args.N, K=args.K)
    else:
        alpha0 = 1.0 if args.alpha0 is None else args.alpha0
        state = bounds.bootstrap_trajectory(
            alpha0, args.p, log_Ep=args.log_ep, N=args.N, K=args.K, log_C=args.log_c, slack=args.slack,
        )
    config = {"p": args.p, "N": args.N, "alpha0": alpha0, "K": args.K, "window": args.window}
    summary = f"K={state.K}: exponent {state.exponent:.12g} (fixed point {state.fixed_point:.12g}), kappa {state.kappa:.6g}"
    _emit(args, settings, experiments.json_report("bootstrap", config, state.as_dict()), summary=summary)
    return 0


def _run_exponents(args, settings: Settings) -> int:
    records = []
    for p in args.p:
        record = bounds.exponents(p).as_dict()
        record["final_power_exponent"] = bounds.final_power_exponent(p)
        record["positive_exponent"] = bounds.positive_exponent(p)
        record["improves_on_tau"] = bounds.improves_on_tau(p)
        records.append(record)
    summary = "\n".join(
        f"p={r['p']:.6g}: delta={r['delta_p']:.6g} tau={r['tau_p']:.6g} 1/p_bar={r['positive_exponent']:.6g}"
        for r in records
    )
    _emit(args, settings, experiments.json_report("exponents", {"p": args.p}, {"records": records}), summary=summary)
    return 0


COMMANDS = {
    "config": _run_config,
    "growth": _run_growth,
    "kreiss": _run_kreiss,
    "lp": _run_lp,
    "technical": _run_technical,
    "bootstrap": _run_bootstrap,
    "exponents": _run_exponents,
}


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse argv and run one subcommand.

    Returns:
        0 on success, 1 on internal/convergence errors, 2 on usage errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code is None else int(e.code)

    # Enable logging early so config load messages are visible
    if args.debug or args.verbose or args.log_level:
        configure_logging('debug' if args.debug else ('info' if args.verbose else args.log_level))

    settings = load_config(Path(args.config) if args.config else None)
    settings = apply_env_overrides(settings)
    settings = merge_cli_args(settings, args)
    configure_logging(settings.log_level)

    try:
        return COMMANDS[args.command](args, settings)
    except DomainError as e:
        logger.error(f"Usage error: {e}")
        print(f"kreiss-lab {args.command}: error: {e}", file=sys.stderr)
        return 2
    except KreissLabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"kreiss-lab {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        logger.exception(f"Fatal error: {e}")
        print(f"kreiss-lab {args.command}: internal error: {e}", file=sys.stderr)
        return 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Console-script entry point."""
    return run_cli(argv)


if __name__ == "__main__":
    sys.exit(main())
