"""
Experiments Module

Seeded, reproducible drivers:

- growth_experiment: norm brackets of T^N for the Moebius operator q_a(S)
- fit_exponent: least squares of log ||T^N|| on log N (optionally log log N)
- lp_inequality_experiment: random search for the worst ratio in the
  square-function inequalities on the torus

Every random draw comes from numpy.random.default_rng([seed, trial, L]), so a
report depends only on its ExperimentConfig, never on the thread count.
Reported constants are empirical lower bounds on the best constants.
"""

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateFitError, DomainError
from .norms import NormBracket, conv_norm_bracket
from .symbols import DEFAULT_M_MAX, DEFAULT_TOL, mobius_symbol, symbol_pow
from .torus import (
    FourierSeries,
    IntervalSet,
    band_project,
    apply_multiplier,
    evaluate,
    next_pow2,
    samples_lp_norm,
    sequence_norm,
    square_function,
    weak_l1_norm,
)
from .workers import parallel_map

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
GROWTH_COLUMNS = ["N", "lower", "upper", "method_lower", "method_upper"]
LP_COLUMNS = ["L", "worst_ratio", "mean_ratio", "witness_seed"]
FORWARD_SLACK = 4.0
DOMINANCE_RTOL = 1e-10

ANCHORS = {
    "growth": "N^{|1/2-1/p|}/C_p <= ||q_a(S)^N||_p <= C_p N^{|1/2-1/p|}",
    "forward": "||(sum_l |M_{I_l} f|^2)^{1/2}||_p <= D_p L^{1/p'-1/2} ||f||_p, I_l disjoint",
    "weak_l1": "||(sum_l |M_{I_l} f|^2)^{1/2}||_{1,inf} <= D L^{1/2} ||f||_1, I_l arbitrary",
    "reverse": "||M_I f||_p <= C_p L^{1/2-1/p''} ||(sum_l |M_{I_l} f|^2)^{1/2}||_p <= C_p L^{1/2-1/p''} (sum_l ||M_{I_l} f||_p^{p'})^{1/p'}",
    "blocks": "||sum_{k<=L^2} c_k g^k||_p <= C L^{1/2-1/p''} (sum_n ||sum_{n^2<k<=(n+1)^2} c_k g^k||_p^{p'})^{1/p'}",
    "stechkin": "||sum_n a_n c_n g^n||_p <= D_p ||sum_n c_n g^n||_p, (a_n) monotone in [0, 1]",
    "technical": "e^N/(C sqrt N) <= N^{N+K}/(N+K)! <= C e^N/sqrt N, K in [2-2 sqrt N, 0]",
    "kreiss": "||R(lam,T)^k|| <= C/(|lam|-1)^k",
    "strong_kreiss": "||e^{zT}|| <= L e^{|z|}",
    "absolute_strong_kreiss": "sum_n r^n/n! ||T^n x|| <= C e^r ||x||",
    "window_power_sum": "sum_{N-2 sqrt N <= n <= N} ||T^n x||^p <= C N^{p/2} ||x||^p",
    "bootstrap": "alpha -> alpha/2 + delta_p, 2^K <= log N / log log N",
    "exponents": "tau_p = |1/2-1/p| = delta_p + delta_q - 1/2",
}


@dataclass(frozen=True)
class GrowthSeries:
    """(N, bracket of ||T^N||_p) for increasing N."""

    entries: Tuple[Tuple[int, NormBracket], ...]
    descriptor: str
    p: float

    def __post_init__(self):
        Ns = [N for N, _ in self.entries]
        if any(b <= a for a, b in zip(Ns, Ns[1:])):
            raise DomainError("growth series N values must be strictly increasing")

    @property
    def Ns(self) -> List[int]:
        return [N for N, _ in self.entries]

    def rows(self) -> List[list]:
        return [[N, b.lower, b.upper, b.lower_method, b.upper_method] for N, b in self.entries]

    def as_dict(self) -> dict:
        return {
            "descriptor": self.descriptor,
            "p": self.p,
            "entries": [dict(zip(GROWTH_COLUMNS, row)) for row in self.rows()],
        }


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    log_exponent: float
    max_residual: float
    member: str = "mid"

    def as_dict(self) -> dict:
        return asdict(self)


def growth_experiment(
    a: float,
    p: float,
    Ns: Sequence[int],
    tol: float = DEFAULT_TOL,
    m_max: int = DEFAULT_M_MAX,
    refine: bool = True,
    seed: int = 0,
    threads: Optional[int] = None,
) -> GrowthSeries:
    """
    Norm brackets of q_a(S)^N on l^p for every N in Ns.

    Args:
        a: Moebius parameter in [0, 1)
        p: exponent in [1, inf]
        Ns: strictly increasing powers
        refine: run dual power iteration for the lower member (p not in {1, 2, inf})
        seed: base seed of the power iteration restarts

    Returns:
        GrowthSeries
    """
    Ns = [int(N) for N in Ns]
    if not Ns or Ns[0] < 1 or any(b <= a_ for a_, b in zip(Ns, Ns[1:])):
        raise DomainError(f"Ns must be positive and strictly increasing, got {Ns}")
    T = mobius_symbol(a)

    def bracket(N: int) -> NormBracket:
        TN = symbol_pow(T, N, tol=tol, m_max=m_max)
        b = conv_norm_bracket(TN, p, refine=refine, seed=seed)
        logger.debug(f"N={N}: [{b.lower:.10g}, {b.upper:.10g}] ({b.lower_method}/{b.upper_method})")
        return b

    brackets = parallel_map(bracket, Ns, threads, name="growth")
    series = GrowthSeries(tuple(zip(Ns, brackets)), T.descriptor, float(p))
    logger.info(f"growth of {T.descriptor} at p={p}: {len(Ns)} powers up to N={Ns[-1]}")
    return series


def fit_power_law(Ns: Sequence[float], values: Sequence[float], use_log_correction: bool = False) -> ExponentFit:
    """log v = slope log N + intercept (+ log_exponent log log N)."""
    N = np.asarray(Ns, dtype=float)
    v = np.asarray(values, dtype=float)
    if N.size < 3:
        raise DomainError(f"need at least 3 points to fit, got {N.size}")
    if np.any(v <= 0.0) or not np.all(np.isfinite(v)):
        raise DomainError("fitted values must be finite and > 0")
    columns = [np.log(N), np.ones_like(N)]
    if use_log_correction:
        if np.any(N < 2):
            raise DomainError("the log log N regressor needs N >= 2")
        columns.append(np.log(np.log(N)))
    X = np.column_stack(columns)
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise DegenerateFitError(f"design matrix has rank {np.linalg.matrix_rank(X)} < {X.shape[1]}")
    y = np.log(v)
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    residual = float(np.max(np.abs(y - X @ beta)))
    return ExponentFit(
        slope=float(beta[0]),
        intercept=float(beta[1]),
        log_exponent=float(beta[2]) if use_log_correction else 0.0,
        max_residual=residual,
    )


def fit_exponent(series: GrowthSeries, use_log_correction: bool = False, member: str = "mid") -> ExponentFit:
    """
    Fit the growth exponent of a series.

    member selects the bracket value fitted: "mid" (geometric mean), "lower" or "upper".
    """
    pick = {
        "mid": lambda b: b.midpoint,
        "lower": lambda b: b.lower,
        "upper": lambda b: b.upper,
    }
    if member not in pick:
        raise DomainError(f"unknown bracket member {member!r}")
    if any(b.lower <= 0.0 for _, b in series.entries):
        raise DomainError("every bracket lower member must be > 0")
    values = [pick[member](b) for _, b in series.entries]
    fit = fit_power_law(series.Ns, values, use_log_correction)
    fit = ExponentFit(fit.slope, fit.intercept, fit.log_exponent, fit.max_residual, member)
    logger.info(f"{series.descriptor} p={series.p}: {member} slope {fit.slope:.6f}, residual {fit.max_residual:.3e}")
    return fit


class LpKind(str, Enum):
    FORWARD = "forward"
    WEAK_L1 = "weak_l1"
    REVERSE = "reverse"
    BLOCKS = "blocks"
    STECHKIN = "stechkin"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a square-function experiment depends on.

    Ls are the family sizes swept (for blocks: the number of quadratic
    blocks). Frequencies are drawn in [-freq_range, freq_range]. threads
    only schedules work and is left out of serialized reports.
    """

    seed: int = 20240101
    trials: int = 200
    p: float = 2.0
    Ls: Tuple[int, ...] = (1, 2, 4, 8, 16)
    freq_range: int = 256
    m: Optional[int] = None
    support_size: int = 32
    repeat_interval: bool = False
    tol: float = DEFAULT_TOL
    threads: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "Ls", tuple(int(L) for L in self.Ls))
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if not self.Ls or min(self.Ls) < 1:
            raise DomainError(f"Ls must be positive, got {self.Ls}")
        if self.p < 1.0:
            raise DomainError(f"p must be >= 1, got {self.p}")
        if self.freq_range < 1 or self.support_size < 1:
            raise DomainError("freq_range and support_size must be >= 1")

    @property
    def L(self) -> int:
        return max(self.Ls)

    def as_dict(self) -> dict:
        out = asdict(self)
        out.pop("threads")
        out["Ls"] = list(self.Ls)
        return out


@dataclass(frozen=True)
class LpRow:
    L: int
    worst_ratio: float
    mean_ratio: float
    witness: dict


@dataclass(frozen=True)
class LpReport:
    kind: LpKind
    config: ExperimentConfig
    rows: Tuple[LpRow, ...]
    findings: Tuple[str, ...] = ()
    dominance_violations: int = 0

    @property
    def worst_ratio(self) -> float:
        return max(row.worst_ratio for row in self.rows)

    @property
    def per_L_ratios(self) -> Dict[int, float]:
        return {row.L: row.worst_ratio for row in self.rows}

    @property
    def witness(self) -> dict:
        return max(self.rows, key=lambda row: row.worst_ratio).witness

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "worst_ratio": self.worst_ratio,
            "per_L_ratios": [[row.L, row.worst_ratio, row.mean_ratio] for row in self.rows],
            "witness": self.witness,
            "findings": list(self.findings),
            "dominance_violations": self.dominance_violations,
        }


def _grid_size(cfg: ExperimentConfig, top_frequency: int) -> int:
    required = next_pow2(4 * top_frequency + 1)
    if cfg.m is None:
        return max(64, required)
    if cfg.m < 2 * top_frequency + 1:
        raise DomainError(f"grid m={cfg.m} cannot resolve frequencies up to {top_frequency}")
    return cfg.m


def _random_series(rng: np.random.Generator, frequencies: np.ndarray, size: int) -> FourierSeries:
    """Complex standard normal coefficients on a random subset of the given frequencies."""
    chosen = np.sort(rng.choice(frequencies, size=min(size, frequencies.size), replace=False))
    values = rng.standard_normal(chosen.size) + 1j * rng.standard_normal(chosen.size)
    return FourierSeries.from_dict(dict(zip(chosen.tolist(), values.tolist())))


def _disjoint_intervals(rng: np.random.Generator, L: int, N: int) -> IntervalSet:
    """2L distinct endpoints in [-N, N], paired consecutively."""
    if 2 * L > 2 * N + 1:
        raise DomainError(f"cannot fit {L} disjoint intervals in [-{N}, {N}]")
    ends = np.sort(rng.choice(np.arange(-N, N + 1), size=2 * L, replace=False))
    return IntervalSet(tuple((int(ends[2 * i]), int(ends[2 * i + 1])) for i in range(L)))


def _consecutive_intervals(rng: np.random.Generator, L: int, N: int) -> IntervalSet:
    """L + 1 sorted distinct cut points in [-N, N + 1]: I_l = [e_l, e_{l+1} - 1]."""
    if L + 1 > 2 * N + 2:
        raise DomainError(f"cannot fit {L} consecutive intervals in [-{N}, {N}]")
    cuts = np.sort(rng.choice(np.arange(-N, N + 2), size=L + 1, replace=False))
    return IntervalSet(tuple((int(cuts[i]), int(cuts[i + 1]) - 1) for i in range(L)))


def _any_intervals(rng: np.random.Generator, L: int, N: int) -> IntervalSet:
    ends = np.sort(rng.integers(-N, N + 1, size=(L, 2)), axis=1)
    return IntervalSet(tuple((int(lo), int(hi)) for lo, hi in ends))


def _support_of(intervals: IntervalSet) -> np.ndarray:
    return np.concatenate([np.arange(lo, hi + 1) for lo, hi in intervals.union()])


def _norm(f: FourierSeries, p: float, m: int) -> float:
    return samples_lp_norm(evaluate(f, m), p)


def _pieces_norm(f: FourierSeries, intervals: IntervalSet, p: float, m: int) -> float:
    """(sum_l ||M_{I_l} f||_p^{p'})^{1/p'}, p' = min(2, p)."""
    pieces = [_norm(band_project(f, interval), p, m) for interval in intervals]
    return sequence_norm(np.asarray(pieces), min(2.0, p))


def _trial(kind: LpKind, cfg: ExperimentConfig, L: int, trial: int) -> Tuple[float, bool, dict]:
    """One random draw: (normalized ratio, dominance holds, witness)."""
    p, N = cfg.p, cfg.freq_range
    entropy = [cfg.seed, trial] if kind is LpKind.WEAK_L1 and cfg.repeat_interval else [cfg.seed, trial, L]
    rng = np.random.default_rng(entropy)
    dominance = True

    if kind is LpKind.FORWARD:
        intervals = _disjoint_intervals(rng, L, N)
        f = _random_series(rng, _support_of(intervals), cfg.support_size)
        m = _grid_size(cfg, N)
        ratio = samples_lp_norm(square_function(f, intervals, m), p) / (
            L ** (1.0 / min(2.0, p) - 0.5) * _norm(f, p, m)
        )
    elif kind is LpKind.WEAK_L1:
        if cfg.repeat_interval:
            interval = _any_intervals(rng, 1, N).intervals[0]
            intervals = IntervalSet((interval,) * L)
        else:
            intervals = _any_intervals(rng, L, N)
        f = _random_series(rng, np.arange(-N, N + 1), cfg.support_size)
        m = _grid_size(cfg, N)
        ratio = weak_l1_norm(square_function(f, intervals, m)) / (L ** 0.5 * _norm(f, 1.0, m))
    elif kind is LpKind.REVERSE:
        intervals = _consecutive_intervals(rng, L, N)
        f = _random_series(rng, _support_of(intervals), cfg.support_size)
        m = _grid_size(cfg, N + 1)
        square = samples_lp_norm(square_function(f, intervals, m), p)
        pieces = _pieces_norm(f, intervals, p, m)
        dominance = square <= pieces * (1.0 + DOMINANCE_RTOL)
        ratio = _norm(f, p, m) / (L ** (0.5 - 1.0 / max(2.0, p)) * square)
    elif kind is LpKind.BLOCKS:
        intervals = IntervalSet.quadratic_blocks(L)
        f = _random_series(rng, np.arange(1, L * L + 1), cfg.support_size)
        m = _grid_size(cfg, L * L)
        ratio = _norm(f, p, m) / (L ** (0.5 - 1.0 / max(2.0, p)) * _pieces_norm(f, intervals, p, m))
    else:
        freqs = np.arange(-N, N + 1)
        f = _random_series(rng, freqs, cfg.support_size)
        # monotone step multiplier with L levels in [0, 1]
        cuts = np.sort(rng.choice(freqs[1:], size=min(L - 1, freqs.size - 1), replace=False))
        levels = np.sort(rng.random(cuts.size + 1))
        if rng.random() < 0.5:
            levels = levels[::-1]
        a = levels[np.searchsorted(cuts, f.frequencies, side="right")]
        intervals = IntervalSet(((-N, N),))
        m = _grid_size(cfg, N)
        ratio = _norm(apply_multiplier(f, a), p, m) / _norm(f, p, m)

    witness = {"seed": cfg.seed, "trial": trial, "L": L, "entropy": entropy, "intervals": intervals.as_lists()}
    return float(ratio), bool(dominance), witness


def lp_inequality_experiment(kind, cfg: ExperimentConfig) -> LpReport:
    """
    Worst normalized ratio of a square-function inequality over random draws.

    The ratio is left side / right side with the unknown constant dropped,
    normalized by the power of L only. For reverse, every trial also checks
    that the square function is dominated by the l^{p'} sum of block norms.
    """
    kind = LpKind(kind)
    if kind is not LpKind.WEAK_L1 and cfg.repeat_interval:
        raise DomainError("repeat_interval only applies to the weak_l1 kind")
    if kind in (LpKind.FORWARD, LpKind.REVERSE, LpKind.BLOCKS, LpKind.STECHKIN) and cfg.p <= 1.0:
        raise DomainError(f"{kind.value} needs p > 1, got {cfg.p}")

    Ls = sorted(set(cfg.Ls))
    if kind is LpKind.FORWARD and 1 not in Ls:
        Ls = [1] + Ls

    rows = []
    violations = 0
    for L in Ls:
        results = parallel_map(lambda t, L=L: _trial(kind, cfg, L, t), range(cfg.trials), cfg.threads, name=f"lp-{kind.value}")
        ratios = np.array([ratio for ratio, _, _ in results])
        violations += sum(1 for _, ok, _ in results if not ok)
        best = int(np.argmax(ratios))
        rows.append(LpRow(L, float(ratios[best]), float(np.mean(ratios)), results[best][2]))
        logger.debug(f"{kind.value} L={L}: worst {ratios[best]:.10g}, mean {np.mean(ratios):.10g}")

    findings = []
    if kind is LpKind.FORWARD:
        ceiling = FORWARD_SLACK * rows[0].worst_ratio
        for row in rows:
            if row.worst_ratio > ceiling:
                findings.append(f"L={row.L}: ratio {row.worst_ratio:.6g} exceeds {FORWARD_SLACK:g} x the L=1 constant {rows[0].worst_ratio:.6g}")
    if violations:
        findings.append(f"{violations} trials where the square function exceeded the summed block norms")
    for finding in findings:
        logger.warning(finding)

    if kind is LpKind.FORWARD and 1 not in cfg.Ls:
        rows = rows[1:]
    report = LpReport(kind, cfg, tuple(rows), tuple(findings), violations)
    logger.info(f"{kind.value} p={cfg.p}: worst ratio {report.worst_ratio:.10g} over {cfg.trials} trials per L")
    return report


def _jsonable(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    if isinstance(value, complex):
        return [_jsonable(value.real), _jsonable(value.imag)]
    return value


def json_report(command: str, config: dict, result: dict) -> dict:
    """Envelope shared by every JSON output."""
    return _jsonable({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "anchor": ANCHORS.get(command, ""),
        "config": config,
        "result": result,
    })


def dumps_report(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"


def write_json(report: dict, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(report), encoding="utf-8")
    logger.info(f"Wrote {path}")


def write_rows(columns: Sequence[str], rows: Sequence[Sequence], path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)
    logger.info(f"Wrote {len(rows)} rows to {path}")


def write_growth_csv(series: GrowthSeries, path: Path) -> None:
    write_rows(GROWTH_COLUMNS, series.rows(), path)


def lp_rows(report: LpReport) -> List[list]:
    return [[row.L, row.worst_ratio, row.mean_ratio, f"{row.witness['seed']}-{row.witness['trial']}"] for row in report.rows]


def write_lp_csv(report: LpReport, path: Path) -> None:
    write_rows(LP_COLUMNS, lp_rows(report), path)
