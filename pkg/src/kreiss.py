"""
Kreiss Module

Estimators for the Kreiss-type conditions of a convolution operator T:

- kreiss / iterated_kreiss: sup (|lam| - 1)^k ||R(lam, T)^k||
- strong_kreiss: sup e^{-|z|} ||e^{zT}||
- absolute_strong_kreiss: sup_r e^{-r} sum_n (r^n / n!) ||T^n x|| / ||x||
- window_power_sum: sum over N - 2 sqrt(N) <= n <= N of ||T^n x||^p / (N^{p/2} ||x||^p)

Each estimator samples a declared grid, reports the largest sample as the
constant and runs a log-trend test on the top decade of the grid to flag
divergence. A diverging report is a lower estimate only.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sfft
from scipy import special, stats

from .errors import ConvergenceError, DomainError, SingularityError, TailCriterionError
from .norms import conv_norm_bracket
from .symbols import (
    DEFAULT_M_MAX,
    DEFAULT_SINGULARITY_FLOOR,
    DEFAULT_TOL,
    ConvOperator,
    resolvent_powers,
    symbol_exp_scaled,
    symbol_pow,
)
from .torus import FourierSeries, evaluate, next_pow2, nyquist_m, sequence_norm
from .workers import parallel_map

logger = logging.getLogger(__name__)

DEFAULT_PHASES = 16
DEFAULT_DEPTH = 20
DEFAULT_DIVERGENCE_SLOPE = 0.02
POISSON_TAIL = 1e-12
POSITIVITY_TOL = 1e-12


class KreissKind(str, Enum):
    KREISS = "kreiss"
    ITERATED = "iterated_kreiss"
    STRONG = "strong_kreiss"
    ABSOLUTE = "absolute_strong_kreiss"
    WINDOW = "window_power_sum"


@dataclass(frozen=True)
class KreissReport:
    """Constant of one Kreiss-type condition over a sampling grid.

    samples holds (parameter, value) pairs in grid order: |lambda| for the
    resolvent conditions, r for the exponential ones, N for the window sum.
    unresolved lists grid parameters left out because their FFT grid would
    exceed m_max.
    """

    kind: KreissKind
    constant: float
    grid: str
    diverging: bool
    samples: Tuple[Tuple[float, float], ...]
    norm_member: str = "exact"
    singular_at: Optional[complex] = None
    unresolved: Tuple[float, ...] = ()
    extras: dict = field(default_factory=dict)

    @property
    def is_lower_estimate(self) -> bool:
        return self.diverging

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "constant": self.constant,
            "grid": self.grid,
            "diverging": self.diverging,
            "norm_member": self.norm_member,
            "singular_at": None if self.singular_at is None else [self.singular_at.real, self.singular_at.imag],
            "samples": [[param, value] for param, value in self.samples],
            "unresolved": list(self.unresolved),
            **self.extras,
        }


def default_moduli(depth: int = DEFAULT_DEPTH) -> List[float]:
    """{1 + 2^-j : j = 0..depth} together with {2, 4, 8}, ascending."""
    return sorted({1.0 + 2.0 ** -j for j in range(depth + 1)} | {2.0, 4.0, 8.0})


def default_radii(r_min: float = 1.0, r_max: float = 100.0, count: int = 40) -> List[float]:
    return list(np.geomspace(r_min, r_max, count))


def _norm_member(p: float) -> str:
    return "exact" if p in (1.0, 2.0) or math.isinf(p) else "upper"


def _upper_norm(T: ConvOperator, p: float) -> float:
    return conv_norm_bracket(T, p, refine=False).upper


def _diverging(params: Sequence[float], values: Sequence[float], log_param: bool, threshold: float) -> bool:
    """Least-squares slope of log(value) against (log) parameter over the top decade exceeds threshold."""
    params = np.asarray(params, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(np.isinf(values)):
        return True
    if params.size < 2:
        return False
    order = np.argsort(params)
    params, values = params[order], values[order]
    top = params >= params[-1] / 10.0
    if np.count_nonzero(top) < 2:
        top[-2:] = True
    x = np.log(params[top]) if log_param else params[top]
    y = np.log(np.maximum(values[top], np.finfo(float).tiny))
    if np.ptp(x) == 0.0:
        return False
    slope = float(np.polyfit(x, y, 1)[0])
    logger.debug(f"top-decade log slope {slope:.4g} (threshold {threshold})")
    return slope > threshold


def _phase_points(phases: int) -> np.ndarray:
    if phases < 1:
        raise DomainError(f"phases must be >= 1, got {phases}")
    return np.exp(2j * np.pi * np.arange(phases) / phases)


def kreiss_constant(
    T: ConvOperator,
    p: float,
    k_max: int = 1,
    moduli: Optional[Sequence[float]] = None,
    phases: int = DEFAULT_PHASES,
    tol: float = DEFAULT_TOL,
    m_max: int = DEFAULT_M_MAX,
    floor: float = DEFAULT_SINGULARITY_FLOOR,
    threads: Optional[int] = None,
    strict: bool = False,
    divergence_slope: float = DEFAULT_DIVERGENCE_SLOPE,
) -> KreissReport:
    """
    sup of (|lam| - 1)^k ||R(lam, T)^k||_p over the sampled lam and k <= k_max.

    Args:
        T: convolution operator
        p: exponent in [1, inf]; outside {1, 2, inf} the bracket upper member is used
        k_max: highest resolvent power (1 gives the plain Kreiss condition)
        moduli: sampled |lam| (all > 1); default default_moduli()
        phases: points on each circle |lam| = const
        strict: raise SingularityError instead of recording an infinite sample,
            and ConvergenceError instead of listing the modulus as unresolved

    Returns:
        KreissReport of kind kreiss (k_max = 1) or iterated_kreiss.
    """
    k_max = int(k_max)
    if k_max < 1:
        raise DomainError(f"k_max must be >= 1, got {k_max}")
    moduli = sorted(default_moduli() if moduli is None else [float(rho) for rho in moduli])
    if not moduli or moduli[0] <= 1.0:
        raise DomainError("Kreiss moduli must all be > 1")
    circle = _phase_points(phases)
    tasks = [(rho, complex(rho * w)) for rho in moduli for w in circle]

    def sample(task: Tuple[float, complex]) -> Tuple[Optional[float], Optional[complex]]:
        rho, lam = task
        try:
            powers = resolvent_powers(T, lam, k_max, tol=tol, m_max=m_max, floor=floor)
        except SingularityError as e:
            if strict:
                raise
            logger.warning(f"{T.descriptor}: resolvent singular at lambda={lam:.17g} ({e.min_distance:.2e})")
            return math.inf, lam
        except ConvergenceError as e:
            if strict:
                raise
            logger.debug(f"{T.descriptor}: unresolved at lambda={lam:.17g}: {e}")
            return None, None
        value = max((rho - 1.0) ** k * _upper_norm(R, p) for k, R in enumerate(powers, start=1))
        logger.debug(f"lambda={lam:.17g}: {value:.10g}")
        return value, None

    results = parallel_map(sample, tasks, threads, name="kreiss")
    per_modulus = []
    unresolved = []
    singular_at = None
    for i, rho in enumerate(moduli):
        chunk = results[i * phases:(i + 1) * phases]
        values = [value for value, _ in chunk if value is not None]
        # a modulus counts only when every phase resolved, unless one is already singular
        if len(values) < phases and not any(math.isinf(v) for v in values):
            unresolved.append(rho)
            continue
        per_modulus.append((rho, max(values)))
        if singular_at is None:
            singular_at = next((lam for _, lam in chunk if lam is not None), None)

    kind = KreissKind.KREISS if k_max == 1 else KreissKind.ITERATED
    if unresolved:
        logger.warning(
            f"{kind.value} of {T.descriptor}: {len(unresolved)} moduli need grids beyond m_max={m_max}, "
            f"smallest |lambda|-1 = {unresolved[0] - 1.0:.3e}"
        )
    if not per_modulus:
        raise ConvergenceError(f"{kind.value} of {T.descriptor} (every modulus)", m_max, (math.inf,))

    # trend in s = 1 / (|lam| - 1): the supremum concentrates as |lam| -> 1
    s = [1.0 / (rho - 1.0) for rho, _ in per_modulus]
    diverging = _diverging(s, [v for _, v in per_modulus], log_param=True, threshold=divergence_slope)
    report = KreissReport(
        kind=kind,
        constant=max(v for _, v in per_modulus),
        grid=f"|lambda| in {len(moduli)} moduli [{moduli[0]:.6g}, {moduli[-1]:.6g}], {phases} phases, k <= {k_max}",
        diverging=diverging,
        samples=tuple(per_modulus),
        norm_member=_norm_member(p),
        singular_at=singular_at,
        unresolved=tuple(unresolved),
    )
    logger.info(f"{kind.value} constant of {T.descriptor} at p={p}: {report.constant:.10g} (diverging={diverging})")
    return report


def strong_kreiss_constant(
    T: ConvOperator,
    p: float,
    radii: Optional[Sequence[float]] = None,
    phases: int = DEFAULT_PHASES,
    tol: float = DEFAULT_TOL,
    m_max: int = DEFAULT_M_MAX,
    threads: Optional[int] = None,
    divergence_slope: float = DEFAULT_DIVERGENCE_SLOPE,
) -> KreissReport:
    """sup over |z| = r in radii of e^{-r} ||e^{zT}||_p."""
    radii = _check_radii(radii)
    circle = _phase_points(phases)
    tasks = [complex(r * w) for r in radii for w in circle]

    def sample(z: complex) -> float:
        value = _upper_norm(symbol_exp_scaled(T, z, tol=tol, m_max=m_max), p)
        logger.debug(f"z={z:.6g}: {value:.10g}")
        return value

    results = parallel_map(sample, tasks, threads, name="strong-kreiss")
    per_radius = [(r, max(results[i * phases:(i + 1) * phases])) for i, r in enumerate(radii)]
    diverging = _diverging(radii, [v for _, v in per_radius], log_param=False, threshold=divergence_slope)
    report = KreissReport(
        kind=KreissKind.STRONG,
        constant=max(v for _, v in per_radius),
        grid=f"r in {len(radii)} radii [{radii[0]:.6g}, {radii[-1]:.6g}], {phases} phases",
        diverging=diverging,
        samples=tuple(per_radius),
        norm_member=_norm_member(p),
    )
    logger.info(f"strong Kreiss constant of {T.descriptor} at p={p}: {report.constant:.10g} (diverging={diverging})")
    return report


def _check_radii(radii: Optional[Sequence[float]]) -> List[float]:
    radii = default_radii() if radii is None else [float(r) for r in radii]
    if not radii or min(radii) <= 0.0:
        raise DomainError("radii must be non-empty and > 0")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise DomainError("radii must be strictly increasing")
    return radii


def required_poisson_terms(r: float, tail: float = POISSON_TAIL) -> int:
    """Smallest n with P(Poisson(r) > n) < tail."""
    n = max(0, int(stats.poisson.isf(tail, r)) - 1)
    while special.pdtrc(n, r) >= tail:
        n += 1
    return n


def _check_x(x: FourierSeries, p: float) -> float:
    norm = sequence_norm(x.coeffs, p)
    if x.is_zero or norm == 0.0:
        raise DomainError("x must be non-zero")
    return norm


def orbit_norms(
    T: ConvOperator,
    x: FourierSeries,
    n_max: int,
    p: float,
    tol: float = DEFAULT_TOL,
    m_max: int = DEFAULT_M_MAX,
) -> np.ndarray:
    """
    ||T^n x||_p for n = 0..n_max, all on one FFT grid.

    The grid is sized from the support of T^{n_max}, so no orbit element
    wraps around; l^p norms do not see the cyclic placement.
    """
    n_max = int(n_max)
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    span = x.coeffs.size + (T.symbol.k_max - T.symbol.k_min) + 64
    if n_max >= 1:
        span += symbol_pow(T, n_max, tol=tol, m_max=m_max).symbol.coeffs.size
    m = max(next_pow2(2 * span), next_pow2(nyquist_m(x)))
    values = T.sample(m)
    current = np.array(evaluate(x, m).values)
    norms = np.empty(n_max + 1)
    for n in range(n_max + 1):
        norms[n] = sequence_norm(sfft.fft(current) / m, p)
        current = current * values
    logger.debug(f"orbit of {T.descriptor} up to n={n_max} on m={m}")
    return norms


def absolute_strong_kreiss_constant(
    T: ConvOperator,
    p: float,
    x: FourierSeries,
    radii: Optional[Sequence[float]] = None,
    n_max: Optional[int] = None,
    tol: float = DEFAULT_TOL,
    m_max: int = DEFAULT_M_MAX,
    divergence_slope: float = DEFAULT_DIVERGENCE_SLOPE,
) -> KreissReport:
    """
    sup over r of e^{-r} sum_{n <= n_max} (r^n / n!) ||T^n x||_p / ||x||_p.

    Raises:
        TailCriterionError: the Poisson tail beyond n_max at the largest
            radius is not below 1e-12 (carries the required n_max)
    """
    radii = _check_radii(radii)
    x_norm = _check_x(x, p)
    r_max = radii[-1]
    required = required_poisson_terms(r_max)
    if n_max is None:
        n_max = required
    else:
        tail = float(special.pdtrc(n_max, r_max))
        if tail >= POISSON_TAIL:
            raise TailCriterionError(n_max, required, tail)

    norms = orbit_norms(T, x, n_max, p, tol=tol, m_max=m_max) / x_norm
    n = np.arange(n_max + 1)
    samples = []
    for r in radii:
        # log-space Poisson weights: n log r - log n! - r
        log_weights = n * math.log(r) - special.gammaln(n + 1) - r
        samples.append((r, float(np.exp(special.logsumexp(log_weights, b=norms)))))

    diverging = _diverging(radii, [v for _, v in samples], log_param=False, threshold=divergence_slope)
    report = KreissReport(
        kind=KreissKind.ABSOLUTE,
        constant=max(v for _, v in samples),
        grid=f"r in {len(radii)} radii [{radii[0]:.6g}, {r_max:.6g}], n <= {n_max}",
        diverging=diverging,
        samples=tuple(samples),
        extras={"n_max": n_max},
    )
    logger.info(f"absolute strong Kreiss constant of {T.descriptor} at p={p}: {report.constant:.10g}")
    return report


def is_positive(T: ConvOperator, tol: float = POSITIVITY_TOL) -> bool:
    """True when every coefficient is real and >= 0 (up to tol): T maps positive sequences to positive ones."""
    c = T.symbol.coeffs
    return bool(np.all(np.abs(c.imag) <= tol) and np.all(c.real >= -tol))


def _window_start(N: int) -> int:
    return max(0, math.ceil(N - 2.0 * math.sqrt(N)))


def _window_ratio(norms: np.ndarray, N: int, p: float) -> float:
    window = norms[_window_start(N):N + 1]
    return float(np.sum(window ** p)) / N ** (p / 2.0)


def _check_window(N: int, p: float) -> None:
    if N < 4:
        raise DomainError(f"window power sums need N >= 4, got {N}")
    if math.isinf(p) or p < 1.0:
        raise DomainError(f"window power sums need 1 <= p < inf, got {p}")


def window_power_sum_ratio(T: ConvOperator, p: float, x: FourierSeries, N: int, tol: float = DEFAULT_TOL, m_max: int = DEFAULT_M_MAX) -> float:
    """sum_{N - 2 sqrt(N) <= n <= N} ||T^n x||_p^p / (N^{p/2} ||x||_p^p)."""
    N = int(N)
    p = float(p)
    _check_window(N, p)
    x_norm = _check_x(x, p)
    return _window_ratio(orbit_norms(T, x, N, p, tol=tol, m_max=m_max) / x_norm, N, p)


def window_power_sum_constant(
    T: ConvOperator,
    p: float,
    x: FourierSeries,
    Ns: Sequence[int],
    tol: float = DEFAULT_TOL,
    m_max: int = DEFAULT_M_MAX,
    divergence_slope: float = DEFAULT_DIVERGENCE_SLOPE,
) -> KreissReport:
    """window_power_sum_ratio over Ns from a single orbit computation."""
    Ns = sorted(int(N) for N in Ns)
    if not Ns:
        raise DomainError("Ns must be non-empty")
    p = float(p)
    for N in Ns:
        _check_window(N, p)
    x_norm = _check_x(x, p)
    positive = is_positive(T)
    norms = orbit_norms(T, x, Ns[-1], p, tol=tol, m_max=m_max) / x_norm
    samples = tuple((float(N), _window_ratio(norms, N, p)) for N in Ns)
    diverging = _diverging(Ns, [v for _, v in samples], log_param=True, threshold=divergence_slope)
    report = KreissReport(
        kind=KreissKind.WINDOW,
        constant=max(v for _, v in samples),
        grid=f"N in {len(Ns)} values [{Ns[0]}, {Ns[-1]}]",
        diverging=diverging,
        samples=samples,
        extras={"positive": positive},
    )
    logger.info(f"window power sum constant of {T.descriptor} at p={p}: {report.constant:.10g} (positive={positive})")
    return report


def power_growth_ratio(
    T: ConvOperator,
    p: float,
    Ns: Sequence[int],
    tol: float = DEFAULT_TOL,
    m_max: int = DEFAULT_M_MAX,
) -> List[Tuple[int, float]]:
    """(N, ||T^N||_p / N^{tau_p}) with tau_p = |1/2 - 1/p|, using the bracket upper member."""
    tau = 0.5 if math.isinf(p) else abs(0.5 - 1.0 / p)
    out = []
    for N in Ns:
        upper = _upper_norm(symbol_pow(T, int(N), tol=tol, m_max=m_max), p)
        out.append((int(N), upper / int(N) ** tau))
    return out
