"""
Symbols Module

Symbol calculus for convolution (Laurent) operators on l^p(Z).

An operator (Tx)_n = sum_k c_k x_{n-k} is represented by its symbol
q(gamma) = sum_k c_k gamma^k. Powers, damped exponentials and resolvent
powers are computed samplewise on an m-point grid and transformed back by
FFT; m is doubled until two successive coefficient vectors agree in l1.

Operators built from a closed form (the Moebius family) carry an exact
sampler, so derived symbols are sampled exactly and the FFT is the only
source of error.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy import fft as sfft

from .errors import ConvergenceError, DomainError, SingularityError
from .torus import FourierSeries, evaluate, next_pow2, unit_grid

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_M_MAX = 2**22
DEFAULT_SINGULARITY_FLOOR = 1e-12
MOBIUS_TOL = 1e-15
# l1 mass of negligible end coefficients that derived symbols may drop
TRIM_MASS = 1e-14

_EPS = np.finfo(float).eps

Sampler = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class ConvOperator:
    """A convolution operator on l^p(Z) given by its symbol.

    evaluator, when present, computes the symbol exactly at points of the
    unit circle; otherwise the (possibly truncated) series is sampled.
    frequency_rate bounds how fast the support of q^N grows with N.
    """

    symbol: FourierSeries
    descriptor: str
    evaluator: Optional[Sampler] = field(default=None, repr=False)
    frequency_rate: Optional[float] = None

    def __post_init__(self):
        if self.frequency_rate is None:
            object.__setattr__(self, "frequency_rate", float(max(1, self.symbol.bandwidth)))

    @property
    def one_sided(self) -> bool:
        """True when the symbol has no negative frequencies."""
        return self.symbol.k_min >= 0

    @property
    def coeffs(self) -> np.ndarray:
        return self.symbol.coeffs

    def sample(self, m: int) -> np.ndarray:
        """Symbol values at the m-th roots of unity."""
        if self.evaluator is not None:
            return np.asarray(self.evaluator(unit_grid(m)), dtype=complex)
        return np.asarray(evaluate(self.symbol, m).values)

    def sample_at(self, points: np.ndarray) -> np.ndarray:
        """Symbol values at arbitrary points of the unit circle."""
        if self.evaluator is not None:
            return np.asarray(self.evaluator(np.asarray(points, dtype=complex)), dtype=complex)
        return self.symbol.evaluate_at(points)

    def apply(self, x: FourierSeries) -> FourierSeries:
        """Tx for a finitely supported sequence x (exact discrete convolution)."""
        out = np.convolve(self.symbol.coeffs, x.coeffs)
        tail = self.symbol.tail_bound * x.l1_norm() + self.symbol.l1_norm() * x.tail_bound
        return FourierSeries(self.symbol.k_min + x.k_min, out, tail)


def from_coefficients(coeffs, k_min: int = 0, descriptor: Optional[str] = None) -> ConvOperator:
    """Operator with an exactly known, finitely supported symbol."""
    symbol = FourierSeries(k_min, coeffs)
    return ConvOperator(symbol, descriptor or f"convolution[{symbol.k_min}..{symbol.k_max}]")


def shift_operator(power: int = 1, scale: complex = 1.0) -> ConvOperator:
    """scale * S^power, S the right shift."""
    descriptor = "S" if power == 1 else f"S^{power}"
    if scale != 1.0:
        descriptor = f"{scale:g}*{descriptor}"
    return ConvOperator(
        FourierSeries.monomial(power, scale),
        descriptor,
        evaluator=lambda z: scale * z ** power,
        frequency_rate=float(max(1, abs(power))),
    )


def scalar_operator(c: complex) -> ConvOperator:
    """c * I."""
    return ConvOperator(FourierSeries.monomial(0, c), f"{c:g}*I", evaluator=lambda z: np.full(z.shape, c, dtype=complex))


def mobius_symbol(a: float, tol: float = MOBIUS_TOL) -> ConvOperator:
    """
    The Moebius operator q_a(S), q_a(z) = (z - a) / (1 - a z).

    Args:
        a: parameter in [0, 1); a = 0 is the pure shift
        tol: l1 mass allowed in the discarded Taylor tail

    Returns:
        ConvOperator with Taylor coefficients c_0 = -a, c_k = (1 - a^2) a^(k-1),
        truncated so that the discarded mass (1 + a) a^K is <= tol.
    """
    a = float(a)
    if not 0.0 <= a < 1.0:
        raise DomainError(f"Moebius parameter must lie in [0, 1), got {a}")
    if tol <= 0.0:
        raise DomainError(f"tol must be > 0, got {tol}")
    if a == 0.0:
        return shift_operator()

    # coefficients 0..K kept; mass of k > K is (1 + a) a^K
    K = max(1, math.ceil(math.log(tol / (1.0 + a)) / math.log(a)))
    k = np.arange(1, K + 1)
    coeffs = np.empty(K + 1, dtype=complex)
    coeffs[0] = -a
    coeffs[1:] = (1.0 - a * a) * a ** (k - 1)
    tail = (1.0 + a) * a ** K
    logger.debug(f"q_{a}: {K + 1} Taylor coefficients, tail {tail:.2e}")

    def q(z: np.ndarray) -> np.ndarray:
        return (z - a) / (1.0 - a * z)

    return ConvOperator(
        FourierSeries(0, coeffs, tail),
        f"q_a(S), a={a:g}",
        evaluator=q,
        frequency_rate=(1.0 + a) / (1.0 - a),
    )


def _l1_distance(k1: int, c1: np.ndarray, k2: int, c2: np.ndarray) -> float:
    lo = min(k1, k2)
    hi = max(k1 + c1.size, k2 + c2.size)
    a = np.zeros(hi - lo, dtype=complex)
    a[k1 - lo:k1 - lo + c1.size] += c1
    a[k2 - lo:k2 - lo + c2.size] -= c2
    return float(np.sum(np.abs(a)))


def _adaptive_coefficients(
    op: ConvOperator,
    transform: Callable[[np.ndarray], np.ndarray],
    m0: int,
    window: Callable[[int], int],
    tol: float,
    m_max: int,
    noise_scale: float,
    what: str,
) -> Tuple[int, np.ndarray, float, int]:
    """
    Coefficients of transform(q) by FFT, doubling m until l1-stable.

    Returns:
        (k_lo, coefficients on [k_lo, k_lo + m), last l1 discrepancy, m)
    """
    m = max(64, next_pow2(m0))
    if m > m_max:
        raise ConvergenceError(what, m, (math.inf, math.inf))
    previous = None
    discrepancies: List[float] = []
    while m <= m_max:
        values = transform(op.sample(m))
        k_lo = window(m)
        coeffs = np.roll(sfft.fft(values) / m, -k_lo)
        if previous is not None:
            diff = _l1_distance(previous[0], previous[1], k_lo, coeffs)
            discrepancies.append(diff)
            scale = max(1.0, float(np.sum(np.abs(coeffs))))
            noise = 64.0 * _EPS * math.sqrt(m) * (1.0 + noise_scale) * float(np.max(np.abs(values)))
            threshold = max(tol * scale, noise)
            logger.debug(f"{what}: m={m} l1 discrepancy {diff:.3e} (threshold {threshold:.3e})")
            if diff <= threshold:
                return k_lo, coeffs, diff, m
        previous = (k_lo, coeffs)
        m *= 2
    raise ConvergenceError(what, m // 2, discrepancies[-2:] or (math.inf,))


def _safe_exp(x: float) -> float:
    return math.inf if x > 709.0 else math.exp(x)


def _derived(
    k_lo: int,
    coeffs: np.ndarray,
    propagated_tail: float,
    descriptor: str,
    evaluator: Optional[Sampler],
    frequency_rate: float,
) -> ConvOperator:
    series = FourierSeries(k_lo, coeffs, propagated_tail).trimmed(TRIM_MASS)
    return ConvOperator(series, descriptor, evaluator=evaluator, frequency_rate=frequency_rate)


def symbol_pow(
    T: ConvOperator,
    N: int,
    tol: float = DEFAULT_TOL,
    m_max: int = DEFAULT_M_MAX,
) -> ConvOperator:
    """
    T^N, the operator with symbol q^N.

    Args:
        T: convolution operator
        N: power, N >= 1
        tol: l1 stability tolerance (relative to max(1, ||q^N||_1))
        m_max: largest grid tried

    Returns:
        ConvOperator for T^N. Without an exact sampler the source tail t is
        propagated as N (s + t)^(N-1) t, s = ||q||_1.
    """
    N = int(N)
    if N < 1:
        raise DomainError(f"power must be >= 1, got {N}")
    if N == 1:
        return T

    width = T.symbol.k_max - T.symbol.k_min
    spread = max(N * width, math.ceil(N * T.frequency_rate))
    m0 = 8 * (spread + 64)
    exact_support = T.evaluator is None or T.one_sided

    def window(m: int) -> int:
        return N * T.symbol.k_min if exact_support else -(m // 2)

    k_lo, coeffs, diff, m = _adaptive_coefficients(
        T, lambda v: v ** N, m0, window, tol, m_max, float(N), f"symbol_pow(N={N})"
    )

    tail = 0.0
    if T.evaluator is None and T.symbol.tail_bound > 0.0:
        s, t = T.symbol.l1_norm(), T.symbol.tail_bound
        tail = _safe_exp(math.log(N) + (N - 1) * math.log(s + t) + math.log(t))

    base = T.evaluator
    evaluator = (lambda z: base(z) ** N) if base is not None else None
    logger.debug(f"{T.descriptor}^{N}: m={m}, discrepancy {diff:.2e}")
    return _derived(k_lo, coeffs, tail, f"({T.descriptor})^{N}", evaluator, T.frequency_rate * N)


def symbol_exp_scaled(
    T: ConvOperator,
    z: complex,
    tol: float = DEFAULT_TOL,
    m_max: int = DEFAULT_M_MAX,
) -> ConvOperator:
    """
    The damped exponential e^{-|z|} e^{zT}, symbol exp(z q - |z|).

    The damping is applied samplewise so large |z| never overflows; the l1
    norm of the result is e^{-|z|} ||e^{zT}||_{l1 -> l1}.
    """
    z = complex(z)
    r = abs(z)
    m0 = 8 * (math.ceil(r * T.frequency_rate) + 64)

    def window(m: int) -> int:
        return 0 if T.one_sided else -(m // 2)

    k_lo, coeffs, diff, m = _adaptive_coefficients(
        T, lambda v: np.exp(z * v - r), m0, window, tol, m_max, r, f"symbol_exp_scaled(z={z:.4g})"
    )

    tail = 0.0
    if T.evaluator is None and T.symbol.tail_bound > 0.0 and r > 0.0:
        s, t = T.symbol.l1_norm(), T.symbol.tail_bound
        tail = _safe_exp(math.log(r) + r * (s + t - 1.0) + math.log(t))

    base = T.evaluator
    evaluator = (lambda w: np.exp(z * base(w) - r)) if base is not None else None
    logger.debug(f"exp({z:.4g} {T.descriptor}): m={m}, discrepancy {diff:.2e}")
    return _derived(k_lo, coeffs, tail, f"exp({z:.6g}*{T.descriptor})*e^-{r:.6g}", evaluator, T.frequency_rate * max(r, 1.0))


def _neumann_tails(rho: float, t: float, k_max: int) -> List[float]:
    """
    Bounds on ||(lam - q - e)^-k - (lam - q)^-k||_W for k = 1..k_max.

    ||e||_W <= t is the source tail and ||(lam - q)^-1||_W <= rho. Infinite
    when rho t >= 1, where the Neumann series gives no control.
    """
    contraction = rho * t
    if contraction >= 1.0:
        return [math.inf] * k_max
    beta = rho / (1.0 - contraction)
    log_delta = math.log(rho) + math.log(beta) + math.log(t)
    return [_safe_exp(math.log(k) + (k - 1) * math.log(beta) + log_delta) for k in range(1, k_max + 1)]


def _resolvent_grid_estimate(T: ConvOperator, lam: complex, k: int, dist: float, tol: float) -> int:
    # coefficients decay roughly like exp(-dist * j / rate) times a degree k-1 polynomial
    decay = max(dist, 1e-300) / max(T.frequency_rate, 1.0)
    decay = min(decay, math.log(abs(lam)) if abs(lam) > 1.0 else decay)
    decay = max(decay, 1e-12)
    horizon = (math.log(1.0 / tol) + k * math.log(k / dist + 2.0)) / decay
    return 2 * (min(math.ceil(horizon), 2**40) + 64)


def resolvent_powers(
    T: ConvOperator,
    lam: complex,
    k_max: int,
    tol: float = DEFAULT_TOL,
    m_max: int = DEFAULT_M_MAX,
    floor: float = DEFAULT_SINGULARITY_FLOOR,
) -> List[ConvOperator]:
    """
    R(lam, T)^k for k = 1..k_max, computed on one grid sized for k_max.

    Each tail_bound is the last grid discrepancy plus, for a truncated
    symbol without an exact sampler, the Neumann-series bound on how far the
    dropped source tail can move (lam - q)^-k in l1.

    Raises:
        DomainError: |lam| <= 1
        SingularityError: min_j |lam - q(gamma_j)| < floor
        ConvergenceError: the grid needed to resolve lam exceeds m_max
    """
    lam = complex(lam)
    if not abs(lam) > 1.0:
        raise DomainError(f"resolvent needs |lambda| > 1, got {abs(lam)}")
    k_max = int(k_max)
    if k_max < 1:
        raise DomainError(f"resolvent power must be >= 1, got {k_max}")

    coarse = T.sample(max(256, next_pow2(8 * (T.symbol.bandwidth + 1))))
    dist = float(np.min(np.abs(lam - coarse)))
    if dist < floor:
        raise SingularityError(lam, dist, floor)

    # the resolvent is analytic in the disk (one-sided) when |lam| exceeds max |q| on the circle
    one_sided = T.one_sided and abs(lam) > float(np.max(np.abs(coarse)))
    m0 = _resolvent_grid_estimate(T, lam, k_max, dist, tol)

    def window(m: int) -> int:
        return 0 if one_sided else -(m // 2)

    k_lo, _, diff, m = _adaptive_coefficients(
        T, lambda v: (lam - v) ** (-k_max), m0, window, tol, m_max,
        k_max * abs(lam) / dist, f"resolvent(lambda={lam:.17g}, |lambda|-1={abs(lam) - 1.0:.3e}, k={k_max})",
    )

    samples = T.sample(m)
    dist = float(np.min(np.abs(lam - samples)))
    if dist < floor:
        raise SingularityError(lam, dist, floor)
    inverse = 1.0 / (lam - samples)

    power = np.ones(m, dtype=complex)
    all_coeffs = []
    for _ in range(k_max):
        power = power * inverse
        all_coeffs.append(np.roll(sfft.fft(power) / m, -k_lo))

    # the grid discrepancy majorizes the mass aliased into or left outside the window
    tails = [diff] * k_max
    base = T.evaluator
    if base is None and T.symbol.tail_bound > 0.0:
        rho = float(np.sum(np.abs(all_coeffs[0]))) + diff
        tails = [diff + extra for extra in _neumann_tails(rho, T.symbol.tail_bound, k_max)]
        if math.isinf(tails[-1]):
            logger.warning(f"{T.descriptor}: source tail {T.symbol.tail_bound:.2e} too large for a resolvent bound at lambda={lam:.17g}")

    results = []
    for k, (coeffs, tail) in enumerate(zip(all_coeffs, tails), start=1):
        evaluator = (lambda w, k=k: (lam - base(w)) ** (-k)) if base is not None else None
        results.append(
            _derived(k_lo, coeffs, tail, f"R({lam:.6g}, {T.descriptor})^{k}", evaluator, T.frequency_rate)
        )
    logger.debug(f"resolvent powers at lambda={lam:.17g}: m={m}, discrepancy {diff:.2e}")
    return results


def resolvent_symbol(
    T: ConvOperator,
    lam: complex,
    k: int = 1,
    tol: float = DEFAULT_TOL,
    m_max: int = DEFAULT_M_MAX,
    floor: float = DEFAULT_SINGULARITY_FLOOR,
) -> ConvOperator:
    """R(lam, T)^k = (lam I - T)^{-k}, symbol (lam - q)^{-k}."""
    return resolvent_powers(T, lam, k, tol=tol, m_max=m_max, floor=floor)[-1]
