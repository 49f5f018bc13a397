"""
Bounds Module

Exponent calculus behind the power-growth bound ||T^N|| <= C N^{tau_p} log^kappa(N + 1)
for strongly Kreiss bounded operators on l^p:

- delta_p = (2/p' - 1/p) / 2 with p' = min(2, p), tau_p = |1/2 - 1/p|
- the bootstrap map alpha -> alpha/2 + delta_p (fixed point 2 delta_p), run K
  times with 2^K <= log N / log log N
- the Stirling ratios and Poisson window masses that drive the e^{NT} expansion

All factorials go through log-gamma; nothing here overflows for N = 10^4.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import special

from .errors import DomainError, KreissLabError

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-12


def _check_open_p(p: float) -> float:
    p = float(p)
    if not 1.0 < p < math.inf:
        raise DomainError(f"exponent p must satisfy 1 < p < inf, got {p}")
    return p


def _conjugate(p: float) -> float:
    return math.inf if p == 1.0 else p / (p - 1.0)


def _delta(p: float) -> float:
    return (2.0 / min(2.0, p) - 1.0 / p) / 2.0


@dataclass(frozen=True)
class ExponentRecord:
    p: float
    p_prime: float
    p_dprime: float
    delta_p: float
    tau_p: float
    q: float
    p_bar: float

    def __post_init__(self):
        gap = abs(self.delta_p + _delta(self.q) - 0.5 - self.tau_p)
        if gap > IDENTITY_TOL:
            raise KreissLabError(f"delta/tau identity off by {gap:.3e} at p={self.p}")

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def exponents(p: float) -> ExponentRecord:
    """All exponents attached to p, 1 < p < inf."""
    p = _check_open_p(p)
    q = _conjugate(p)
    return ExponentRecord(
        p=p,
        p_prime=min(2.0, p),
        p_dprime=max(2.0, p),
        delta_p=_delta(p),
        tau_p=abs(0.5 - 1.0 / p),
        q=q,
        p_bar=max(p, q),
    )


def bootstrap_step(alpha: float, p: float) -> float:
    """alpha/2 + delta_p."""
    if alpha < 0.0:
        raise DomainError(f"alpha must be >= 0, got {alpha}")
    return alpha / 2.0 + exponents(p).delta_p


def select_K(N: int) -> int:
    """Largest K >= 0 with 2^K <= log N / log log N (N >= 3)."""
    if N < 3:
        raise DomainError(f"N must be >= 3, got {N}")
    ratio = math.log(N) / math.log(math.log(N))
    K = max(0, math.floor(math.log2(ratio)))
    # guard the floor against rounding at exact powers of two
    while 2 ** (K + 1) <= ratio:
        K += 1
    while K > 0 and 2 ** K > ratio:
        K -= 1
    return K


@dataclass(frozen=True)
class BootstrapState:
    """Trajectory of an exponent iteration.

    alphas[k] and constants_log[k] are the exponent and log-constant after k
    steps; exponent is alphas[-1]; kappa the log-factor exponent.
    """

    alphas: Tuple[float, ...]
    constants_log: Tuple[float, ...]
    K: int
    N: int
    fixed_point: float
    kappa: float
    log_factor_bound: float

    @property
    def exponent(self) -> float:
        return self.alphas[-1]

    def as_dict(self) -> dict:
        return {
            "K": self.K,
            "N": self.N,
            "alphas": list(self.alphas),
            "constants_log": list(self.constants_log),
            "exponent": self.exponent,
            "fixed_point": self.fixed_point,
            "kappa": self.kappa,
            "log_factor_bound": self.log_factor_bound,
        }


def _resolve_K(N: int, K: Optional[int]) -> int:
    if N < 3:
        raise DomainError(f"N must be >= 3, got {N}")
    if K is None:
        return select_K(N)
    if K < 0:
        raise DomainError(f"K must be >= 0, got {K}")
    return int(K)


def bootstrap_trajectory(
    alpha0: float = 1.0,
    p: float = 2.0,
    log_Ep: float = 0.0,
    N: int = 10**6,
    K: Optional[int] = None,
    log_C: float = 0.0,
    slack: float = 0.0,
) -> BootstrapState:
    """
    Iterate alpha -> alpha/2 + delta_p K times from alpha0.

    Each step multiplies the constant by E_p, so after k steps the constant is
    C E_p^k. With 2^K <= log N the factor E_p^K is at most
    log(N)^{log E_p / log 2}, hence kappa = log_Ep / log 2 + slack.

    Args:
        alpha0: starting exponent (1 is the Cesaro bound ||T^N|| <= C N)
        p: exponent, 1 < p < inf
        log_Ep: log of the per-step constant E_p
        N: power, N >= 3
        K: number of steps; default from select_K(N)
        log_C: log of the starting constant
        slack: the unspecified additive constant in kappa

    Returns:
        BootstrapState
    """
    if alpha0 < 0.0:
        raise DomainError(f"alpha0 must be >= 0, got {alpha0}")
    K = _resolve_K(N, K)
    delta = exponents(p).delta_p
    alphas = [float(alpha0)]
    constants_log = [float(log_C)]
    for k in range(1, K + 1):
        alphas.append(alphas[-1] / 2.0 + delta)
        constants_log.append(log_C + k * log_Ep)

    fixed_point = 2.0 * delta
    closed_form = fixed_point + (alpha0 - fixed_point) * 2.0 ** -K
    if abs(alphas[-1] - closed_form) > IDENTITY_TOL:
        raise KreissLabError(f"bootstrap drifted from its closed form: {alphas[-1]!r} vs {closed_form!r}")

    state = BootstrapState(
        alphas=tuple(alphas),
        constants_log=tuple(constants_log),
        K=K,
        N=int(N),
        fixed_point=fixed_point,
        kappa=log_Ep / math.log(2.0) + slack,
        log_factor_bound=(log_Ep / math.log(2.0)) * math.log(math.log(N)),
    )
    logger.debug(f"bootstrap p={p}, N={N}: K={K}, exponent {state.exponent:.12g}")
    return state


def window_bootstrap_trajectory(
    alpha0: float = 0.5,
    p: float = 2.0,
    log_C: float = 0.0,
    N: int = 10**6,
    K: Optional[int] = None,
) -> BootstrapState:
    """
    Iteration for operators with a windowed power-sum bound:
    alpha -> alpha/2 + 1/(2q), q = p/(p - 1), fixed point 1/q.

    After k steps ||T^N|| <= 3^{k alpha0} C^{k+1} N^{2^-k alpha0 + (1 - 2^-k)/q}.
    Valid for 1 <= p <= 2 (q = inf at p = 1).
    """
    p = float(p)
    if not 1.0 <= p <= 2.0:
        raise DomainError(f"windowed bootstrap needs 1 <= p <= 2, got {p}")
    if alpha0 < 0.0:
        raise DomainError(f"alpha0 must be >= 0, got {alpha0}")
    K = _resolve_K(N, K)
    inv_q = 1.0 - 1.0 / p
    alphas = [float(alpha0)]
    constants_log = [float(log_C)]
    for k in range(1, K + 1):
        alphas.append(alphas[-1] / 2.0 + inv_q / 2.0)
        constants_log.append(k * alpha0 * math.log(3.0) + (k + 1) * log_C)
    # 2^K <= log N turns 3^{K alpha0} C^K into a power of log N
    kappa = (alpha0 * math.log(3.0) + max(log_C, 0.0)) / math.log(2.0)
    return BootstrapState(
        alphas=tuple(alphas),
        constants_log=tuple(constants_log),
        K=K,
        N=int(N),
        fixed_point=inv_q,
        kappa=kappa,
        log_factor_bound=kappa * math.log(math.log(N)),
    )


def final_power_exponent(p: float) -> float:
    """delta_p + delta_q - 1/2, which equals tau_p and 1/min(p, q) - 1/2."""
    record = exponents(p)
    value = record.delta_p + _delta(record.q) - 0.5
    for other in (record.tau_p, 1.0 / min(record.p, record.q) - 0.5):
        if abs(value - other) > IDENTITY_TOL:
            raise KreissLabError(f"final exponent {value!r} disagrees with {other!r} at p={p}")
    return value


def positive_exponent(p: float) -> float:
    """1/p_bar, p_bar = max(p, p/(p-1)): growth exponent for positive operators (1 <= p < inf)."""
    p = float(p)
    if not 1.0 <= p < math.inf:
        raise DomainError(f"exponent p must satisfy 1 <= p < inf, got {p}")
    return 1.0 / max(p, _conjugate(p))


def improves_on_tau(p: float) -> bool:
    """True when 1/p_bar < tau_p, i.e. p in [1, 4/3) or p > 4."""
    return positive_exponent(p) < abs(0.5 - 1.0 / float(p)) - IDENTITY_TOL


def stirling_ratio(N: int, K: int) -> float:
    """sqrt(N) N^{N+K} / ((N+K)! e^N), computed in log space."""
    if N + K < 0:
        raise DomainError(f"N + K must be >= 0, got {N + K}")
    log_r = 0.5 * math.log(N) + (N + K) * math.log(N) - special.gammaln(N + K + 1) - N
    return math.exp(log_r)


def poisson_window_weight(N: int, n: int) -> float:
    """e^{-N} sum_{max(0, n - sqrt N) <= k <= n} N^k / k!, the Poisson(N) mass of the window."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    k = np.arange(max(0, math.ceil(n - math.sqrt(N))), n + 1)
    log_terms = k * math.log(N) - special.gammaln(k + 1) - N
    return min(1.0, float(np.exp(special.logsumexp(log_terms))))


@dataclass(frozen=True)
class TechnicalReport:
    N: int
    K_range: Tuple[int, int]
    min_ratio: float
    max_ratio: float
    ratio_at_zero: float
    variation_sum_scaled: float

    def as_dict(self) -> dict:
        return {
            "N": self.N,
            "K_range": list(self.K_range),
            "min_ratio": self.min_ratio,
            "max_ratio": self.max_ratio,
            "ratio_at_zero": self.ratio_at_zero,
            "variation_sum_scaled": self.variation_sum_scaled,
        }


def window_weights(N: int) -> List[Tuple[int, float]]:
    """(n, poisson_window_weight(N, n)) for n in [N + 2 - 2 sqrt N, N]."""
    start = max(0, math.ceil(N + 2 - 2.0 * math.sqrt(N)))
    return [(n, poisson_window_weight(N, n)) for n in range(start, N + 1)]


def technical_check(N: int) -> TechnicalReport:
    """
    Stirling ratios r_K for integer K in [2 - 2 sqrt N, 0] and the total
    variation of the inverse window masses 1 / w(n) over n in [N + 2 - 2 sqrt N, N].

    Both stay bounded uniformly in N.
    """
    N = int(N)
    if N < 16:
        raise DomainError(f"technical check needs N >= 16, got {N}")
    k_lo = math.ceil(2.0 - 2.0 * math.sqrt(N))
    Ks = np.arange(k_lo, 1)
    log_r = 0.5 * math.log(N) + (N + Ks) * math.log(N) - special.gammaln(N + Ks + 1) - N
    ratios = np.exp(log_r)

    inverse = np.array([1.0 / w for _, w in window_weights(N)])
    variation = float(np.sum(np.abs(np.diff(inverse))))

    report = TechnicalReport(
        N=N,
        K_range=(int(k_lo), 0),
        min_ratio=float(np.min(ratios)),
        max_ratio=float(np.max(ratios)),
        ratio_at_zero=float(ratios[-1]),
        variation_sum_scaled=variation,
    )
    logger.info(
        f"technical check N={N}: ratios in [{report.min_ratio:.6g}, {report.max_ratio:.6g}], "
        f"variation {variation:.6g}"
    )
    return report
