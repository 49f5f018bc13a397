"""
Torus Module

Scalar functions on the unit circle: finitely supported Fourier series,
uniform-grid quadrature (L^p and weak-L^1 norms), band projections,
coefficient multipliers and Littlewood-Paley square functions.

A function f(gamma) = sum_k c_k gamma^k is held as a FourierSeries; its
samples at gamma_j = exp(2 pi i j / m) are a GridSamples. Both are immutable.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import fft as sfft

from .errors import DomainError, NyquistError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10

Interval = Tuple[int, int]


def next_pow2(n: int) -> int:
    """Smallest power of two >= n (and >= 1)."""
    n = max(1, int(n))
    return 1 << (n - 1).bit_length()


def unit_grid(m: int) -> np.ndarray:
    """The m-th roots of unity gamma_j = exp(2 pi i j / m)."""
    return np.exp(2j * np.pi * np.arange(m) / m)


@dataclass(frozen=True, eq=False)
class FourierSeries:
    """Finitely supported Laurent coefficients with a certified l1 tail bound.

    coeffs[j] is the coefficient of gamma^(k_min + j). tail_bound is the l1 mass
    of everything that was truncated away (0 for exact polynomials).
    """

    k_min: int
    coeffs: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).copy()
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise DomainError("FourierSeries needs a non-empty 1-D coefficient vector")
        if not self.tail_bound >= 0.0:
            raise DomainError(f"tail_bound must be >= 0, got {self.tail_bound}")

        nonzero = np.flatnonzero(coeffs)
        k_min = int(self.k_min)
        if nonzero.size == 0:
            coeffs = coeffs[:1]
        else:
            k_min += int(nonzero[0])
            coeffs = coeffs[nonzero[0]:nonzero[-1] + 1]
        coeffs.setflags(write=False)
        object.__setattr__(self, "k_min", k_min)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "tail_bound", float(self.tail_bound))

    @classmethod
    def from_dict(cls, coefficients: dict, tail_bound: float = 0.0) -> "FourierSeries":
        """Build from a {frequency: coefficient} mapping."""
        if not coefficients:
            return cls.zero()
        lo, hi = min(coefficients), max(coefficients)
        coeffs = np.zeros(hi - lo + 1, dtype=complex)
        for k, c in coefficients.items():
            coeffs[k - lo] = c
        return cls(lo, coeffs, tail_bound)

    @classmethod
    def zero(cls) -> "FourierSeries":
        return cls(0, np.zeros(1, dtype=complex))

    @classmethod
    def monomial(cls, k: int, c: complex = 1.0) -> "FourierSeries":
        return cls(k, np.array([c], dtype=complex))

    @property
    def k_max(self) -> int:
        return self.k_min + self.coeffs.size - 1

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    @property
    def bandwidth(self) -> int:
        """Largest |k| carrying a coefficient."""
        return max(abs(self.k_min), abs(self.k_max))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def coefficient(self, k: int) -> complex:
        j = k - self.k_min
        if 0 <= j < self.coeffs.size:
            return complex(self.coeffs[j])
        return 0j

    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))

    def lp_coefficient_norm(self, p: float) -> float:
        """l^p norm of the coefficient sequence."""
        return sequence_norm(self.coeffs, p)

    def trimmed(self, budget: float) -> "FourierSeries":
        """Drop end runs of coefficients whose l1 mass fits in budget; the mass moves to tail_bound."""
        mags = np.abs(self.coeffs)
        left = np.cumsum(mags)
        right = np.cumsum(mags[::-1])
        half = budget / 2.0
        n_left = int(np.searchsorted(left, half, side="right"))
        n_right = int(np.searchsorted(right, half, side="right"))
        if n_left + n_right >= mags.size:
            n_left, n_right = 0, 0
        dropped = float(left[n_left - 1] if n_left else 0.0) + float(right[n_right - 1] if n_right else 0.0)
        kept = self.coeffs[n_left:mags.size - n_right]
        return FourierSeries(self.k_min + n_left, kept, self.tail_bound + dropped)

    def __add__(self, other: "FourierSeries") -> "FourierSeries":
        lo = min(self.k_min, other.k_min)
        hi = max(self.k_max, other.k_max)
        out = np.zeros(hi - lo + 1, dtype=complex)
        out[self.k_min - lo:self.k_max - lo + 1] += self.coeffs
        out[other.k_min - lo:other.k_max - lo + 1] += other.coeffs
        return FourierSeries(lo, out, self.tail_bound + other.tail_bound)

    def scaled(self, c: complex) -> "FourierSeries":
        return FourierSeries(self.k_min, self.coeffs * c, self.tail_bound * abs(c))

    def evaluate_at(self, points: np.ndarray) -> np.ndarray:
        """Evaluate sum_k c_k z^k at arbitrary points z (direct summation)."""
        points = np.asarray(points, dtype=complex)
        out = np.empty(points.shape, dtype=complex)
        flat = points.ravel()
        res = out.ravel()
        for i, z in enumerate(flat):
            res[i] = np.dot(self.coeffs, z ** self.frequencies)
        return out


@dataclass(frozen=True, eq=False)
class GridSamples:
    """Values of a function at the m-th roots of unity."""

    m: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.atleast_1d(np.asarray(self.values)).copy()
        if self.m < 1:
            raise DomainError(f"grid size must be >= 1, got {self.m}")
        if values.shape != (self.m,):
            raise DomainError(f"expected {self.m} samples, got shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def scaled(self, c: complex) -> "GridSamples":
        return GridSamples(self.m, self.values * c)

    def l1_mean(self) -> float:
        return float(np.mean(np.abs(self.values)))


@dataclass(frozen=True)
class IntervalSet:
    """A finite family of integer intervals [lo, hi] (inclusive), in the given order."""

    intervals: Tuple[Interval, ...]
    disjoint: bool = field(init=False)
    consecutive: bool = field(init=False)

    def __post_init__(self):
        intervals = tuple((int(lo), int(hi)) for lo, hi in self.intervals)
        for lo, hi in intervals:
            if lo > hi:
                raise DomainError(f"interval [{lo}, {hi}] has lo > hi")
        ordered = sorted(intervals)
        disjoint = all(a[1] < b[0] for a, b in zip(ordered, ordered[1:]))
        consecutive = disjoint and all(a[1] + 1 == b[0] for a, b in zip(ordered, ordered[1:]))
        object.__setattr__(self, "intervals", intervals)
        object.__setattr__(self, "disjoint", disjoint)
        object.__setattr__(self, "consecutive", consecutive)

    @classmethod
    def quadratic_blocks(cls, n_blocks: int) -> "IntervalSet":
        """Blocks [n^2 + 1, (n+1)^2], n = 0..n_blocks-1, partitioning [1, n_blocks^2]."""
        if n_blocks < 1:
            raise DomainError("need at least one quadratic block")
        return cls(tuple((n * n + 1, (n + 1) * (n + 1)) for n in range(n_blocks)))

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def union(self) -> Tuple[Interval, ...]:
        """Sorted, merged cover of all intervals."""
        merged = []
        for lo, hi in sorted(self.intervals):
            if merged and lo <= merged[-1][1] + 1:
                merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
            else:
                merged.append((lo, hi))
        return tuple(merged)

    def contains(self, k: int) -> bool:
        return any(lo <= k <= hi for lo, hi in self.intervals)

    def as_lists(self) -> list:
        return [[lo, hi] for lo, hi in self.intervals]


def sequence_norm(values: np.ndarray, p: float) -> float:
    """l^p norm of a finite sequence (p = inf gives the max)."""
    mags = np.abs(np.asarray(values))
    if mags.size == 0:
        return 0.0
    if math.isinf(p):
        return float(np.max(mags))
    if p == 1:
        return float(np.sum(mags))
    if p == 2:
        return float(np.sqrt(np.sum(mags * mags)))
    scale = float(np.max(mags))
    if scale == 0.0:
        return 0.0
    return scale * float(np.sum((mags / scale) ** p)) ** (1.0 / p)


def _check_p(p: float) -> float:
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise DomainError(f"exponent p must lie in [1, inf], got {p}")
    return p


def nyquist_m(f: FourierSeries) -> int:
    """Smallest grid that resolves f without aliasing: 2 * bandwidth + 1."""
    return 2 * f.bandwidth + 1


def default_m(f: FourierSeries) -> int:
    """Default quadrature grid: 4 x bandwidth rounded up to a power of two (at least 16)."""
    return max(16, next_pow2(4 * f.bandwidth), next_pow2(nyquist_m(f)))


def _require_nyquist(f: FourierSeries, m: int) -> None:
    required = nyquist_m(f)
    if m < required:
        raise NyquistError(m, required)


def fold(f: FourierSeries, m: int) -> np.ndarray:
    """Coefficients of f folded modulo m: a[k mod m] = sum of c_k over the residue class."""
    folded = np.zeros(m, dtype=complex)
    np.add.at(folded, f.frequencies % m, f.coeffs)
    return folded


def evaluate(f: FourierSeries, m: int) -> GridSamples:
    """Exact samples of f at the m-th roots of unity (valid for every m >= 1)."""
    if m < 1:
        raise DomainError(f"grid size must be >= 1, got {m}")
    return GridSamples(m, m * sfft.ifft(fold(f, m)))


def from_grid(samples: GridSamples, k_min: Optional[int] = None) -> FourierSeries:
    """Inverse of evaluate: coefficients on the frequency window [k_min, k_min + m).

    By default the window is centred, [-(m // 2), m - m // 2).
    """
    m = samples.m
    if k_min is None:
        k_min = -(m // 2)
    coeffs = sfft.fft(samples.values) / m
    return FourierSeries(k_min, np.roll(coeffs, -k_min))


def lp_norm(f: FourierSeries, p: float, m: Optional[int] = None) -> float:
    """
    L^p(T) norm of f by m-point uniform quadrature.

    Args:
        f: function on the torus
        p: exponent in [1, inf]
        m: grid size (default: default_m(f)); must be >= 2 * bandwidth + 1

    Returns:
        (m^-1 sum_j |f(gamma_j)|^p)^(1/p), or max_j |f(gamma_j)| for p = inf
    """
    p = _check_p(p)
    m = default_m(f) if m is None else int(m)
    _require_nyquist(f, m)
    return samples_lp_norm(evaluate(f, m), p)


def samples_lp_norm(g: GridSamples, p: float) -> float:
    """Quadrature L^p norm of grid samples."""
    p = _check_p(p)
    mags = np.abs(g.values)
    if math.isinf(p):
        return float(np.max(mags))
    return sequence_norm(mags, p) / g.m ** (1.0 / p)


def lp_norm_converged(
    f: FourierSeries,
    p: float,
    tol: float = DEFAULT_TOL,
    m_max: int = 2**22,
) -> Tuple[float, int]:
    """
    L^p norm with grid doubling until two successive values differ by < tol.

    Returns:
        (norm, grid size used)
    """
    m = default_m(f)
    value = lp_norm(f, p, m)
    while 2 * m <= m_max:
        refined = lp_norm(f, p, 2 * m)
        m *= 2
        if abs(refined - value) < tol:
            return refined, m
        value = refined
    logger.warning(f"L^{p} norm not stable to {tol:g} up to m={m}; returning last value")
    return value, m


def weak_l1_norm(g: GridSamples) -> float:
    """
    Weak-L^1 quasinorm sup_t t * lambda(|g| >= t) of the empirical sample distribution.

    The supremum is attained at a sample magnitude, so only those are swept.
    """
    if g.m < 1 or g.values.size == 0:
        raise DomainError("weak-L1 norm of an empty sample set")
    mags = np.sort(np.abs(g.values))
    counts = g.m - np.searchsorted(mags, mags, side="left")
    return float(np.max(mags * counts)) / g.m


def band_project(f: FourierSeries, interval: Interval) -> FourierSeries:
    """M_I f: keep only the coefficients with frequency in I = [lo, hi]."""
    lo, hi = int(interval[0]), int(interval[1])
    if lo > hi:
        raise DomainError(f"interval [{lo}, {hi}] has lo > hi")
    start = max(lo, f.k_min)
    stop = min(hi, f.k_max)
    if start > stop:
        return FourierSeries(0, np.zeros(1, dtype=complex), f.tail_bound)
    return FourierSeries(start, f.coeffs[start - f.k_min:stop - f.k_min + 1], f.tail_bound)


Multiplier = Union[Callable[[np.ndarray], np.ndarray], Sequence[float], np.ndarray]


def apply_multiplier(f: FourierSeries, multiplier: Multiplier) -> FourierSeries:
    """
    Coefficientwise multiplier: c_n -> a_n c_n on the support of f.

    Args:
        f: function on the torus
        multiplier: a callable mapping an array of frequencies to a_n, or an
            array aligned with f.frequencies (k_min .. k_max)

    Returns:
        The multiplied series; its tail bound is scaled by max |a_n| on the support.
    """
    freqs = f.frequencies
    if callable(multiplier):
        a = np.asarray(multiplier(freqs), dtype=float)
    else:
        a = np.asarray(multiplier, dtype=float)
    if a.shape != freqs.shape:
        raise DomainError(f"multiplier must cover frequencies {f.k_min}..{f.k_max}, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("multiplier must be a bounded real sequence")
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    return FourierSeries(f.k_min, f.coeffs * a, f.tail_bound * scale)


def indicator_multiplier(intervals: Iterable[Interval]) -> Callable[[np.ndarray], np.ndarray]:
    """The 0/1 multiplier of a union of intervals."""
    intervals = tuple(intervals)

    def a(freqs: np.ndarray) -> np.ndarray:
        mask = np.zeros(freqs.shape, dtype=bool)
        for lo, hi in intervals:
            mask |= (freqs >= lo) & (freqs <= hi)
        return mask.astype(float)

    return a


def square_function(f: FourierSeries, intervals: IntervalSet, m: Optional[int] = None) -> GridSamples:
    """
    Littlewood-Paley square function (sum_l |M_{I_l} f|^2)^(1/2) on the m-grid.

    Intervals need not be disjoint; repeated intervals count repeatedly.
    """
    if len(intervals) == 0:
        raise DomainError("square function of an empty interval family")
    m = default_m(f) if m is None else int(m)
    _require_nyquist(f, m)
    acc = np.zeros(m)
    for interval in intervals:
        piece = evaluate(band_project(f, interval), m).values
        acc += piece.real ** 2 + piece.imag ** 2
    return GridSamples(m, np.sqrt(acc))
