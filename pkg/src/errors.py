"""
Errors Module

Exception hierarchy shared by every kreiss-lab module. The CLI maps
DomainError to exit code 2 and every other KreissLabError to exit code 1.
"""

from typing import Optional, Sequence


class KreissLabError(Exception):
    """Base class for all kreiss-lab errors."""


class DomainError(KreissLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class NyquistError(DomainError):
    """The quadrature grid is too small to resolve a Fourier series."""

    def __init__(self, m: int, required_m: int):
        super().__init__(f"grid size m={m} is below the Nyquist bound; need m >= {required_m}")
        self.m = m
        self.required_m = required_m


class TailCriterionError(DomainError):
    """A truncated Poisson sum would leave too much mass in its tail."""

    def __init__(self, n_max: int, required_n_max: int, tail: float):
        super().__init__(
            f"n_max={n_max} leaves Poisson tail {tail:.3e}; need n_max >= {required_n_max}"
        )
        self.n_max = n_max
        self.required_n_max = required_n_max
        self.tail = tail


class ConvergenceError(KreissLabError):
    """An adaptive FFT computation did not stabilise before the grid ceiling."""

    def __init__(self, what: str, m: int, last_discrepancies: Sequence[float]):
        shown = ", ".join(f"{d:.3e}" for d in last_discrepancies)
        super().__init__(f"{what} did not converge up to m={m} (last l1 discrepancies: {shown})")
        self.what = what
        self.m = m
        self.last_discrepancies = tuple(last_discrepancies)


class SingularityError(KreissLabError):
    """The resolvent symbol comes too close to a pole on the sampling grid."""

    def __init__(self, lam: complex, min_distance: float, floor: Optional[float] = None):
        super().__init__(
            f"lambda={lam:.17g} (|lambda|-1={abs(lam) - 1.0:.3e}) is near the spectrum: min |lambda - q| = {min_distance:.3e}"
            + (f" < floor {floor:.1e}" if floor is not None else "")
        )
        self.lam = lam
        self.min_distance = min_distance
        self.floor = floor


class BracketError(KreissLabError):
    """A norm bracket came out with lower > upper."""


class DegenerateFitError(KreissLabError):
    """The least-squares design matrix is rank deficient."""
