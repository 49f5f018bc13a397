"""
kreiss-lab Package

Numerical laboratory for strongly Kreiss bounded convolution operators on
l^p(Z): Fourier symbol calculus, l^p norm brackets, Kreiss-type constants,
square-function inequalities on the torus and the exponent bootstrap.
"""

__version__ = "0.1.0"

from .bounds import bootstrap_trajectory, exponents, final_power_exponent, technical_check
from .errors import DomainError, KreissLabError
from .experiments import ExperimentConfig, fit_exponent, growth_experiment, lp_inequality_experiment
from .kreiss import (
    KreissReport,
    absolute_strong_kreiss_constant,
    kreiss_constant,
    strong_kreiss_constant,
    window_power_sum_ratio,
)
from .norms import NormBracket, conv_norm_bracket
from .symbols import ConvOperator, mobius_symbol, resolvent_symbol, symbol_exp_scaled, symbol_pow
from .torus import FourierSeries, IntervalSet

__all__ = [
    "FourierSeries",
    "IntervalSet",
    "ConvOperator",
    "mobius_symbol",
    "symbol_pow",
    "symbol_exp_scaled",
    "resolvent_symbol",
    "NormBracket",
    "conv_norm_bracket",
    "KreissReport",
    "kreiss_constant",
    "strong_kreiss_constant",
    "absolute_strong_kreiss_constant",
    "window_power_sum_ratio",
    "exponents",
    "bootstrap_trajectory",
    "final_power_exponent",
    "technical_check",
    "ExperimentConfig",
    "growth_experiment",
    "fit_exponent",
    "lp_inequality_experiment",
    "KreissLabError",
    "DomainError",
]
