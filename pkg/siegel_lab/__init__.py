"""
Numerical lab for Siegel-model approximations to Hardy-Littlewood and Chowla correlations.

Layers, bottom up:

- arith_tables: segmented sieves of Liouville, von Mangoldt, Moebius, tau and smallest prime factors
- quad_char: primitive quadratic characters, L(1, chi), L'(1, chi) and exceptional-prime sums
- smoothing: the cutoffs psi and phi and the log-scale quadrature engine
- selberg: the smoothed Selberg sieve nu and its expanded weights
- approximants: lambda_siegel, Lambda_siegel and their Type I (sharp) and remainder (flat) parts
- correlations: shifted correlation averages, singular series and the five-line chain evaluator
- exp_sums: Kloosterman sums, hyperbola Fourier coefficients and character sums with shifts

Run ``siegel-lab --help`` (or ``python -m siegel_lab``) for the command-line surface.
"""

__version__ = "0.1.0"

from .config import Settings, get_settings
from .errors import ComputationError, ConfigError, SiegelLabError
from .arith_tables import ArithTable, TypeICoeffs, build_window
from .quad_char import QuadChar, l_one, l_prime_one, quality_proxy
from .selberg import SieveNu, nu_direct, nu_weights
from .approximants import ApproximantBank, SharpKernel, siegel_params
from .correlations import chain_report, correlate, crt_merge, singular_series
from .schemas import ChainReport, RunConfig, ShiftSystem, SiegelParams

__all__ = [
    "__version__",
    "Settings",
    "get_settings",
    "SiegelLabError",
    "ConfigError",
    "ComputationError",
    "ArithTable",
    "TypeICoeffs",
    "build_window",
    "QuadChar",
    "l_one",
    "l_prime_one",
    "quality_proxy",
    "SieveNu",
    "nu_direct",
    "nu_weights",
    "ApproximantBank",
    "SharpKernel",
    "siegel_params",
    "chain_report",
    "correlate",
    "crt_merge",
    "singular_series",
    "ChainReport",
    "RunConfig",
    "ShiftSystem",
    "SiegelParams",
]
