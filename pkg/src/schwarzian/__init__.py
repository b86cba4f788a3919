"""Exact and Monte Carlo correlators of the Schwarzian field theory."""

from .correlator import (
    CorrelatorSpec,
    QuadratureConfig,
    Value,
    correlator_circle,
    correlator_circle_direct,
    correlator_interval,
    moment,
    partition_function,
    partition_function_quadrature,
    regularized_circle_correlator,
)
from .diagram import Chord, CircleDiagram, DiagramError, InterlacedError, IntervalDiagram
from .montecarlo import MCEstimate, SamplerConfig
from .stress_energy import StressSpec, spectral_moment, stress_correlator

__version__ = "0.1.0"
