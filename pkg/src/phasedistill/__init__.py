"""
Purification of phase-diffused squeezed light by interference and
conditional homodyne detection.

Three engines are provided: an iterated two-copy protocol in a truncated Fock
basis, an N-copy collective protocol solved with Gaussian covariance
matrices, and the infinite-iteration limit of the iterated protocol.
"""

from .analysis import (covariance_matrix, gaussian_fidelity, purity,
                       quadrature_variance, uhlmann_fidelity)
from .asymptotic import AsymptoticResult, asymptotic_general, asymptotic_ideal
from .collective import (ConditioningSpec, build_interferometer,
                         collective_variance_general, collective_variance_x)
from .engine import purify_step
from .fock import (DEFAULT_CUTOFF, FockDensityMatrix, PhaseNoiseModel,
                   SqueezedVacuumSpec, squeezed_vacuum_dm)
from .iterative import IterationConfig, run_iterations
from .measurement import RANDOMIZED, conditioning_povm
from .phase_average import AccuracyError, IntegrationConfig

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "AsymptoticResult", "ConditioningSpec", "DEFAULT_CUTOFF",
    "FockDensityMatrix", "IntegrationConfig", "IterationConfig", "PhaseNoiseModel",
    "RANDOMIZED", "SqueezedVacuumSpec", "asymptotic_general", "asymptotic_ideal",
    "build_interferometer", "collective_variance_general", "collective_variance_x",
    "conditioning_povm", "covariance_matrix", "gaussian_fidelity", "purify_step",
    "purity", "quadrature_variance", "run_iterations", "squeezed_vacuum_dm",
    "uhlmann_fidelity",
]
