"""Long-range free-space LOS MIMO link modeling.

Core pieces: scalar link budgets, phase-only coupling matrices and their
singular spectra, closed-form capacity bounds with a stream-count optimizer,
the transverse prolate-mode eigensolver, a distributed-array construction
that attains the deterministic capacity, fourth-moment machinery for the
ensemble lower bound, and a seeded Monte Carlo harness tying it together.
"""

from .backend import backend_name
from .channel import (
    ChannelMatrix,
    EigenSpectrum,
    MatrixKind,
    SpectrumContext,
    build_full_matrix,
    build_reduced_matrix,
    hadamard_factors,
    singular_spectrum,
)
from .capacity import (
    CapacityInputs,
    StreamCountResult,
    deterministic_capacity,
    expected_spectral_efficiency_lower_bound,
    optimal_stream_count,
    required_array_area,
    spectral_efficiency_upper_bound,
    uniform_spectral_efficiency,
    waterfilling_spectral_efficiency,
)
from .errors import ConfigError, InvariantViolation, LosMimoError, NumericalFailure
from .geometry import (
    DiscCluster,
    NodeCluster,
    fresnel_distance,
    project_to_disc,
    sample_ball_cluster,
    sample_disc_cluster,
)
from .linkbudget import LinkBudget, channel_gain, input_snr, siso_spectral_efficiency
from .montecarlo import ErgodicEstimate, ScanScenario, bound_scan, ergodic_uniform_xi
from .prolate import (
    ProlateProblem,
    RadialEigenpair,
    assemble_operator_spectrum,
    bandwidth_parameter,
    dof_count,
    radial_eigensystem,
    significant_mode_count,
)

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "ChannelMatrix",
    "EigenSpectrum",
    "MatrixKind",
    "SpectrumContext",
    "build_full_matrix",
    "build_reduced_matrix",
    "hadamard_factors",
    "singular_spectrum",
    "CapacityInputs",
    "StreamCountResult",
    "deterministic_capacity",
    "expected_spectral_efficiency_lower_bound",
    "optimal_stream_count",
    "required_array_area",
    "spectral_efficiency_upper_bound",
    "uniform_spectral_efficiency",
    "waterfilling_spectral_efficiency",
    "ConfigError",
    "InvariantViolation",
    "LosMimoError",
    "NumericalFailure",
    "DiscCluster",
    "NodeCluster",
    "fresnel_distance",
    "project_to_disc",
    "sample_ball_cluster",
    "sample_disc_cluster",
    "LinkBudget",
    "channel_gain",
    "input_snr",
    "siso_spectral_efficiency",
    "ErgodicEstimate",
    "ScanScenario",
    "bound_scan",
    "ergodic_uniform_xi",
    "ProlateProblem",
    "RadialEigenpair",
    "assemble_operator_spectrum",
    "bandwidth_parameter",
    "dof_count",
    "radial_eigensystem",
    "significant_mode_count",
    "__version__",
]
