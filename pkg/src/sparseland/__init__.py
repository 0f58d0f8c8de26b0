"""Weighted lp-penalized least squares via thresholded Landweber iteration."""

__version__ = "0.1.0"

from .core import (
    CoefficientVector,
    ObjectiveBreakdown,
    PenaltySpec,
    WeightSequence,
    as_coefficients,
    objective,
    penalty_value,
    surrogate_objective,
    triple_norm,
)
from .errors import (
    AlignmentError,
    ContractViolationError,
    DescentViolationError,
    ParameterError,
)
from .experiment import (
    CaseSpec,
    DEFAULT_CASES,
    ExperimentConfig,
    ExperimentResult,
    NoisyData,
    add_poisson_noise,
    count_profile_peaks,
    make_phantom,
    run_experiment,
)
from .operators import (
    Convolution2DOperator,
    DenseOperator,
    DiagonalOperator,
    FrameSynthesisOperator,
    LinearOperatorHandle,
    RenormalizedProblem,
    ScaledOperator,
    SvdModel,
    convolution_operator,
    estimate_norm,
    frame_synthesis_operator,
    renormalize,
    thresholded_svd_solve,
    validate_operator,
)
from .regularization import (
    MuScheduleReport,
    NoisePrior,
    SpectralEnvelope,
    besov_modulus_rate,
    check_mu_requirements,
    empirical_diagonal_modulus,
    modulus_bounds,
    mu_schedule,
    primed_radii,
)
from .shrinkage import (
    shrink_asymmetric,
    shrink_complex,
    shrink_p,
    shrink_vector,
    soft_threshold,
)
from .solver import (
    SolveResult,
    SolveTrace,
    SolverConfig,
    fixed_point_residual,
    iterate_step,
    landweber_step,
    solve,
)
from .transforms import (
    BesovWeightSpec,
    WaveletCoefficients,
    WaveletSpec,
    besov_weights,
    conjugated_operator,
    dwt,
    idwt,
)

__all__ = [
    "__version__",
    "CoefficientVector",
    "WeightSequence",
    "PenaltySpec",
    "ObjectiveBreakdown",
    "as_coefficients",
    "triple_norm",
    "penalty_value",
    "objective",
    "surrogate_objective",
    "AlignmentError",
    "ParameterError",
    "ContractViolationError",
    "DescentViolationError",
    "soft_threshold",
    "shrink_p",
    "shrink_complex",
    "shrink_asymmetric",
    "shrink_vector",
    "LinearOperatorHandle",
    "DiagonalOperator",
    "DenseOperator",
    "Convolution2DOperator",
    "FrameSynthesisOperator",
    "ScaledOperator",
    "convolution_operator",
    "frame_synthesis_operator",
    "estimate_norm",
    "renormalize",
    "RenormalizedProblem",
    "validate_operator",
    "SvdModel",
    "thresholded_svd_solve",
    "SolverConfig",
    "SolveTrace",
    "SolveResult",
    "landweber_step",
    "iterate_step",
    "solve",
    "fixed_point_residual",
    "WaveletSpec",
    "WaveletCoefficients",
    "dwt",
    "idwt",
    "BesovWeightSpec",
    "besov_weights",
    "conjugated_operator",
    "NoisePrior",
    "SpectralEnvelope",
    "MuScheduleReport",
    "mu_schedule",
    "check_mu_requirements",
    "primed_radii",
    "modulus_bounds",
    "empirical_diagonal_modulus",
    "besov_modulus_rate",
    "CaseSpec",
    "DEFAULT_CASES",
    "ExperimentConfig",
    "ExperimentResult",
    "NoisyData",
    "make_phantom",
    "add_poisson_noise",
    "count_profile_peaks",
    "run_experiment",
]
