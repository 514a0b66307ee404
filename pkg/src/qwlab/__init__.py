"""Quantum walk with a coin phase redrawn at random every step.

Position-space simulation (:mod:`qwlab.walk`), Monte Carlo ensembles
(:mod:`qwlab.ensemble`), phase-averaged Pauli transfer matrices and the
asymptotic diffusion constant (:mod:`qwlab.superoperator`), profile shape
analysis (:mod:`qwlab.profile`) and scikit-learn style wrappers
(:mod:`qwlab.estimators`).
"""

from ._validation import DegenerateFormError, InvalidArgumentError
from .ensemble import (
    EnsembleStatistics,
    NoiseModel,
    ensemble_average,
    estimate_diffusion,
    run_trajectory,
    sample_phase,
)
from .estimators import AnalyticDiffusion, NoisyWalkDiffusion, ProfileShapeClassifier
from .profile import ProfileFit, compare_series, fit_profile
from .superoperator import (
    BlochVector,
    ClosedCoefficients,
    G0Case,
    GammaForm,
    PauliTransferMatrix,
    assemble_transfer,
    closed_coefficients,
    derivative_matrices,
    diffusion_closed,
    diffusion_quadrature,
    gamma_integrand,
    last_term_check,
    pauli_transfer_numeric,
    spectral_radius_check,
    variance_series_exact,
)
from .walk import (
    DEFAULT_COIN_STATE,
    CoinOperator,
    PositionDistribution,
    WalkerState,
    build_coin,
    build_momentum_step,
    evolve,
    hadamard_coin,
    moments,
    position_distribution,
    step,
)

__version__ = "0.1.0"
