"""
scikit-learn style wrappers around the ensemble engine and the analytic formulas.

Hyperparameters live in ``__init__`` untouched, so ``get_params``/``set_params``
and ``sklearn.base.clone`` work; everything learned ends in an underscore.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import InvalidArgumentError, check_epsilon, check_spinor
from .ensemble import NoiseModel, ensemble_average, estimate_diffusion
from .profile import fit_profile
from .superoperator import G0Case, diffusion_closed, diffusion_quadrature
from .walk import DEFAULT_COIN_STATE, PositionDistribution

__all__ = ["NoisyWalkDiffusion", "AnalyticDiffusion", "ProfileShapeClassifier"]


class NoisyWalkDiffusion(BaseEstimator):
    """Monte Carlo diffusion constant of the walk with random coin phase.

    Parameters
    ----------
    g0, epsilon : float
        Centre and half-width of the uniform phase distribution.
    steps : int
        Number of time steps T per trajectory.
    n_samples : int
        Number of trajectories.
    seed : int
        Master seed; trajectory i uses the stream derived from (seed, i).
    coin_state : array-like of 2 complex or 4 real, optional
        Initial coin state, (1, i)/sqrt(2) by default.
    fit_window : float
        Fraction of the time grid (from the end) used for the slope fit.
    n_jobs : int, optional
        Worker threads; does not change results.

    Attributes
    ----------
    statistics_ : EnsembleStatistics
    diffusion_ : float
    diffusion_stderr_ : float
    """

    def __init__(
        self,
        g0=np.pi,
        epsilon=2.23,
        steps=500,
        n_samples=2000,
        seed=0,
        coin_state=None,
        fit_window=0.5,
        n_jobs=None,
    ):
        self.g0 = g0
        self.epsilon = epsilon
        self.steps = steps
        self.n_samples = n_samples
        self.seed = seed
        self.coin_state = coin_state
        self.fit_window = fit_window
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        """Run the ensemble. ``X`` and ``y`` are ignored."""
        spinor = check_spinor(DEFAULT_COIN_STATE if self.coin_state is None else self.coin_state)
        model = NoiseModel(self.g0, self.epsilon, self.n_samples, self.seed)
        self.statistics_ = ensemble_average(spinor, model, self.steps, n_workers=self.n_jobs)
        self.diffusion_, self.diffusion_stderr_ = estimate_diffusion(self.statistics_, self.fit_window)
        return self

    def predict(self, X):
        """Asymptotic <x^2>_t = D t for the times in ``X``."""
        check_is_fitted(self, "diffusion_")
        t = check_array(X, ensure_2d=False, dtype=np.float64)
        return self.diffusion_ * t


class AnalyticDiffusion(TransformerMixin, BaseEstimator):
    """Maps noise half-widths to the asymptotic diffusion constant.

    ``method="closed"`` requires g0 in {0, pi}; ``method="quadrature"`` works
    for any g0.
    """

    def __init__(self, g0=0.0, method="closed", k_points=1024, quadrature_nodes=129):
        self.g0 = g0
        self.method = method
        self.k_points = k_points
        self.quadrature_nodes = quadrature_nodes

    def fit(self, X=None, y=None):
        if self.method == "closed":
            self.g0_case_ = G0Case.parse(self.g0)
        elif self.method == "quadrature":
            self.g0_case_ = None
        else:
            raise InvalidArgumentError(f"method must be 'closed' or 'quadrature', got {self.method!r}")
        return self

    def transform(self, X):
        """Column of D(eps) for a column (or flat array) of eps values."""
        check_is_fitted(self, "g0_case_")
        eps = check_array(X, ensure_2d=False, dtype=np.float64).reshape(-1)
        if self.g0_case_ is not None:
            values = [diffusion_closed(self.g0_case_, e) for e in eps]
        else:
            values = [diffusion_quadrature(self.g0, check_epsilon(e), self.k_points, self.quadrature_nodes) for e in eps]
        return np.asarray(values)[:, None]


def _as_distribution(X):
    if isinstance(X, PositionDistribution):
        return X
    positions, probabilities = X
    return PositionDistribution(np.asarray(positions), np.asarray(probabilities, dtype=np.float64))


class ProfileShapeClassifier(BaseEstimator):
    """Gaussian / exponential classification of an averaged position profile."""

    def __init__(self, exclusion=2, floor=0.1, margin=0.02):
        self.exclusion = exclusion
        self.floor = floor
        self.margin = margin

    def fit(self, X, y=None):
        """``X`` is a PositionDistribution or a ``(positions, probabilities)`` pair."""
        self.profile_fit_ = fit_profile(_as_distribution(X), self.exclusion, self.floor, self.margin)
        self.classification_ = self.profile_fit_.classification
        return self

    def predict(self, X):
        """Labels for an iterable of distributions."""
        return np.array(
            [fit_profile(_as_distribution(d), self.exclusion, self.floor, self.margin).classification for d in X]
        )
