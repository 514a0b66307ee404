"""Shape of averaged position profiles and comparison of <x^2>_t with an analytic slope."""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._validation import InvalidArgumentError

__all__ = ["ProfileFit", "SeriesComparison", "fit_profile", "compare_series", "r_squared"]

GAUSSIAN = "gaussian"
EXPONENTIAL = "exponential"
INDETERMINATE = "indeterminate"


@dataclass(frozen=True, eq=False)
class ProfileFit:
    """Goodness of fit of log P against x^2 (Gaussian) and |x| (exponential)."""

    gaussian_r2: float
    exponential_r2: float
    classification: str
    fit_range: np.ndarray

    def to_dict(self):
        return {
            "gaussian_r2": self.gaussian_r2,
            "exponential_r2": self.exponential_r2,
            "classification": self.classification,
            "fit_range": [int(x) for x in self.fit_range],
        }


class SeriesComparison(NamedTuple):
    ratio: np.ndarray
    late_mean: float
    late_stderr: float
    tolerance: float = 0.05

    @property
    def passed(self):
        dev = abs(self.late_mean - 1.0)
        return dev < 2.0 * self.late_stderr or dev < self.tolerance


def r_squared(x, y):
    """Coefficient of determination of an ordinary least-squares line y ~ x."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    total = float(np.sum((y - y.mean()) ** 2))
    if total == 0.0:
        return 1.0
    return float(min(1.0, max(0.0, 1.0 - float(resid @ resid) / total)))


def fit_profile(dist, exclusion=2, floor=0.1, margin=0.02, min_support=20):
    """Classify an averaged profile as Gaussian or exponential around its centre.

    Sites of the populated parity with ``|x| >= exclusion`` and
    ``P >= floor * max(P)`` enter two separate least-squares fits of log P.
    The larger R^2 wins if it leads by at least ``margin``.

    Raises
    ------
    InvalidArgumentError
        If fewer than ``min_support`` populated sites survive the parity and
        exclusion cuts, or fewer than three lie above the floor.
    """
    x = np.asarray(dist.positions)
    p = np.asarray(dist.probabilities, dtype=np.float64)
    if x.shape != p.shape or p.size == 0:
        raise InvalidArgumentError("positions and probabilities must be non-empty and of equal length")
    parity = int(x[np.argmax(p)]) % 2
    support = (x % 2 == parity) & (p > 0) & (np.abs(x) >= exclusion)
    if support.sum() < min_support:
        raise InvalidArgumentError(f"only {int(support.sum())} populated sites, need {min_support}")
    window = support & (p >= floor * p.max())
    if window.sum() < 3:
        raise InvalidArgumentError("fewer than three sites above the fit floor")

    xs = x[window].astype(np.float64)
    logp = np.log(p[window])
    g_r2 = r_squared(xs * xs, logp)
    e_r2 = r_squared(np.abs(xs), logp)
    if g_r2 >= e_r2 + margin:
        label = GAUSSIAN
    elif e_r2 >= g_r2 + margin:
        label = EXPONENTIAL
    else:
        label = INDETERMINATE
    return ProfileFit(g_r2, e_r2, label, x[window])


def compare_series(mc, analytic_D, late_fraction=0.5, tolerance=0.05):
    """Ratio <x^2>_t / (D t) across the grid, and its late-time mean and standard error."""
    t = np.asarray(mc.time_grid, dtype=np.float64)
    if t.shape[0] < 20:
        raise InvalidArgumentError("series must hold at least 20 time points")
    ratio = mc.mean_x2 / (analytic_D * t)
    late = slice(t.shape[0] - max(1, int(math.floor(late_fraction * t.shape[0]))), None)
    mean = float(ratio[late].mean())
    samples = getattr(mc, "x2_samples", None)
    if samples is not None and samples.shape[0] > 1:
        per_sample = (samples[:, late] / (analytic_D * t[late])).mean(axis=1)
        stderr = float(per_sample.std(ddof=1) / math.sqrt(per_sample.shape[0]))
    else:
        stderr = float((mc.stderr_x2[late] / (analytic_D * t[late])).mean())
    return SeriesComparison(ratio, mean, stderr, tolerance)
