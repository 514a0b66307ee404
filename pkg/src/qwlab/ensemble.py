"""
Monte Carlo ensembles of walkers whose coin phase is redrawn at every step.

Each trajectory draws i.i.d. phases uniformly from [g0 - eps, g0 + eps) and is
evolved exactly in position space. Trajectory ``i`` always uses the random
stream derived from ``(master_seed, i)`` (Philox seeded through a
``SeedSequence`` spawn key), so results do not depend on the batching or on the
number of worker threads. Reductions happen once, over arrays ordered by
trajectory index.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from ._validation import (
    InvalidArgumentError,
    check_epsilon,
    check_finite,
    check_positive_int,
    check_spinor,
)
from .walk import PositionDistribution, apply_coin, coin_entries

__all__ = [
    "NoiseModel",
    "EnsembleStatistics",
    "TrajectoryResult",
    "DiffusionEstimate",
    "trajectory_rng",
    "sample_phase",
    "sample_phases",
    "run_trajectory",
    "ensemble_average",
    "estimate_diffusion",
    "worker_count",
]

DEFAULT_CHUNK = 64


@dataclass(frozen=True)
class NoiseModel:
    """Uniform phase noise of half-width ``epsilon`` around ``g0``."""

    g0: float
    epsilon: float
    n_samples: int = 2000
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "g0", check_finite(self.g0, "g0"))
        object.__setattr__(self, "epsilon", check_epsilon(self.epsilon))
        object.__setattr__(self, "n_samples", check_positive_int(self.n_samples, "n_samples"))
        seed = int(self.master_seed)
        if not 0 <= seed < 2**64:
            raise InvalidArgumentError(f"master_seed must be a 64-bit unsigned integer, got {seed}")
        object.__setattr__(self, "master_seed", seed)


class TrajectoryResult(NamedTuple):
    mean_x: np.ndarray
    x2: np.ndarray
    distribution: PositionDistribution


class DiffusionEstimate(NamedTuple):
    D: float
    stderr: float


@dataclass(eq=False)
class EnsembleStatistics:
    """Sample averages over an ensemble of noisy trajectories.

    ``x2_samples`` holds the per-trajectory second moments (n_samples, T) and
    is what :func:`estimate_diffusion` uses for its error bar. Hand-built
    statistics may leave the optional fields as None.
    """

    time_grid: np.ndarray
    mean_x2: np.ndarray
    stderr_x2: Optional[np.ndarray] = None
    mean_distribution: Optional[PositionDistribution] = None
    n_samples_used: int = 1
    mean_x: Optional[np.ndarray] = None
    stderr_distribution: Optional[np.ndarray] = None
    x2_samples: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.time_grid = np.asarray(self.time_grid)
        self.mean_x2 = np.asarray(self.mean_x2, dtype=np.float64)
        if self.time_grid.shape != self.mean_x2.shape:
            raise InvalidArgumentError("time_grid and mean_x2 must have the same shape")
        if self.stderr_x2 is None:
            self.stderr_x2 = np.zeros_like(self.mean_x2)


def worker_count(n_workers=None):
    """Thread count: explicit argument, else ``QWLAB_THREADS``, else the CPU count."""
    if n_workers is None:
        env = os.environ.get("QWLAB_THREADS")
        n_workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(n_workers))


def trajectory_rng(model, index):
    """Independent counter-based generator for trajectory ``index``."""
    seq = np.random.SeedSequence(entropy=model.master_seed, spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(seq))


def sample_phase(rng, model):
    """One phase g0 + eps (2u - 1), u uniform on [0, 1)."""
    return model.g0 + model.epsilon * (2.0 * rng.random() - 1.0)


def sample_phases(rng, model, n):
    # same arithmetic as sample_phase, so a block draw equals n scalar draws
    return model.g0 + model.epsilon * (2.0 * rng.random(n) - 1.0)


def _propagate(spinor, phases):
    """Evolve a batch of site-localized walkers; one row of ``phases`` per walker.

    Returns per-step first and second moments, shape (B, T), and the final
    probabilities on sites -T..T, shape (B, 2T + 1).
    """
    n_batch, n_steps = phases.shape
    width = 2 * n_steps + 1
    center = n_steps
    up = np.zeros((n_batch, width), dtype=np.complex128)
    down = np.zeros((n_batch, width), dtype=np.complex128)
    up[:, center] = spinor[0]
    down[:, center] = spinor[1]

    # coin entries are computed one trajectory at a time: identical values whatever the batch
    entries = np.empty((4, n_batch, n_steps), dtype=np.complex128)
    for b in range(n_batch):
        entries[:, b, :] = coin_entries(phases[b])

    x = np.arange(-n_steps, n_steps + 1, dtype=np.float64)
    x2 = x * x
    mean_x = np.empty((n_batch, n_steps))
    mean_x2 = np.empty((n_batch, n_steps))
    prob = None
    for t in range(n_steps):
        lo, hi = center - t, center + t + 1
        c = entries[:, :, t : t + 1]
        new_up, new_down = apply_coin(up[:, lo:hi], down[:, lo:hi], c[0], c[1], c[2], c[3])
        up[:, lo] = 0.0
        up[:, lo + 1 : hi + 1] = new_up
        down[:, hi - 1] = 0.0
        down[:, lo - 1 : hi - 1] = new_down
        s = slice(lo - 1, hi + 1)
        u, d = up[:, s], down[:, s]
        prob = u.real**2 + u.imag**2 + d.real**2 + d.imag**2
        mean_x[:, t] = (prob * x[s]).sum(axis=1)
        mean_x2[:, t] = (prob * x2[s]).sum(axis=1)

    final = up.real**2 + up.imag**2 + down.real**2 + down.imag**2
    return mean_x, mean_x2, final


def _phase_block(model, indices, n_steps):
    return np.stack([sample_phases(trajectory_rng(model, i), model, n_steps) for i in indices])


def run_trajectory(initial_spinor, model, T, trajectory_index):
    """Evolve one noisy walker for T steps from the origin."""
    T = check_positive_int(T, "T")
    spinor = check_spinor(initial_spinor)
    phases = _phase_block(model, [trajectory_index], T)
    mean_x, mean_x2, final = _propagate(spinor, phases)
    positions = np.arange(-T, T + 1)
    return TrajectoryResult(mean_x[0], mean_x2[0], PositionDistribution(positions, final[0]))


def ensemble_average(initial_spinor, model, T, n_workers=None, chunk_size=DEFAULT_CHUNK):
    """Average ``model.n_samples`` trajectories of length T.

    Trajectories are processed in fixed chunks of ``chunk_size`` indices,
    optionally on several threads; the output is bit-identical for any
    ``n_workers``.
    """
    T = check_positive_int(T, "T")
    spinor = check_spinor(initial_spinor)
    n = model.n_samples
    chunk_size = check_positive_int(chunk_size, "chunk_size")

    x_all = np.empty((n, T))
    x2_all = np.empty((n, T))
    dist_all = np.empty((n, 2 * T + 1))

    def work(start):
        idx = range(start, min(start + chunk_size, n))
        mx, mx2, final = _propagate(spinor, _phase_block(model, idx, T))
        x_all[idx.start : idx.stop] = mx
        x2_all[idx.start : idx.stop] = mx2
        dist_all[idx.start : idx.stop] = final

    starts = range(0, n, chunk_size)
    workers = worker_count(n_workers)
    if workers == 1:
        for s in starts:
            work(s)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, starts))

    if n > 1:
        stderr_x2 = x2_all.std(axis=0, ddof=1) / math.sqrt(n)
        stderr_dist = dist_all.std(axis=0, ddof=1) / math.sqrt(n)
    else:
        stderr_x2 = np.zeros(T)
        stderr_dist = np.zeros(2 * T + 1)
    return EnsembleStatistics(
        time_grid=np.arange(1, T + 1),
        mean_x2=x2_all.mean(axis=0),
        stderr_x2=stderr_x2,
        mean_distribution=PositionDistribution(np.arange(-T, T + 1), dist_all.mean(axis=0)),
        n_samples_used=n,
        mean_x=x_all.mean(axis=0),
        stderr_distribution=stderr_dist,
        x2_samples=x2_all,
    )


def _window(n_points, fit_window):
    fit_window = float(fit_window)
    if not 0.0 < fit_window <= 1.0:
        raise InvalidArgumentError(f"fit_window must lie in (0, 1], got {fit_window}")
    start = n_points - int(math.floor(fit_window * n_points))
    if n_points - start < 10:
        raise InvalidArgumentError(f"fit window holds {n_points - start} points, need at least 10")
    return slice(start, n_points)


def estimate_diffusion(stats, fit_window=0.5):
    """Least-squares slope of <x^2>_t against t over the last ``fit_window`` of the grid.

    When per-trajectory series are available the error bar is the standard
    error of the per-trajectory slopes; otherwise the usual OLS slope error.
    """
    w = _window(stats.time_grid.shape[0], fit_window)
    t = stats.time_grid[w].astype(np.float64)
    dt = t - t.mean()
    weights = dt / np.dot(dt, dt)
    y = stats.mean_x2[w]
    samples = stats.x2_samples
    if samples is not None and samples.shape[0] > 1:
        slopes = samples[:, w] @ weights
        return DiffusionEstimate(float(slopes.mean()), float(slopes.std(ddof=1) / math.sqrt(slopes.shape[0])))
    slope = float(np.dot(weights, y))
    intercept = y.mean() - slope * t.mean()
    resid = y - (intercept + slope * t)
    stderr = math.sqrt(float(np.dot(resid, resid)) / (t.shape[0] - 2) / float(np.dot(dt, dt)))
    return DiffusionEstimate(slope, stderr)
