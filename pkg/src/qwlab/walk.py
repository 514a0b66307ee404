"""
Position-space evolution of the one-dimensional two-component quantum walk.

The walker lives on the integer line with a spin-1/2 coin. One time step
applies the coin to every site and then shifts the up component one site to
the right and the down component one site to the left, U = S (I x C).

The coin family is parametrized by a phase g through gamma = exp(i g)::

    C_g = 1/(2 gamma - 1) [[gamma,                  sqrt(2) (gamma - 1)],
                           [sqrt(2) (gamma - 1) gamma, gamma           ]]

which is exactly unitary for every real g since |2 gamma - 1|^2 = 5 - 4 cos g.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from ._validation import InvalidArgumentError, check_finite, check_spinor

__all__ = [
    "DEFAULT_COIN_STATE",
    "CoinOperator",
    "WalkerState",
    "PositionDistribution",
    "Moments",
    "coin_entries",
    "build_coin",
    "hadamard_coin",
    "build_momentum_step",
    "apply_coin",
    "step",
    "evolve",
    "position_distribution",
    "moments",
]

TWO_PI = 2.0 * np.pi
SQRT2 = np.sqrt(2.0)

#: (1, i)/sqrt(2), the coin state used for the noiseless reference profiles.
DEFAULT_COIN_STATE = np.array([1.0, 1.0j]) / SQRT2


def coin_entries(g):
    """Vectorized coin entries ``(c00, c01, c10, c11)`` for an array of phases.

    The phase is reduced modulo 2*pi first; the coin depends on g only
    through exp(i g).
    """
    g = np.mod(np.asarray(g, dtype=np.float64), TWO_PI)
    gamma = np.cos(g) + 1j * np.sin(g)
    inv_den = 1.0 / (2.0 * gamma - 1.0)
    diag = gamma * inv_den
    off = SQRT2 * (gamma - 1.0) * inv_den
    return diag, off, off * gamma, diag


@dataclass(frozen=True, eq=False)
class CoinOperator:
    """A 2x2 unitary acting on the (up, down) spin components.

    Attributes
    ----------
    matrix : ndarray of shape (2, 2), complex
    phase_g : float or None
        Phase g the coin was built from, None for coins not in the C_g family.
    """

    matrix: np.ndarray
    phase_g: Optional[float] = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (2, 2):
            raise InvalidArgumentError(f"coin must be 2x2, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def unitarity_error(self):
        """Max elementwise deviation of C^dagger C from the identity."""
        return float(np.abs(self.matrix.conj().T @ self.matrix - np.eye(2)).max())

    def is_unitary(self, atol=1e-12):
        return self.unitarity_error() < atol


def build_coin(g):
    """Coin C_g of the one-parameter family, with gamma = exp(i g)."""
    g = check_finite(g, "g")
    c00, c01, c10, c11 = coin_entries(g)
    return CoinOperator(np.array([[c00, c01], [c10, c11]]), phase_g=g)


def hadamard_coin():
    return CoinOperator(np.array([[1.0, 1.0], [1.0, -1.0]]) / SQRT2)


def build_momentum_step(k, g):
    """Single-step unitary U(k, g) = diag(exp(-ik), exp(ik)) C_g in quasi-momentum space."""
    k = check_finite(k, "k")
    phase = np.array([np.exp(-1j * k), np.exp(1j * k)])
    return phase[:, None] * build_coin(g).matrix


def apply_coin(up, down, c00, c01, c10, c11):
    """Apply a coin to spinor fields stored as separate up/down arrays.

    Every caller (single walkers and batched ensembles) goes through this
    function so that the floating-point operation order is identical.
    """
    return c00 * up + c01 * down, c10 * up + c11 * down


@dataclass(frozen=True, eq=False)
class WalkerState:
    """Amplitude field of the walker at integer time ``time``.

    Attributes
    ----------
    amplitudes : ndarray of shape (n_sites, 2), complex
        Column 0 is the up component, column 1 the down component.
    origin_offset : int
        Lattice index of the first stored site.
    time : int
        Number of steps taken.
    """

    amplitudes: np.ndarray
    origin_offset: int = 0
    time: int = 0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 2 or amps.shape[1] != 2 or amps.shape[0] == 0:
            raise InvalidArgumentError(f"amplitudes must have shape (n_sites, 2), got {amps.shape}")
        if self.time < 0:
            raise InvalidArgumentError("time must be non-negative")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "origin_offset", int(self.origin_offset))
        object.__setattr__(self, "time", int(self.time))

    @classmethod
    def localized(cls, spinor=DEFAULT_COIN_STATE, site=0):
        """Walker sitting on a single site with the given (normalized) coin state."""
        return cls(check_spinor(spinor)[None, :], origin_offset=site, time=0)

    @property
    def positions(self):
        return np.arange(self.amplitudes.shape[0]) + self.origin_offset

    @property
    def norm(self):
        return float(np.sum(np.abs(self.amplitudes) ** 2))


class PositionDistribution(NamedTuple):
    positions: np.ndarray
    probabilities: np.ndarray


class Moments(NamedTuple):
    mean: float
    second_moment: float
    variance: float


def step(state, coin):
    """Advance the walker by one step: coin on every site, then the conditional shift.

    Storage grows by one site on each side, so nothing ever reaches a boundary.
    """
    m = coin.matrix
    up, down = apply_coin(state.amplitudes[:, 0], state.amplitudes[:, 1], m[0, 0], m[0, 1], m[1, 0], m[1, 1])
    n = up.shape[0]
    out = np.zeros((n + 2, 2), dtype=np.complex128)
    out[2:, 0] = up
    out[:-2, 1] = down
    return WalkerState(out, origin_offset=state.origin_offset - 1, time=state.time + 1)


def evolve(state, g_sequence):
    """Apply one step per phase in ``g_sequence``, in order."""
    for g in g_sequence:
        state = step(state, build_coin(g))
    return state


def position_distribution(state):
    amps = state.amplitudes
    probs = amps[:, 0].real ** 2 + amps[:, 0].imag ** 2 + amps[:, 1].real ** 2 + amps[:, 1].imag ** 2
    return PositionDistribution(state.positions, probs)


def moments(dist):
    """Mean, second moment and variance of a position distribution."""
    x = np.asarray(dist.positions, dtype=np.float64)
    p = np.asarray(dist.probabilities, dtype=np.float64)
    mean = float(np.sum(x * p))
    second = float(np.sum(x * x * p))
    return Moments(mean, second, second - mean * mean)
