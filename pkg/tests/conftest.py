import math

import numpy as np
import pytest

from qwlab.ensemble import NoiseModel, ensemble_average
from qwlab.walk import DEFAULT_COIN_STATE, build_coin, build_momentum_step

D_PI = 1.0 - math.sqrt(3.0) / 4.0


def momentum_amplitudes(spinor, g, T, x0=0, n_k=4096):
    """psi(x, T) = int dk/2pi exp(ik(x - x0)) U(k, g)^T spinor, on a uniform k grid.

    Returns (positions, amplitudes) for x0 - T .. x0 + T.
    """
    ks = -math.pi + 2 * math.pi * np.arange(n_k) / n_k
    vecs = np.empty((n_k, 2), dtype=complex)
    for i, k in enumerate(ks):
        U = build_momentum_step(k, g)
        v = np.asarray(spinor, dtype=complex)
        for _ in range(T):
            v = U @ v
        vecs[i] = v
    xs = np.arange(x0 - T, x0 + T + 1)
    phase = np.exp(1j * np.outer(xs - x0, ks))
    return xs, phase @ vecs / n_k


def averaged_channel_x2(g0, epsilon, T, spinor=DEFAULT_COIN_STATE, nodes=129):
    """Exact phase-averaged evolution of the full density matrix in position space.

    Independent of the Pauli-basis machinery: averages C rho C^dagger over g
    with Gauss-Legendre and shifts both density-matrix indices. Returns
    <x^2>_t for t = 1..T.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    avg = np.zeros((2, 2, 2, 2), dtype=complex)
    for xi, wi in zip(x, w):
        C = build_coin(g0 + epsilon * xi).matrix
        avg += wi / 2 * np.einsum("sa,tb->satb", C, C.conj())
    n = 2 * T + 1
    rho = np.zeros((2, n, 2, n), dtype=complex)
    c = np.asarray(spinor, dtype=complex)
    rho[:, T, :, T] = np.outer(c, c.conj())
    pos = np.arange(n) - T
    out = []
    for _ in range(T):
        rho = np.einsum("satb,axby->sxty", avg, rho)
        shifted = np.empty_like(rho)
        for s, ds in ((0, 1), (1, -1)):
            for s2, ds2 in ((0, 1), (1, -1)):
                shifted[s, :, s2, :] = np.roll(np.roll(rho[s, :, s2, :], ds, 0), ds2, 1)
        rho = shifted
        p = np.real(np.einsum("sxsx->x", rho))
        out.append(float(p @ pos**2))
    return np.array(out)


@pytest.fixture(scope="session")
def mc_runs():
    """Acceptance-scale ensembles, computed once and shared."""
    cache = {}

    def get(g0, epsilon, T, n_samples=2000, seed=0, spinor=DEFAULT_COIN_STATE):
        key = (g0, epsilon, T, n_samples, seed, tuple(np.asarray(spinor, dtype=complex)))
        if key not in cache:
            cache[key] = ensemble_average(spinor, NoiseModel(g0, epsilon, n_samples, seed), T)
        return cache[key]

    return get
