"""
Phase-averaged Pauli transfer matrices and the asymptotic diffusion constant.

In quasi-momentum space the coin-space block <k| rho |k'> evolves, on average
over the uniform phase distribution, by the linear map

    rho_{k,k'} -> 1/(2 eps) int dg U(k, g) rho_{k,k'} U(k', g)^dagger,

which in the Pauli basis {sigma_0, ..., sigma_3} is the 4x4 matrix

    L_{ab}(k, k') = 1/2 <Tr(sigma_a U(k, g) sigma_b U(k', g)^dagger)>_g.

The factor 1/2 makes the transfer matrix act on Bloch four-vectors
R_a = Tr(sigma_a rho) with R_0 = trace, so that [L_k]_{00} = 1.

Two independent routes give the diffusion constant D = lim d<x^2>/dt:

* closed form (g0 in {0, pi}): five coefficients c_ij fill L(k, k') as a
  function of u = k - k' and v = k + k'; D then follows from a rational
  trigonometric integral evaluated exactly.
* quadrature (any g0): Gauss-Legendre over g, exact k-derivatives of the
  integrand, and a uniform trapezoid over k of G_k (I - M_k)^{-1} (G_k^* - G_k).

Throughout, ``G_k = dL/dk`` and ``J_k = d^2 L / dk dk'`` at k' = k. The
k'-derivative on the diagonal equals the elementwise complex conjugate of G_k
(``L(k', k) = conj(L(k, k'))``), written G_k^dagger below.
"""

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import optimize

from ._validation import (
    DegenerateFormError,
    InvalidArgumentError,
    check_epsilon,
    check_finite,
    check_positive_int,
    check_spinor,
)
from .walk import build_momentum_step, coin_entries

__all__ = [
    "PAULI",
    "G0Case",
    "PauliTransferMatrix",
    "TransferDerivatives",
    "ClosedCoefficients",
    "GammaForm",
    "BlochVector",
    "pauli_transfer_numeric",
    "transfer_grid",
    "closed_coefficients",
    "assemble_transfer",
    "derivative_matrices",
    "last_term_check",
    "variance_series_exact",
    "spectral_moduli",
    "spectral_radius_check",
    "gamma_form",
    "gamma_integrand",
    "gamma_integral",
    "diffusion_from_coefficients",
    "diffusion_closed",
    "diffusion_quadrature",
    "k_grid",
    "diffusion_minimum",
]

DEFAULT_NODES = 129
DEFAULT_K_GRID = 1024

PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=np.complex128,
)


class G0Case(str, enum.Enum):
    """Noise centres for which the transfer matrix has a closed form."""

    ZERO = "zero"
    PI = "pi"

    @property
    def g0(self):
        return 0.0 if self is G0Case.ZERO else math.pi

    @classmethod
    def parse(cls, value):
        """Accept a member, its name ('zero'/'pi'), or a g0 equal to 0 or pi modulo 2 pi."""
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            try:
                return cls(value.lower())
            except ValueError:
                pass
            try:
                value = float(value)
            except ValueError:
                raise InvalidArgumentError(f"unknown g0 case {value!r}") from None
        g = math.remainder(check_finite(value, "g0"), 2 * math.pi)
        if abs(g) < 1e-12:
            return cls.ZERO
        if abs(abs(g) - math.pi) < 1e-12:
            return cls.PI
        raise InvalidArgumentError(f"closed-form coefficients exist only for g0 in {{0, pi}}, got {value!r}")


@dataclass(frozen=True, eq=False)
class PauliTransferMatrix:
    """4x4 complex matrix in the Pauli basis.

    ``kind`` is one of ``"full"`` (L_{k,k'}), ``"diagonal"`` (L_k),
    ``"first-derivative"`` (G_k) or ``"mixed-derivative"`` (J_k).
    """

    entries: np.ndarray
    k: float
    k_prime: float
    kind: str = "full"

    def __post_init__(self):
        e = np.array(self.entries, dtype=np.complex128)
        if e.shape != (4, 4):
            raise InvalidArgumentError(f"transfer matrix must be 4x4, got {e.shape}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def block(self):
        """Lower 3x3 block acting on the Bloch part (M_k for the diagonal kind)."""
        return self.entries[1:, 1:]

    def conj(self):
        return np.conj(self.entries)


class TransferDerivatives(NamedTuple):
    L: PauliTransferMatrix
    G: PauliTransferMatrix
    J: PauliTransferMatrix


@dataclass(frozen=True)
class ClosedCoefficients:
    g0_case: G0Case
    epsilon: float
    c12: float
    c22: float
    c23: float
    c24: float
    c44: float
    a: Optional[float] = None
    b: Optional[float] = None


@dataclass(frozen=True)
class GammaForm:
    """Coefficients of Gamma(k) = (alpha cos 2k + beta) / (gamma cos 2k + delta)."""

    alpha_g: float
    beta_g: float
    gamma_g: float
    delta_g: float

    def __post_init__(self):
        if not abs(self.gamma_g) < abs(self.delta_g):
            raise DegenerateFormError(
                f"|gamma| >= |delta| ({self.gamma_g!r}, {self.delta_g!r}): Gamma(k) has a real pole"
            )

    @property
    def r(self):
        return math.sqrt(1.0 - (self.gamma_g / self.delta_g) ** 2)


@dataclass(frozen=True)
class BlochVector:
    """Pauli components (1, r1, r2, r3) of the initial coin density matrix."""

    r1: float = 0.0
    r2: float = 0.0
    r3: float = 0.0

    def __post_init__(self):
        if self.r1**2 + self.r2**2 + self.r3**2 > 1.0 + 1e-12:
            raise InvalidArgumentError("Bloch vector must satisfy r1^2 + r2^2 + r3^2 <= 1")

    @classmethod
    def from_spinor(cls, spinor):
        psi = check_spinor(spinor)
        rho = np.outer(psi, psi.conj())
        r = np.real(np.einsum("aij,ji->a", PAULI, rho))
        return cls(float(r[1]), float(r[2]), float(r[3]))

    def as_array(self):
        return np.array([1.0, self.r1, self.r2, self.r3], dtype=np.complex128)


def k_grid(n):
    """Uniform periodic grid on [-pi, pi); the trapezoid rule is the plain mean over it."""
    n = check_positive_int(n, "k_grid", minimum=2)
    return -math.pi + 2.0 * math.pi * np.arange(n) / n


def _nodes(g0, epsilon, n):
    n = check_positive_int(n, "quadrature_nodes", minimum=2)
    x, w = np.polynomial.legendre.leggauss(n)
    # weights / 2 integrate to one: the 1/(2 eps) normalization on [g0 - eps, g0 + eps]
    return g0 + epsilon * x, 0.5 * w


def _kind(k, k_prime):
    return "diagonal" if k == k_prime else "full"


def pauli_transfer_numeric(k, k_prime, g0, epsilon, quadrature_nodes=DEFAULT_NODES):
    """Phase-averaged transfer matrix L_{k,k'} by Gauss-Legendre quadrature over g."""
    k = check_finite(k, "k")
    k_prime = check_finite(k_prime, "k_prime")
    g0 = check_finite(g0, "g0")
    epsilon = check_epsilon(epsilon)
    gs, ws = _nodes(g0, epsilon, quadrature_nodes)
    U = np.array([build_momentum_step(k, g) for g in gs])
    V = np.array([build_momentum_step(k_prime, g) for g in gs])
    entries = 0.5 * np.einsum("n,aij,njl,blm,nim->ab", ws, PAULI, U, PAULI, V.conj(), optimize=True)
    return PauliTransferMatrix(entries, k, k_prime, _kind(k, k_prime))


def _coin_pauli_tensor(g0, epsilon, nodes):
    """T[a, b, j, i] such that L_{ab}(k, k') = sum_{ji} T[a,b,j,i] d_j(k) conj(d_i(k')).

    d(k) = (exp(-ik), exp(ik)) is the diagonal of the shift in momentum space.
    """
    gs, ws = _nodes(g0, epsilon, nodes)
    c00, c01, c10, c11 = coin_entries(gs)
    C = np.stack([np.stack([c00, c01], -1), np.stack([c10, c11], -1)], -2)  # (n, 2, 2)
    avg = np.einsum("n,njl,nim->jlim", ws, C, C.conj())
    return 0.5 * np.einsum("aij,blm,jlim->abji", PAULI, PAULI, avg)


def _shift_diag(k, order):
    # order-th k-derivative of (exp(-ik), exp(ik))
    k = np.asarray(k, dtype=np.float64)
    return np.stack([(-1j) ** order * np.exp(-1j * k), (1j) ** order * np.exp(1j * k)], axis=-1)


def transfer_grid(ks, k_primes, g0, epsilon, quadrature_nodes=DEFAULT_NODES, dk=0, dk_prime=0):
    """Vectorized L_{k,k'} (or its exact k/k' derivatives) for arrays of (k, k') pairs.

    Returns an array of shape ``ks.shape + (4, 4)``.
    """
    epsilon = check_epsilon(epsilon)
    T = _coin_pauli_tensor(check_finite(g0, "g0"), epsilon, quadrature_nodes)
    ks, k_primes = np.broadcast_arrays(np.asarray(ks, dtype=np.float64), np.asarray(k_primes, dtype=np.float64))
    d = _shift_diag(ks, dk)
    dp = _shift_diag(k_primes, dk_prime).conj()
    return np.einsum("abji,...j,...i->...ab", T, d, dp)


def closed_coefficients(g0_case, epsilon):
    """The five coefficients of the closed-form transfer matrix for g0 = 0 or g0 = pi."""
    case = G0Case.parse(g0_case)
    e = check_epsilon(epsilon)
    s = math.sin(e)
    if case is G0Case.ZERO:
        # arctan(3 tan(e/2)) -> pi/2 as e -> pi; tan(pi/2) is not representable
        a = math.pi / 2 if e == math.pi else math.atan(3.0 * math.tan(e / 2))
        return ClosedCoefficients(
            case,
            e,
            c12=math.sqrt(2) * (a - 1.5 * e) / (3 * e),
            c22=0.25 + s / e - a / (6 * e),
            c23=(e + 4 * s - 6 * a) / (4 * e),
            c24=(2 * a - 3 * e) / (3 * math.sqrt(2) * e),
            c44=4 * a / (3 * e) - 1,
            a=a,
        )
    b = math.atan(3.0 / math.tan(e / 2))
    return ClosedCoefficients(
        case,
        e,
        c12=(-3 * e - 2 * b + math.pi) / (3 * math.sqrt(2) * e),
        c22=-(-3 * e + 12 * s - 2 * b + math.pi) / (12 * e),
        c23=(e - 4 * s + 6 * b - 3 * math.pi) / (4 * e),
        c24=(-3 * e - 2 * b + math.pi) / (3 * math.sqrt(2) * e),
        c44=(-3 * e - 4 * b + 2 * math.pi) / (3 * e),
        b=b,
    )


def _dcos(x, n):
    return (math.cos(x), -math.sin(x), -math.cos(x), math.sin(x))[n % 4]


def _dsin(x, n):
    return (math.sin(x), math.cos(x), -math.sin(x), -math.cos(x))[n % 4]


def _lkkp(u, v, c, nu=0, nv=0):
    """Closed-form matrix differentiated nu times in u and nv times in v."""
    # rows 0 and 3 depend on u only, rows 1-2 on v only
    cu, su = (0.0, 0.0) if nv else (_dcos(u, nu), _dsin(u, nu))
    cv, sv = (0.0, 0.0) if nu else (_dcos(v, nv), _dsin(v, nv))
    return np.array(
        [
            [cu, 1j * c.c12 * su, 0.0, -1j * c.c44 * su],
            [0.0, c.c22 * cv, c.c23 * sv, c.c24 * cv],
            [0.0, c.c22 * sv, -c.c23 * cv, c.c24 * sv],
            [-1j * su, -c.c24 * cu, 0.0, c.c44 * cu],
        ],
        dtype=np.complex128,
    )


def assemble_transfer(u, v, coeffs):
    """Fill the closed-form transfer matrix at u = k - k', v = k + k'."""
    u = check_finite(u, "u")
    v = check_finite(v, "v")
    k, kp = (u + v) / 2, (v - u) / 2
    return PauliTransferMatrix(_lkkp(u, v, coeffs), k, kp, "diagonal" if u == 0 else "full")


def _closed_derivatives(k, coeffs):
    u, v = 0.0, 2.0 * k
    L = _lkkp(u, v, coeffs)
    # d/dk = d/du + d/dv, d/dk' = -d/du + d/dv, d2/dk dk' = -d2/du2 + d2/dv2
    G = _lkkp(u, v, coeffs, nu=1) + _lkkp(u, v, coeffs, nv=1)
    J = -_lkkp(u, v, coeffs, nu=2) + _lkkp(u, v, coeffs, nv=2)
    return L, G, J


def _fd_derivatives(k, g0, epsilon, nodes, h, h_mixed):
    def L(a, b):
        return pauli_transfer_numeric(a, b, g0, epsilon, nodes).entries

    def first(step):
        return (L(k + step, k) - L(k - step, k)) / (2 * step)

    def mixed(step):
        return (L(k + step, k + step) - L(k + step, k - step) - L(k - step, k + step) + L(k - step, k - step)) / (
            4 * step * step
        )

    # one Richardson level removes the O(h^2) term of both central stencils
    G = (4 * first(h / 2) - first(h)) / 3
    J = (4 * mixed(h_mixed / 2) - mixed(h_mixed)) / 3
    return L(k, k), G, J


def derivative_matrices(k, g0, epsilon, method="quadrature", quadrature_nodes=DEFAULT_NODES, h=1e-5, h_mixed=1e-3):
    """L_k, G_k and J_k at k' = k.

    ``g0`` may be a :class:`G0Case` (or 'zero'/'pi'), which differentiates the
    closed form analytically, or a float. For floats, ``method`` selects exact
    differentiation under the quadrature (``"quadrature"``) or Richardson
    extrapolated central differences of :func:`pauli_transfer_numeric`
    (``"finite_difference"``).
    """
    k = check_finite(k, "k")
    epsilon = check_epsilon(epsilon)
    if isinstance(g0, (G0Case, str)):
        L, G, J = _closed_derivatives(k, closed_coefficients(g0, epsilon))
    elif method == "finite_difference":
        L, G, J = _fd_derivatives(k, float(g0), epsilon, quadrature_nodes, h, h_mixed)
    elif method == "quadrature":
        L = transfer_grid(k, k, g0, epsilon, quadrature_nodes)
        G = transfer_grid(k, k, g0, epsilon, quadrature_nodes, dk=1)
        J = transfer_grid(k, k, g0, epsilon, quadrature_nodes, dk=1, dk_prime=1)
    else:
        raise InvalidArgumentError(f"unknown differentiation method {method!r}")
    return TransferDerivatives(
        PauliTransferMatrix(L, k, k, "diagonal"),
        PauliTransferMatrix(G, k, k, "first-derivative"),
        PauliTransferMatrix(J, k, k, "mixed-derivative"),
    )


def _grid_matrices(g0, epsilon, n_k, nodes):
    ks = k_grid(n_k)
    L = transfer_grid(ks, ks, g0, epsilon, nodes)
    G = transfer_grid(ks, ks, g0, epsilon, nodes, dk=1)
    J = transfer_grid(ks, ks, g0, epsilon, nodes, dk=1, dk_prime=1)
    return L, G, J


def _g0_value(g0):
    return G0Case.parse(g0).g0 if isinstance(g0, (G0Case, str)) else check_finite(g0, "g0")


def last_term_check(g0, epsilon, T, bloch=BlochVector(), k_points=DEFAULT_K_GRID, quadrature_nodes=DEFAULT_NODES):
    """Numerical value of int dk/2pi sum_{m=1..T} [J_k L_k^{m-1} r]_0, which should equal T."""
    T = check_positive_int(T, "T")
    L, _, J = _grid_matrices(_g0_value(g0), epsilon, k_points, quadrature_nodes)
    s = np.broadcast_to(bloch.as_array(), (L.shape[0], 4)).copy()
    total = np.zeros(L.shape[0], dtype=np.complex128)
    for _ in range(T):
        total += np.einsum("kb,kb->k", J[:, 0, :], s)
        s = np.einsum("kab,kb->ka", L, s)
    return float(total.mean().real)


def variance_series_exact(
    g0, epsilon, bloch=BlochVector(), T=100, k_points=DEFAULT_K_GRID, quadrature_nodes=DEFAULT_NODES
):
    """Ensemble-averaged <x^2>_t for t = 1..T from the transfer-matrix expansion.

    With the walker starting at the origin,

        <x^2>_t = int dk/2pi { sum_{m=1}^{t} [J L^{m-1} r]_0
                  + sum_{m=1}^{t} sum_{m'=1}^{m-1} [G L^{m-m'-1} (G^dagger - G) L^{m'-1} r]_0 }

    evaluated with the finite double sum (nothing asymptotic is dropped).
    The integrand is a trigonometric polynomial of degree <= 2T in k, so the
    uniform grid is exact for T < k_points / 2.
    """
    T = check_positive_int(T, "T")
    L, G, J = _grid_matrices(_g0_value(g0), epsilon, k_points, quadrature_nodes)
    n_k = L.shape[0]
    B = G.conj() - G

    # w[p] = row 0 of G L^p,  s[q] = L^q r
    w = np.empty((T, n_k, 4), dtype=np.complex128)
    s = np.empty((T, n_k, 4), dtype=np.complex128)
    w[0] = G[:, 0, :]
    s[0] = bloch.as_array()
    for p in range(1, T):
        w[p] = np.einsum("ka,kab->kb", w[p - 1], L)
        s[p] = np.einsum("kab,kb->ka", L, s[p - 1])

    wb = np.einsum("pka,kab->pkb", w, B)
    # pair[n] = sum_{p+q=n} w_p B s_q, n = m - 2 for the (m, m') pair
    pair = np.zeros(T, dtype=np.complex128)
    for p in range(T - 1):
        pair[p : T - 1] += np.einsum("kb,qkb->q", wb[p], s[: T - 1 - p]) / n_k
    j_term = np.einsum("kb,tkb->t", J[:, 0, :], s) / n_k

    x2 = np.cumsum(j_term)
    x2[1:] += np.cumsum(pair[: T - 1])
    return x2.real


def spectral_moduli(g0, epsilon, k_points=256, quadrature_nodes=DEFAULT_NODES):
    """Eigenvalue moduli of the Bloch block M_k on a uniform k grid, shape (k_points, 3)."""
    epsilon = check_epsilon(epsilon)
    ks = k_grid(k_points)
    L = transfer_grid(ks, ks, _g0_value(g0), epsilon, quadrature_nodes)
    return np.abs(np.linalg.eigvals(L[:, 1:, 1:]))


def spectral_radius_check(g0, epsilon, k_points=256, quadrature_nodes=DEFAULT_NODES):
    """Largest spectral radius of M_k over the grid; below one for genuine noise."""
    return float(spectral_moduli(g0, epsilon, k_points, quadrature_nodes).max())


def gamma_form(coeffs):
    c12, c22, c23, c24, c44 = coeffs.c12, coeffs.c22, coeffs.c23, coeffs.c24, coeffs.c44
    return GammaForm(
        alpha_g=c12 * c24 + c44 * (c22 - c23),
        beta_g=c12 * c23 * c24 + c44 * (c22 * c23 - 1),
        gamma_g=c22 * (c44 - 1) - c23 * c44 + c23 + c24**2,
        delta_g=c22 * c23 * (c44 - 1) + c23 * c24**2 - c44 + 1,
    )


def gamma_integrand(k, coeffs):
    f = gamma_form(coeffs)
    c2k = np.cos(2 * np.asarray(k, dtype=np.float64))
    out = (f.alpha_g * c2k + f.beta_g) / (f.gamma_g * c2k + f.delta_g)
    return float(out) if out.ndim == 0 else out


def gamma_integral(form):
    """int_{-pi}^{pi} Gamma(k) dk / pi = 2 alpha (r - 1)/(gamma r) + 2 beta/(delta r)."""
    r = form.r
    # (r - 1)/gamma rewritten as -gamma/(delta^2 (1 + r)): finite as gamma -> 0
    first = -2.0 * form.alpha_g * form.gamma_g / (form.delta_g**2 * r * (1.0 + r))
    return first + 2.0 * form.beta_g / (form.delta_g * r)


def diffusion_from_coefficients(coeffs):
    return 1.0 - gamma_integral(gamma_form(coeffs))


def diffusion_closed(g0_case, epsilon):
    """Closed-form asymptotic diffusion constant for g0 in {0, pi}."""
    return diffusion_from_coefficients(closed_coefficients(g0_case, epsilon))


def diffusion_quadrature(g0, epsilon, k_points=DEFAULT_K_GRID, quadrature_nodes=DEFAULT_NODES):
    """Asymptotic slope of <x^2>_t for any g0, from the transfer matrices on a k grid.

    Only the t-linear part of the double geometric sum survives in the slope:
    D = <[J_k]_00> + <G_k[0, 1:] (I - M_k)^{-1} (G_k^dagger - G_k)[1:, 0]>_k.
    """
    epsilon = check_epsilon(epsilon)
    L, G, J = _grid_matrices(_g0_value(g0), epsilon, k_points, quadrature_nodes)
    B = G.conj() - G
    eye = np.eye(3)
    y = np.linalg.solve(eye[None] - L[:, 1:, 1:], B[:, 1:, 0][..., None])[..., 0]
    linear = np.einsum("ka,ka->k", G[:, 0, 1:], y)
    return float((J[:, 0, 0] + linear).mean().real)


def _closed_or_inf(case, epsilon):
    try:
        return diffusion_closed(case, epsilon)
    except DegenerateFormError:
        return math.inf


def diffusion_minimum(g0_case, grid_step=1e-3):
    """Location and value of the minimum of the closed-form D over eps in (0, pi].

    A uniform scan with spacing ``grid_step`` brackets the minimum, then a
    golden-section search refines it inside the bracket. Scan points where
    rounding makes the Gamma form degenerate (eps of order 1e-3 for g0 = 0,
    where D diverges anyway) count as +inf.
    """
    case = G0Case.parse(g0_case)
    n = int(math.ceil(math.pi / grid_step))
    eps = np.linspace(math.pi / n, math.pi, n)
    values = np.array([_closed_or_inf(case, e) for e in eps])
    i = int(np.argmin(values))
    if i == 0 or i == n - 1:
        return float(eps[i]), float(values[i])
    res = optimize.minimize_scalar(
        lambda e: diffusion_closed(case, e), bracket=(eps[i - 1], eps[i], eps[i + 1]), method="golden", tol=1e-10
    )
    return float(res.x), float(res.fun)
