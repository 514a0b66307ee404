import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import D_PI, averaged_channel_x2
from qwlab import DegenerateFormError, InvalidArgumentError
from qwlab import superoperator as so
from qwlab.superoperator import (
    BlochVector,
    G0Case,
    GammaForm,
    assemble_transfer,
    closed_coefficients,
    derivative_matrices,
    diffusion_closed,
    diffusion_minimum,
    diffusion_quadrature,
    gamma_form,
    gamma_integral,
    gamma_integrand,
    last_term_check,
    pauli_transfer_numeric,
    spectral_moduli,
    spectral_radius_check,
    transfer_grid,
    variance_series_exact,
)

CASES = [G0Case.ZERO, G0Case.PI]
DELTA0 = np.eye(4)[0]


def test_g0_case_parse():
    assert G0Case.parse("zero") is G0Case.ZERO
    assert G0Case.parse("PI") is G0Case.PI
    assert G0Case.parse(0.0) is G0Case.ZERO
    assert G0Case.parse(-math.pi) is G0Case.PI
    assert G0Case.parse(3 * math.pi) is G0Case.PI
    assert G0Case.parse("3.141592653589793") is G0Case.PI
    for bad in (1.0, "half", math.nan):
        with pytest.raises(InvalidArgumentError):
            G0Case.parse(bad)


@pytest.mark.parametrize("g0", [0.0, math.pi, 1.3])
@pytest.mark.parametrize("k", [-2.0, 0.0, 0.4, 3.0])
def test_diagonal_block_structure(g0, k):
    L = pauli_transfer_numeric(k, k, g0, 1.7)
    assert L.kind == "diagonal"
    np.testing.assert_allclose(L.entries[0], DELTA0, atol=1e-12)
    np.testing.assert_allclose(L.entries[:, 0], DELTA0, atol=1e-12)
    assert L.block.shape == (3, 3)


def test_quadrature_converged_in_nodes():
    a = pauli_transfer_numeric(0.3, -1.1, math.pi, 2.23, 129).entries
    b = pauli_transfer_numeric(0.3, -1.1, math.pi, 2.23, 258).entries
    assert np.abs(a - b).max() < 1e-12


def test_small_noise_is_rotation():
    k = 0.37
    M = pauli_transfer_numeric(k, k, 0.0, 1e-4).block
    c, s = math.cos(2 * k), math.sin(2 * k)
    expected = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    assert np.abs(M - expected).max() < 1e-6


@pytest.mark.parametrize("case", CASES)
def test_coefficients_at_pi(case):
    c = closed_coefficients(case, math.pi)
    r2 = math.sqrt(2)
    np.testing.assert_allclose(
        [c.c12, c.c22, c.c23, c.c24, c.c44], [-r2 / 3, 1 / 6, -1 / 2, -r2 / 3, -1 / 3], atol=1e-15
    )


@pytest.mark.parametrize("eps", [0.0, -0.1, 3.2, math.nan])
def test_closed_coefficients_domain(eps):
    with pytest.raises(InvalidArgumentError):
        closed_coefficients("zero", eps)


@pytest.mark.parametrize("case", CASES)
def test_assembled_matches_numeric_example(case):
    closed = assemble_transfer(0.3 - 0.7, 0.3 + 0.7, closed_coefficients(case, math.pi)).entries
    numeric = pauli_transfer_numeric(0.3, 0.7, case.g0, math.pi).entries
    assert np.abs(closed - numeric).max() < 1e-10


def test_assemble_transfer_structure():
    c = closed_coefficients("pi", 1.2)
    L0 = assemble_transfer(0.0, 0.8, c).entries
    np.testing.assert_array_equal(L0[0], DELTA0)
    np.testing.assert_array_equal(L0[:, 0], DELTA0)
    a = assemble_transfer(0.5, 0.8, c).entries
    b = assemble_transfer(-0.5, 0.8, c).entries
    np.testing.assert_allclose(a[0], b[0].conj(), atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(
    st.floats(-math.pi, math.pi),
    st.floats(-math.pi, math.pi),
    st.floats(0.05, math.pi),
    st.sampled_from(CASES),
)
def test_coefficient_sweep(k, kp, eps, case):
    closed = assemble_transfer(k - kp, k + kp, closed_coefficients(case, eps)).entries
    assert np.abs(closed - pauli_transfer_numeric(k, kp, case.g0, eps).entries).max() < 1e-10


@pytest.mark.parametrize("g0", [0.0, math.pi, 2.0])
def test_hermiticity_transport(g0):
    rng = np.random.default_rng(1)
    for k, kp in rng.uniform(-math.pi, math.pi, (5, 2)):
        a = pauli_transfer_numeric(k, kp, g0, 1.1).entries
        b = pauli_transfer_numeric(kp, k, g0, 1.1).entries
        np.testing.assert_allclose(a, b.conj(), atol=1e-13)


@pytest.mark.parametrize("case", CASES)
def test_coefficients_real_from_quadrature(case):
    # c22 = [L]_11 at v = 0 and c44 = [L]_33 at u = 0, both from the quadrature
    L = pauli_transfer_numeric(0.0, 0.0, case.g0, 1.9).entries
    assert np.abs(L.imag).max() < 1e-12
    c = closed_coefficients(case, 1.9)
    assert L[1, 1].real == pytest.approx(c.c22, abs=1e-12)
    assert L[3, 3].real == pytest.approx(c.c44, abs=1e-12)


def test_grid_matches_per_node_path():
    rng = np.random.default_rng(2)
    ks, kps = rng.uniform(-math.pi, math.pi, (2, 6))
    for g0 in (0.0, 0.9):
        grid = transfer_grid(ks, kps, g0, 2.0)
        for i in range(6):
            ref = pauli_transfer_numeric(ks[i], kps[i], g0, 2.0).entries
            assert np.abs(grid[i] - ref).max() < 1e-13


@pytest.mark.parametrize("case", CASES)
def test_derivative_paths_agree(case):
    for k in (-1.2, 0.1, 2.5):
        closed = derivative_matrices(k, case, 2.0)
        exact = derivative_matrices(k, case.g0, 2.0, method="quadrature")
        fd = derivative_matrices(k, case.g0, 2.0, method="finite_difference")
        for a, b, c in zip(closed, exact, fd):
            assert np.abs(a.entries - b.entries).max() < 1e-12
            assert np.abs(a.entries - c.entries).max() < 1e-7


def test_derivative_method_validation():
    with pytest.raises(InvalidArgumentError):
        derivative_matrices(0.1, 0.5, 1.0, method="symbolic")


@settings(max_examples=50, deadline=None)
@given(st.floats(-math.pi, math.pi), st.floats(0.05, math.pi), st.sampled_from([0.0, math.pi, 1.0]))
def test_first_derivative_row_zero(k, eps, g0):
    L, G, J = derivative_matrices(k, g0, eps)
    np.testing.assert_allclose(G.conj()[0], -G.entries[0], atol=1e-12)
    np.testing.assert_allclose(J.entries[0], DELTA0, atol=1e-12)
    np.testing.assert_allclose(J.entries[:, 0], DELTA0, atol=1e-12)


def test_last_term_examples():
    assert last_term_check(0.0, 1.0, 1, BlochVector(0.3, -0.2, 0.5)) == pytest.approx(1.0, abs=1e-12)
    assert last_term_check(math.pi, 2.23, 50, BlochVector(0, 1, 0)) == pytest.approx(50.0, abs=1e-6)
    a = last_term_check(math.pi, 2.23, 20, BlochVector(0, 0, 1))
    b = last_term_check(math.pi, 2.23, 20, BlochVector(1, 0, 0))
    assert a == pytest.approx(b, abs=1e-12)


def test_variance_series_first_step():
    x2 = variance_series_exact(math.pi, 2.23, BlochVector(0, 1, 0), T=3)
    assert x2[0] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("g0", [0.0, math.pi])
def test_variance_series_matches_density_matrix_oracle(g0):
    T = 40
    spinor = np.array([1, 1j]) / math.sqrt(2)
    oracle = averaged_channel_x2(g0, 2.23, T, spinor)
    series = variance_series_exact(g0, 2.23, BlochVector.from_spinor(spinor), T)
    np.testing.assert_allclose(series, oracle, rtol=1e-10)


def test_variance_series_generic_g0():
    spinor = np.array([0.6, 0.8j])
    oracle = averaged_channel_x2(1.1, 0.8, 25, spinor)
    series = variance_series_exact(1.1, 0.8, BlochVector.from_spinor(spinor), 25)
    np.testing.assert_allclose(series, oracle, rtol=1e-10)


@pytest.mark.slow
def test_variance_series_late_slope():
    T = 400
    x2 = variance_series_exact(0.0, math.pi, BlochVector(0, 1, 0), T)
    t = np.arange(1, T + 1)
    slope = np.polyfit(t[T // 2 :], x2[T // 2 :], 1)[0]
    assert abs(slope - D_PI) < 1e-3


def test_bloch_vector():
    b = BlochVector.from_spinor([1, 1j])
    assert (b.r1, b.r2, b.r3) == pytest.approx((0.0, 1.0, 0.0))
    with pytest.raises(InvalidArgumentError):
        BlochVector(1.0, 1.0, 0.0)


@pytest.mark.parametrize("case", CASES)
@pytest.mark.parametrize("eps", [0.5, 1.5, 2.23, math.pi])
def test_spectral_condition(case, eps):
    moduli = spectral_moduli(case.g0, eps)
    assert moduli.max() < 1.0
    assert moduli.min() > 0.0


def test_spectral_radius_unitary_limit():
    r = spectral_radius_check(0.0, 1e-3)
    assert 0.999 < r < 1.0 + 1e-12


def test_gamma_form_at_pi():
    f = gamma_form(closed_coefficients("zero", math.pi))
    np.testing.assert_allclose([f.alpha_g, f.beta_g, f.gamma_g, f.delta_g], [0, 0.25, -2 / 3, 4 / 3], atol=1e-15)
    k = 0.77
    ref = 0.25 / (4 / 3 - 2 / 3 * math.cos(2 * k))
    assert gamma_integrand(k, closed_coefficients("zero", math.pi)) == pytest.approx(ref, abs=1e-15)


def test_gamma_symmetries():
    c = closed_coefficients("pi", 1.3)
    ks = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(gamma_integrand(ks, c), gamma_integrand(-ks, c), atol=1e-15)
    np.testing.assert_allclose(gamma_integrand(ks, c), gamma_integrand(ks + math.pi, c), atol=1e-14)


@pytest.mark.parametrize("case", CASES)
@pytest.mark.parametrize("eps", [0.3, 1.0, 2.23, math.pi])
def test_gamma_integral_against_quadrature(case, eps):
    from scipy import integrate

    c = closed_coefficients(case, eps)
    numeric = integrate.quad(lambda k: gamma_integrand(k, c), -math.pi, math.pi, epsabs=1e-13, limit=200)[0]
    form = gamma_form(c)
    printed = 2 * form.alpha_g * (form.r - 1) / (form.gamma_g * form.r) + 2 * form.beta_g / (form.delta_g * form.r)
    assert gamma_integral(form) == pytest.approx(numeric / math.pi, abs=1e-10)
    assert gamma_integral(form) == pytest.approx(printed, abs=1e-10)


def test_gamma_form_degenerate():
    with pytest.raises(DegenerateFormError):
        GammaForm(0.1, 0.2, 1.0, 1.0)


@pytest.mark.parametrize("case", CASES)
def test_gamma_condition_dense_grid(case):
    for eps in np.linspace(0.01, math.pi, 400):
        form = gamma_form(closed_coefficients(case, eps))
        assert abs(form.gamma_g) < abs(form.delta_g)


@pytest.mark.parametrize("case", CASES)
def test_diffusion_anchor(case):
    assert abs(diffusion_closed(case, math.pi) - D_PI) < 1e-12


def test_diffusion_quadrature_anchor():
    assert abs(diffusion_quadrature(0.0, math.pi) - D_PI) < 1e-8


def test_diffusion_closed_rejects_other_g0():
    with pytest.raises(InvalidArgumentError):
        diffusion_closed(1.0, 1.0)


def test_monotone_decrease_zero_case():
    eps = np.linspace(0.02, math.pi / 4, 50)
    d = np.array([diffusion_closed("zero", e) for e in eps])
    assert np.all(np.diff(d) < 0)


def test_minimum_pi_case():
    eps, d = diffusion_minimum("pi")
    assert 2.21 <= eps <= 2.25
    assert d == pytest.approx(diffusion_closed("pi", eps))
    assert d < diffusion_closed("pi", eps - 0.01)
    assert d < diffusion_closed("pi", eps + 0.01)


def test_closed_vs_quadrature_points():
    for case in CASES:
        for eps in (0.5, 1.4, 2.23):
            assert abs(diffusion_closed(case, eps) - diffusion_quadrature(case.g0, eps)) < 1e-8


def test_generic_g0_value_stable_in_grid():
    a = diffusion_quadrature(math.pi / 2, 1.0)
    b = diffusion_quadrature(math.pi / 2, 1.0, k_points=2048)
    assert math.isfinite(a) and a > 0
    assert abs(a - b) < 1e-8


def test_r_independence_of_asymptotic_slope():
    # the t-linear part of the exact series does not depend on the coin state
    T = 200
    slopes = []
    for b in (BlochVector(0, 0, 1), BlochVector(0, 0, -1), BlochVector(0, 1, 0)):
        x2 = variance_series_exact(math.pi, 2.23, b, T)
        slopes.append(x2[-1] - x2[-2])
    np.testing.assert_allclose(slopes, diffusion_closed("pi", 2.23), atol=1e-6)


@pytest.mark.parametrize("case", CASES)
def test_stable_form_equals_printed_form(case):
    for eps in np.linspace(0.05, math.pi, 300):
        f = gamma_form(closed_coefficients(case, eps))
        value = gamma_integral(f)
        assert math.isfinite(value)
        if abs(f.gamma_g) > 1e-3:
            printed = 2 * f.alpha_g * (f.r - 1) / (f.gamma_g * f.r) + 2 * f.beta_g / (f.delta_g * f.r)
            assert value == pytest.approx(printed, rel=1e-9, abs=1e-12)
