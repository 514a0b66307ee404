"""
Self-checks run by ``qwlab validate``.

Quick mode exercises the analytic machinery only (closed form against
quadrature, anchor value, structural identities, spectral condition). Full
mode adds Monte Carlo ensembles at acceptance scale. ``perturb_c22`` shifts
one closed-form coefficient and exists as a negative control: every check
that consumes the closed form must then fail.
"""

import dataclasses
import math
import time
from dataclasses import dataclass, field
from typing import List

import numpy as np

from . import superoperator as so
from .ensemble import NoiseModel, ensemble_average, estimate_diffusion
from .walk import DEFAULT_COIN_STATE

D_PI = 1.0 - math.sqrt(3.0) / 4.0
CASES = (so.G0Case.ZERO, so.G0Case.PI)


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""
    seconds: float = 0.0


@dataclass
class ValidationReport:
    mode: str
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {"mode": self.mode, "passed": self.passed, "checks": [dataclasses.asdict(c) for c in self.checks]}


def _coeffs(case, eps, perturb_c22):
    c = so.closed_coefficients(case, eps)
    return dataclasses.replace(c, c22=c.c22 + perturb_c22) if perturb_c22 else c


def _closed_d(case, eps, perturb_c22):
    coeffs = _coeffs(case, eps, perturb_c22)
    try:
        return so.diffusion_from_coefficients(coeffs)
    except so.DegenerateFormError:
        return math.nan


def run_validation(mode="quick", perturb_c22=0.0, seed=0, log=None):
    if mode not in ("quick", "full"):
        raise so.InvalidArgumentError(f"mode must be 'quick' or 'full', got {mode!r}")
    report = ValidationReport(mode)

    def record(name, measured, tolerance, detail="", upper=True):
        measured = float(measured)
        ok = math.isfinite(measured) and (measured < tolerance if upper else measured > tolerance)
        report.checks.append(Check(name, bool(ok), measured, tolerance, detail, round(time.perf_counter() - t0, 3)))
        if log:
            log(f"{'PASS' if ok else 'FAIL'}  {name}: {measured:.3e} (tol {tolerance:.1e}) {detail}")

    t0 = time.perf_counter()
    err = max(abs(_closed_d(c, math.pi, perturb_c22) - D_PI) for c in CASES)
    record("anchor_D_pi", err, 1e-12, "closed form at eps = pi vs 1 - sqrt(3)/4")

    t0 = time.perf_counter()
    err = 0.0
    for case in CASES:
        for eps in np.linspace(0.5, math.pi, 5):
            err = max(err, abs(_closed_d(case, eps, perturb_c22) - so.diffusion_quadrature(case.g0, eps)))
    record("closed_vs_quadrature", err, 1e-8, "5 eps points per g0 case")

    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    err = 0.0
    for case in CASES:
        for _ in range(10):
            k, kp = rng.uniform(-math.pi, math.pi, 2)
            eps = rng.uniform(0.05, math.pi)
            closed = so.assemble_transfer(k - kp, k + kp, _coeffs(case, eps, perturb_c22)).entries
            err = max(err, np.abs(closed - so.pauli_transfer_numeric(k, kp, case.g0, eps).entries).max())
    record("coefficient_oracle", err, 1e-10, "10 random (k, k', eps) per g0 case")

    t0 = time.perf_counter()
    err = 0.0
    for case in CASES:
        for k in np.linspace(-math.pi, math.pi, 7, endpoint=False):
            L, G, _ = so.derivative_matrices(k, case.g0, 2.23)
            delta = np.eye(4)[0]
            err = max(err, np.abs(L.entries[0] - delta).max(), np.abs(L.entries[:, 0] - delta).max())
            err = max(err, np.abs(G.conj()[0] + G.entries[0]).max())
    record("block_structure", err, 1e-12, "[L_k]_0b = [L_k]_b0 = delta_b0, [G^dagger]_0b = -[G]_0b")

    t0 = time.perf_counter()
    T = 50
    value = so.last_term_check(math.pi, 2.23, T, so.BlochVector(0.0, 1.0, 0.0))
    record("last_term_identity", abs(value - T), 1e-8 * T, f"T = {T}")

    t0 = time.perf_counter()
    radius = max(so.spectral_radius_check(c.g0, e) for c in CASES for e in (0.5, 1.5, 2.23, math.pi))
    record("spectral_radius", radius, 1.0, "max over 256 k points of rho(M_k)")

    t0 = time.perf_counter()
    try:
        eps_min, _ = so.diffusion_minimum(so.G0Case.PI)
    except so.DegenerateFormError:
        eps_min = math.nan
    record("minimum_location", abs(eps_min - 2.23), 0.02, f"argmin at {eps_min:.4f}")

    if mode == "full":
        for g0, eps in ((0.0, 2.23), (math.pi, 2.23), (0.0, math.pi)):
            t0 = time.perf_counter()
            stats = ensemble_average(DEFAULT_COIN_STATE, NoiseModel(g0, eps, 2000, seed), 500)
            est = estimate_diffusion(stats, 0.5)
            target = _closed_d(so.G0Case.parse(g0), eps, perturb_c22)
            tol = max(2 * est.stderr, 0.05 * target)
            record(
                f"montecarlo_triangle_g0={g0:.4f}_eps={eps:.4f}",
                abs(est.D - target),
                tol,
                f"D_hat = {est.D:.4f} +- {est.stderr:.4f}, closed = {target:.6f}",
            )
    return report
