"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
report including wall-clock times.
"""
import time

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import subspace_angles

from diraclab import (ScalarField, build_gamma_set, build_product_zero_modes,
                      check_sign_definite, check_uniform_condition,
                      constant_scalar, dense_spectrum, hamiltonian,
                      heat_traces, index_checks, make_torus, nodal_flux, norm,
                      scalar_from_function, smallest_eigenpairs,
                      verify_zero_mode)

from conftest import normalized_profile, positivity_catalog

COS_COEFF = 1.0 / np.sqrt(2.0 * np.pi ** 2)


def _report(number: int, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
    assert ok, f"criterion {number}: {detail}"


@pytest.fixture(scope="module")
def gammas():
    return build_gamma_set(2)


@pytest.fixture(scope="module")
def counterexample(gammas):
    """Shared 32x32 cosine-profile configuration (criteria 3 and 4)."""
    start = time.perf_counter()
    geom = make_torus(2, [1.0, 1.0], [32, 32])
    h = scalar_from_function(geom, lambda x, y: COS_COEFF * np.cos(y))
    tau = 1.0
    f = ScalarField(geom, tau * h.values)
    ham = hamiltonian(geom, gammas, f)
    spectrum = smallest_eigenpairs(ham, 6, tol=1e-9)
    modes = build_product_zero_modes(geom, gammas, h, tau)
    elapsed = time.perf_counter() - start
    return {"geom": geom, "f": f, "tau": tau, "ham": ham,
            "spectrum": spectrum, "modes": modes, "seconds": elapsed}


def test_criterion_1_free_spectrum(gammas):
    start = time.perf_counter()
    geom = make_torus(2, [1.0, 1.0], [16, 16])
    ham = hamiltonian(geom, gammas, constant_scalar(geom, 0.0))
    result = smallest_eigenpairs(ham, 10, tol=1e-9)
    elapsed = time.perf_counter() - start
    expected = np.array([0, 0, 1, 1, 1, 1, 1, 1, 1, 1], dtype=float)
    gap = float(np.max(np.abs(result.eigenvalues - expected)))
    ok = result.converged and gap < 1e-10 and elapsed < 5.0
    _report(1, ok, f"free spectrum 0,0,1x8 (gap {gap:.2e}, {elapsed:.2f} s)")


def test_criterion_2_constant_deformation(gammas):
    start = time.perf_counter()
    geom = make_torus(2, [1.0, 1.0], [16, 16])
    free = dense_spectrum(hamiltonian(geom, gammas, constant_scalar(geom, 0.0)))
    shifted = dense_spectrum(hamiltonian(geom, gammas, constant_scalar(geom, 2.0)))
    shift_gap = float(np.max(np.abs(shifted.eigenvalues - free.eigenvalues - 4.0)))
    t_grid = np.array([1.0])
    theta_free = heat_traces(free, gammas, t_grid).theta[0]
    theta_shifted = heat_traces(shifted, gammas, t_grid).theta[0]
    trace_gap = abs(theta_shifted - np.exp(-4.0) * theta_free)
    elapsed = time.perf_counter() - start
    ok = shift_gap < 1e-10 and trace_gap < 1e-8 and elapsed < 10.0
    _report(2, ok, f"constant shift by 4.0 (spectrum gap {shift_gap:.2e}, "
                   f"heat-trace gap {trace_gap:.2e}, {elapsed:.2f} s)")


def test_criterion_3_counterexample_kernel(gammas, counterexample):
    data = counterexample
    geom, tau, modes = data["geom"], data["tau"], data["modes"]
    spectrum = data["spectrum"]
    kernel_count = int(np.sum(spectrum.eigenvalues < 1e-8))
    res_minus = norm(data["ham"].apply(modes.mode_minus)) / norm(modes.mode_minus)
    res_plus = norm(data["ham"].apply(modes.mode_plus)) / norm(modes.mode_plus)
    # computed kernel basis against the built modes
    computed = np.column_stack([v.values.ravel()
                                for v in spectrum.eigenvectors[:2]])
    built = np.column_stack([modes.mode_minus.values.ravel(),
                             modes.mode_plus.values.ravel()])
    angle = float(np.max(subspace_angles(computed, built)))
    # squared norms against the independent envelope quadrature
    a1 = 2 * quad(lambda r: np.exp(-2 * tau * COS_COEFF * np.sin(r)),
                  0.0, 2 * np.pi, epsabs=1e-13, epsrel=1e-13)[0]
    a2 = 2 * quad(lambda r: np.exp(+2 * tau * COS_COEFF * np.sin(r)),
                  0.0, 2 * np.pi, epsabs=1e-13, epsrel=1e-13)[0]
    cross = 2 * np.pi
    norm_gap = max(abs(norm(modes.mode_minus) ** 2 - a1 * cross) / (a1 * cross),
                   abs(norm(modes.mode_plus) ** 2 - a2 * cross) / (a2 * cross))
    elapsed = data["seconds"]
    ok = (spectrum.converged and kernel_count >= 2
          and res_minus < 1e-7 and res_plus < 1e-7
          and angle < 1e-4 and norm_gap < 1e-8 and elapsed < 60.0)
    _report(3, ok, f"kernel dimension {kernel_count}, mode residuals "
                   f"{res_minus:.2e}/{res_plus:.2e}, subspace angle "
                   f"{angle:.2e}, norm gap {norm_gap:.2e}, {elapsed:.2f} s")


def test_criterion_4_zero_mode_properties(gammas, counterexample):
    data = counterexample
    geom, f, modes = data["geom"], data["f"], data["modes"]
    report = verify_zero_mode(geom, gammas, f, modes.mode_minus)
    flux = nodal_flux(geom, gammas, f, modes.mode_minus)
    gaps = {"pairing_f": report.pairing_f,
            "pairing_dirac": report.pairing_dirac,
            "norm_identity": report.norm_identity_gap,
            "divergence": report.divergence_gap}
    ok = all(v < 1e-7 for v in gaps.values()) and flux.balance_gap < 1e-6
    detail = ", ".join(f"{k} {v:.2e}" for k, v in gaps.items())
    _report(4, ok, f"{detail}, flux balance {flux.balance_gap:.2e}")


def test_criterion_5_positivity_suite(gammas):
    start = time.perf_counter()
    geom = make_torus(2, [1.0, 1.0], [16, 16])
    catalog = positivity_catalog(geom)
    assert len(catalog) >= 10
    failures = []
    for name, f in catalog:
        uniform = check_uniform_condition(f)
        sign = check_sign_definite(f)
        if not (uniform.holds or sign.holds):
            failures.append(f"{name}: no checker passed")
            continue
        ham = hamiltonian(geom, gammas, f)
        spectrum = smallest_eigenpairs(ham, 2, tol=1e-10)
        if not (spectrum.converged and spectrum.eigenvalues[0] > 1e-9):
            failures.append(f"{name}: bottom {spectrum.eigenvalues[0]:.2e}")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 120.0
    _report(5, ok, f"{len(catalog)} checked deformations strictly positive "
                   f"({elapsed:.1f} s)" + (f"; failures: {failures}" if failures else ""))


def test_criterion_6_symmetry_and_index(gammas):
    geom = make_torus(2, [1.0, 1.0], [16, 16])
    profiles = {
        "cos_profile": normalized_profile(geom, lambda x, y: np.cos(y)),
        "torus_sine": scalar_from_function(
            geom, lambda x, y: -1.0 * np.sin(x) * np.sin(y)),
    }
    details = []
    ok = True
    for name, f in profiles.items():
        report = index_checks(geom, gammas, f, t=1.0, tol=1e-8)
        ok = ok and report.theta_identity_holds and report.dirac_trace_vanishes \
            and report.max_eigenvalue_gap < 1e-8
        details.append(f"{name}: spectra gap {report.max_eigenvalue_gap:.2e}, "
                       f"theta gap {report.theta_gap:.2e}, "
                       f"dirac trace {report.dirac_trace:.2e}")
    _report(6, ok, "; ".join(details))


def test_criterion_7_oracle_equivalence(gammas):
    geom = make_torus(2, [1.0, 1.0], [8, 8])
    h_cos = normalized_profile(geom, lambda x, y: np.cos(y))
    catalog = {
        "free": constant_scalar(geom, 0.0),
        "constant_two": constant_scalar(geom, 2.0),
        "mu_one_small_cos": ScalarField(geom, 1.0 + 0.1 * h_cos.values),
        "cos_counterexample": h_cos,
        "torus_sine": scalar_from_function(
            geom, lambda x, y: -np.sin(x) * np.sin(y)),
    }
    worst = 0.0
    ok = True
    for name, f in catalog.items():
        ham = hamiltonian(geom, gammas, f)
        dense = dense_spectrum(ham)
        iterative = smallest_eigenpairs(ham, 12, tol=1e-9)
        gap = float(np.max(np.abs(iterative.eigenvalues
                                  - dense.eigenvalues[:12])))
        worst = max(worst, gap)
        ok = ok and iterative.converged and gap < 1e-8
    _report(7, ok, f"iterative vs dense on 5 deformations, "
                   f"worst gap {worst:.2e}")


def test_criterion_8_weyl_leading_term(gammas):
    geom = make_torus(2, [1.0, 1.0], [16, 16])
    spectrum = dense_spectrum(hamiltonian(geom, gammas,
                                          constant_scalar(geom, 0.0)))
    t = 0.15
    curve = heat_traces(spectrum, gammas, np.array([t]), accuracy=1e-4)
    bound_ratio = float(curve.truncation_bound[0] / curve.theta[0])
    value = 4 * np.pi * t * curve.theta[0]
    target = 2.0 * (2 * np.pi) ** 2
    deviation = abs(value / target - 1.0)
    ok = bound_ratio < 0.01 and deviation < 0.05
    _report(8, ok, f"(4 pi t) Theta = {value:.3f} vs {target:.3f} "
                   f"(deviation {deviation:.2%}, tail/theta {bound_ratio:.1e})")


def test_criterion_9_residual_convergence(gammas):
    tau = 10.0
    residuals = []
    for n_r in (16, 32, 64):
        geom = make_torus(2, [1.0, 1.0], [8, n_r])
        h = scalar_from_function(geom, lambda x, y: COS_COEFF * np.cos(y))
        modes = build_product_zero_modes(geom, gammas, h, tau)
        f = ScalarField(geom, tau * h.values)
        ham = hamiltonian(geom, gammas, f)
        residuals.append(norm(ham.apply(modes.mode_minus))
                         / norm(modes.mode_minus))
    ok = all(residuals[i + 1] <= max(residuals[i] / 10.0, 1e-12)
             for i in range(len(residuals) - 1))
    chain = " -> ".join(f"{r:.2e}" for r in residuals)
    _report(9, ok, f"kernel residual at r-resolution 16/32/64: {chain}")
