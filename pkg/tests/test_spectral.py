import numpy as np
import pytest

from diraclab import (ScalarField, SpinorField, ValidationError,
                      action_functional, constant_scalar, constant_spinor,
                      count_zero_modes, deformed_dirac, dense_spectrum,
                      dirac_operator, gamma_action, hamiltonian, heat_traces,
                      index_checks, inner_product, make_torus, norm,
                      random_spinor, scalar_from_function, smallest_eigenpairs)
from diraclab.operators import OperatorHandle
from diraclab.spectral import heat_trace_to_csv, spectrum_to_csv

from conftest import normalized_profile


def test_free_spectrum_multiplicities(torus16, gamma2):
    ham = hamiltonian(torus16, gamma2, constant_scalar(torus16, 0.0))
    result = smallest_eigenpairs(ham, 10, tol=1e-9)
    assert result.converged
    expected = np.array([0, 0, 1, 1, 1, 1, 1, 1, 1, 1], dtype=float)
    assert np.max(np.abs(result.eigenvalues - expected)) < 1e-10


def test_constant_deformation_bottom(torus16, gamma2):
    ham = hamiltonian(torus16, gamma2, constant_scalar(torus16, 2.0))
    result = smallest_eigenpairs(ham, 2, tol=1e-10)
    assert result.eigenvalues[0] == pytest.approx(4.0, abs=1e-10)


def test_iterative_matches_dense(torus8, gamma2):
    f = scalar_from_function(torus8, lambda x, y: np.sin(x) * np.sin(y))
    ham = hamiltonian(torus8, gamma2, f)
    dense = dense_spectrum(ham)
    iterative = smallest_eigenpairs(ham, 6, tol=1e-9)
    assert iterative.converged
    assert np.max(np.abs(iterative.eigenvalues - dense.eigenvalues[:6])) < 1e-8


def test_solver_rejects_non_self_adjoint(torus8, gamma2):
    f = constant_scalar(torus8, 1.0)
    deformed = deformed_dirac(torus8, gamma2, f)
    with pytest.raises(ValidationError):
        smallest_eigenpairs(deformed, 2)
    with pytest.raises(ValidationError):
        dense_spectrum(deformed)


def test_solver_k_bounds(torus8, gamma2):
    ham = hamiltonian(torus8, gamma2, constant_scalar(torus8, 0.0))
    with pytest.raises(ValidationError):
        smallest_eigenpairs(ham, 0)
    with pytest.raises(ValidationError):
        smallest_eigenpairs(ham, ham.dimension)


def test_solver_flags_non_convergence(torus16, gamma2):
    ham = hamiltonian(torus16, gamma2, constant_scalar(torus16, 0.0))
    result = smallest_eigenpairs(ham, 10, tol=1e-12, max_iter=2)
    assert not result.converged
    assert result.iterations == 2
    assert result.eigenvalues.size == 10  # partial result still reported


def test_solver_deterministic(torus8, gamma2):
    f = scalar_from_function(torus8, lambda x, y: 0.3 + np.cos(y))
    ham = hamiltonian(torus8, gamma2, f)
    a = smallest_eigenpairs(ham, 4, tol=1e-9, seed=77)
    b = smallest_eigenpairs(ham, 4, tol=1e-9, seed=77)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert all(np.array_equal(u.values, v.values)
               for u, v in zip(a.eigenvectors, b.eigenvectors))


def test_eigenvectors_orthonormal(torus8, gamma2):
    f = scalar_from_function(torus8, lambda x, y: 0.3 + np.cos(y))
    ham = hamiltonian(torus8, gamma2, f)
    result = smallest_eigenpairs(ham, 6, tol=1e-9)
    for i, u in enumerate(result.eigenvectors):
        for j, v in enumerate(result.eigenvectors):
            expected = 1.0 if i == j else 0.0
            assert inner_product(u, v) == pytest.approx(expected, abs=1e-8)


def test_dense_identity_operator(torus8):
    geom = torus8

    def ident(u):
        return u

    op = OperatorHandle(apply=ident, adjoint_apply=ident, geometry=geom,
                        ncomp=2, self_adjoint=True, label="identity")
    result = dense_spectrum(op)
    assert np.max(np.abs(result.eigenvalues - 1.0)) < 1e-13


def test_dense_lattice_multiplicities(torus8, gamma2):
    ham = hamiltonian(torus8, gamma2, constant_scalar(torus8, 0.0))
    result = dense_spectrum(ham)
    values, counts = np.unique(np.round(result.eigenvalues, 9),
                               return_counts=True)
    assert values[0] == pytest.approx(0.0, abs=1e-12)
    assert counts[0] == 2
    assert values[1] == pytest.approx(1.0)
    assert counts[1] == 8
    assert values[2] == pytest.approx(2.0)
    assert counts[2] == 8


def test_dense_materialization_hermitian(torus8, gamma2):
    from diraclab.spectral import materialize
    f = scalar_from_function(torus8, lambda x, y: 0.5 + np.sin(y))
    ham = hamiltonian(torus8, gamma2, f)
    matrix = materialize(ham)
    assert np.max(np.abs(matrix - matrix.conj().T)) < 1e-12


def test_dense_dimension_guard(gamma2):
    geom = make_torus(2, [1, 1], [64, 64])
    ham = hamiltonian(geom, gamma2, constant_scalar(geom, 0.0))
    with pytest.raises(ValidationError, match="dense"):
        dense_spectrum(ham)


def test_psd_guard(torus8, gamma2):
    for fn in (lambda x, y: np.sin(x) * np.sin(y),
               lambda x, y: 0.2 + np.cos(y),
               lambda x, y: np.cos(x) * np.cos(y) - 0.1):
        ham = hamiltonian(torus8, gamma2, scalar_from_function(torus8, fn))
        result = dense_spectrum(ham)
        assert result.eigenvalues[0] >= -1e-9


def test_heat_trace_constant_factorizes(torus16, gamma2):
    free = dense_spectrum(hamiltonian(torus16, gamma2,
                                      constant_scalar(torus16, 0.0)))
    shifted = dense_spectrum(hamiltonian(torus16, gamma2,
                                         constant_scalar(torus16, 2.0)))
    t_grid = np.array([1.0, 2.0])
    base = heat_traces(free, gamma2, t_grid)
    curve = heat_traces(shifted, gamma2, t_grid)
    for t, theta_mu, theta_0 in zip(t_grid, curve.theta, base.theta):
        assert theta_mu == pytest.approx(np.exp(-4.0 * t) * theta_0, abs=1e-8)


def test_heat_trace_supertrace_vanishes(torus16, gamma2):
    free = dense_spectrum(hamiltonian(torus16, gamma2,
                                      constant_scalar(torus16, 0.0)))
    curve = heat_traces(free, gamma2, np.array([0.5, 1.0]), accuracy=1e-6)
    assert np.max(np.abs(curve.psi)) < curve.accuracy
    assert np.all(np.abs(curve.psi) <= curve.theta)
    assert curve.theta[0] > curve.theta[1] > 0


def test_heat_trace_refuses_small_t(torus16, gamma2):
    free = dense_spectrum(hamiltonian(torus16, gamma2,
                                      constant_scalar(torus16, 0.0)))
    with pytest.raises(ValidationError, match="smallest valid t"):
        heat_traces(free, gamma2, np.array([1e-4]), accuracy=1e-8)


def test_heat_trace_rejects_unconverged(torus16, gamma2):
    ham = hamiltonian(torus16, gamma2, constant_scalar(torus16, 0.0))
    partial = smallest_eigenpairs(ham, 4, tol=1e-13, max_iter=1)
    assert not partial.converged
    with pytest.raises(ValidationError, match="converge"):
        heat_traces(partial, gamma2, np.array([1.0]))


def test_index_checks_cos_profile(torus16, gamma2):
    h = normalized_profile(torus16, lambda x, y: np.cos(y))
    report = index_checks(torus16, gamma2, h, t=1.0, tol=1e-8)
    assert report.solver == "dense"
    assert report.theta_gap < 1e-8
    assert report.dirac_trace < 1e-8
    assert report.max_eigenvalue_gap < 1e-8
    assert report.theta_identity_holds and report.dirac_trace_vanishes


def test_sign_flip_spectral_symmetry(torus8, gamma2):
    h = normalized_profile(torus8, lambda x, y: np.cos(y))
    ham_plus = hamiltonian(torus8, gamma2, h)
    ham_minus = hamiltonian(torus8, gamma2, ScalarField(torus8, -np.asarray(h.values)))
    plus = dense_spectrum(ham_plus)
    minus = dense_spectrum(ham_minus)
    assert np.max(np.abs(plus.eigenvalues - minus.eigenvalues)) < 1e-8
    # chirality maps eigenvectors across the sign flip
    for idx in (0, 1, 5):
        lam = plus.eigenvalues[idx]
        candidate = gamma_action(gamma2, plus.eigenvectors[idx])
        residual = norm(SpinorField(torus8,
                                    ham_minus.apply(candidate).values
                                    - lam * candidate.values))
        assert residual < 1e-7


def test_action_functional_values(torus8, gamma2):
    zero = constant_scalar(torus8, 0.0)
    u = constant_spinor(torus8, [1, 0])
    assert action_functional(torus8, gamma2, zero, u) == pytest.approx(0.0, abs=1e-14)
    mu = constant_scalar(torus8, 2.0)
    unit = SpinorField(torus8, u.values / norm(u))
    assert action_functional(torus8, gamma2, mu, unit) == pytest.approx(4.0, rel=1e-12)


def test_action_functional_routes_agree(torus8, gamma2):
    f = scalar_from_function(torus8, lambda x, y: 0.3 + 0.4 * np.sin(y))
    for seed in range(5):
        u = random_spinor(torus8, seed=seed, max_mode=2)
        value = action_functional(torus8, gamma2, f, u, check=True)
        assert value >= 0


def test_action_functional_rejects_zero(torus8, gamma2):
    zero_field = SpinorField(torus8, np.zeros(torus8.grid + (2,)))
    with pytest.raises(ValidationError):
        action_functional(torus8, gamma2, constant_scalar(torus8, 1.0), zero_field)


def test_count_zero_modes():
    assert count_zero_modes(np.array([1e-14, 2e-14, 0.5, 1.0])) == 2
    # below the relative threshold 1e-6 * next eigenvalue
    assert count_zero_modes(np.array([1e-8, 0.5])) == 1
    # above both the absolute and the relative threshold
    assert count_zero_modes(np.array([1e-6, 0.5])) == 0
    assert count_zero_modes(np.array([1e-12, 1e-3, 1e-3])) == 1
    assert count_zero_modes(np.array([0.4, 0.5])) == 0


def test_serialization_writers(tmp_path, torus8, gamma2):
    ham = hamiltonian(torus8, gamma2, constant_scalar(torus8, 0.0))
    result = smallest_eigenpairs(ham, 4, tol=1e-9)
    csv_path = tmp_path / "spec.csv"
    spectrum_to_csv(result, csv_path)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "index,eigenvalue,residual"
    assert len(lines) == 5
    payload = result.to_dict()
    assert payload["zero_modes"] == 2

    curve = heat_traces(dense_spectrum(ham), gamma2, np.array([1.0]))
    heat_path = tmp_path / "heat.csv"
    heat_trace_to_csv(curve, heat_path)
    assert heat_path.read_text().startswith("t,theta,psi,tail_bound")
