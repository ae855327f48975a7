import json

import numpy as np
import pytest

from diraclab import (ValidationError, build_gamma_set, chiral_projectors,
                      majorana_transform)
from diraclab.clifford import gamma_set_to_json


def test_dimension_two_matrices_exact(gamma2):
    g1, g2 = gamma2.matrices
    assert np.array_equal(g1, np.array([[0, -1j], [1j, 0]]))
    assert np.array_equal(g2, np.array([[0, 1], [1, 0]], dtype=complex))
    assert np.array_equal(gamma2.chirality, np.diag([1.0, -1.0]).astype(complex))


def test_chirality_is_product(gamma2):
    product = 1j * gamma2.matrices[0] @ gamma2.matrices[1]
    assert np.array_equal(product, gamma2.chirality)


def test_dimension_four_by_multiplication():
    gs = build_gamma_set(4)
    eye = np.eye(4)
    for a in range(4):
        assert np.max(np.abs(gs.matrices[a] @ gs.matrices[a] - eye)) < 1e-14
        for b in range(a + 1, 4):
            anti = gs.matrices[a] @ gs.matrices[b] + gs.matrices[b] @ gs.matrices[a]
            assert np.max(np.abs(anti)) < 1e-14


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_invariants_all_dimensions(n):
    gs = build_gamma_set(n)
    size = gs.size
    assert size == 2 ** (n // 2)
    eye = np.eye(size)
    for a in range(n):
        g = gs.matrices[a]
        assert np.max(np.abs(g - g.conj().T)) == 0  # Hermitian, exact entries
        assert abs(np.trace(g)) == 0
        assert np.max(np.abs(gs.chirality @ g + g @ gs.chirality)) == 0
        for b in range(n):
            anti = gs.matrices[a] @ gs.matrices[b] + gs.matrices[b] @ gs.matrices[a]
            target = 2 * eye if a == b else np.zeros((size, size))
            assert np.max(np.abs(anti - target)) < 1e-14
    assert np.max(np.abs(gs.chirality @ gs.chirality - eye)) == 0
    assert abs(np.trace(gs.chirality)) == 0
    half = size // 2
    expected = np.block([[np.eye(half), np.zeros((half, half))],
                         [np.zeros((half, half)), -np.eye(half)]])
    assert np.array_equal(gs.chirality, expected.astype(complex))


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_recursion_blocks(n):
    gs = build_gamma_set(n)
    half = gs.size // 2
    # upper-right block of every generator recovers the hat family
    for j in range(n - 1):
        block = gs.matrices[j][:half, half:]
        assert np.array_equal(1j * block, gs.hat_matrices[j])
    last_block = gs.matrices[n - 1][:half, half:]
    assert np.array_equal(1j * last_block, 1j * np.eye(half))


def test_projectors(gamma2):
    p_plus, p_minus = chiral_projectors(gamma2)
    assert np.array_equal(p_plus, np.diag([1.0, 0.0]).astype(complex))
    assert np.max(np.abs(p_plus @ p_minus)) == 0
    assert np.max(np.abs(p_plus @ p_plus - p_plus)) == 0
    assert np.max(np.abs(p_plus + p_minus - np.eye(2))) == 0
    sandwich = p_plus @ gamma2.matrices[0] @ p_plus
    assert np.max(np.abs(sandwich)) == 0


def test_majorana_relations(gamma2):
    t, t_inv = majorana_transform(gamma2)
    assert np.array_equal(t, np.array([[1, 1], [1j, -1j]]))
    assert np.max(np.abs(t @ t_inv - np.eye(2))) < 1e-15
    g1, g2 = gamma2.matrices
    assert np.allclose(t @ g1 @ t_inv, g2, atol=1e-15)
    assert np.allclose(t @ g2 @ t_inv, gamma2.chirality, atol=1e-15)
    assert np.allclose(t @ gamma2.chirality @ t_inv, g1, atol=1e-15)


def test_majorana_cycles_twice(gamma2):
    t, t_inv = majorana_transform(gamma2)
    twice = t @ (t @ gamma2.matrices[0] @ t_inv) @ t_inv
    assert np.allclose(twice, gamma2.chirality, atol=1e-15)


def test_majorana_dimension_guard():
    with pytest.raises(ValidationError, match="dimension 2"):
        majorana_transform(build_gamma_set(4))


def test_build_validation():
    for bad in (0, 3, 5, 10):
        with pytest.raises(ValidationError):
            build_gamma_set(bad)


def test_json_dump(tmp_path, gamma2):
    path = tmp_path / "gammas.json"
    gamma_set_to_json(gamma2, path)
    payload = json.loads(path.read_text())
    assert payload["dim"] == 2
    assert payload["matrices"][0][0][1] == [0.0, -1.0]  # entry -i
