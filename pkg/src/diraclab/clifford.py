"""Hermitian Dirac matrices in even dimensions, chirality, projectors.

The matrices are built by a block recursion that keeps the chirality
operator diagonal: given the (n-2)-dimensional set, the n-dimensional
"hat" family consists of those matrices plus their chirality operator,
and then

    gamma_j = [[0, -i*hat_j], [i*hat_j, 0]],   gamma_n = [[0, I], [I, 0]],
    Gamma   = diag(I, -I).

All entries are exact machine numbers (0, +-1, +-i), so the Clifford
relations hold to rounding error of the verification itself, not of the
construction.  Matrices are tiny (at most 16x16) and stored dense.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .geometry import ValidationError

MAX_DIM = 8


@dataclass(frozen=True, eq=False)
class GammaSet:
    """The n Hermitian Dirac matrices, chirality, and the half-size blocks.

    ``hat_matrices`` are the (n-1) lower-dimensional matrices gamma_j is
    built from; they act on the chiral half-spinor components.
    """

    dim: int
    matrices: tuple[np.ndarray, ...]
    chirality: np.ndarray
    hat_matrices: tuple[np.ndarray, ...]

    @property
    def size(self) -> int:
        return 2 ** (self.dim // 2)


def _freeze(m: np.ndarray) -> np.ndarray:
    m = np.ascontiguousarray(m, dtype=np.complex128)
    m.flags.writeable = False
    return m


def _build(n: int) -> tuple[list[np.ndarray], np.ndarray, list[np.ndarray]]:
    if n == 2:
        hats = [np.eye(1, dtype=np.complex128)]
    else:
        prev, prev_chirality, _ = _build(n - 2)
        hats = prev + [prev_chirality]
    half = hats[0].shape[0]
    zero = np.zeros((half, half), dtype=np.complex128)
    eye = np.eye(half, dtype=np.complex128)
    gammas = [np.block([[zero, -1j * g], [1j * g, zero]]) for g in hats]
    # the last generator uses the identity block instead of a hat matrix
    gammas.append(np.block([[zero, eye], [eye, zero]]))
    chirality = np.block([[eye, zero], [zero, -eye]])
    return gammas, chirality, hats


def build_gamma_set(n: int) -> GammaSet:
    """Construct the Dirac matrices and chirality operator in dimension n."""
    if n % 2 != 0 or n < 2:
        raise ValidationError("even dimension required")
    if n > MAX_DIM:
        raise ValidationError(f"dimension capped at {MAX_DIM}")
    gammas, chirality, hats = _build(n)
    # The product form of the chirality operator must reproduce the block
    # diagonal exactly; entries are exact so this is an equality check.
    product = np.eye(2 ** (n // 2), dtype=np.complex128)
    for g in gammas:
        product = product @ g
    product = (1j) ** (n // 2) * product
    if not np.array_equal(product, chirality):
        raise AssertionError("chirality product form disagrees with block form")
    return GammaSet(dim=n,
                    matrices=tuple(_freeze(g) for g in gammas),
                    chirality=_freeze(chirality),
                    hat_matrices=tuple(_freeze(h) for h in hats))


def chiral_projectors(gammas: GammaSet) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal projectors (I + Gamma)/2 and (I - Gamma)/2."""
    eye = np.eye(gammas.size, dtype=np.complex128)
    p_plus = 0.5 * (eye + gammas.chirality)
    p_minus = 0.5 * (eye - gammas.chirality)
    return _freeze(p_plus), _freeze(p_minus)


def majorana_transform(gammas: GammaSet) -> tuple[np.ndarray, np.ndarray]:
    """Similarity transform to the real (Majorana) form in dimension 2.

    T cycles (gamma_1, gamma_2, Gamma) -> (gamma_2, Gamma, gamma_1), which
    turns the deformed operators into real matrix form.
    """
    if gammas.dim != 2:
        raise ValidationError("Majorana transform implemented in dimension 2 only")
    t = np.array([[1.0, 1.0], [1j, -1j]], dtype=np.complex128)
    t_inv = 0.5 * np.array([[1.0, -1j], [1.0, 1j]], dtype=np.complex128)
    return _freeze(t), _freeze(t_inv)


def gamma_set_to_json(gammas: GammaSet, path) -> None:
    """Debug dump: matrices as nested [re, im] pairs."""
    def encode(m: np.ndarray):
        return [[[float(v.real), float(v.imag)] for v in row] for row in m]

    payload = {
        "dim": gammas.dim,
        "matrices": [encode(g) for g in gammas.matrices],
        "chirality": encode(gammas.chirality),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
