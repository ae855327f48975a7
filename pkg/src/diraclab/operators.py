"""Matrix-free linear operators on spinor fields.

Everything is assembled from two primitives: exact spectral derivatives
(wavenumber space) and pointwise multiplication (position space).  The
Hamiltonian is the composition D_f* D_f, never a separately discretized
second-order stencil, so it is positive semidefinite by construction and
zero-mode residuals are meaningful.  A direct form D^2 + m_f is provided
as a cross-check; on these flat geometries the two must agree, which is
the discrete Lichnerowicz-plus-deformation identity.

Operator handles are immutable and freely shareable; applying one is a
pure function of its input field.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .clifford import GammaSet
from .geometry import (ScalarField, SpinorField, TorusGeometry,
                       ValidationError, spectral_derivative)


@dataclass(frozen=True, eq=False)
class OperatorHandle:
    """A linear map on spinor fields together with its adjoint."""

    apply: Callable[[SpinorField], SpinorField]
    adjoint_apply: Callable[[SpinorField], SpinorField]
    geometry: TorusGeometry
    ncomp: int
    self_adjoint: bool
    label: str

    @property
    def dimension(self) -> int:
        """Total complex degrees of freedom."""
        return self.geometry.npoints * self.ncomp

    @property
    def field_shape(self) -> tuple[int, ...]:
        return self.geometry.grid + (self.ncomp,)

    def __call__(self, u: SpinorField) -> SpinorField:
        return self.apply(u)


def _matmul(values: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """Pointwise matrix action on the trailing component axis."""
    return values @ matrix.T


def _check_real_deformation(f: ScalarField, geom: TorusGeometry) -> None:
    if f.geometry != geom:
        raise ValidationError("deformation lives on a different geometry")
    if not f.is_real:
        raise ValidationError("deformation function must be real valued")


def dirac_operator(geom: TorusGeometry, gammas: GammaSet) -> OperatorHandle:
    """The flat Dirac operator i * sum_a gamma_a d_a (self-adjoint)."""
    if geom.dim != gammas.dim:
        raise ValidationError("geometry and gamma set dimensions differ")

    def apply(u: SpinorField) -> SpinorField:
        out = np.zeros_like(u.values)
        for axis in range(geom.dim):
            d = spectral_derivative(u, axis).values
            out += 1j * _matmul(d, gammas.matrices[axis])
        return SpinorField(geom, out)

    return OperatorHandle(apply=apply, adjoint_apply=apply, geometry=geom,
                          ncomp=gammas.size, self_adjoint=True, label="dirac")


def deformed_dirac(geom: TorusGeometry, gammas: GammaSet, f: ScalarField,
                   sign: int = +1) -> OperatorHandle:
    """The deformed operator D + i*sign*f, with adjoint D - i*sign*f."""
    _check_real_deformation(f, geom)
    if sign not in (+1, -1):
        raise ValidationError("sign must be +1 or -1")
    dirac = dirac_operator(geom, gammas)
    fval = f.values[..., None]

    def apply(u: SpinorField) -> SpinorField:
        return SpinorField(geom, dirac.apply(u).values + 1j * sign * fval * u.values)

    def adjoint_apply(u: SpinorField) -> SpinorField:
        return SpinorField(geom, dirac.apply(u).values - 1j * sign * fval * u.values)

    trivial = float(np.max(np.abs(f.values))) == 0.0
    suffix = "" if sign > 0 else "*"
    return OperatorHandle(apply=apply, adjoint_apply=adjoint_apply,
                          geometry=geom, ncomp=gammas.size,
                          self_adjoint=trivial, label=f"dirac+i*f{suffix}")


def hamiltonian(geom: TorusGeometry, gammas: GammaSet, f: ScalarField,
                form: str = "composition") -> OperatorHandle:
    """The nonnegative Hamiltonian of the deformed operator.

    "composition" applies D_f* after D_f (the default and the primary
    definition); "direct" applies D twice and adds the potential matrix.
    """
    _check_real_deformation(f, geom)
    if form == "composition":
        deformed = deformed_dirac(geom, gammas, f, +1)

        def apply(u: SpinorField) -> SpinorField:
            return deformed.adjoint_apply(deformed.apply(u))

    elif form == "direct":
        dirac = dirac_operator(geom, gammas)
        potential = potential_matrix(geom, gammas, f)

        def apply(u: SpinorField) -> SpinorField:
            kinetic = dirac.apply(dirac.apply(u)).values
            return SpinorField(geom, kinetic + potential.apply_values(u.values))

    else:
        raise ValidationError(f"unknown Hamiltonian form {form!r}")
    return OperatorHandle(apply=apply, adjoint_apply=apply, geometry=geom,
                          ncomp=gammas.size, self_adjoint=True,
                          label=f"hamiltonian[{form}]")


@dataclass(frozen=True, eq=False)
class PotentialMatrixField:
    """Pointwise Hermitian potential f^2 I - sum_a gamma_a d_a f.

    Its eigenvalues at each point are f^2 - |grad f| and f^2 + |grad f|,
    each with half the spinor multiplicity.
    """

    geometry: TorusGeometry
    matrices: np.ndarray       # shape grid + (ncomp, ncomp)
    lambda_min: np.ndarray     # f^2 - |grad f| per point
    lambda_max: np.ndarray     # f^2 + |grad f| per point

    def apply_values(self, values: np.ndarray) -> np.ndarray:
        return np.einsum("...ab,...b->...a", self.matrices, values)

    def apply(self, u: SpinorField) -> SpinorField:
        return SpinorField(self.geometry, self.apply_values(u.values))


def gradient_values(geom: TorusGeometry, f: ScalarField) -> list[np.ndarray]:
    """Frame components of grad f (arc-length derivatives per axis)."""
    return [spectral_derivative(f, axis).values for axis in range(geom.dim)]


def potential_matrix(geom: TorusGeometry, gammas: GammaSet,
                     f: ScalarField) -> PotentialMatrixField:
    _check_real_deformation(f, geom)
    grads = gradient_values(geom, f)
    grad_norm = np.sqrt(sum(g ** 2 for g in grads))
    c = gammas.size
    eye = np.eye(c, dtype=np.complex128)
    mats = f.values[..., None, None] ** 2 * eye
    for axis in range(geom.dim):
        mats = mats - grads[axis][..., None, None] * gammas.matrices[axis]
    fsq = f.values ** 2
    return PotentialMatrixField(geometry=geom, matrices=mats,
                                lambda_min=fsq - grad_norm,
                                lambda_max=fsq + grad_norm)


# -- chiral block structure (distinguished last circle) -----------------------

@dataclass(frozen=True, eq=False)
class ChiralBlocks:
    """Half-spinor operators of the off-diagonal block form of D.

    ``a`` collects the hat-matrix derivatives along the first n-1 axes,
    ``b`` is the bare derivative along the distinguished last axis; both
    are anti-self-adjoint.  D = [[0, F*], [F, 0]] with F = -A + iB.  When
    a deformation is supplied, ``h_plus``/``h_minus`` are the half-space
    operators F*F + f^2 and F F* + f^2.
    """

    a: OperatorHandle
    b: OperatorHandle
    f_op: OperatorHandle
    f_star_op: OperatorHandle
    h_plus: OperatorHandle | None = None
    h_minus: OperatorHandle | None = None


def chiral_blocks(geom: TorusGeometry, gammas: GammaSet,
                  f: ScalarField | None = None) -> ChiralBlocks:
    if geom.dim != gammas.dim:
        raise ValidationError("geometry and gamma set dimensions differ")
    half = gammas.size // 2
    hats = gammas.hat_matrices
    last = geom.dim - 1

    def a_apply(u: SpinorField) -> SpinorField:
        out = np.zeros_like(u.values)
        for axis in range(last):
            out += _matmul(spectral_derivative(u, axis).values, hats[axis])
        return SpinorField(geom, out)

    def b_apply(u: SpinorField) -> SpinorField:
        return spectral_derivative(u, last)

    def make(apply, adjoint, label, self_adjoint=False):
        return OperatorHandle(apply=apply, adjoint_apply=adjoint, geometry=geom,
                              ncomp=half, self_adjoint=self_adjoint, label=label)

    a = make(a_apply, lambda u: SpinorField(geom, -a_apply(u).values), "block A")
    b = make(b_apply, lambda u: SpinorField(geom, -b_apply(u).values), "block B")

    def f_apply(u: SpinorField) -> SpinorField:
        return SpinorField(geom, -a_apply(u).values + 1j * b_apply(u).values)

    def f_star_apply(u: SpinorField) -> SpinorField:
        return SpinorField(geom, a_apply(u).values + 1j * b_apply(u).values)

    f_op = make(f_apply, f_star_apply, "block F")
    f_star_op = make(f_star_apply, f_apply, "block F*")

    h_plus = h_minus = None
    if f is not None:
        _check_real_deformation(f, geom)
        fsq = (f.values ** 2)[..., None]

        def h_plus_apply(u: SpinorField) -> SpinorField:
            return SpinorField(geom, f_star_apply(f_apply(u)).values
                               + fsq * u.values)

        def h_minus_apply(u: SpinorField) -> SpinorField:
            return SpinorField(geom, f_apply(f_star_apply(u)).values
                               + fsq * u.values)

        h_plus = make(h_plus_apply, h_plus_apply, "block F*F+f^2", True)
        h_minus = make(h_minus_apply, h_minus_apply, "block FF*+f^2", True)
    return ChiralBlocks(a=a, b=b, f_op=f_op, f_star_op=f_star_op,
                        h_plus=h_plus, h_minus=h_minus)


def split_chiral(u: SpinorField) -> tuple[SpinorField, SpinorField]:
    """Split a full spinor field into its chiral halves (block basis)."""
    half = u.ncomp // 2
    return (SpinorField(u.geometry, u.values[..., :half]),
            SpinorField(u.geometry, u.values[..., half:]))


def join_chiral(plus: SpinorField, minus: SpinorField) -> SpinorField:
    return SpinorField(plus.geometry,
                       np.concatenate([plus.values, minus.values], axis=-1))


def assemble_dirac_from_blocks(blocks: ChiralBlocks,
                               gammas: GammaSet) -> OperatorHandle:
    """Reassemble D = [[0, F*], [F, 0]] acting on full spinors."""
    geom = blocks.a.geometry

    def apply(u: SpinorField) -> SpinorField:
        plus, minus = split_chiral(u)
        return join_chiral(blocks.f_star_op.apply(minus),
                           blocks.f_op.apply(plus))

    return OperatorHandle(apply=apply, adjoint_apply=apply, geometry=geom,
                          ncomp=gammas.size, self_adjoint=True,
                          label="dirac[blocks]")


# -- supersymmetric doubling ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class SuperchargeBlocks:
    """Involution J = diag(I, -I) and nilpotent supercharge on spinor pairs."""

    j: OperatorHandle
    q: OperatorHandle
    q_star: OperatorHandle


def split_double(u: SpinorField) -> tuple[SpinorField, SpinorField]:
    half = u.ncomp // 2
    return (SpinorField(u.geometry, u.values[..., :half]),
            SpinorField(u.geometry, u.values[..., half:]))


def join_double(top: SpinorField, bottom: SpinorField) -> SpinorField:
    return SpinorField(top.geometry,
                       np.concatenate([top.values, bottom.values], axis=-1))


def supercharge_blocks(geom: TorusGeometry, gammas: GammaSet,
                       f: ScalarField) -> SuperchargeBlocks:
    """The algebra J^2 = I, Q^2 = 0, JQ = -QJ = -Q on doubled spinor fields."""
    _check_real_deformation(f, geom)
    deformed = deformed_dirac(geom, gammas, f, +1)
    doubled = 2 * gammas.size

    def j_apply(u: SpinorField) -> SpinorField:
        top, bottom = split_double(u)
        return join_double(top, SpinorField(geom, -bottom.values))

    def q_apply(u: SpinorField) -> SpinorField:
        top, _ = split_double(u)
        zero = SpinorField(geom, np.zeros_like(top.values))
        return join_double(zero, deformed.apply(top))

    def q_star_apply(u: SpinorField) -> SpinorField:
        _, bottom = split_double(u)
        zero = SpinorField(geom, np.zeros_like(bottom.values))
        return join_double(deformed.adjoint_apply(bottom), zero)

    def make(apply, adjoint, label, self_adjoint=False):
        return OperatorHandle(apply=apply, adjoint_apply=adjoint, geometry=geom,
                              ncomp=doubled, self_adjoint=self_adjoint,
                              label=label)

    return SuperchargeBlocks(j=make(j_apply, j_apply, "involution J", True),
                             q=make(q_apply, q_star_apply, "supercharge Q"),
                             q_star=make(q_star_apply, q_apply, "supercharge Q*"))


def gamma_action(gammas: GammaSet, u: SpinorField,
                 which: int | None = None) -> SpinorField:
    """Pointwise action of gamma_a (or the chirality operator if None)."""
    matrix = gammas.chirality if which is None else gammas.matrices[which]
    return SpinorField(u.geometry, _matmul(u.values, matrix))
