"""Positivity criteria, closed-form zero modes, and flux diagnostics.

Two grid checkers implement the sufficient conditions for a strictly
positive Hamiltonian: the uniform condition |grad f| < f^2 and sign
definiteness of f.  Both are sufficient only; the product construction
below produces explicit zero modes for sign-changing circle profiles,
demonstrating that neither condition is necessary.

Gradient norms use frame-scaled spectral derivatives.  Flux integrals
over the nodal regions are evaluated as bulk sums (the surface integral
over the nodal set equals the bulk integral by the divergence theorem),
so the nodal set itself is never meshed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clifford import GammaSet
from .geometry import (PERIODIC, ScalarField, SpinorField, TorusGeometry,
                       ValidationError, antiderivative_on_circle,
                       decompose_deformation, inner_product, norm,
                       spectral_derivative)
from .operators import (chiral_blocks, dirac_operator, gamma_action,
                        gradient_values, hamiltonian, join_chiral)
from .spectral import DEFAULT_SEED, count_zero_modes, smallest_eigenpairs

#: Grid points with |f| below this value belong to neither nodal region.
NODAL_CUTOFF = 1e-13

#: Residual threshold for accepting a supplied cross-section kernel spinor.
KERNEL_RESIDUAL_TOL = 1e-10


class GridConsistencyError(RuntimeError):
    """The grid data violate an implication that holds in the continuum."""


@dataclass(frozen=True)
class PositivityReport:
    """Outcome of one sufficient-positivity check on the grid."""

    condition: str
    holds: bool
    margin: float
    witness_point: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"condition": self.condition, "holds": self.holds,
                "margin": self.margin,
                "witness_point": list(self.witness_point)}


def check_uniform_condition(f: ScalarField) -> PositivityReport:
    """Check f^2 - |grad f| > 0 at every grid point.

    The margin is the minimum of f^2 - |grad f| and the witness is the
    grid index where it is attained.
    """
    if not f.is_real:
        raise ValidationError("deformation function must be real valued")
    geom = f.geometry
    grads = gradient_values(geom, f)
    grad_norm = np.sqrt(sum(g ** 2 for g in grads))
    margin_field = f.values ** 2 - grad_norm
    flat_index = int(np.argmin(margin_field))
    witness = tuple(int(i) for i in np.unravel_index(flat_index, geom.grid))
    margin = float(margin_field.flat[flat_index])
    return PositivityReport(condition="uniform_gradient",
                            holds=bool(margin > 0.0),
                            margin=margin, witness_point=witness)


def check_sign_definite(f: ScalarField) -> PositivityReport:
    """Check that f is everywhere positive or everywhere negative.

    The margin is min |f| when the check holds and a nonpositive value
    otherwise.  A passing uniform-gradient check must imply a passing
    sign check even at grid level; a violation raises, since it would
    mean the sampled data are inconsistent with any smooth f.
    """
    if not f.is_real:
        raise ValidationError("deformation function must be real valued")
    geom = f.geometry
    fmin = float(np.min(f.values))
    fmax = float(np.max(f.values))
    margin = max(fmin, -fmax)
    holds = margin > 0.0
    if holds:
        abs_field = np.abs(f.values)
        flat_index = int(np.argmin(abs_field))
        margin = float(abs_field.flat[flat_index])
    elif fmin >= -fmax:
        flat_index = int(np.argmin(f.values))
    else:
        flat_index = int(np.argmax(f.values))
    witness = tuple(int(i) for i in np.unravel_index(flat_index, geom.grid))
    report = PositivityReport(condition="sign_definite", holds=holds,
                              margin=margin, witness_point=witness)
    not_identically_zero = float(np.max(np.abs(f.values))) > 0.0
    if not_identically_zero and not holds \
            and check_uniform_condition(f).holds:
        raise GridConsistencyError(
            "uniform gradient condition holds on the grid but f changes sign")
    return report


# -- closed-form zero modes on a product with a distinguished circle -----------

@dataclass(eq=False)
class ProductZeroModes:
    """Exponential-envelope kernel modes and their squared-norm factors.

    ``mode_minus`` carries the envelope exp(-tau*omega) on equal chiral
    halves, ``mode_plus`` the envelope exp(+tau*omega) on opposite halves.
    ``norm_minus``/``norm_plus`` are the circle integrals
    2 * integral exp(-+2*tau*omega) dr, so that each squared mode norm is
    the factor times the squared cross-section norm of the kernel spinor.
    """

    mode_minus: SpinorField
    mode_plus: SpinorField
    norm_minus: float
    norm_plus: float
    omega: ScalarField
    psi0: SpinorField
    psi0_cross_norm_sq: float


def _default_kernel_spinor(geom: TorusGeometry, half: int) -> SpinorField:
    components = np.zeros(half, dtype=np.complex128)
    components[0] = 1.0
    values = np.broadcast_to(components, geom.grid + (half,))
    return SpinorField(geom, np.array(values))


def build_product_zero_modes(geom: TorusGeometry, gammas: GammaSet,
                             h_profile: ScalarField, tau: float,
                             kernel_spinor: SpinorField | None = None
                             ) -> ProductZeroModes:
    """Construct the two closed-form kernel modes for f = tau * h(r).

    ``h_profile`` must depend only on the distinguished last circle and
    have zero average there; a nonzero average (a constant offset in f)
    is refused because the candidate envelopes would not close up around
    the circle.  The kernel spinor lives on the cross section; it defaults
    to a constant half-spinor, which requires every circle to carry the
    periodic structure.
    """
    if geom.dim != gammas.dim:
        raise ValidationError("geometry and gamma set dimensions differ")
    last = geom.dim - 1
    if geom.spin_structure[last] != PERIODIC:
        raise ValidationError(
            "distinguished circle must carry the periodic spin structure")
    if not h_profile.is_real:
        raise ValidationError("profile must be real valued")
    if abs(float(np.mean(h_profile.values))) > 1e-12 * max(
            1.0, float(np.max(np.abs(h_profile.values)))):
        raise ValidationError(
            "profile has a nonzero circle average; the candidate modes "
            "would not be periodic")
    omega = antiderivative_on_circle(h_profile, last)

    half = gammas.size // 2
    if kernel_spinor is None:
        if any(s != PERIODIC for s in geom.spin_structure[:last]):
            raise ValidationError(
                "non-periodic cross section: supply an explicit kernel spinor")
        psi0 = _default_kernel_spinor(geom, half)
    else:
        psi0 = kernel_spinor
        if psi0.ncomp != half:
            raise ValidationError(
                f"kernel spinor needs {half} components, got {psi0.ncomp}")
    psi0_norm = norm(psi0)
    if psi0_norm == 0.0:
        raise ValidationError("kernel spinor is zero")
    varies = np.max(np.abs(psi0.values
                           - np.take(psi0.values, [0], axis=last)))
    if varies > 1e-10 * float(np.max(np.abs(psi0.values))):
        raise ValidationError("kernel spinor varies along the distinguished circle")
    blocks = chiral_blocks(geom, gammas)
    kernel_residual = norm(blocks.a.apply(psi0)) / psi0_norm
    if kernel_residual > KERNEL_RESIDUAL_TOL:
        raise ValidationError(
            f"kernel spinor residual {kernel_residual:.3g} exceeds "
            f"{KERNEL_RESIDUAL_TOL:g}")

    envelope_minus = np.exp(-tau * omega.values)[..., None]
    envelope_plus = np.exp(tau * omega.values)[..., None]
    top_minus = SpinorField(geom, envelope_minus * psi0.values)
    top_plus = SpinorField(geom, envelope_plus * psi0.values)
    mode_minus = join_chiral(top_minus, top_minus)
    mode_plus = join_chiral(top_plus,
                            SpinorField(geom, -top_plus.values))

    # circle quadrature of the envelopes, arc length element 2*pi*a/N
    n_last = geom.grid[last]
    omega_line = np.moveaxis(omega.values, last, 0).reshape(n_last, -1)[:, 0]
    dr = 2.0 * np.pi * geom.radii[last] / n_last
    norm_minus = 2.0 * float(np.sum(np.exp(-2.0 * tau * omega_line))) * dr
    norm_plus = 2.0 * float(np.sum(np.exp(2.0 * tau * omega_line))) * dr

    cross_points = geom.npoints // n_last
    cross_volume = geom.volume / (2.0 * np.pi * geom.radii[last])
    cross_weight = cross_volume / cross_points
    slice0 = np.take(psi0.values, 0, axis=last)
    psi0_cross = float(cross_weight * np.sum(np.abs(slice0) ** 2))
    return ProductZeroModes(mode_minus=mode_minus, mode_plus=mode_plus,
                            norm_minus=norm_minus, norm_plus=norm_plus,
                            omega=omega, psi0=psi0,
                            psi0_cross_norm_sq=psi0_cross)


def product_zero_modes_for(geom: TorusGeometry, gammas: GammaSet,
                           f: ScalarField,
                           kernel_spinor: SpinorField | None = None
                           ) -> ProductZeroModes:
    """Build the closed-form modes for a full deformation function.

    The function is decomposed into average plus profile first; a nonzero
    average or a profile living off the distinguished circle is refused,
    since the construction requires f = tau * h(r) on the last circle.
    """
    spec = decompose_deformation(f)
    scale = max(float(np.max(np.abs(f.values))), 1.0)
    if abs(spec.mu) > 1e-12 * scale:
        raise ValidationError(
            f"average value {spec.mu:g} must vanish: the envelope solutions "
            "for a nonzero average are not periodic, hence not genuine modes")
    if spec.is_constant:
        raise ValidationError("deformation is identically zero")
    if spec.axis != geom.dim - 1:
        raise ValidationError(
            "profile must depend only on the distinguished last circle")
    return build_product_zero_modes(geom, gammas, spec.h, spec.tau,
                                    kernel_spinor=kernel_spinor)


# -- zero mode verification -----------------------------------------------------

@dataclass(frozen=True)
class ZeroModeTolerances:
    """Acceptance thresholds, calibrated for 32x32 double-precision runs."""

    residual: float = 1e-7
    pairing: float = 1e-8
    norm_identity: float = 1e-8
    divergence: float = 1e-8


@dataclass(eq=False)
class ZeroModeReport:
    """Kernel diagnostics for a candidate mode, unit-normalized internally."""

    residual: float
    pairing_f: float
    pairing_dirac: float
    norm_identity_gap: float
    divergence_gap: float
    flux_plus: float
    flux_minus: float
    tolerances: ZeroModeTolerances
    verified: bool

    def to_dict(self) -> dict:
        payload = self.__dict__.copy()
        payload["tolerances"] = self.tolerances.__dict__.copy()
        return payload


def current_components(gammas: GammaSet, phi: SpinorField) -> list[ScalarField]:
    """The real vector field J with components <phi, gamma_a phi> per point."""
    geom = phi.geometry
    out = []
    for axis in range(geom.dim):
        rotated = gamma_action(gammas, phi, axis)
        j = np.sum(np.conjugate(phi.values) * rotated.values, axis=-1)
        out.append(ScalarField(geom, j.real))
    return out


def verify_zero_mode(geom: TorusGeometry, gammas: GammaSet, f: ScalarField,
                     phi: SpinorField,
                     tolerances: ZeroModeTolerances | None = None
                     ) -> ZeroModeReport:
    """Evaluate every kernel identity for a candidate zero mode.

    The candidate is normalized to unit L2 norm first, so all reported
    gaps are scale free: the Hamiltonian residual, the two vanishing
    pairings with f and with the Dirac operator, the norm identity
    ||D phi||^2 = ||f phi||^2, and the pointwise divergence relation
    f |phi|^2 = -(1/2) div J.
    """
    tolerances = tolerances or ZeroModeTolerances()
    phi_norm = norm(phi)
    if phi_norm == 0.0:
        raise ValidationError("candidate mode is zero")
    phi = SpinorField(geom, phi.values / phi_norm)
    ham = hamiltonian(geom, gammas, f)
    dirac = dirac_operator(geom, gammas)
    residual = norm(ham.apply(phi))
    pairing_f = abs(inner_product(phi, SpinorField(
        geom, f.values[..., None] * phi.values)))
    pairing_dirac = abs(inner_product(phi, dirac.apply(phi)))
    d_phi = dirac.apply(phi)
    f_phi = SpinorField(geom, f.values[..., None] * phi.values)
    norm_gap = abs(inner_product(d_phi, d_phi).real
                   - inner_product(f_phi, f_phi).real)
    current = current_components(gammas, phi)
    divergence = np.zeros(geom.grid)
    for axis in range(geom.dim):
        divergence = divergence + spectral_derivative(current[axis], axis).values
    density = np.sum(np.abs(phi.values) ** 2, axis=-1)
    divergence_gap = float(np.max(np.abs(f.values * density + 0.5 * divergence)))
    flux_plus, flux_minus = _region_integrals(geom, f, density)
    verified = (residual <= tolerances.residual
                and pairing_f <= tolerances.pairing
                and pairing_dirac <= tolerances.pairing
                and norm_gap <= tolerances.norm_identity
                and divergence_gap <= tolerances.divergence)
    return ZeroModeReport(residual=residual, pairing_f=pairing_f,
                          pairing_dirac=pairing_dirac,
                          norm_identity_gap=norm_gap,
                          divergence_gap=divergence_gap,
                          flux_plus=flux_plus, flux_minus=flux_minus,
                          tolerances=tolerances, verified=bool(verified))


def _region_integrals(geom: TorusGeometry, f: ScalarField,
                      density: np.ndarray) -> tuple[float, float]:
    plus_mask = f.values >= NODAL_CUTOFF
    minus_mask = f.values <= -NODAL_CUTOFF
    integrand = f.values * density
    i_plus = float(geom.weight * np.sum(integrand[plus_mask]))
    i_minus = float(geom.weight * np.sum(integrand[minus_mask]))
    return i_plus, i_minus


@dataclass(eq=False)
class NodalFluxReport:
    """Signed bulk integrals of f |phi|^2 over the nodal regions."""

    flux_plus: float
    flux_minus: float
    balance_gap: float
    gamma_flip_consistent: bool

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def nodal_flux(geom: TorusGeometry, gammas: GammaSet, f: ScalarField,
               phi: SpinorField) -> NodalFluxReport:
    """Flux balance across the nodal set of f for a verified zero mode.

    The two bulk integrals must cancel; the relative residual of the
    cancellation is the balance gap.  The report also records whether the
    fluxes of the chirality-reflected mode under f -> -f come out with
    swapped signs, as the current reversal demands.
    """
    if not f.is_real:
        raise ValidationError("deformation function must be real valued")
    if float(np.min(f.values)) > -NODAL_CUTOFF \
            or float(np.max(f.values)) < NODAL_CUTOFF:
        raise ValidationError("no nodal set: f does not change sign")
    density = np.sum(np.abs(phi.values) ** 2, axis=-1)
    i_plus, i_minus = _region_integrals(geom, f, density)
    scale = abs(i_plus) + abs(i_minus)
    balance_gap = abs(i_plus + i_minus) / scale if scale > 0 else 0.0
    flipped = gamma_action(gammas, phi)
    flipped_density = np.sum(np.abs(flipped.values) ** 2, axis=-1)
    neg_f = ScalarField(geom, -np.asarray(f.values))
    j_plus, j_minus = _region_integrals(geom, neg_f, flipped_density)
    tol = 1e-12 * max(scale, 1e-300)
    consistent = (abs(j_plus + i_minus) <= tol
                  and abs(j_minus + i_plus) <= tol)
    return NodalFluxReport(flux_plus=i_plus, flux_minus=i_minus,
                           balance_gap=balance_gap,
                           gamma_flip_consistent=bool(consistent))


# -- checker versus spectrum ----------------------------------------------------

@dataclass(eq=False)
class PositivitySpectrumReport:
    """Checker outcomes next to the computed bottom of the spectrum."""

    uniform: PositivityReport
    sign: PositivityReport
    lambda_min: float
    zero_threshold: float
    checker_passed: bool
    implication_holds: bool
    note: str

    def to_dict(self) -> dict:
        return {"uniform": self.uniform.to_dict(),
                "sign": self.sign.to_dict(),
                "lambda_min": self.lambda_min,
                "zero_threshold": self.zero_threshold,
                "checker_passed": self.checker_passed,
                "implication_holds": self.implication_holds,
                "note": self.note}


def positivity_vs_spectrum(geom: TorusGeometry, gammas: GammaSet,
                           f: ScalarField, k: int = 4, tol: float = 1e-10,
                           seed: int = DEFAULT_SEED) -> PositivitySpectrumReport:
    """Run both checkers and confront them with the bottom eigenvalue.

    A passing checker must come with a strictly positive bottom eigenvalue.
    The converse is not asserted: the conditions are sufficient only, so a
    failing checker with a positive spectrum is recorded as such.
    """
    uniform = check_uniform_condition(f)
    sign = check_sign_definite(f)
    ham = hamiltonian(geom, gammas, f)
    spectrum = smallest_eigenpairs(ham, k=k, tol=tol, seed=seed)
    lambda_min = float(spectrum.eigenvalues[0])
    lambda_next = float(spectrum.eigenvalues[1]) if k > 1 else 0.0
    threshold = max(1e-9, 1e-6 * lambda_next)
    checker_passed = uniform.holds or sign.holds
    zero_count = count_zero_modes(spectrum.eigenvalues)
    implication = (not checker_passed) or (lambda_min > threshold
                                           and zero_count == 0)
    if checker_passed:
        note = "checker passed; spectrum bottom is positive" if implication \
            else "INCONSISTENT: checker passed but near-zero eigenvalue found"
    elif lambda_min > threshold:
        note = "sufficient-only: checkers failed yet the spectrum stays positive"
    else:
        note = "checkers failed and the spectrum reaches zero"
    return PositivitySpectrumReport(uniform=uniform, sign=sign,
                                    lambda_min=lambda_min,
                                    zero_threshold=threshold,
                                    checker_passed=checker_passed,
                                    implication_holds=bool(implication),
                                    note=note)
