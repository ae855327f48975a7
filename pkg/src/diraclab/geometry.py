"""Flat torus geometries and Fourier spectral calculus for fields.

The manifolds handled here are products of circles with radii a_i, so the
metric is flat, the spin connection vanishes identically, and the scalar
curvature is zero.  Coordinates along each circle are angles in [0, 2*pi);
physical (arc-length) derivatives carry a 1/a_i frame factor so that
wavenumbers come out in physical units.

All fields are sampled on a uniform grid, stored row-major with axis 0
slowest.  Derivatives are exact for band-limited data: they act in
wavenumber space while products act pointwise on the grid.  Fields are
immutable after construction (their sample arrays are marked read-only)
and every operation here is a pure function, so concurrent use is safe.
Reductions sum in flat C order, which makes results reproducible
bit-for-bit for fixed inputs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

PERIODIC = "periodic"
ANTIPERIODIC = "antiperiodic"

#: Relative tolerance used when validating that a profile is constant
#: along an axis or has zero average.
PROFILE_TOL = 1e-12


class ValidationError(ValueError):
    """Raised when geometry or field construction inputs are invalid."""


@dataclass(frozen=True)
class TorusGeometry:
    """A flat product of circles: dimension, radii, grid sizes, spin structure.

    ``spin_structure`` holds one flag per circle: "periodic" spinor sections
    have integer wavenumbers n/a_i, "antiperiodic" ones half-integer
    wavenumbers (n + 1/2)/a_i.  Scalar functions on the torus are always
    periodic regardless of the spin structure.
    """

    dim: int
    radii: tuple[float, ...]
    grid: tuple[int, ...]
    spin_structure: tuple[str, ...]

    @property
    def npoints(self) -> int:
        return int(np.prod(self.grid))

    @property
    def volume(self) -> float:
        return float(np.prod([2.0 * np.pi * a for a in self.radii]))

    @property
    def weight(self) -> float:
        """Quadrature weight per grid point (volume / number of points)."""
        return self.volume / self.npoints

    @property
    def spinor_dim(self) -> int:
        return 2 ** (self.dim // 2)

    def angles(self, axis: int) -> np.ndarray:
        """Angle samples on one circle, in [0, 2*pi)."""
        n = self.grid[axis]
        return 2.0 * np.pi * np.arange(n) / n

    def coordinates(self, axis: int) -> np.ndarray:
        """Arc-length samples x = a * angle on one circle."""
        return self.radii[axis] * self.angles(axis)

    def coordinate_mesh(self) -> list[np.ndarray]:
        """Full arc-length meshgrid (ij indexing), one array per axis."""
        return list(np.meshgrid(*(self.coordinates(a) for a in range(self.dim)),
                                indexing="ij"))

    def scalar_wavenumbers(self, axis: int) -> np.ndarray:
        """Physical wavenumbers n/a for periodic (scalar) functions."""
        n = self.grid[axis]
        return np.fft.fftfreq(n, d=1.0 / n) / self.radii[axis]

    def spinor_wavenumbers(self, axis: int) -> np.ndarray:
        """Physical wavenumbers for spinor sections along one axis.

        Integer multiples of 1/a on periodic circles, shifted by 1/(2a)
        on antiperiodic ones.
        """
        n = self.grid[axis]
        shift = 0.5 if self.spin_structure[axis] == ANTIPERIODIC else 0.0
        return (np.fft.fftfreq(n, d=1.0 / n) + shift) / self.radii[axis]


def make_torus(dim: int,
               radii: Sequence[float],
               grid: Sequence[int],
               spin_structure: Sequence[str] | None = None) -> TorusGeometry:
    """Build a flat torus geometry with validated inputs.

    Defaults to the periodic spin structure on every circle, which admits
    constant spinors in the kernel of the Dirac operator.
    """
    if dim % 2 != 0 or dim < 2:
        raise ValidationError("even dimension required")
    if spin_structure is None:
        spin_structure = [PERIODIC] * dim
    if not (len(radii) == len(grid) == len(spin_structure) == dim):
        raise ValidationError(
            f"radii, grid and spin_structure must each have length {dim}")
    radii = tuple(float(a) for a in radii)
    grid = tuple(int(n) for n in grid)
    spin = tuple(str(s) for s in spin_structure)
    if any(a <= 0 for a in radii):
        raise ValidationError("circle radii must be positive")
    if any(n < 4 for n in grid):
        raise ValidationError("at least 4 grid points per circle required")
    for s in spin:
        if s not in (PERIODIC, ANTIPERIODIC):
            raise ValidationError(f"unknown spin structure {s!r}")
    return TorusGeometry(dim, radii, grid, spin)


def _freeze(values: np.ndarray) -> np.ndarray:
    values = np.ascontiguousarray(values)
    values.flags.writeable = False
    return values


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A scalar function sampled on the torus grid (real or complex)."""

    geometry: TorusGeometry
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != self.geometry.grid:
            raise ValidationError(
                f"scalar samples must have shape {self.geometry.grid}, "
                f"got {values.shape}")
        if values.dtype not in (np.float64, np.complex128):
            values = values.astype(np.complex128 if np.iscomplexobj(values)
                                   else np.float64)
        object.__setattr__(self, "values", _freeze(values))

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)


@dataclass(frozen=True, eq=False)
class SpinorField:
    """A multi-component complex field: one spinor per grid point.

    Full spinors carry 2**(dim/2) components; the chiral-block machinery
    also uses half fields with 2**(dim/2 - 1) components and doubled
    fields with 2**(dim/2 + 1).  The component axis is last.
    """

    geometry: TorusGeometry
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.ndim != self.geometry.dim + 1 \
                or values.shape[:-1] != self.geometry.grid:
            raise ValidationError(
                f"spinor samples must have shape {self.geometry.grid} + "
                f"(components,), got {values.shape}")
        object.__setattr__(self, "values", _freeze(values))

    @property
    def ncomp(self) -> int:
        return self.values.shape[-1]


Field = ScalarField | SpinorField


def scalar_from_function(geom: TorusGeometry,
                         fn: Callable[..., np.ndarray]) -> ScalarField:
    """Sample ``fn(x_1, ..., x_n)`` of the arc-length coordinates."""
    mesh = geom.coordinate_mesh()
    values = np.broadcast_to(fn(*mesh), geom.grid)
    return ScalarField(geom, np.array(values))


def constant_scalar(geom: TorusGeometry, value: float) -> ScalarField:
    return ScalarField(geom, np.full(geom.grid, float(value)))


def constant_spinor(geom: TorusGeometry, components: Sequence[complex]) -> SpinorField:
    comp = np.asarray(components, dtype=np.complex128)
    values = np.broadcast_to(comp, geom.grid + (comp.size,))
    return SpinorField(geom, np.array(values))


def random_spinor(geom: TorusGeometry, ncomp: int | None = None,
                  seed: int = 0, max_mode: int | None = None) -> SpinorField:
    """Deterministic pseudorandom spinor field (unit-variance entries).

    With ``max_mode`` the field is restricted to Fourier modes of index at
    most max_mode on every axis.  Identities that hold up to aliasing only
    (anything mixing products with derivatives) are exact on such fields
    as long as max_mode stays safely below the Nyquist index.
    """
    rng = np.random.default_rng(seed)
    shape = geom.grid + (ncomp or geom.spinor_dim,)
    values = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    if max_mode is not None:
        hat = np.fft.fftn(values, axes=tuple(range(geom.dim)))
        for axis in range(geom.dim):
            n = geom.grid[axis]
            modes = np.fft.fftfreq(n, d=1.0 / n)
            keep = np.abs(modes) <= max_mode
            sl = [None] * (geom.dim + 1)
            sl[axis] = slice(None)
            hat = hat * keep[tuple(sl)]
        values = np.fft.ifftn(hat, axes=tuple(range(geom.dim)))
    return SpinorField(geom, values)


# -- spectral calculus -------------------------------------------------------

def _derivative_values(values: np.ndarray, axis: int,
                       wavenumbers: np.ndarray) -> np.ndarray:
    shape = [1] * values.ndim
    shape[axis] = wavenumbers.size
    k = wavenumbers.reshape(shape)
    hat = np.fft.fft(values, axis=axis)
    return np.fft.ifft(1j * k * hat, axis=axis)


def spectral_derivative(field: Field, axis: int) -> Field:
    """Exact physical derivative of the trigonometric interpolant.

    The result is the frame (arc-length) derivative along the given circle,
    i.e. (1/a) d/d(angle).  Spinor fields on antiperiodic circles are
    differentiated in the half-integer Fourier basis via a phase twist.
    """
    geom = field.geometry
    if not 0 <= axis < geom.dim:
        raise ValidationError(f"axis {axis} out of range for dim {geom.dim}")
    if isinstance(field, ScalarField):
        out = _derivative_values(field.values, axis,
                                 geom.scalar_wavenumbers(axis))
        if field.is_real:
            out = out.real
        return ScalarField(geom, out)
    values = field.values
    if geom.spin_structure[axis] == ANTIPERIODIC:
        # Antiperiodic sections equal exp(i*angle/2) times a periodic field;
        # untwist, differentiate with shifted wavenumbers, retwist.
        theta = geom.angles(axis)
        shape = [1] * values.ndim
        shape[axis] = theta.size
        twist = np.exp(0.5j * theta).reshape(shape)
        out = twist * _derivative_values(values / twist, axis,
                                         geom.spinor_wavenumbers(axis))
    else:
        out = _derivative_values(values, axis,
                                 geom.spinor_wavenumbers(axis))
    return SpinorField(geom, out)


def inner_product(a: Field, b: Field) -> complex:
    """L2 inner product, conjugate-linear in the first argument.

    Quadrature uses the uniform weight volume/npoints, which is exact for
    trigonometric polynomials below the Nyquist limit.  Summation runs in
    flat C order.
    """
    if a.geometry != b.geometry:
        raise ValidationError("fields live on different geometries")
    if type(a) is not type(b) or a.values.shape != b.values.shape:
        raise ValidationError("fields have mismatched shapes")
    return a.geometry.weight * complex(np.sum(np.conjugate(a.values) * b.values))


def norm(field: Field) -> float:
    return float(np.sqrt(max(inner_product(field, field).real, 0.0)))


def scale(field: SpinorField, factor: complex) -> SpinorField:
    return SpinorField(field.geometry, field.values * factor)


# -- deformation functions ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class DeformationSpec:
    """Decomposition f = mu + tau*h with h of zero average and unit L2 norm.

    ``omega`` is the arc-length antiderivative of h along ``axis`` and is
    present only when h depends on a single circle coordinate.  The
    normalization convention is ||h||_{L2(M)} = 1 over the whole torus.
    """

    mu: float
    tau: float
    h: ScalarField
    omega: ScalarField | None = None
    axis: int | None = None
    is_constant: bool = False

    def reconstruct(self) -> ScalarField:
        return ScalarField(self.h.geometry,
                           self.mu + self.tau * self.h.values)


def _single_axis_of(values: np.ndarray, geom: TorusGeometry) -> int | None:
    """Index of the unique axis the samples depend on, or None."""
    scale_ = max(float(np.max(np.abs(values))), 1.0)
    candidates = []
    for axis in range(geom.dim):
        index = tuple(slice(None) if a == axis else slice(0, 1)
                      for a in range(geom.dim))
        profile = values[index]
        if np.max(np.abs(values - profile)) <= PROFILE_TOL * scale_:
            candidates.append(axis)
    if len(candidates) == 1:
        return candidates[0]
    return None


def decompose_deformation(f: ScalarField) -> DeformationSpec:
    """Split a real function into average mu plus tau times a unit profile."""
    if not f.is_real:
        raise ValidationError("deformation function must be real valued")
    geom = f.geometry
    mu = float(np.mean(f.values))
    centered = f.values - mu
    tau = float(np.sqrt(geom.weight * np.sum(centered ** 2)))
    if tau <= PROFILE_TOL * max(1.0, abs(mu)):
        h = ScalarField(geom, np.zeros(geom.grid))
        return DeformationSpec(mu=mu, tau=0.0, h=h, is_constant=True)
    h = ScalarField(geom, centered / tau)
    axis = _single_axis_of(h.values, geom)
    omega = antiderivative_on_circle(h, axis) if axis is not None else None
    return DeformationSpec(mu=mu, tau=tau, h=h, omega=omega, axis=axis)


def antiderivative_on_circle(h: ScalarField, axis: int) -> ScalarField:
    """Arc-length antiderivative of a single-circle profile, zero at r = 0.

    Requires h to depend only on the named axis and to have zero average
    along it; otherwise no periodic antiderivative exists.
    """
    geom = h.geometry
    if not h.is_real:
        raise ValidationError("profile must be real valued")
    if not 0 <= axis < geom.dim:
        raise ValidationError(f"axis {axis} out of range for dim {geom.dim}")
    scale_ = max(float(np.max(np.abs(h.values))), 1.0)
    index = tuple(slice(None) if a == axis else slice(0, 1)
                  for a in range(geom.dim))
    profile = h.values[index]
    if np.max(np.abs(h.values - profile)) > PROFILE_TOL * scale_:
        raise ValidationError("profile varies along other axes")
    line = np.moveaxis(profile, axis, -1).reshape(-1)[:geom.grid[axis]]
    if abs(np.mean(line)) > PROFILE_TOL * scale_:
        raise ValidationError("not integrable to a periodic function")
    n = geom.grid[axis]
    modes = np.fft.fftfreq(n, d=1.0 / n)  # integer mode numbers
    hat = np.fft.fft(line) / n
    omega_hat = np.zeros_like(hat)
    nonzero = modes != 0
    # d/dx = (1/a) d/dangle, so integrating in arc length scales by the radius
    omega_hat[nonzero] = geom.radii[axis] * hat[nonzero] / (1j * modes[nonzero])
    omega_hat[0] = -np.sum(omega_hat[nonzero])
    omega_line = np.fft.ifft(omega_hat * n).real
    shape = [1] * geom.dim
    shape[axis] = n
    omega = np.broadcast_to(omega_line.reshape(shape), geom.grid)
    return ScalarField(geom, np.array(omega))


# -- serialization -----------------------------------------------------------

def field_to_dict(field: Field) -> dict:
    """Self-describing container with geometry metadata and raw samples."""
    geom = field.geometry
    payload = {
        "kind": "scalar" if isinstance(field, ScalarField) else "spinor",
        "dim": geom.dim,
        "radii": list(geom.radii),
        "grid": list(geom.grid),
        "spin_structure": list(geom.spin_structure),
        "order": "row-major, axis 0 slowest, components fastest",
    }
    values = field.values
    if isinstance(field, ScalarField) and field.is_real:
        payload["dtype"] = "real"
        payload["samples"] = values.ravel().tolist()
    else:
        payload["dtype"] = "complex"
        flat = values.ravel()
        payload["samples"] = np.column_stack([flat.real, flat.imag]).tolist()
    if isinstance(field, SpinorField):
        payload["components"] = field.ncomp
    return payload


def field_from_dict(payload: dict) -> Field:
    geom = make_torus(payload["dim"], payload["radii"], payload["grid"],
                      payload["spin_structure"])
    samples = np.asarray(payload["samples"])
    if payload["dtype"] == "complex":
        samples = samples[:, 0] + 1j * samples[:, 1]
    if payload["kind"] == "scalar":
        return ScalarField(geom, samples.reshape(geom.grid))
    ncomp = payload["components"]
    return SpinorField(geom, samples.reshape(geom.grid + (ncomp,)))


def save_field(field: Field, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(field_to_dict(field), fh)


def load_field(path) -> Field:
    with open(path, encoding="utf-8") as fh:
        return field_from_dict(json.load(fh))
