"""Numerical laboratory for deformed Dirac operators on flat tori.

The deformation D + i f of the Dirac operator by a real function f gives
a nonnegative Hamiltonian (D + i f)* (D + i f).  This package discretizes
both on products of circles with pseudospectral accuracy, checks the
sufficient positivity criteria for the deformation, constructs the
explicit kernel modes that exist for sign-changing circle profiles, and
exposes spectra, heat traces, and index identities through a config
driven command line.
"""

__version__ = "0.1.0"

from .analysis import (NodalFluxReport, PositivityReport, ZeroModeReport,
                       ZeroModeTolerances, build_product_zero_modes,
                       check_sign_definite, check_uniform_condition,
                       nodal_flux, positivity_vs_spectrum,
                       product_zero_modes_for, verify_zero_mode)
from .clifford import (GammaSet, build_gamma_set, chiral_projectors,
                       majorana_transform)
from .config import (ConfigError, DeformationConfig, ExperimentConfig,
                     GeometryConfig, TaskConfig, build_deformation_field,
                     load_config, normalized_circle_profile,
                     parse_config_dict)
from .geometry import (ANTIPERIODIC, PERIODIC, DeformationSpec, ScalarField,
                       SpinorField, TorusGeometry, ValidationError,
                       antiderivative_on_circle, constant_scalar,
                       constant_spinor, decompose_deformation,
                       inner_product, load_field, make_torus, norm,
                       random_spinor, save_field, scalar_from_function,
                       spectral_derivative)
from .operators import (ChiralBlocks, OperatorHandle, PotentialMatrixField,
                        SuperchargeBlocks, chiral_blocks, deformed_dirac,
                        dirac_operator, gamma_action, hamiltonian,
                        potential_matrix, supercharge_blocks)
from .presets import list_presets, preset_config_dict
from .runner import RunManifest, run
from .spectral import (HeatTraceCurve, IndexReport, SpectrumResult,
                       action_functional, count_zero_modes, dense_spectrum,
                       heat_traces, index_checks, smallest_eigenpairs)
