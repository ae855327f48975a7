import numpy as np
import pytest

from diraclab import (ScalarField, build_gamma_set, make_torus, norm,
                      scalar_from_function)


@pytest.fixture(scope="session")
def gamma2():
    return build_gamma_set(2)


@pytest.fixture(scope="session")
def torus16():
    return make_torus(2, [1.0, 1.0], [16, 16])


@pytest.fixture(scope="session")
def torus8():
    return make_torus(2, [1.0, 1.0], [8, 8])


def normalized_profile(geom, fn):
    """Scale a sampled function to unit L2 norm over the torus."""
    raw = scalar_from_function(geom, fn)
    return ScalarField(geom, raw.values / norm(raw))


def positivity_catalog(geom):
    """Deformations for which at least one sufficient checker passes."""
    h_cos = normalized_profile(geom, lambda x, y: np.cos(y))
    h_sin = normalized_profile(geom, lambda x, y: np.sin(y))
    h_sin2 = normalized_profile(geom, lambda x, y: np.sin(2 * y))
    entries = [
        ("constant_one", scalar_from_function(geom, lambda x, y: 1.0 + 0 * x)),
        ("constant_minus_two",
         scalar_from_function(geom, lambda x, y: -2.0 + 0 * x)),
        ("mu1_small_cos", ScalarField(geom, 1.0 + 0.05 * h_cos.values)),
        ("mu1_sin", ScalarField(geom, 1.0 + 0.2 * h_sin.values)),
        ("neg_mu_cos", ScalarField(geom, -1.0 + 0.15 * h_cos.values)),
        ("mu2_sin2", ScalarField(geom, 2.0 + 0.5 * h_sin2.values)),
        ("checker_example",
         scalar_from_function(geom, lambda x, y: 1 + 0.2 * np.sin(x) * np.sin(y))),
        ("one_plus_cos_x",
         scalar_from_function(geom, lambda x, y: 1 + 0.3 * np.cos(x))),
        ("neg_with_cos_y",
         scalar_from_function(geom, lambda x, y: -1.5 + 0.4 * np.cos(y))),
        ("mixed_harmonics",
         scalar_from_function(geom,
                              lambda x, y: 1 + 0.25 * (np.sin(x) + np.cos(y)) / 2)),
    ]
    return entries
