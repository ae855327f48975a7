"""Built-in experiment presets covering the standard verification runs."""
from __future__ import annotations

from .config import ConfigError

_PRESETS: dict[str, tuple[str, dict]] = {
    "free_torus_spectrum": (
        "undeformed unit torus, 16x16: ten smallest eigenvalues 0,0,1,...,1",
        {
            "name": "free_torus_spectrum",
            "geometry": {"dim": 2, "radii": [1.0, 1.0], "grid": [16, 16],
                         "spin_structure": ["periodic", "periodic"]},
            "deformation": {"kind": "constant", "mu": 0.0},
            "tasks": [{"type": "spectrum", "k": 10, "tol": 1e-10}],
            "output_dir": "results/free_torus_spectrum",
        },
    ),
    "constant_shift": (
        "constant deformation mu=2: spectrum shifted by 4, heat trace scaled",
        {
            "name": "constant_shift",
            "geometry": {"dim": 2, "radii": [1.0, 1.0], "grid": [16, 16],
                         "spin_structure": ["periodic", "periodic"]},
            "deformation": {"kind": "constant", "mu": 2.0},
            "tasks": [{"type": "spectrum", "k": 10, "tol": 1e-10},
                      {"type": "heat_trace", "t_grid": [0.5, 1.0, 2.0]}],
            "output_dir": "results/constant_shift",
        },
    ),
    "counterexample_T2": (
        "cosine circle profile, tau=1, 32x32: two-dimensional kernel with "
        "closed-form modes and nodal flux",
        {
            "name": "counterexample_T2",
            "geometry": {"dim": 2, "radii": [1.0, 1.0], "grid": [32, 32],
                         "spin_structure": ["periodic", "periodic"]},
            "deformation": {"kind": "circle_profile", "profile": "cos",
                            "tau": 1.0, "mu": 0.0},
            "tasks": [{"type": "spectrum", "k": 6, "tol": 1e-9},
                      {"type": "zero_mode"},
                      {"type": "flux"}],
            "output_dir": "results/counterexample_T2",
        },
    ),
    "sine_deformation": (
        "product-sine deformation on an 8x8 torus, iterative spectrum "
        "cross-checked against the dense solver",
        {
            "name": "sine_deformation",
            "geometry": {"dim": 2, "radii": [1.0, 1.0], "grid": [8, 8],
                         "spin_structure": ["periodic", "periodic"]},
            "deformation": {"kind": "torus_sine", "tau": 1.0},
            "tasks": [{"type": "spectrum", "k": 12, "tol": 1e-9,
                       "compare_dense": True}],
            "output_dir": "results/sine_deformation",
        },
    ),
    "positivity_sweep": (
        "tau ramp under fixed mu=1: checker margins versus the bottom "
        "eigenvalue",
        {
            "name": "positivity_sweep",
            "geometry": {"dim": 2, "radii": [1.0, 1.0], "grid": [16, 16],
                         "spin_structure": ["periodic", "periodic"]},
            "deformation": {"kind": "circle_profile", "profile": "cos",
                            "tau": 0.5, "mu": 1.0},
            "tasks": [{"type": "positivity_sweep",
                       "tau_values": [0.0, 0.25, 0.5, 1.0, 2.0, 4.0]}],
            "output_dir": "results/positivity_sweep",
        },
    ),
    "index_identities": (
        "cosine profile, tau=1: sign-flip spectrum symmetry and vanishing "
        "Dirac-weighted trace",
        {
            "name": "index_identities",
            "geometry": {"dim": 2, "radii": [1.0, 1.0], "grid": [16, 16],
                         "spin_structure": ["periodic", "periodic"]},
            "deformation": {"kind": "circle_profile", "profile": "cos",
                            "tau": 1.0, "mu": 0.0},
            "tasks": [{"type": "index_check", "t": 1.0, "tol": 1e-8}],
            "output_dir": "results/index_identities",
        },
    ),
}


def list_presets() -> list[tuple[str, str]]:
    """Names and one-line descriptions of the built-in experiments."""
    return [(name, entry[0]) for name, entry in sorted(_PRESETS.items())]


def preset_config_dict(name: str) -> dict:
    if name not in _PRESETS:
        raise ConfigError(f"unknown preset {name!r}; "
                          f"available: {sorted(_PRESETS)}")
    return _PRESETS[name][1]
