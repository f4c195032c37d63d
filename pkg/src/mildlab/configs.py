"""Shipped experiment configurations.

These are the configurations exercised by the test suite's invariant and
acceptance harnesses and double as starting points for custom experiments.
Sweeps are thinned geometric ladders so a full run stays interactive.
"""

from __future__ import annotations

THINNED_KAPPA_SWEEP = [float(2 ** k) for k in range(0, 15, 2)]
THINNED_EPSILON_SWEEP = [float(2.0 ** (-k)) for k in range(0, 8)]

# a three-state exchange chain used by the custom-matrix smoke config
_SMOKE_MATRIX = [
    [-1.0, 1.0, 0.0],
    [0.5, -1.5, 1.0],
    [0.0, 2.0, -2.0],
]


def shipped_configs() -> dict:
    """Name -> config dict; every entry is a valid experiment."""
    return {
        "keener-default": {
            "model": "keener",
            "solver": "picard",
            "tau": 1.0,
            "M": 512,
            "seed": 1,
            "sweep": list(THINNED_KAPPA_SWEEP),
            "initial": {"preset": "bump-in-fast-component",
                        "baseline": 0.1, "amplitude": 0.25},
            "model_params": {"N": 64, "d_a": 1e-3, "clip": 2.0},
        },
        "keener-regular": {
            "model": "keener",
            "solver": "picard",
            "tau": 1.0,
            "M": 512,
            "seed": 1,
            "sweep": list(THINNED_KAPPA_SWEEP),
            "initial": {"preset": "flat", "baseline": 0.1},
            "model_params": {"N": 64, "d_a": 1e-3, "clip": 2.0},
        },
        "mck-default": {
            "model": "mck",
            "solver": "picard",
            "tau": 1.0,
            "M": 512,
            "seed": 2,
            "sweep": list(THINNED_KAPPA_SWEEP),
            "initial": {"preset": "bump-in-fast-component",
                        "baseline": 0.5, "amplitude": 0.25},
            "model_params": {"N": 48},
        },
        "thin-layer-default": {
            "model": "thin_layer",
            "solver": "picard",
            "tau": 1.0,
            "M": 512,
            "seed": 3,
            "sweep": list(THINNED_EPSILON_SWEEP),
            "initial": {"preset": "bump-in-fast-component",
                        "baseline": 0.5, "amplitude": 0.5},
            "model_params": {"Nx": 16, "Nz": 12, "c": 0.6, "d": 0.4,
                             "reaction": "logistic", "reaction_rate": 0.5},
        },
        "neuro-default": {
            "model": "neuro",
            "solver": "picard",
            "tau": 1.0,
            "M": 512,
            "seed": 4,
            "sweep": list(THINNED_KAPPA_SWEEP),
            "initial": {"preset": "pool-step", "u3": 0.2},
            "model_params": {"N": 120, "a": 0.2, "b": 0.5, "u_sharp": 1.0,
                             "beta": 2.0},
        },
        "custom-matrix-smoke": {
            "model": "custom_matrix",
            "solver": "expeuler",
            "tau": 1.0,
            "M": 256,
            "seed": 5,
            "sweep": list(THINNED_KAPPA_SWEEP),
            "initial": {"values": [1.0, 0.0, -1.0]},
            "model_params": {"matrix": [row[:] for row in _SMOKE_MATRIX]},
        },
    }
