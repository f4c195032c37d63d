"""Discretised model families parameterised by a singular-perturbation parameter.

Each builder returns a :class:`ModelPair`: a family of generators indexed by
the perturbation parameter, a shared reaction term, and the limit system
(generator on the full space, projection onto the regularity space, projected
reaction).  The convergence lab consumes pairs without knowing which model
they came from.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..operators import Generator, Projection, StateVector
from ..solver import Nonlinearity

PARAM_KAPPA = "kappa"    # parameter grows without bound
PARAM_EPSILON = "epsilon"  # parameter shrinks to zero

DEFAULT_KAPPA_SWEEP = tuple(float(2 ** k) for k in range(15))
DEFAULT_EPSILON_SWEEP = tuple(float(2.0 ** (-k)) for k in range(8))


@dataclass(frozen=True, eq=False)
class ModelPair:
    """A perturbed family together with its limit system.

    ``family(p)`` builds the full generator at parameter ``p``; the reaction
    term does not depend on ``p``.  The limit system lives on the same space:
    its generator commutes with the projection and its reaction is the
    projected one, so trajectories started on the regularity space stay there.
    """

    name: str
    param_kind: str
    sweep: tuple
    family: Callable[[float], Generator]
    nonlinearity: Nonlinearity
    limit_generator: Generator
    projection: Projection
    limit_nonlinearity: Nonlinearity
    norm_kind: str
    weights: Optional[np.ndarray] = None
    state_box: Optional[tuple] = None

    def __post_init__(self):
        if self.param_kind not in (PARAM_KAPPA, PARAM_EPSILON):
            raise ValueError(f"unknown parameter kind {self.param_kind!r}")
        if len(self.sweep) == 0:
            raise ValueError("sweep must be nonempty")
        p_lim = self.limit_generator.matrix @ self.projection.matrix
        lim_p = self.projection.matrix @ self.limit_generator.matrix
        if np.max(np.abs(p_lim - lim_p)) > 1e-8:
            raise ValueError("limit generator does not commute with the projection")

    @property
    def dim(self) -> int:
        return self.limit_generator.dim

    def state(self, values) -> StateVector:
        return StateVector(np.asarray(values, dtype=float), self.norm_kind, self.weights)

    def project(self, x: StateVector) -> StateVector:
        return x.with_values(self.projection.apply(x.values))

    def in_regularity_space(self, x: StateVector, tol: float = 1e-9) -> bool:
        gap = self.project(x).values - x.values
        scale = max(1.0, x.norm())
        return StateVector(gap, self.norm_kind, self.weights).norm() <= tol * scale


from .keener import build_keener, cubic_activator_inhibitor, keener_initial  # noqa: E402
from .mck import MckParams, build_mck, mck_initial  # noqa: E402
from .thin_layer import (  # noqa: E402
    FormCheckReport,
    build_thin_layer,
    build_thin_layer_pair,
    form_monotonicity_check,
    quadratic_form,
    thin_layer_initial,
    thin_layer_limit,
    thin_layer_limit_1d,
)
from .neuro import (  # noqa: E402
    PoolGeometry,
    beta_on_resting_pool,
    build_Q,
    build_neuro,
    neuro_initial,
    pool_average_matrix,
    pool_indicator_matrix,
)
from .custom import build_custom_matrix  # noqa: E402

__all__ = [
    "DEFAULT_EPSILON_SWEEP",
    "DEFAULT_KAPPA_SWEEP",
    "FormCheckReport",
    "MckParams",
    "ModelPair",
    "PARAM_EPSILON",
    "PARAM_KAPPA",
    "PoolGeometry",
    "beta_on_resting_pool",
    "build_Q",
    "build_custom_matrix",
    "build_keener",
    "build_mck",
    "build_neuro",
    "build_thin_layer",
    "build_thin_layer_pair",
    "cubic_activator_inhibitor",
    "form_monotonicity_check",
    "keener_initial",
    "mck_initial",
    "neuro_initial",
    "pool_average_matrix",
    "pool_indicator_matrix",
    "quadratic_form",
    "thin_layer_initial",
    "thin_layer_limit",
    "thin_layer_limit_1d",
]
