"""A bare singular-perturbation family from a user-supplied matrix.

family(kappa) = kappa * B for a matrix B whose semigroup has a long-time
limit; the limit dynamics freezes on the range of that limit projection.
Useful for smoke tests and for studying the abstract mechanism without any
model structure.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..operators import SUP, Generator, limit_projection
from ..solver import Nonlinearity
from . import DEFAULT_KAPPA_SWEEP, PARAM_KAPPA, ModelPair


def build_custom_matrix(matrix, kappa_list=DEFAULT_KAPPA_SWEEP, *,
                        coupling: Optional[np.ndarray] = None) -> ModelPair:
    """Pair for family(kappa) = kappa*B with optional linear reaction F(u) = K u."""
    matrix = np.asarray(matrix, dtype=float)
    base = Generator.from_matrix(matrix)
    proj = limit_projection(base)
    dim = base.dim

    def family(kappa: float) -> Generator:
        if kappa <= 0:
            raise ValueError("kappa must be positive")
        return Generator.from_matrix(kappa * matrix)

    if coupling is None:
        fn, lip = (lambda t, u: np.zeros_like(u)), 0.0
    else:
        coupling = np.asarray(coupling, dtype=float)
        if coupling.shape != (dim, dim):
            raise ValueError("coupling matrix must match the generator dimension")
        fn = lambda t, u: coupling @ u
        lip = float(np.max(np.sum(np.abs(coupling), axis=1)))  # sup-norm operator bound
    nonlinearity = Nonlinearity(fn, lip, autonomous=True)

    def limit_fn(t, u):
        return proj.apply(fn(t, u))

    limit_nl = Nonlinearity(limit_fn, lip, autonomous=True)
    limit_gen = Generator.from_matrix(np.zeros((dim, dim)))
    return ModelPair(
        name="custom_matrix",
        param_kind=PARAM_KAPPA,
        sweep=tuple(float(k) for k in kappa_list),
        family=family,
        nonlinearity=nonlinearity,
        limit_generator=limit_gen,
        projection=proj,
        limit_nonlinearity=limit_nl,
        norm_kind=SUP,
        weights=None,
    )


def custom_matrix_model_card(matrix, kappa_list) -> str:
    matrix = np.asarray(matrix, dtype=float)
    lines = [
        "# Model card: custom matrix family",
        "",
        f"family(kappa) = kappa * B for the supplied {matrix.shape[0]}x"
        f"{matrix.shape[1]} matrix B.  The limit projection is found by",
        "stabilising exp(t*B) at long times; the limit dynamics is frozen on",
        "its range (zero generator) with the projected reaction.",
        f"Sweep kappa in {list(kappa_list)}.  State norm: sup.",
    ]
    return "\n".join(lines) + "\n"
