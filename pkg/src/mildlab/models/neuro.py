"""Neurotransmitter pools: diffusion across semi-permeable membranes.

The terminal is reduced to the interval [0,1], split at a < b into three
nested pools: immediately available [0,a], recycling [a,b], resting [b,1].
The concentration obeys

    u' = L u + beta (u_sharp - u)^+

where L is a finite-volume diffusion operator with membrane faces at a and b
(flux = directed permeability times the one-sided concentrations), a
reflecting end at x = 0 (the innermost pool has no outer boundary in the
nested picture) and a Robin loss at x = 1 on the resting pool.  Production
beta is supported on the resting pool only.

Scaling the diffusion coefficient by kappa and letting kappa grow homogenises
each pool while membrane exchange stays finite, so pool averages follow a
three-state Markov intensity matrix Q; the production term survives as its
pool-3 average.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..operators import WEIGHTED_L2, Generator, GridMeta, Projection
from ..solver import Nonlinearity
from . import DEFAULT_KAPPA_SWEEP, PARAM_KAPPA, ModelPair


@dataclass(frozen=True)
class PoolGeometry:
    """Pool breakpoints, directed membrane permeabilities, outer Robin loss, diffusion."""

    a: float = 0.2
    b: float = 0.5
    p12: float = 1.0
    p21: float = 1.0
    p23: float = 1.0
    p32: float = 1.0
    robin: float = 0.0
    diffusion: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.a < self.b < 1.0:
            raise ValueError("breakpoints must satisfy 0 < a < b < 1")
        for name in ("p12", "p21", "p23", "p32", "robin"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and nonnegative")
        if not self.diffusion > 0:
            raise ValueError("diffusion coefficient must be positive")

    @property
    def measures(self) -> tuple[float, float, float]:
        return (self.a, self.b - self.a, 1.0 - self.b)


def build_Q(geom: PoolGeometry) -> np.ndarray:
    """Intensity matrix of the three-pool exchange chain.

    Off-diagonal rates divide the directed permeability by the source pool's
    measure; the Robin loss at the outer boundary lands on the resting pool's
    diagonal, so row sums vanish exactly when the loss is zero.
    """
    m1, m2, m3 = geom.measures
    q12 = geom.p12 / m1
    q21 = geom.p21 / m2
    q23 = geom.p23 / m2
    q32 = geom.p32 / m3
    return np.array([
        [-q12, q12, 0.0],
        [q21, -(q21 + q23), q23],
        [0.0, q32, -q32 - geom.robin / m3],
    ])


def membrane_cells(geom: PoolGeometry, n: int) -> tuple[int, int]:
    """First cell index of pools 2 and 3; membranes must sit on cell faces."""
    j_a = int(round(geom.a * n))
    j_b = int(round(geom.b * n))
    if abs(j_a - geom.a * n) > 1e-9 or abs(j_b - geom.b * n) > 1e-9:
        warnings.warn(
            "membranes snapped to the nearest cell faces; pool measures in Q "
            "use the exact breakpoints", stacklevel=2)
    if j_a < 2 or j_b - j_a < 2 or n - j_b < 2:
        raise ValueError("each pool needs at least two cells")
    return j_a, j_b


def pool_operator(geom: PoolGeometry, n: int, diffusion: float) -> np.ndarray:
    """Finite-volume diffusion matrix with membrane faces and outer Robin loss.

    Cell-centred grid of n cells (h = 1/n).  Interior faces carry the usual
    diffusive flux; the faces at a and b carry p_forward*u_left -
    p_backward*u_right; the face at x=1 leaks robin*u.  Cell weights are all
    h, so mass is the weighted sum and is conserved when robin = 0.
    """
    h = 1.0 / n
    j_a, j_b = membrane_cells(geom, n)
    matrix = np.zeros((n, n))
    d_flux = diffusion / h
    for j in range(n):
        # flux through the left face of cell j, oriented in +x
        if j == 0:
            pass  # reflecting end: nothing enters
        elif j == j_a:
            matrix[j, j - 1] += geom.p12 / h
            matrix[j, j] += -geom.p21 / h
        elif j == j_b:
            matrix[j, j - 1] += geom.p23 / h
            matrix[j, j] += -geom.p32 / h
        else:
            matrix[j, j - 1] += d_flux / h
            matrix[j, j] += -d_flux / h
        # flux through the right face of cell j (negated contribution)
        if j == n - 1:
            matrix[j, j] += -geom.robin / h
        elif j + 1 == j_a:
            matrix[j, j] += -geom.p12 / h
            matrix[j, j + 1] += geom.p21 / h
        elif j + 1 == j_b:
            matrix[j, j] += -geom.p23 / h
            matrix[j, j + 1] += geom.p32 / h
        else:
            matrix[j, j] += -d_flux / h
            matrix[j, j + 1] += d_flux / h
    return matrix


def pool_indicator_matrix(geom: PoolGeometry, n: int) -> np.ndarray:
    """Columns are the pool indicator functions: the embedding of pool values."""
    j_a, j_b = membrane_cells(geom, n)
    phi = np.zeros((n, 3))
    phi[:j_a, 0] = 1.0
    phi[j_a:j_b, 1] = 1.0
    phi[j_b:, 2] = 1.0
    return phi


def pool_average_matrix(geom: PoolGeometry, n: int) -> np.ndarray:
    """Rows take the cell-weighted average over each pool."""
    j_a, j_b = membrane_cells(geom, n)
    avg = np.zeros((3, n))
    avg[0, :j_a] = 1.0 / j_a
    avg[1, j_a:j_b] = 1.0 / (j_b - j_a)
    avg[2, j_b:] = 1.0 / (n - j_b)
    return avg


def _l2_log_norm(matrix: np.ndarray, weights: np.ndarray) -> float:
    s = np.sqrt(weights)
    sym = matrix * (s[:, None] / s[None, :])
    return float(np.max(np.linalg.eigvalsh(0.5 * (sym + sym.T))))


def beta_on_resting_pool(geom: PoolGeometry, n: int, level: float = 2.0) -> np.ndarray:
    """Production intensity: zero on pools 1 and 2, constant on the resting pool."""
    _, j_b = membrane_cells(geom, n)
    beta = np.zeros(n)
    beta[j_b:] = level
    return beta


def build_neuro(n: int, geom: PoolGeometry, beta_vec, u_sharp: float,
                kappa_list=DEFAULT_KAPPA_SWEEP) -> ModelPair:
    """Build the pools pair; the sweep parameter multiplies the diffusion coefficient only.

    Membrane permeabilities and the Robin loss are physical exchange rates and
    stay fixed along the sweep; that is what makes the pool-average dynamics
    converge to the intensity matrix Q instead of collapsing globally.
    """
    beta_vec = np.asarray(beta_vec, dtype=float)
    if beta_vec.shape != (n,):
        raise ValueError("beta must have one entry per cell")
    if not u_sharp > 0:
        raise ValueError("the production threshold must be positive")
    j_a, j_b = membrane_cells(geom, n)
    if np.any(beta_vec[:j_b] != 0.0):
        raise ValueError("production must vanish on the first two pools")
    h = 1.0 / n
    weights = np.full(n, h)

    def reaction(t, u):
        return beta_vec * np.maximum(u_sharp - u, 0.0)

    lip = float(np.max(np.abs(beta_vec)))
    f_zero = float(np.sqrt(np.sum(weights * (beta_vec * u_sharp) ** 2)))
    nonlinearity = Nonlinearity(reaction, lip, autonomous=True,
                                f_at_zero_bound=f_zero, growth_rate=1.0)

    def family(kappa: float) -> Generator:
        if kappa <= 0:
            raise ValueError("kappa must be positive")
        matrix = pool_operator(geom, n, kappa * geom.diffusion)
        bound = _l2_log_norm(matrix, weights)
        return Generator(matrix, GridMeta(h, "transmission", weights),
                         0.0 if bound < 1e-10 else bound)

    phi = pool_indicator_matrix(geom, n)
    avg = pool_average_matrix(geom, n)
    q_matrix = build_Q(geom)
    limit_matrix = phi @ q_matrix @ avg
    bound = _l2_log_norm(limit_matrix, weights)
    limit_gen = Generator(limit_matrix, GridMeta(h, "transmission", weights),
                          0.0 if bound < 1e-10 else bound)
    proj = Projection(phi @ avg, 3)

    def limit_reaction(t, u):
        return proj.apply(reaction(t, u))

    limit_nl = Nonlinearity(limit_reaction, lip, autonomous=True,
                            f_at_zero_bound=f_zero, growth_rate=1.0)
    return ModelPair(
        name="neuro",
        param_kind=PARAM_KAPPA,
        sweep=tuple(float(k) for k in kappa_list),
        family=family,
        nonlinearity=nonlinearity,
        limit_generator=limit_gen,
        projection=proj,
        limit_nonlinearity=limit_nl,
        norm_kind=WEIGHTED_L2,
        weights=weights,
    )


def neuro_initial(geom: PoolGeometry, n: int, preset: str, *, u_sharp: float = 1.0,
                  baseline: Optional[float] = None, amplitude: float = 0.25,
                  u3: float = 0.2) -> np.ndarray:
    j_a, j_b = membrane_cells(geom, n)
    if preset == "pool-step":
        u = np.full(n, u_sharp)
        u[j_b:] = u3
        return u
    base = 0.5 * u_sharp if baseline is None else baseline
    if preset == "flat":
        return np.full(n, base)
    if preset == "bump-in-fast-component":
        x = (np.arange(n) + 0.5) / n
        return base + amplitude * np.cos(np.pi * x)
    raise ValueError(f"unknown initial preset {preset!r} for the pools model")


def neuro_model_card(n: int, geom: PoolGeometry, u_sharp: float, kappa_list) -> str:
    lines = [
        "# Model card: neurotransmitter pools with semi-permeable membranes",
        "",
        "Concentration on [0,1] split into immediately-available [0,a],",
        "recycling [a,b] and resting [b,1] pools:",
        "",
        "    u' = L u + beta (u_sharp - u)^+,   beta = 0 off the resting pool",
        "",
        "L is diffusion with membrane faces at a and b (flux = directed",
        "permeability times one-sided concentration), a reflecting end at",
        "x = 0 and a Robin loss at x = 1.  Scaling only the diffusion by",
        "kappa and letting kappa grow flattens each pool; pool averages then",
        "follow the three-state intensity matrix Q with rates",
        "permeability / pool length and the Robin loss on the resting pool's",
        "diagonal.  The production term survives as its resting-pool average.",
        "",
        "## Discretisation",
        f"- {n} cell-centred finite volumes, h = 1/{n}; membranes on the cell",
        f"  faces at a = {geom.a} and b = {geom.b} (first order there, second",
        "  order elsewhere); mass is conserved exactly when the Robin loss",
        "  vanishes.",
        f"- Permeabilities p12={geom.p12}, p21={geom.p21}, p23={geom.p23}, "
        f"p32={geom.p32}; Robin loss {geom.robin}; diffusion {geom.diffusion}.",
        f"- Production threshold u_sharp = {u_sharp}; sweep kappa in {list(kappa_list)}.",
        "- State norm: cell-weighted L2; pool embedding is an isometry onto",
        "  pool-constant states.",
    ]
    return "\n".join(lines) + "\n"
