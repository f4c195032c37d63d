"""Early lung cancer model: cells, bound and free growth factor on [0,1].

Only the free growth factor g diffuses (coefficient kappa = 1/gamma, Neumann
ends); cells c and bound factor b evolve pointwise:

    c_t = ((2p - 1) a(b, c) - d_c) c
    b_t = alpha(c) g - d_b b - d b
    g_t = kappa g_xx - alpha(c) g - d_g g + kap(c) + d b

The reactions are only locally Lipschitz, so arguments are clipped into the
box [0,C1] x [0,C2] x [0,C3] before evaluation; inward-pointing boundary
fields keep honest solutions inside the box, where the clipped and original
systems agree.  In the fast-diffusion limit the g equation is replaced by the
spatial average of its right-hand side.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from ..operators import SUP, Generator, GridMeta, Projection, neumann_laplacian_1d
from ..solver import Nonlinearity
from . import DEFAULT_KAPPA_SWEEP, PARAM_KAPPA, ModelPair


def _alpha_default(c):
    return c / (1.0 + c)


def _binding_default(b, c):
    return b / (1.0 + b + c)


def _production_default(c):
    # basal term keeps production positive at c = 0
    return 0.5 + c / (1.0 + c)


@dataclass(frozen=True)
class MckParams:
    """Coefficients of the three-component model; all rates nonnegative."""

    p: float = 0.6
    d_c: float = 0.1
    d_b: float = 0.2
    d: float = 0.05
    d_g: float = 0.3
    alpha: Callable = _alpha_default
    binding: Callable = _binding_default
    production: Callable = _production_default

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        for name in ("d_c", "d_b", "d", "d_g"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


def _pointwise_rhs(params: MckParams, clip_box, c, b, g):
    c1, c2, c3 = clip_box
    c = np.clip(c, 0.0, c1)
    b = np.clip(b, 0.0, c2)
    g = np.clip(g, 0.0, c3)
    rate_c = ((2.0 * params.p - 1.0) * params.binding(b, c) - params.d_c) * c
    rate_b = params.alpha(c) * g - params.d_b * b - params.d * b
    rate_g = -params.alpha(c) * g - params.d_g * g + params.production(c) + params.d * b
    return rate_c, rate_b, rate_g


def _estimate_lipschitz(params: MckParams, clip_box, seed: int = 11) -> float:
    """Sampled sup-metric slope of the clipped pointwise map, with a safety margin."""
    c1, c2, c3 = clip_box
    lo = np.array([-0.5, -0.5, -0.5])
    hi = np.array([c1 + 0.5, c2 + 0.5, c3 + 0.5])
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(4000):
        u = rng.uniform(lo, hi)
        if k % 2 == 0:
            v = rng.uniform(lo, hi)
        else:
            v = u + rng.normal(scale=1e-4, size=3)
        du = np.max(np.abs(u - v))
        if du == 0.0:
            continue
        fu = np.array(_pointwise_rhs(params, clip_box, *u))
        fv = np.array(_pointwise_rhs(params, clip_box, *v))
        worst = max(worst, float(np.max(np.abs(fu - fv))) / du)
    return 1.3 * worst + 0.05


def build_mck(n: int, params: MckParams = MckParams(),
              clip_box=(10.0, 10.0, 10.0),
              kappa_list=DEFAULT_KAPPA_SWEEP) -> ModelPair:
    """Build the three-component pair; the sweep parameter is kappa = 1/gamma."""
    if n < 8:
        raise ValueError("need at least 8 grid points")
    c1, c2, c3 = clip_box
    if min(c1, c2, c3) <= 0:
        raise ValueError("clip box bounds must be positive")
    lap, w = neumann_laplacian_1d(n)
    weights3 = np.concatenate([w, w, w])
    h = 1.0 / (n - 1)
    lip = _estimate_lipschitz(params, clip_box)

    def reaction(t, u):
        rc, rb, rg = _pointwise_rhs(params, clip_box, u[:n], u[n:2 * n], u[2 * n:])
        return np.concatenate([rc, rb, rg])

    f_zero = float(np.max(np.abs(reaction(0.0, np.zeros(3 * n)))))
    nonlinearity = Nonlinearity(reaction, lip, autonomous=True,
                                f_at_zero_bound=f_zero, growth_rate=1.0)

    def family(kappa: float) -> Generator:
        if kappa <= 0:
            raise ValueError("kappa must be positive")
        zeros = np.zeros((n, n))
        block = scipy.linalg.block_diag(zeros, zeros, kappa * lap)
        return Generator(block, GridMeta(h, "neumann", weights3), 0.0)

    averaging = np.outer(np.ones(n), w)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    proj = np.block([[eye, zero, zero], [zero, eye, zero], [zero, zero, averaging]])
    limit_gen = Generator(np.zeros((3 * n, 3 * n)), GridMeta(h, "neumann", weights3), 0.0)

    def limit_reaction(t, u):
        g = reaction(t, u)
        mean = float(w @ g[2 * n:])
        return np.concatenate([g[:2 * n], np.full(n, mean)])

    limit_nl = Nonlinearity(limit_reaction, lip, autonomous=True,
                            f_at_zero_bound=f_zero, growth_rate=1.0)
    box_lo = np.zeros(3 * n)
    box_hi = np.concatenate([np.full(n, c1), np.full(n, c2), np.full(n, c3)])
    return ModelPair(
        name="mck",
        param_kind=PARAM_KAPPA,
        sweep=tuple(float(k) for k in kappa_list),
        family=family,
        nonlinearity=nonlinearity,
        limit_generator=limit_gen,
        projection=Projection(proj, 2 * n + 1),
        limit_nonlinearity=limit_nl,
        norm_kind=SUP,
        weights=weights3,
        state_box=(box_lo, box_hi),
    )


def warn_if_outside_box(pair: ModelPair, values: np.ndarray) -> None:
    """Flag initial data outside the clipping box: the solve then describes the modified system."""
    if pair.state_box is None:
        return
    lo, hi = pair.state_box
    if np.any(values < lo) or np.any(values > hi):
        warnings.warn(
            "initial data leaves the clipping box; the computed trajectory "
            "solves the globally Lipschitz modification, not the original system",
            stacklevel=2)


def mck_initial(n: int, preset: str, *, baseline: float = 0.5,
                amplitude: float = 0.25) -> np.ndarray:
    x = np.linspace(0.0, 1.0, n)
    if preset == "flat":
        return np.full(3 * n, baseline)
    if preset == "bump-in-fast-component":
        g = baseline + amplitude * np.cos(np.pi * x)
        return np.concatenate([np.full(n, baseline), np.full(n, baseline), g])
    raise ValueError(f"unknown initial preset {preset!r} for the growth-factor model")


def mck_model_card(n: int, params: MckParams, clip_box, kappa_list) -> str:
    lines = [
        "# Model card: cell / growth-factor system (fast free factor)",
        "",
        "Continuum system on [0,1]; only the free growth factor g diffuses",
        "(Neumann ends):",
        "",
        "    c_t = ((2p - 1) a(b, c) - d_c) c",
        "    b_t = alpha(c) g - (d_b + d) b",
        "    g_t = kappa g_xx - (alpha(c) + d_g) g + kap(c) + d b",
        "",
        "For large kappa the g equation is replaced by the spatial average of",
        "its right-hand side; initial data are projected by averaging g.",
        "",
        "## Discretisation",
        f"- {n} vertex-centred nodes per component, spacing h = 1/{n - 1};",
        "  ghost-point Neumann Laplacian on the g block only.",
        f"- Arguments clipped into [0,{clip_box[0]}] x [0,{clip_box[1]}] x "
        f"[0,{clip_box[2]}] before every reaction evaluation.",
        f"- Rates: p={params.p}, d_c={params.d_c}, d_b={params.d_b}, "
        f"d={params.d}, d_g={params.d_g}.",
        f"- Sweep kappa in {list(kappa_list)}.",
        "- State norm: sup norm over the three components.",
    ]
    return "\n".join(lines) + "\n"
