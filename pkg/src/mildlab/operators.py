"""Dense generators, their semigroups, resolvents and long-time projections.

Everything here is desk scale: matrices are dense and dimensions stay in the
low thousands.  A :class:`Generator` is a square matrix standing for a
discretised evolution operator together with grid metadata (spacing, boundary
kind, cell weights for integration).  Semigroup actions ``exp(t*A) x`` are
computed through a cached spectral decomposition whenever the matrix is
symmetric, possibly after conjugation with the square root of the cell
weights; otherwise a Pade scaling-and-squaring route is used.  The spectral
path keeps very-long-time limits (used by :func:`limit_projection`) stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import IllConditionedResolventError, NoLimitError, NumericalOverflowError

SUP = "sup"
WEIGHTED_L2 = "weighted-l2"
WEIGHTED_L1 = "weighted-l1"
NORM_KINDS = (SUP, WEIGHTED_L2, WEIGHTED_L1)

BOUNDARY_KINDS = ("neumann", "robin", "transmission", "none")

_RESOLVENT_COND_LIMIT = 1e12


def state_norm(values: np.ndarray, kind: str = SUP, weights: Optional[np.ndarray] = None) -> float:
    """Norm of a state vector in one of the three supported senses.

    ``sup`` ignores the weights; the weighted kinds require a positive weight
    vector of matching length (cell measures of the underlying grid).
    """
    values = np.asarray(values, dtype=float)
    if kind == SUP:
        return float(np.max(np.abs(values))) if values.size else 0.0
    if weights is None:
        raise ValueError(f"norm kind {kind!r} requires cell weights")
    weights = np.asarray(weights, dtype=float)
    if weights.shape != values.shape:
        raise ValueError("weights and values must have the same length")
    if kind == WEIGHTED_L2:
        return float(np.sqrt(np.sum(weights * values * values)))
    if kind == WEIGHTED_L1:
        return float(np.sum(weights * np.abs(values)))
    raise ValueError(f"unknown norm kind {kind!r}")


def _phi1_scalar(z: np.ndarray) -> np.ndarray:
    # phi1(z) = (e^z - 1)/z, extended by 1 at z = 0; expm1 keeps small z accurate
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)
    mask = z != 0.0
    out[mask] = np.expm1(z[mask]) / z[mask]
    return out


class _Propagator:
    """Cached machinery for exp(t*A) and phi1(t*A).

    Picks one of three routes at construction: plain symmetric
    eigendecomposition, weighted-symmetric eigendecomposition (conjugation by
    diag(sqrt(w)) makes the matrix symmetric), or a general route that calls
    the Pade scaling-and-squaring exponential and caches results per t.
    """

    def __init__(self, matrix: np.ndarray, weights: Optional[np.ndarray] = None):
        self.matrix = matrix
        n = matrix.shape[0]
        atol = 1e-12 * max(1.0, float(np.max(np.abs(matrix))) if n else 1.0)
        self._scaling = None
        self._eigvals = None
        self._eigvecs = None
        self._cache: dict[float, np.ndarray] = {}
        if np.allclose(matrix, matrix.T, rtol=0.0, atol=atol):
            self.mode = "symmetric"
            self._eigvals, self._eigvecs = np.linalg.eigh(matrix)
        elif weights is not None and np.all(weights > 0):
            s = np.sqrt(np.asarray(weights, dtype=float))
            sym = matrix * (s[:, None] / s[None, :])
            if np.allclose(sym, sym.T, rtol=0.0, atol=atol):
                self.mode = "weighted-symmetric"
                self._scaling = s
                self._eigvals, self._eigvecs = np.linalg.eigh(0.5 * (sym + sym.T))
            else:
                self.mode = "general"
        else:
            self.mode = "general"

    @property
    def spectral(self) -> bool:
        return self._eigvals is not None

    def real_spectrum(self) -> Optional[np.ndarray]:
        """Real eigenvalues when a spectral route is available, else None."""
        return None if self._eigvals is None else self._eigvals.copy()

    def apply(self, t: float, x: np.ndarray) -> np.ndarray:
        if t == 0.0:
            return np.array(x, dtype=float, copy=True)
        if self.spectral:
            v, lam = self._eigvecs, self._eigvals
            if self._scaling is None:
                return v @ (np.exp(t * lam) * (v.T @ x))
            s = self._scaling
            return (v @ (np.exp(t * lam) * (v.T @ (s * x)))) / s
        return self.matrix_exp(t) @ x

    def matrix_exp(self, t: float) -> np.ndarray:
        if self.spectral:
            v, lam = self._eigvecs, self._eigvals
            core = (v * np.exp(t * lam)) @ v.T
            if self._scaling is None:
                return core
            s = self._scaling
            return core * (s[None, :] / s[:, None])
        key = float(t)
        if key not in self._cache:
            self._cache[key] = scipy.linalg.expm(t * self.matrix)
        return self._cache[key]

    def phi1(self, t: float) -> np.ndarray:
        """Matrix phi1(t*A) where phi1(z) = (e^z - 1)/z."""
        if self.spectral:
            v, lam = self._eigvecs, self._eigvals
            core = (v * _phi1_scalar(t * lam)) @ v.T
            if self._scaling is None:
                return core
            s = self._scaling
            return core * (s[None, :] / s[:, None])
        # augmented-block identity: expm([[tA, I], [0, 0]]) has phi1(tA) top right
        n = self.matrix.shape[0]
        block = np.zeros((2 * n, 2 * n))
        block[:n, :n] = t * self.matrix
        block[:n, n:] = np.eye(n)
        return scipy.linalg.expm(block)[:n, n:]


@dataclass(frozen=True, eq=False)
class GridMeta:
    """Grid metadata attached to a generator: spacing, boundary kind, cell weights."""

    spacing: float
    boundary: str
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if not self.spacing > 0:
            raise ValueError("grid spacing must be positive")
        if self.boundary not in BOUNDARY_KINDS:
            raise ValueError(f"unknown boundary kind {self.boundary!r}")
        if self.weights.ndim != 1 or not np.all(self.weights > 0):
            raise ValueError("cell weights must be a positive vector")


@dataclass(frozen=True, eq=False)
class Generator:
    """A square matrix standing for a discretised generator, plus grid metadata.

    ``stability_bound`` is the claimed bound on the logarithmic norm; the
    shipped models all claim 0 (contraction semigroups) in their natural norm.
    """

    matrix: np.ndarray
    grid: GridMeta
    stability_bound: float = 0.0

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("generator matrix must be square")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("generator matrix has non-finite entries")
        if len(self.grid.weights) != matrix.shape[0]:
            raise ValueError("cell weights length must match the matrix dimension")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def propagator(self) -> _Propagator:
        return _Propagator(self.matrix, self.grid.weights)

    @classmethod
    def from_matrix(cls, matrix, *, spacing: float = 1.0, boundary: str = "none",
                    weights=None, stability_bound: float = 0.0) -> "Generator":
        matrix = np.asarray(matrix, dtype=float)
        if weights is None:
            weights = np.ones(matrix.shape[0])
        return cls(matrix, GridMeta(spacing, boundary, weights), stability_bound)


@dataclass(frozen=True, eq=False)
class StateVector:
    """A state paired with the norm it should be measured in."""

    values: np.ndarray
    norm_kind: str = SUP
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1:
            raise ValueError("state values must be a vector")
        if self.norm_kind not in NORM_KINDS:
            raise ValueError(f"unknown norm kind {self.norm_kind!r}")
        if self.weights is not None:
            object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def norm(self) -> float:
        return state_norm(self.values, self.norm_kind, self.weights)

    def with_values(self, values: np.ndarray) -> "StateVector":
        return StateVector(values, self.norm_kind, self.weights)


@dataclass(frozen=True, eq=False)
class Projection:
    """An idempotent matrix onto the regularity space, with its range dimension."""

    matrix: np.ndarray
    range_dim: int

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", matrix)
        defect = np.max(np.abs(matrix @ matrix - matrix))
        if defect > 1e-10:
            raise ValueError(f"projection is not idempotent (defect {defect:.3e})")
        rank = int(np.sum(np.linalg.svd(matrix, compute_uv=False) > 1e-8))
        if rank != self.range_dim:
            raise ValueError(f"numerical rank {rank} != declared range_dim {self.range_dim}")

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(values, dtype=float)


def neumann_laplacian_1d(n: int, length: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Second-order Neumann Laplacian on ``n`` vertex-centred nodes of [0, length].

    Ghost-point reflection at both ends; the constant vector is annihilated
    exactly.  Returns ``(matrix, weights)`` where the weights are trapezoid
    cell weights (they sum to ``length``) and also make the matrix symmetric
    in the weighted inner product.
    """
    if n < 2:
        raise ValueError("need at least two grid nodes")
    h = length / (n - 1)
    lap = np.zeros((n, n))
    idx = np.arange(1, n - 1)
    lap[idx, idx] = -2.0
    lap[idx, idx - 1] = 1.0
    lap[idx, idx + 1] = 1.0
    lap[0, 0] = lap[n - 1, n - 1] = -2.0
    lap[0, 1] = lap[n - 1, n - 2] = 2.0
    lap /= h * h
    weights = np.full(n, h)
    weights[0] = weights[-1] = h / 2.0
    return lap, weights


def expm_apply(gen: Generator, t: float, x: StateVector) -> StateVector:
    """Apply the semigroup at time t: exp(t*A) x.

    t = 0 takes the identity path and returns ``x`` unchanged.  Non-finite
    results raise :class:`NumericalOverflowError`.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    if x.dim != gen.dim:
        raise ValueError(f"state dimension {x.dim} != generator dimension {gen.dim}")
    if t == 0.0:
        return x
    result = gen.propagator.apply(t, x.values)
    if not np.all(np.isfinite(result)):
        norm = float(np.max(np.abs(gen.matrix)))
        raise NumericalOverflowError(
            f"semigroup action overflowed at t={t} (max|A|={norm:.3e})")
    return x.with_values(result)


def resolvent_apply(gen: Generator, lam: float, y: StateVector) -> StateVector:
    """Solve (lam*I - A) x = y for lam above the stability bound."""
    if lam <= gen.stability_bound:
        raise ValueError(f"lam={lam} must exceed the stability bound {gen.stability_bound}")
    if y.dim != gen.dim:
        raise ValueError("state dimension mismatch")
    shifted = lam * np.eye(gen.dim) - gen.matrix
    cond = np.linalg.cond(shifted)
    if not np.isfinite(cond) or cond > _RESOLVENT_COND_LIMIT:
        raise IllConditionedResolventError(
            f"resolvent at lam={lam} has condition number {cond:.3e}")
    return y.with_values(np.linalg.solve(shifted, y.values))


def _spectral_gap(gen: Generator) -> Optional[float]:
    """Smallest-magnitude nonzero real part of the spectrum, if any."""
    spec = gen.propagator.real_spectrum()
    if spec is None:
        spec = np.real(np.linalg.eigvals(gen.matrix))
    scale = max(1.0, float(np.max(np.abs(spec))))
    nonzero = np.abs(spec)[np.abs(spec) > 1e-9 * scale]
    if nonzero.size == 0:
        return None
    return float(np.min(nonzero))


def _eigenvalue_one_projector(matrix: np.ndarray) -> np.ndarray:
    """Spectral projector onto the eigenvalue-1 cluster of an almost-idempotent matrix."""
    vals, vecs = np.linalg.eig(matrix)
    keep = np.abs(vals - 1.0) < 0.5
    inv = np.linalg.inv(vecs)
    return np.real(vecs[:, keep] @ inv[keep, :])


def limit_projection(gen: Generator, t_big: Optional[float] = None, tol: float = 1e-8) -> Projection:
    """Long-time limit of the semigroup as a projection, found a posteriori.

    Compares exp(t_big*A) with exp(2*t_big*A); if they have not stabilised the
    horizon is stretched to 4*t_big once, and failure there raises
    :class:`NoLimitError`.  The default horizon is 10/gap with gap the
    smallest-magnitude nonzero real part of the spectrum (10.0 when the
    spectrum carries no gap).  The stabilised matrix is promoted to an exact
    spectral projector if its idempotence defect exceeds ``tol``.
    """
    if t_big is None:
        gap = _spectral_gap(gen)
        t_big = 10.0 if gap is None else 10.0 / gap
    prop = gen.propagator
    horizon = None
    for t_try in (t_big, 4.0 * t_big):
        e1 = prop.matrix_exp(t_try)
        e2 = prop.matrix_exp(2.0 * t_try)
        if not (np.all(np.isfinite(e1)) and np.all(np.isfinite(e2))):
            raise NoLimitError(f"semigroup overflowed at horizon {t_try}")
        if np.max(np.abs(e1 - e2)) <= tol:
            horizon = t_try
            break
    if horizon is None:
        raise NoLimitError(
            f"semigroup not stabilised at horizons {t_big} and {4 * t_big}")
    limit = prop.matrix_exp(2.0 * horizon)
    # the Projection type wants idempotence to 1e-10, so promote at that level too
    if np.max(np.abs(limit @ limit - limit)) > min(tol, 1e-10):
        limit = _eigenvalue_one_projector(limit)
    range_dim = int(round(float(np.trace(limit))))
    return Projection(limit, range_dim)


def dissipativity_check(gen: Generator, samples: int, *, norm_kind: str = SUP,
                        weights: Optional[np.ndarray] = None, seed: int = 0) -> float:
    """Largest observed ||exp(t*A) x|| over a log grid of times and random unit x.

    The caller compares the result against the equiboundedness constant it
    wants to claim; nothing is asserted here.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    if weights is None and norm_kind != SUP:
        weights = gen.grid.weights
    rng = np.random.default_rng(seed)
    times = np.logspace(-3.0, 2.0, 26)
    worst = 0.0
    for _ in range(samples):
        x = rng.standard_normal(gen.dim)
        x /= state_norm(x, norm_kind, weights)
        for t in times:
            y = gen.propagator.apply(float(t), x)
            worst = max(worst, state_norm(y, norm_kind, weights))
    return worst


def spectrum(gen: Generator) -> np.ndarray:
    """Eigenvalues of the generator, sorted ascending by real part.

    Real and exact up to round-off on the spectral routes; complex eigenvalues
    from the general route are returned as-is.
    """
    spec = gen.propagator.real_spectrum()
    if spec is not None:
        return np.sort(spec)
    vals = np.linalg.eigvals(gen.matrix)
    return vals[np.argsort(vals.real)]
