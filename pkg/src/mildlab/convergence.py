"""Quantify how mild solutions converge across a perturbation sweep.

For each parameter the full system is solved from x and the limit system from
P x; three error numbers are recorded per point: the time-integrated state
error on (0, tau], the sup error on [delta, tau] and the sup error on
[0, tau].  The dichotomy this module classifies: when x lies in the
regularity space all three decay (Regular); otherwise the error away from
t = 0 decays while the error at t = 0 stays pinned at ||x - Px|| (Irregular),
because the full solution starts at x and the limit solution at Px.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import SweepError
from .models import ModelPair
from .models.mck import warn_if_outside_box
from .operators import Projection, StateVector, state_norm
from .solver import Trajectory, expeuler_solve, picard_solve, trajectory_diff

REGULAR = "Regular"
IRREGULAR = "Irregular"
NON_CONVERGENT = "NonConvergent"

SOLVERS = ("picard", "expeuler")


@dataclass(frozen=True)
class ErrorTriple:
    """Errors of one sweep point: L1 in time, sup on [delta, tau], sup on [0, tau]."""

    l1_0_tau: float
    sup_delta_tau: float
    sup_0_tau: float
    delta: float
    tau: float

    def __post_init__(self):
        slack = 1e-12 * (1.0 + self.sup_0_tau)
        if min(self.l1_0_tau, self.sup_delta_tau, self.sup_0_tau) < 0:
            raise ValueError("error metrics must be nonnegative")
        if self.sup_delta_tau > self.sup_0_tau + slack:
            raise ValueError("sup over [delta,tau] cannot exceed sup over [0,tau]")
        if self.l1_0_tau > self.tau * self.sup_0_tau + slack:
            raise ValueError("L1 error cannot exceed tau times the sup error")

    def as_dict(self) -> dict:
        return {"l1_0_tau": self.l1_0_tau, "sup_delta_tau": self.sup_delta_tau,
                "sup_0_tau": self.sup_0_tau, "delta": self.delta, "tau": self.tau}


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-parameter errors plus the classification they support."""

    params: tuple
    errors: tuple
    classification: str
    floor_estimate: float

    def as_dict(self) -> dict:
        return {
            "params": list(self.params),
            "errors": [e.as_dict() for e in self.errors],
            "classification": self.classification,
            "floor_estimate": self.floor_estimate,
            "l1_rate_estimate": self.l1_rate_estimate(),
        }

    def csv_rows(self) -> list[tuple]:
        return [(p, e.l1_0_tau, e.sup_delta_tau, e.sup_0_tau)
                for p, e in zip(self.params, self.errors)]

    def l1_rate_estimate(self) -> Optional[float]:
        """Log-log slope of the L1 error over the last half of the sweep; reported, never asserted."""
        tail = max(3, len(self.params) // 2)
        p = np.asarray(self.params[-tail:], dtype=float)
        e = np.asarray([t.l1_0_tau for t in self.errors[-tail:]])
        if np.any(e <= 0) or np.any(p <= 0) or len(p) < 2:
            return None
        slope = np.polyfit(np.log(p), np.log(e), 1)[0]
        return float(slope)


def error_metrics(u_full: Trajectory, u_lim: Trajectory, delta: float, tau: float) -> ErrorTriple:
    """Error triple of two trajectories on the same grid; no silent interpolation."""
    if not 0.0 <= delta < tau:
        raise ValueError("need 0 <= delta < tau")
    diff = trajectory_diff(u_full, u_lim)
    if abs(diff.times[-1] - tau) > 1e-12 * max(1.0, tau):
        raise ValueError("trajectory horizon does not match tau")
    norms = diff.node_norms()
    l1 = float(np.trapezoid(norms, diff.times))
    tail = diff.times >= delta - 1e-12
    return ErrorTriple(
        l1_0_tau=l1,
        sup_delta_tau=float(np.max(norms[tail])),
        sup_0_tau=float(np.max(norms)),
        delta=delta,
        tau=tau,
    )


def _nonincreasing(values, floor: float = 0.0) -> bool:
    # ordering below the decision threshold carries no information: errors
    # that already sit under tol_reg may wobble on solver-bias plateaus
    vals = [max(v, floor) for v in values]
    return all(b <= a * (1.0 + 1e-9) + 1e-15 for a, b in zip(vals, vals[1:]))


def classify(errors, x: StateVector, proj: Projection,
             tol_reg: Optional[float] = None, tol_irr: Optional[float] = None) -> str:
    """Classify a sweep as Regular, Irregular or NonConvergent.

    Regular: the [0,tau] sup error has died down (last value below tol_reg,
    last three nonincreasing).  Irregular: the [delta,tau] sup error has died
    down the same way while the [0,tau] error stays above tol_irr at every
    parameter.  Default thresholds scale with the data: tol_reg is 1e-2 times
    ||x||, tol_irr is half of ||x - Px||.
    """
    if len(errors) < 4:
        raise ValueError("need at least four sweep points to classify")
    if tol_reg is None:
        tol_reg = 1e-2 * x.norm()
    if tol_irr is None:
        gap = x.values - proj.apply(x.values)
        tol_irr = 0.5 * state_norm(gap, x.norm_kind, x.weights)
    sup0 = [e.sup_0_tau for e in errors]
    supd = [e.sup_delta_tau for e in errors]
    if sup0[-1] <= tol_reg and _nonincreasing(sup0[-3:], tol_reg):
        return REGULAR
    if supd[-1] <= tol_reg and _nonincreasing(supd[-3:], tol_reg) and min(sup0) >= tol_irr:
        return IRREGULAR
    return NON_CONVERGENT


def _solve_pair(mp: ModelPair, param: float, x: StateVector, x_lim: StateVector,
                tau: float, M: int, solver: str, tol: float, max_iter: int):
    try:
        gen = mp.family(param)
        if solver == "picard":
            full, info_full = picard_solve(gen, mp.nonlinearity, x, tau, M,
                                           tol=tol, max_iter=max_iter, full_output=True)
            lim, info_lim = picard_solve(mp.limit_generator, mp.limit_nonlinearity,
                                         x_lim, tau, M, tol=tol, max_iter=max_iter,
                                         full_output=True)
            diag = {"param": param,
                    "full_iterations": info_full.iterations, "full_defect": info_full.defect,
                    "limit_iterations": info_lim.iterations, "limit_defect": info_lim.defect}
        else:
            full = expeuler_solve(gen, mp.nonlinearity, x, tau, M)
            lim = expeuler_solve(mp.limit_generator, mp.limit_nonlinearity, x_lim, tau, M)
            diag = {"param": param}
        return full, lim, diag
    except Exception as err:  # annotate with the offending parameter
        raise SweepError(f"sweep point {mp.param_kind}={param} failed: {err}",
                         param=param) from err


def sweep(mp: ModelPair, x: StateVector, tau: float = 1.0,
          delta: Optional[float] = None, M: int = 256, solver: str = "picard",
          *, tol: float = 1e-10, max_iter: int = 200, threads: int = 1,
          full_output: bool = False):
    """Solve full and limit systems across the pair's parameter sweep.

    The full system starts from x, the limit system from P x.  Sweep points
    are independent and can be farmed out to ``threads`` workers; the report
    is assembled in parameter order either way.  ``full_output`` also returns
    per-point solver diagnostics.
    """
    if solver not in SOLVERS:
        raise ValueError(f"solver must be one of {SOLVERS}")
    if delta is None:
        delta = 0.1 * tau
    if not np.all(np.isfinite(x.values)):
        raise ValueError("initial state must be finite")
    if mp.state_box is not None:
        warn_if_outside_box(mp, x.values)
    x_lim = mp.project(x)

    def point(param):
        full, lim, diag = _solve_pair(mp, param, x, x_lim, tau, M, solver, tol, max_iter)
        return error_metrics(full, lim, delta, tau), diag

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(point, mp.sweep))
    else:
        results = [point(p) for p in mp.sweep]
    errors = tuple(r[0] for r in results)
    diagnostics = [r[1] for r in results]
    if len(errors) >= 4:
        classification = classify(errors, x, mp.projection)
    else:
        # too few points for the decay rules; no convergence is demonstrated
        classification = NON_CONVERGENT
    report = ConvergenceReport(
        params=tuple(mp.sweep),
        errors=errors,
        classification=classification,
        floor_estimate=errors[-1].sup_0_tau,
    )
    return (report, diagnostics) if full_output else report


@dataclass(frozen=True)
class FolkReport:
    """Result of the randomized fixed-point stability harness."""

    trials: int
    checks: int
    violations: tuple
    max_ratio: float

    @property
    def passed(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        status = "passed" if self.passed else f"FAILED ({len(self.violations)} violations)"
        return (f"fixed-point stability harness {status}: {self.trials} trials, "
                f"{self.checks} checks, worst bound ratio {self.max_ratio:.3f}")


def _iterate_to_fixed_point(q: float, r: np.ndarray, c: np.ndarray,
                            tol: float = 1e-14, max_iter: int = 20000) -> np.ndarray:
    s = np.zeros_like(c)
    for _ in range(max_iter):
        nxt = q * (r @ s) + c
        if np.max(np.abs(nxt - s)) <= tol * (1.0 + np.max(np.abs(nxt))):
            return nxt
        s = nxt
    raise RuntimeError("fixed-point iteration stalled")


def folk_property_harness(seed: int, trials: int) -> FolkReport:
    """Check the explicit stability bound for fixed points of converging contractions.

    Each trial draws a dimension d <= 8, a factor q in (0, 0.95) and affine
    contractions Phi_n(s) = q R_n s + c_n with ||R_n|| <= 1, where R_n and c_n
    approach limits at rate 1/n.  For a ladder of n values the fixed points
    s_n* (computed by iteration) must satisfy

        ||s_n* - s*|| <= (1/(1-q)) ||Phi(s*) - Phi_n(s*)||

    up to iteration slack.  Violations are recorded with their replay data.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    ladder = (1, 10, 100, 1000)
    violations = []
    max_ratio = 0.0
    checks = 0
    for trial in range(trials):
        d = int(rng.integers(1, 9))
        q = float(rng.uniform(0.05, 0.95))

        def unit_ball_matrix():
            m = rng.standard_normal((d, d))
            return m / np.linalg.norm(m, 2) * rng.uniform(0.3, 1.0)

        r_lim = unit_ball_matrix()
        r_far = unit_ball_matrix()
        c_lim = rng.standard_normal(d)
        c_far = rng.standard_normal(d)
        s_star = _iterate_to_fixed_point(q, r_lim, c_lim)
        for n in ladder:
            r_n = (1.0 - 1.0 / n) * r_lim + (1.0 / n) * r_far
            c_n = c_lim + (c_far - c_lim) / n
            s_n = _iterate_to_fixed_point(q, r_n, c_n)
            lhs = float(np.linalg.norm(s_n - s_star))
            gap = q * ((r_lim - r_n) @ s_star) + (c_lim - c_n)
            rhs = float(np.linalg.norm(gap)) / (1.0 - q) + 1e-9
            checks += 1
            if rhs > 0:
                max_ratio = max(max_ratio, lhs / rhs)
            if lhs > rhs:
                violations.append({"trial": trial, "n": n, "q": q, "d": d,
                                   "lhs": lhs, "rhs": rhs, "seed": seed})
    return FolkReport(trials=trials, checks=checks,
                      violations=tuple(violations), max_ratio=max_ratio)
