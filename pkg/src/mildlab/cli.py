"""Configuration-driven experiment runner.

``mildlab run config.toml`` builds the requested model, sweeps the
perturbation parameter with the requested solver(s) and writes four artifacts
into the output directory: ``report.json`` (errors and classification),
``errors.csv`` (flat rows for plotting), ``model-card.md`` (the continuum
model and how it was discretised) and ``solver-diagnostics.json`` (iteration
counts, measured contraction factors, dissipativity bounds).  Runs are
deterministic given the config and seed.

``mildlab validate config.toml`` parses and checks a config without running.
Exit codes: 0 success, 2 configuration problem, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .convergence import sweep
from .errors import ConfigError, MildLabError
from .models import (
    DEFAULT_EPSILON_SWEEP,
    DEFAULT_KAPPA_SWEEP,
    MckParams,
    PoolGeometry,
    beta_on_resting_pool,
    build_custom_matrix,
    build_keener,
    build_mck,
    build_neuro,
    build_thin_layer_pair,
    cubic_activator_inhibitor,
    keener_initial,
    mck_initial,
    neuro_initial,
    thin_layer_initial,
)
from .models.custom import custom_matrix_model_card
from .models.keener import keener_model_card
from .models.mck import mck_model_card
from .models.neuro import neuro_model_card
from .models.thin_layer import thin_layer_model_card
from .operators import dissipativity_check
from .solver import BieleckiWeight, contraction_diagnostics

MODELS = ("keener", "mck", "thin_layer", "neuro", "custom_matrix")
SOLVER_CHOICES = ("picard", "expeuler", "both")

CSV_SCHEMA = "# mildlab-errors-v1"
CSV_HEADER = "param,l1_0_tau,sup_delta_tau,sup_0_tau,solver"


@dataclass
class ExperimentConfig:
    """A fully resolved experiment description."""

    model: str
    solver: str = "picard"
    tau: float = 1.0
    delta: float | None = None
    M: int = 256
    sweep: list = field(default_factory=list)
    seed: int = 0
    out: str = "mildlab-out"
    threads: int = 1
    tol: float = 1e-10
    max_iter: int = 200
    initial: dict = field(default_factory=dict)
    model_params: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        data = asdict(self)
        data["delta"] = self.delta if self.delta is not None else 0.1 * self.tau
        return data


def _take(table: dict, key: str, kinds, default, *, where: str,
          required: bool = False, check=None):
    if key not in table:
        if required:
            raise ConfigError(f"missing required field '{where}{key}'", field=where + key)
        return default
    value = table.pop(key)
    if kinds is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kinds is int and isinstance(value, bool):
        raise ConfigError(f"field '{where}{key}' must be an integer", field=where + key)
    if not isinstance(value, kinds if isinstance(kinds, tuple) else (kinds,)):
        raise ConfigError(
            f"field '{where}{key}' has the wrong type ({type(value).__name__})",
            field=where + key)
    if check is not None and not check(value):
        raise ConfigError(f"field '{where}{key}' is out of range: {value!r}",
                          field=where + key)
    return value


def _reject_unknown(table: dict, where: str) -> None:
    if table:
        name = sorted(table)[0]
        raise ConfigError(f"unknown field '{where}{name}'", field=where + name)


def _float_list(value, *, where: str, key: str, positive: bool = False) -> list:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"field '{where}{key}' must be a nonempty list",
                          field=where + key)
    out = []
    for item in value:
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigError(f"field '{where}{key}' must contain numbers",
                              field=where + key)
        if positive and item <= 0:
            raise ConfigError(f"field '{where}{key}' entries must be positive",
                              field=where + key)
        out.append(float(item))
    return out


def parse_config(data: dict) -> ExperimentConfig:
    """Validate a raw config mapping; unknown keys anywhere are rejected."""
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a table")
    data = dict(data)
    model = _take(data, "model", str, None, where="", required=True)
    model = model.replace("-", "_")
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r} (choose from {', '.join(MODELS)})",
                          field="model")
    solver = _take(data, "solver", str, "picard", where="",
                   check=lambda v: v in SOLVER_CHOICES)
    tau = _take(data, "tau", float, 1.0, where="", check=lambda v: v > 0)
    delta = _take(data, "delta", float, None, where="",
                  check=lambda v: 0.0 <= v)
    if delta is not None and delta >= tau:
        raise ConfigError(f"delta={delta} must be smaller than tau={tau}", field="delta")
    m_steps = _take(data, "M", int, 256, where="", check=lambda v: v >= 2)
    sweep_list = data.pop("sweep", None)
    if sweep_list is not None:
        sweep_list = _float_list(sweep_list, where="", key="sweep", positive=True)
    seed = _take(data, "seed", int, 0, where="", check=lambda v: v >= 0)
    out = _take(data, "out", str, "mildlab-out", where="")
    threads = _take(data, "threads", int, 1, where="", check=lambda v: v >= 1)
    tol = _take(data, "tol", float, 1e-10, where="", check=lambda v: v > 0)
    max_iter = _take(data, "max_iter", int, 200, where="", check=lambda v: v >= 1)
    initial = _take(data, "initial", dict, {}, where="")
    model_params = _take(data, "model_params", dict, {}, where="")
    _reject_unknown(data, "")
    cfg = ExperimentConfig(model=model, solver=solver, tau=tau, delta=delta,
                           M=m_steps, sweep=sweep_list or [], seed=seed, out=out,
                           threads=threads, tol=tol, max_iter=max_iter,
                           initial=dict(initial), model_params=dict(model_params))
    build_experiment(cfg)  # full validation pass, result discarded
    return cfg


def _initial_values(cfg: ExperimentConfig, builders: dict, dim: int) -> np.ndarray:
    table = dict(cfg.initial)
    values = table.pop("values", None)
    if values is not None:
        _reject_unknown(table, "initial.")
        vec = np.asarray(_float_list(values, where="initial.", key="values"), dtype=float)
        if vec.shape != (dim,):
            raise ConfigError(
                f"inline initial vector has length {vec.shape[0]}, expected {dim}",
                field="initial.values")
        return vec
    preset = _take(table, "preset", str, builders["default_preset"], where="initial.")
    kwargs = {}
    for key in ("baseline", "amplitude", "u3"):
        if key in table:
            kwargs[key] = _take(table, key, float, None, where="initial.")
    _reject_unknown(table, "initial.")
    try:
        return builders["preset"](preset, **kwargs)
    except (ValueError, TypeError) as err:
        raise ConfigError(f"initial preset failed: {err}", field="initial.preset") from err


def build_experiment(cfg: ExperimentConfig):
    """Construct (ModelPair, initial StateVector, model card) from a config."""
    params = dict(cfg.model_params)
    where = "model_params."
    sweep_values = list(cfg.sweep)

    if cfg.model == "keener":
        n = _take(params, "N", int, 64, where=where, check=lambda v: v >= 8)
        d_a = _take(params, "d_a", float, 1e-3, where=where, check=lambda v: v > 0)
        clip = _take(params, "clip", float, 2.0, where=where, check=lambda v: v >= 1)
        _reject_unknown(params, where)
        f1, f2, lip1, lip2 = cubic_activator_inhibitor(clip)
        sweep_values = sweep_values or list(DEFAULT_KAPPA_SWEEP)
        pair = build_keener(n, d_a, f1, f2, sweep_values, lip1=lip1, lip2=lip2,
                            clip_lo=-clip, clip_hi=clip)
        builders = {"default_preset": "bump-in-fast-component",
                    "preset": lambda name, **kw: keener_initial(n, name, **kw)}
        card = keener_model_card(n, d_a, sweep_values, -clip, clip)
    elif cfg.model == "mck":
        n = _take(params, "N", int, 48, where=where, check=lambda v: v >= 8)
        rates = {}
        for key in ("p", "d_c", "d_b", "d", "d_g"):
            value = _take(params, key, float, None, where=where)
            if value is not None:
                rates[key] = value
        clip_box = params.pop("clip_box", [10.0, 10.0, 10.0])
        clip_box = _float_list(clip_box, where=where, key="clip_box", positive=True)
        if len(clip_box) != 3:
            raise ConfigError("clip_box needs exactly three bounds",
                              field=where + "clip_box")
        _reject_unknown(params, where)
        try:
            mck_params = MckParams(**rates)
        except ValueError as err:
            raise ConfigError(str(err), field=where) from err
        sweep_values = sweep_values or list(DEFAULT_KAPPA_SWEEP)
        pair = build_mck(n, mck_params, tuple(clip_box), sweep_values)
        builders = {"default_preset": "bump-in-fast-component",
                    "preset": lambda name, **kw: mck_initial(n, name, **kw)}
        card = mck_model_card(n, mck_params, clip_box, sweep_values)
    elif cfg.model == "thin_layer":
        nx = _take(params, "Nx", int, 20, where=where, check=lambda v: v >= 4)
        nz = _take(params, "Nz", int, 16, where=where, check=lambda v: v >= 4)
        c_vec = _profile(params.pop("c", 0.6), nx, where + "c")
        d_vec = _profile(params.pop("d", 0.4), nx, where + "d")
        reaction = _take(params, "reaction", str, "logistic", where=where,
                         check=lambda v: v in ("none", "logistic"))
        rate = _take(params, "reaction_rate", float, 0.5, where=where,
                     check=lambda v: v >= 0)
        _reject_unknown(params, where)
        sweep_values = sweep_values or list(DEFAULT_EPSILON_SWEEP)
        try:
            pair = build_thin_layer_pair(nx, nz, c_vec, d_vec, sweep_values,
                                         reaction=reaction, reaction_rate=rate)
        except ValueError as err:
            raise ConfigError(str(err), field=where) from err
        builders = {"default_preset": "bump-in-fast-component",
                    "preset": lambda name, **kw: thin_layer_initial(nx, nz, name, **kw)}
        card = thin_layer_model_card(nx, nz, c_vec, d_vec, sweep_values)
    elif cfg.model == "neuro":
        n = _take(params, "N", int, 120, where=where, check=lambda v: v >= 12)
        geo_kwargs = {}
        for key in ("a", "b", "p12", "p21", "p23", "p32", "robin", "diffusion"):
            value = _take(params, key, float, None, where=where)
            if value is not None:
                geo_kwargs[key] = value
        u_sharp = _take(params, "u_sharp", float, 1.0, where=where,
                        check=lambda v: v > 0)
        beta_spec = params.pop("beta", 2.0)
        _reject_unknown(params, where)
        try:
            geom = PoolGeometry(**geo_kwargs)
            if isinstance(beta_spec, list):
                beta = np.asarray(_float_list(beta_spec, where=where, key="beta"))
            else:
                if isinstance(beta_spec, bool) or not isinstance(beta_spec, (int, float)):
                    raise ConfigError("beta must be a number or a list",
                                      field=where + "beta")
                beta = beta_on_resting_pool(geom, n, float(beta_spec))
            sweep_values = sweep_values or list(DEFAULT_KAPPA_SWEEP)
            pair = build_neuro(n, geom, beta, u_sharp, sweep_values)
        except ValueError as err:
            raise ConfigError(str(err), field=where) from err
        builders = {"default_preset": "pool-step",
                    "preset": lambda name, **kw: neuro_initial(geom, n, name,
                                                               u_sharp=u_sharp, **kw)}
        card = neuro_model_card(n, geom, u_sharp, sweep_values)
    else:  # custom_matrix
        matrix = params.pop("matrix", None)
        if matrix is None:
            raise ConfigError("custom_matrix requires 'matrix'",
                              field=where + "matrix")
        coupling = params.pop("coupling", None)
        _reject_unknown(params, where)
        try:
            matrix = np.asarray(matrix, dtype=float)
            if coupling is not None:
                coupling = np.asarray(coupling, dtype=float)
            sweep_values = sweep_values or list(DEFAULT_KAPPA_SWEEP)
            pair = build_custom_matrix(matrix, sweep_values, coupling=coupling)
        except (ValueError, MildLabError) as err:
            raise ConfigError(f"custom matrix rejected: {err}",
                              field=where + "matrix") from err
        dim = pair.dim

        def flat_preset(name, baseline=1.0, **kw):
            if name != "flat":
                raise ValueError(f"custom_matrix only supports the 'flat' preset, got {name!r}")
            return np.full(dim, baseline)

        builders = {"default_preset": "flat", "preset": flat_preset}
        card = custom_matrix_model_card(matrix, sweep_values)

    x = pair.state(_initial_values(cfg, builders, pair.dim))
    return pair, x, card


def _profile(value, nx: int, field_name: str) -> np.ndarray:
    if isinstance(value, list):
        vec = np.asarray(_float_list(value, where="", key=field_name), dtype=float)
        if vec.shape != (nx,):
            raise ConfigError(f"profile '{field_name}' needs {nx} entries",
                              field=field_name)
        return vec
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"profile '{field_name}' must be a number or list",
                          field=field_name)
    if value < 0:
        raise ConfigError(f"profile '{field_name}' must be nonnegative",
                          field=field_name)
    return np.full(nx, float(value))


def load_config(path) -> ExperimentConfig:
    """Read a TOML (or .json) experiment file and validate it."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        if path.suffix == ".json":
            data = json.loads(path.read_text())
        else:
            with open(path, "rb") as handle:
                data = tomllib.load(handle)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as err:
        raise ConfigError(f"could not parse {path}: {err}") from err
    return parse_config(data)


def _solver_list(solver: str) -> list:
    return ["picard", "expeuler"] if solver == "both" else [solver]


def _diagnostics_extras(pair, cfg: ExperimentConfig) -> dict:
    lam = 2.0 * pair.nonlinearity.lipschitz_L if pair.nonlinearity.lipschitz_L > 0 else 1.0
    weight = BieleckiWeight(lam)
    measured = contraction_diagnostics(
        pair.family(pair.sweep[0]), pair.nonlinearity, weight, probes=3,
        tau=cfg.tau, M=min(cfg.M, 64), norm_kind=pair.norm_kind,
        weights=pair.weights, seed=cfg.seed)
    extremes = {}
    for label, param in (("first", pair.sweep[0]), ("last", pair.sweep[-1])):
        bound = dissipativity_check(pair.family(param), samples=3,
                                    norm_kind=pair.norm_kind,
                                    weights=pair.weights, seed=cfg.seed)
        extremes[label] = {"param": param, "measured_sup_bound": bound}
    return {
        "contraction": {"lam": lam,
                        "analytic_bound": pair.nonlinearity.lipschitz_L / lam,
                        "measured": measured},
        "dissipativity": extremes,
    }


def run_experiment(config_path, out_dir=None, seed=None, threads=None,
                   solver=None) -> int:
    """Run one experiment end to end; returns the process exit code."""
    try:
        cfg = load_config(config_path)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    if seed is not None:
        cfg.seed = seed
    if threads is not None:
        cfg.threads = threads
    elif os.environ.get("MILDLAB_THREADS"):
        try:
            cfg.threads = max(1, int(os.environ["MILDLAB_THREADS"]))
        except ValueError:
            print("ignoring malformed MILDLAB_THREADS", file=sys.stderr)
    if solver is not None:
        if solver not in SOLVER_CHOICES:
            print(f"config error: unknown solver {solver!r}", file=sys.stderr)
            return 2
        cfg.solver = solver
    out = Path(out_dir) if out_dir is not None else Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    pair, x, card = build_experiment(cfg)
    delta = cfg.delta if cfg.delta is not None else 0.1 * cfg.tau
    results = {}
    diagnostics = {"solvers": {}}
    status = "ok"
    failure = None
    for name in _solver_list(cfg.solver):
        try:
            report, diag = sweep(pair, x, tau=cfg.tau, delta=delta, M=cfg.M,
                                 solver=name, tol=cfg.tol, max_iter=cfg.max_iter,
                                 threads=cfg.threads, full_output=True)
        except MildLabError as err:
            status = "partial" if results else "failed"
            failure = {"solver": name, "error": str(err),
                       "param": getattr(err, "param", None)}
            break
        results[name] = report
        diagnostics["solvers"][name] = diag
    diagnostics.update(_diagnostics_extras(pair, cfg))

    gap = x.values - pair.projection.apply(x.values)
    report_doc = {
        "schema": "mildlab-report-v1",
        "status": status,
        "model": pair.name,
        "config": cfg.resolved(),
        "initial": {
            "norm": x.norm(),
            "gap_norm": float(pair.state(gap).norm()),
            "in_regularity_space": pair.in_regularity_space(x),
        },
        "results": {name: rep.as_dict() for name, rep in results.items()},
    }
    if failure is not None:
        report_doc["failure"] = failure

    (out / "report.json").write_text(json.dumps(report_doc, indent=2, sort_keys=True) + "\n")
    lines = [CSV_SCHEMA, CSV_HEADER]
    for name, rep in results.items():
        for param, l1, sup_d, sup_0 in rep.csv_rows():
            lines.append(f"{param!r},{l1!r},{sup_d!r},{sup_0!r},{name}")
    (out / "errors.csv").write_text("\n".join(lines) + "\n")
    (out / "model-card.md").write_text(card)
    (out / "solver-diagnostics.json").write_text(
        json.dumps(diagnostics, indent=2, sort_keys=True) + "\n")

    if status != "ok":
        print(f"solver failure ({failure['solver']}): {failure['error']}",
              file=sys.stderr)
        return 3
    for name, rep in results.items():
        print(f"{pair.name} [{name}]: {rep.classification} "
              f"(floor {rep.floor_estimate:.3e})")
    return 0


def validate(config_path) -> int:
    """Parse and fully check a config; echo the resolved values on success."""
    try:
        cfg = load_config(config_path)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    print(json.dumps(cfg.resolved(), indent=2, sort_keys=True))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mildlab",
        description="mild-solution convergence experiments under singular perturbation")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run an experiment config")
    run_p.add_argument("config")
    run_p.add_argument("--out", help="output directory (overrides the config)")
    run_p.add_argument("--seed", type=int, help="seed override")
    run_p.add_argument("--threads", type=int, help="sweep-point parallelism")
    run_p.add_argument("--solver", choices=SOLVER_CHOICES, help="solver override")
    val_p = sub.add_parser("validate", help="check a config without running")
    val_p.add_argument("config")
    args = parser.parse_args(argv)
    if args.command == "run":
        return run_experiment(args.config, out_dir=args.out, seed=args.seed,
                              threads=args.threads, solver=args.solver)
    return validate(args.config)


if __name__ == "__main__":
    sys.exit(main())
