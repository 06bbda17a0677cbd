"""Run-configuration parsing: TOML file -> problem, set, schedules, grid."""

from __future__ import annotations

import json
import os
from typing import Any

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import geometry, harness, problems, schedules
from .errors import ConfigurationError

PROBLEM_KINDS = {
    "additive_quadratic": {
        "constants": "L = 1, sigma as configured, sigma_L = 0",
        "params": "dimension, sigma, x_star",
    },
    "curvature_quadratic": {
        "constants": "L = 1 + c, sigma_L^2 = c^2 / 3, sigma from the set's reach",
        "params": "dimension, c, x_star",
    },
    "finite_sum_csv": {
        "constants": "L from the record norms; sigma, sigma_L estimated on demand",
        "params": "path, loss (logistic | squared)",
    },
}


def load_config(path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def apply_overrides(cfg: dict, overrides: list[str]) -> dict:
    """Apply repeatable ``--set key=value`` pairs after the file parse.

    Dotted keys address nested tables; the shorthands ``lr``, ``seed``,
    ``algo`` and ``T`` map onto the run table.
    """
    shorthand = {
        "lr": ("run", "learning_rates", lambda v: [v]),
        "seed": ("run", "seeds", lambda v: [v]),
        "algo": ("run", "algorithms", lambda v: [v]),
        "T": ("run", "T", lambda v: v),
    }
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        if key in shorthand:
            table, field, wrap = shorthand[key]
            cfg.setdefault(table, {})[field] = wrap(value)
            continue
        parts = key.split(".")
        node = cfg
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = value
    return cfg


def _vector(value: Any, dimension: int, name: str) -> np.ndarray:
    if isinstance(value, (int, float)):
        return np.full(dimension, float(value))
    arr = np.asarray(value, dtype=float)
    if arr.size != dimension:
        raise ConfigurationError(f"{name} has {arr.size} entries, expected {dimension}")
    return arr


def build_feasible_set(cfg: dict, dimension: int) -> geometry.FeasibleSet:
    spec = cfg.get("set", {"kind": "ball", "center": 0.0, "radius": 1.0})
    kind = spec.get("kind")
    if kind == "ball":
        return geometry.ball(_vector(spec.get("center", 0.0), dimension, "center"),
                             float(spec.get("radius", 1.0)))
    if kind == "box":
        if "lower" not in spec or "upper" not in spec:
            raise ConfigurationError("box set needs lower and upper")
        return geometry.box(_vector(spec["lower"], dimension, "lower"),
                            _vector(spec["upper"], dimension, "upper"))
    if kind == "unconstrained":
        return geometry.unconstrained(dimension, float(spec.get("diameter", 1.0)))
    raise ConfigurationError(f"unknown set kind {kind!r}")


def build_problem(cfg: dict) -> tuple[problems.StochasticProblem, geometry.FeasibleSet]:
    spec = cfg.get("problem")
    if not spec or "kind" not in spec:
        raise ConfigurationError("config needs a [problem] table with a kind")
    kind = spec["kind"]
    if kind == "additive_quadratic":
        d = int(spec.get("dimension", 2))
        feasible = build_feasible_set(cfg, d)
        prob = problems.make_additive_quadratic(
            d, _vector(spec.get("x_star", 0.0), d, "x_star"), float(spec.get("sigma", 0.0)))
    elif kind == "curvature_quadratic":
        d = int(spec.get("dimension", 2))
        feasible = build_feasible_set(cfg, d)
        prob = problems.make_curvature_quadratic(
            d, _vector(spec.get("x_star", 0.0), d, "x_star"), float(spec.get("c", 0.0)),
            feasible_set=feasible)
    elif kind == "finite_sum_csv":
        if "path" not in spec:
            raise ConfigurationError("finite_sum_csv needs a path")
        prob = problems.load_csv_corpus(spec["path"], loss=spec.get("loss", "logistic"))
        feasible = build_feasible_set(cfg, prob.dimension)
    else:
        raise ConfigurationError(f"unknown problem kind {kind!r}")
    return prob, feasible


def build_schedules(cfg: dict):
    spec = cfg.get("schedules", {})
    weights = momentum = None
    alpha = spec.get("alpha")
    if alpha == "linear":
        weights = schedules.linear_weights()
    elif alpha == "uniform":
        weights = schedules.uniform_weights()
    elif isinstance(alpha, dict) and "gamma" in alpha:
        weights = schedules.fixed_gamma_weights(float(alpha["gamma"]))
    elif alpha is not None:
        raise ConfigurationError(f"unknown alpha schedule {alpha!r}")
    beta = spec.get("beta")
    if beta == "inverse_alpha":
        momentum = schedules.inverse_alpha_momentum()
    elif beta == "inverse_t":
        momentum = schedules.inverse_t_momentum()
    elif isinstance(beta, dict) and "fixed" in beta:
        momentum = schedules.fixed_momentum(float(beta["fixed"]))
    elif beta is not None:
        raise ConfigurationError(f"unknown beta schedule {beta!r}")
    return weights, momentum


def build_x1(cfg: dict, feasible: geometry.FeasibleSet) -> np.ndarray:
    value = cfg.get("run", {}).get("x_init", "boundary")
    d = feasible.dimension
    if value == "boundary" and feasible.variant == "euclidean_ball":
        x = np.array(feasible.center)
        x[0] += feasible.radius
        return x
    if isinstance(value, str):
        return geometry.project(feasible, np.zeros(d))
    return geometry.project(feasible, _vector(value, d, "x_init"))


def default_workers() -> int:
    env = os.environ.get("MU2OPT_WORKERS")
    return int(env) if env else 1


def build_grid(cfg: dict) -> harness.SweepGrid:
    prob, feasible = build_problem(cfg)
    run = cfg.get("run", {})
    if "T" not in run:
        raise ConfigurationError("run table needs a horizon T")
    lrs = run.get("learning_rates")
    if lrs is None and "lr_log_space" in run:
        start, stop, num = run["lr_log_space"]
        lrs = harness.log_space(float(start), float(stop), int(num))
    if not lrs:
        raise ConfigurationError("run table needs learning_rates or lr_log_space")
    weights, momentum = build_schedules(cfg)
    reference = None
    if prob.optimum_value is None:
        _, reference, _ = harness.solve_reference_optimum(
            prob, feasible, tolerance=float(run.get("reference_tolerance", 1e-9)))
    return harness.SweepGrid(
        problem=prob,
        feasible_set=feasible,
        x1=build_x1(cfg, feasible),
        algorithms=list(run.get("algorithms", ["sgd"])),
        learning_rates=sorted(float(v) for v in lrs),
        seeds=[int(s) for s in run.get("seeds", [0])],
        T=int(run["T"]),
        n_log_points=int(run.get("log_points", 30)),
        weights=weights,
        momentum=momentum,
        workers=int(run.get("workers", default_workers())),
        reference_value=reference,
    )
