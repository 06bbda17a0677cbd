"""Experiment orchestration: single runs, sweeps, and stability analysis.

Each run owns a private random stream derived from (master seed, run
fingerprint), so a sweep's results are independent of scheduling and
worker count.  Results persist as one CSV row per logged step plus a
JSON summary.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import optimizers, schedules
from .errors import ConfigurationError, IngestionError
from .geometry import FeasibleSet, project
from .optimizers import OptimizerConfig, Trajectory
from .problems import StochasticProblem

RESULTS_HEADER = [
    "algo", "lr", "seed", "t", "f_gap", "eps_sq", "iterate_norm",
    "samples_used", "diverged",
]


@dataclass
class RunRecord:
    algorithm: str
    lr: float
    seed: int
    trajectory: Trajectory
    final_f_gap: float
    diverged: bool
    wall_time: float
    samples_total: int


@dataclass
class SweepGrid:
    problem: StochasticProblem
    feasible_set: FeasibleSet
    x1: np.ndarray
    algorithms: list[str]
    learning_rates: list[float]
    seeds: list[int]
    T: int
    n_log_points: int = 30
    weights: schedules.WeightSchedule | None = None
    momentum: schedules.MomentumSchedule | None = None
    workers: int = 1
    reference_value: float | None = None

    def __post_init__(self):
        if not (self.algorithms and self.learning_rates and self.seeds):
            raise ConfigurationError("sweep axes must be nonempty")
        lrs = list(self.learning_rates)
        if any(lr <= 0 for lr in lrs):
            raise ConfigurationError("learning rates must be strictly positive")
        if lrs != sorted(lrs):
            raise ConfigurationError("learning rates must be sorted ascending")


def log_space(start: float, stop: float, num: int) -> list[float]:
    """Geometrically spaced learning-rate grid."""
    if start <= 0 or stop <= start or num < 2:
        raise ConfigurationError("need 0 < start < stop and num >= 2")
    return [float(v) for v in np.geomspace(start, stop, num)]


def _fingerprint(config: OptimizerConfig) -> int:
    key = json.dumps(
        {
            "algorithm": config.algorithm,
            "eta": repr(config.eta),
            "T": config.T,
            "weights": repr(config.weights),
            "momentum": repr(config.momentum),
            "hb": [config.hb_momentum, config.hb_dampening],
        },
        sort_keys=True,
    )
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "big")


def run_stream(config: OptimizerConfig, master_seed: int) -> np.random.Generator:
    """Private stream for one run, stable in (master seed, config)."""
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence([master_seed, _fingerprint(config)])))


def run_single(problem: StochasticProblem, config: OptimizerConfig,
               master_seed: int) -> RunRecord:
    rng = run_stream(config, master_seed)
    start = time.perf_counter()
    traj = optimizers.run(problem, config, rng)
    elapsed = time.perf_counter() - start
    if traj.diverged or not traj.f_gap:
        final_gap = float("inf")
    else:
        final_gap = traj.f_gap[-1]
    return RunRecord(
        algorithm=config.algorithm,
        lr=config.eta,
        seed=master_seed,
        trajectory=traj,
        final_f_gap=final_gap,
        diverged=traj.diverged,
        wall_time=elapsed,
        samples_total=traj.samples_used[-1] if traj.samples_used else 0,
    )


def sweep(grid: SweepGrid) -> list[RunRecord]:
    """Run the cartesian product of the grid axes.

    Partial failures are recorded as diverged runs, never abort the sweep;
    results come back in canonical (algorithm, lr, seed) order regardless
    of scheduling.
    """
    jobs = []
    for algo in grid.algorithms:
        for lr in grid.learning_rates:
            for seed in grid.seeds:
                config = OptimizerConfig(
                    algorithm=algo, eta=lr, T=grid.T,
                    feasible_set=grid.feasible_set, x1=grid.x1,
                    weights=grid.weights, momentum=grid.momentum,
                    n_log_points=grid.n_log_points,
                    reference_value=grid.reference_value,
                )
                jobs.append((algo, lr, seed, config))

    def _one(job):
        algo, lr, seed, config = job
        try:
            return run_single(grid.problem, config, seed)
        except Exception as exc:  # recorded, not raised
            traj = Trajectory(algo, lr, gap_point="?")
            traj.diverged = True
            traj.extra["error"] = str(exc)
            return RunRecord(algo, lr, seed, traj, float("inf"), True, 0.0, 0)

    if grid.workers > 1:
        with ThreadPoolExecutor(max_workers=grid.workers) as pool:
            records = list(pool.map(_one, jobs))
    else:
        records = [_one(j) for j in jobs]
    records.sort(key=lambda r: (r.algorithm, r.lr, r.seed))
    return records


@dataclass
class StabilityEntry:
    algorithm: str
    eta_star: float
    best_metric: float
    eta_min: float
    eta_max: float
    ratio: float
    grid_limited: bool
    undefined: bool = False


def stability_ratio(records: list[RunRecord], algorithm: str,
                    factor: float = 2.0) -> StabilityEntry:
    """Width of the near-optimal learning-rate range on the swept grid.

    The metric is the mean final gap over seeds; the range is the maximal
    contiguous grid segment around the best grid point whose metric stays
    within ``factor`` of the best.  Grid resolution bounds the reported
    ratio from below, flagged via ``grid_limited``.
    """
    by_lr: dict[float, list[float]] = {}
    for r in records:
        if r.algorithm == algorithm:
            by_lr.setdefault(r.lr, []).append(r.final_f_gap)
    if len(by_lr) < 1:
        raise ConfigurationError(f"no records for algorithm {algorithm!r}")
    lrs = sorted(by_lr)
    metric = [float(np.mean(by_lr[lr])) for lr in lrs]
    if not np.any(np.isfinite(metric)):
        return StabilityEntry(algorithm, float("nan"), float("inf"),
                              float("nan"), float("nan"), float("nan"),
                              grid_limited=False, undefined=True)
    best_i = int(np.nanargmin(metric))
    threshold = factor * metric[best_i]
    lo = best_i
    while lo > 0 and metric[lo - 1] <= threshold:
        lo -= 1
    hi = best_i
    while hi < len(lrs) - 1 and metric[hi + 1] <= threshold:
        hi += 1
    return StabilityEntry(
        algorithm=algorithm,
        eta_star=lrs[best_i],
        best_metric=metric[best_i],
        eta_min=lrs[lo],
        eta_max=lrs[hi],
        ratio=lrs[hi] / lrs[lo],
        grid_limited=(lo == 0 or hi == len(lrs) - 1),
    )


def slope_fit(xs, ys) -> float:
    """Ordinary least-squares slope in log-log coordinates.

    Nonpositive points are excluded; fewer than 4 surviving points is an
    error (no meaningful rate can be read off).
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    keep = (xs > 0) & (ys > 0) & np.isfinite(ys)
    if int(np.sum(keep)) < 4:
        raise ConfigurationError("need at least 4 positive points for a slope fit")
    return float(np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)[0])


def eps_decay_slope(records: list[RunRecord], t_min: int = 1,
                    t_max: int | None = None) -> float:
    """Slope of the seed-mean squared estimator error against the step
    index, over the common logged steps of the given records."""
    by_t: dict[int, list[float]] = {}
    for r in records:
        for t, e in zip(r.trajectory.steps, r.trajectory.eps_sq):
            if np.isfinite(e):
                by_t.setdefault(t, []).append(e)
    ts = sorted(t for t in by_t if t >= t_min and (t_max is None or t <= t_max))
    return slope_fit(ts, [np.mean(by_t[t]) for t in ts])


def gap_vs_horizon_slope(records_by_T: dict[int, list[RunRecord]]) -> float:
    """Slope of the seed-mean final gap against the horizon length."""
    Ts = sorted(records_by_T)
    means = [float(np.mean([r.final_f_gap for r in records_by_T[T]])) for T in Ts]
    return slope_fit(Ts, means)


_optimum_cache: dict[int, tuple[np.ndarray, float, bool]] = {}


def solve_reference_optimum(problem: StochasticProblem, feasible_set: FeasibleSet,
                            tolerance: float = 1e-10,
                            max_iter: int = 10**6) -> tuple[np.ndarray, float, bool]:
    """Deterministic projected full-gradient descent with step 1/L.

    Stops when the norm of the projected-gradient mapping falls below the
    tolerance; returns (point, value, converged).  Cached per problem
    object so repeated gap evaluations are free.
    """
    key = id(problem)
    if key in _optimum_cache:
        return _optimum_cache[key]
    if problem.smoothness is None or problem.smoothness <= 0:
        raise ConfigurationError("reference solve needs a declared smoothness constant")
    step = 1.0 / problem.smoothness
    x = project(feasible_set, np.zeros(problem.dimension))
    converged = False
    for _ in range(max_iter):
        x_next = project(feasible_set, x - step * problem.exact_grad(x))
        mapping = float(np.linalg.norm(x - x_next)) / step
        x = x_next
        if mapping <= tolerance:
            converged = True
            break
    result = (x, float(problem.exact_value(x)), converged)
    _optimum_cache[key] = result
    return result


def write_results_csv(records: list[RunRecord], path) -> None:
    rows = []
    for r in records:
        traj = r.trajectory
        for i, t in enumerate(traj.steps):
            rows.append([
                r.algorithm, repr(r.lr), r.seed, t,
                repr(traj.f_gap[i]), repr(traj.eps_sq[i]),
                repr(traj.iterate_norm[i]), traj.samples_used[i],
                int(r.diverged),
            ])
    # schema self-check before touching disk
    for row in rows:
        if len(row) != len(RESULTS_HEADER):
            raise IngestionError("internal schema violation in results rows")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        writer.writerows(rows)


def read_results_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RESULTS_HEADER:
            raise IngestionError(f"unexpected results header {header!r}")
        out = []
        for row in reader:
            out.append({
                "algo": row[0], "lr": float(row[1]), "seed": int(row[2]),
                "t": int(row[3]), "f_gap": float(row[4]), "eps_sq": float(row[5]),
                "iterate_norm": float(row[6]), "samples_used": int(row[7]),
                "diverged": bool(int(row[8])),
            })
    return out


def summarize_rows(rows: list[dict], factor: float = 2.0) -> dict:
    """Per-(algo, lr) summary plus stability report, from CSV rows.

    Pure function of the row data, so re-running analysis over a stored
    CSV reproduces the identical summary.
    """
    finals: dict[tuple[str, float], dict[int, tuple[int, float, bool]]] = {}
    for row in rows:
        key = (row["algo"], row["lr"])
        per_seed = finals.setdefault(key, {})
        prev = per_seed.get(row["seed"])
        if prev is None or row["t"] >= prev[0]:
            per_seed[row["seed"]] = (row["t"], row["f_gap"], row["diverged"])
    cells = []
    per_algo: dict[str, list[tuple[float, float]]] = {}
    for (algo, lr), per_seed in sorted(finals.items()):
        gaps = [float("inf") if div else g for (_, g, div) in per_seed.values()]
        mean = float(np.mean(gaps))
        cells.append({
            "algo": algo, "lr": lr,
            "mean_f_gap": mean,
            "max_f_gap": float(np.max(gaps)),
            "q95_f_gap": float(np.quantile(gaps, 0.95)) if np.all(np.isfinite(gaps)) else float("inf"),
            "n_seeds": len(gaps),
            "n_diverged": int(sum(1 for (_, _, div) in per_seed.values() if div)),
        })
        per_algo.setdefault(algo, []).append((lr, mean))

    slopes = {}
    decay: dict[str, dict[int, list[float]]] = {}
    for row in rows:
        if np.isfinite(row["eps_sq"]) and row["eps_sq"] > 0 and not row["diverged"]:
            decay.setdefault(row["algo"], {}).setdefault(row["t"], []).append(row["eps_sq"])
    for algo, by_t in decay.items():
        ts = sorted(by_t)
        try:
            slopes[algo] = {"eps_decay": slope_fit(ts, [float(np.mean(by_t[t])) for t in ts])}
        except ConfigurationError:
            slopes[algo] = {"eps_decay": None}

    stability = {}
    for algo, pts in per_algo.items():
        pts.sort()
        lrs = [p[0] for p in pts]
        metric = [p[1] for p in pts]
        if len(lrs) < 3 or not np.any(np.isfinite(metric)):
            stability[algo] = {"undefined": True}
            continue
        best_i = int(np.nanargmin(metric))
        threshold = factor * metric[best_i]
        lo, hi = best_i, best_i
        while lo > 0 and metric[lo - 1] <= threshold:
            lo -= 1
        while hi < len(lrs) - 1 and metric[hi + 1] <= threshold:
            hi += 1
        stability[algo] = {
            "eta_star": lrs[best_i], "best_metric": metric[best_i],
            "eta_min": lrs[lo], "eta_max": lrs[hi],
            "ratio": lrs[hi] / lrs[lo],
            "grid_limited": lo == 0 or hi == len(lrs) - 1,
            "grid_points": len(lrs),
        }
    return {"cells": cells, "stability": stability, "slopes": slopes, "factor": factor}
