"""Iterate-update rules producing metric trajectories under a fixed step size.

Baselines (projected SGD, heavy-ball, averaged-query SGD, corrected
momentum) plus the double-momentum methods: the plain variant in three
schedule flavors, the decaying-batch variant, and the extragradient
variant.  Every run is driven by one seeded generator and is
deterministic given (config, stream).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import estimator as est
from . import schedules
from .errors import ConfigurationError
from .geometry import FeasibleSet, project
from .problems import StochasticProblem, draw_sample, stoch_grad
from .schedules import MomentumSchedule, WeightSchedule

ALGORITHMS = (
    "sgd",
    "heavy_ball",
    "anytime_sgd",
    "storm",
    "mu2_sgd",
    "mu2_sgd_uniform",
    "mu2_sgd_batched",
    "mu2_sgd_fixed",
    "mu2_extra_sgd",
)


@dataclass
class OptimizerConfig:
    algorithm: str
    eta: float
    T: int
    feasible_set: FeasibleSet
    x1: np.ndarray
    weights: WeightSchedule | None = None
    momentum: MomentumSchedule | None = None
    hb_momentum: float = 0.9
    hb_dampening: float = 0.9
    n_log_points: int = 30
    stop_grad_norm: float | None = None
    record_iterates: bool = False
    reference_value: float | None = None

    def __post_init__(self):
        if self.eta < 0:
            raise ConfigurationError(f"learning rate must be nonnegative, got {self.eta}")
        if self.T < 1:
            raise ConfigurationError(f"horizon must be >= 1, got {self.T}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm tag {self.algorithm!r}")


@dataclass
class Trajectory:
    algorithm: str
    eta: float
    gap_point: str  # "x" (averaged query) or "w" (raw iterate)
    steps: list[int] = field(default_factory=list)
    f_gap: list[float] = field(default_factory=list)
    eps_sq: list[float] = field(default_factory=list)
    iterate_norm: list[float] = field(default_factory=list)
    samples_used: list[int] = field(default_factory=list)
    diverged: bool = False
    output: np.ndarray | None = None
    extra: dict = field(default_factory=dict)


def _log_steps(T: int, n_points: int) -> set[int]:
    if T == 1:
        return {1}
    pts = np.unique(np.round(np.geomspace(1, T, num=max(2, n_points))).astype(int))
    return set(int(p) for p in pts) | {1, T}


class _Recorder:
    """Accumulates logged rows and the divergence flag for one run."""

    def __init__(self, problem: StochasticProblem, config: OptimizerConfig, gap_point: str):
        self.problem = problem
        self.config = config
        self.traj = Trajectory(config.algorithm, config.eta, gap_point)
        self.logset = _log_steps(config.T, config.n_log_points)
        ref = config.reference_value
        if ref is None:
            ref = problem.optimum_value
        self.reference = ref

    def check_finite(self, t: int, point: np.ndarray) -> bool:
        if np.all(np.isfinite(point)):
            return True
        self.traj.diverged = True
        self.traj.extra["last_finite_t"] = t - 1
        return False

    def log(self, t: int, point: np.ndarray, d: np.ndarray | None, samples: int):
        if t not in self.logset:
            return
        if self.reference is not None and self.problem.exact_value is not None:
            gap = self.problem.exact_value(point) - self.reference
        else:
            gap = float("nan")
        if d is not None and self.problem.exact_grad is not None:
            err = d - self.problem.exact_grad(point)
            e2 = float(np.dot(err, err))
        else:
            e2 = float("nan")
        self.traj.steps.append(t)
        self.traj.f_gap.append(float(gap))
        self.traj.eps_sq.append(e2)
        self.traj.iterate_norm.append(float(np.linalg.norm(point)))
        self.traj.samples_used.append(samples)


def run_sgd(problem: StochasticProblem, config: OptimizerConfig,
            rng: np.random.Generator) -> Trajectory:
    rec = _Recorder(problem, config, gap_point="w")
    K = config.feasible_set
    w = project(K, np.asarray(config.x1, dtype=float))
    samples = 0
    rec.log(1, w, None, samples)
    for t in range(1, config.T):
        g = stoch_grad(problem, w, draw_sample(problem, rng))
        samples += 1
        w = project(K, w - config.eta * g)
        if not rec.check_finite(t + 1, w):
            break
        rec.log(t + 1, w, None, samples)
    rec.traj.output = w
    return rec.traj


def run_heavy_ball(problem: StochasticProblem, config: OptimizerConfig,
                   rng: np.random.Generator) -> Trajectory:
    rec = _Recorder(problem, config, gap_point="w")
    K = config.feasible_set
    w = project(K, np.asarray(config.x1, dtype=float))
    buf = None
    samples = 0
    rec.log(1, w, None, samples)
    for t in range(1, config.T):
        g = stoch_grad(problem, w, draw_sample(problem, rng))
        samples += 1
        if buf is None:
            buf = g  # no dampening on the first step
        else:
            buf = config.hb_momentum * buf + (1.0 - config.hb_dampening) * g
        w = project(K, w - config.eta * buf)
        if not rec.check_finite(t + 1, w):
            break
        rec.log(t + 1, w, None, samples)
    rec.traj.output = w
    return rec.traj


def run_anytime_sgd(problem: StochasticProblem, config: OptimizerConfig,
                    rng: np.random.Generator) -> Trajectory:
    weights = config.weights or schedules.linear_weights()
    rec = _Recorder(problem, config, gap_point="x")
    K = config.feasible_set
    w = project(K, np.asarray(config.x1, dtype=float))
    avg = est.QueryAverage(weights, w)
    iterates = [w.copy()] if config.record_iterates else None
    samples = 0
    rec.log(1, avg.x, None, samples)
    for t in range(1, config.T):
        g = stoch_grad(problem, avg.x, draw_sample(problem, rng))
        samples += 1
        w = project(K, w - config.eta * schedules.alpha(weights, t) * g)
        if not rec.check_finite(t + 1, w):
            break
        x = avg.push(w)
        if iterates is not None:
            iterates.append(w.copy())
        rec.log(t + 1, x, None, samples)
    rec.traj.output = avg.x
    if iterates is not None:
        rec.traj.extra["iterates"] = iterates
    return rec.traj


def run_storm(problem: StochasticProblem, config: OptimizerConfig,
              rng: np.random.Generator) -> Trajectory:
    weights = config.weights or schedules.linear_weights()
    momentum = config.momentum or schedules.inverse_t_momentum()
    rec = _Recorder(problem, config, gap_point="w")
    K = config.feasible_set
    w1 = project(K, np.asarray(config.x1, dtype=float))
    state = est.storm_init(problem, w1, rng, weights, momentum)
    rec.log(1, state.w, state.d, state.samples_used)
    for t in range(1, config.T):
        w_next = project(K, state.w - config.eta * state.d)
        if not rec.check_finite(t + 1, w_next):
            break
        est.storm_update(state, w_next, problem, rng)
        rec.log(t + 1, state.w, state.d, state.samples_used)
    rec.traj.output = state.w
    return rec.traj


def _mu2_schedules(config: OptimizerConfig) -> tuple[WeightSchedule, MomentumSchedule]:
    defaults = {
        "mu2_sgd": (schedules.linear_weights(), schedules.inverse_alpha_momentum()),
        "mu2_sgd_batched": (schedules.linear_weights(), schedules.inverse_alpha_momentum()),
        "mu2_sgd_uniform": (schedules.uniform_weights(), schedules.inverse_t_momentum()),
        "mu2_sgd_fixed": (schedules.fixed_gamma_weights(0.1), schedules.fixed_momentum(0.9)),
    }
    w_def, m_def = defaults[config.algorithm]
    return config.weights or w_def, config.momentum or m_def


def run_mu2_sgd(problem: StochasticProblem, config: OptimizerConfig,
                rng: np.random.Generator) -> Trajectory:
    """Double-momentum SGD.  Weighted schedules scale the step by the
    current weight; the fixed-coefficient heuristic applies the raw step."""
    weights, momentum = _mu2_schedules(config)
    batched = config.algorithm == "mu2_sgd_batched"
    scale_by_alpha = weights.kind != "fixed_gamma"
    rec = _Recorder(problem, config, gap_point="x")
    K = config.feasible_set
    w = project(K, np.asarray(config.x1, dtype=float))
    init_batch = int(np.ceil(config.T)) if batched else 1
    state = est.mu2_init(problem, w, rng, weights, momentum, batch=init_batch)
    rec.log(1, state.x, state.d, state.samples_used)
    for t in range(1, config.T):
        if config.stop_grad_norm is not None and \
                float(np.linalg.norm(state.d)) <= config.stop_grad_norm:
            rec.traj.extra["stopped_early"] = t
            break
        step = config.eta * schedules.alpha(weights, t) if scale_by_alpha else config.eta
        w = project(K, w - step * state.d)
        if not rec.check_finite(t + 1, w):
            break
        if batched:
            est.mu2_advance_batched(state, w, problem, rng, config.T)
        else:
            est.mu2_advance(state, w, problem, rng)
        rec.log(t + 1, state.x, state.d, state.samples_used)
    rec.traj.output = state.x
    return rec.traj


def run_mu2_extra_sgd(problem: StochasticProblem, config: OptimizerConfig,
                      rng: np.random.Generator) -> Trajectory:
    """Double-momentum extragradient method on a bounded set.

    Per round: proximal step with the hint momentum, fold the tentative
    iterate into the query average, reveal the loss momentum, proximal step
    with it, form the look-ahead average, then draw one fresh token that
    serves both next-round correction gradients.  The hint and loss momenta
    share their correction term, so their gap equals the gap of the raw
    gradients exactly.
    """
    if not config.feasible_set.bounded:
        raise ConfigurationError("the extragradient variant requires a bounded feasible set")
    weights = config.weights or schedules.linear_weights()
    momentum = config.momentum or schedules.inverse_alpha_momentum()
    rec = _Recorder(problem, config, gap_point="x")
    K = config.feasible_set
    eta = config.eta
    T = config.T

    y = project(K, np.asarray(config.x1, dtype=float))
    x_hat = y.copy()
    z = draw_sample(problem, rng)
    g_hat = stoch_grad(problem, x_hat, z)
    d_hat = g_hat
    corr = np.zeros(problem.dimension)
    samples = 1

    weighted_sum = np.zeros(problem.dimension)
    prefix = 0.0
    x = None
    identity_residual = 0.0

    for t in range(1, T + 1):
        a_t = schedules.alpha(weights, t)
        w = project(K, y - eta * a_t * d_hat)
        weighted_sum = weighted_sum + a_t * w
        prefix = prefix + a_t
        x = weighted_sum / prefix
        g = stoch_grad(problem, x, z)
        d = g + corr
        identity_residual = max(
            identity_residual, float(np.max(np.abs((d - d_hat) - (g - g_hat))))
        )
        y = project(K, y - eta * a_t * d)
        if not (rec.check_finite(t, x) and rec.check_finite(t, y)):
            break
        rec.log(t, x, d, samples)
        if t == T:
            break
        a_next = schedules.alpha(weights, t + 1)
        x_hat = (weighted_sum + a_next * y) / (prefix + a_next)
        z = draw_sample(problem, rng)
        g_tilde = stoch_grad(problem, x, z)
        g_hat = stoch_grad(problem, x_hat, z)
        samples += 1
        b_next = schedules.beta(momentum, t + 1, weights)
        corr = (1.0 - b_next) * (d - g_tilde)
        d_hat = g_hat + corr

    rec.traj.output = x
    rec.traj.extra["identity_residual"] = identity_residual
    return rec.traj


_RUNNERS = {
    "sgd": run_sgd,
    "heavy_ball": run_heavy_ball,
    "anytime_sgd": run_anytime_sgd,
    "storm": run_storm,
    "mu2_sgd": run_mu2_sgd,
    "mu2_sgd_uniform": run_mu2_sgd,
    "mu2_sgd_batched": run_mu2_sgd,
    "mu2_sgd_fixed": run_mu2_sgd,
    "mu2_extra_sgd": run_mu2_extra_sgd,
}


def run(problem: StochasticProblem, config: OptimizerConfig,
        rng: np.random.Generator) -> Trajectory:
    """Dispatch on the config's algorithm tag."""
    return _RUNNERS[config.algorithm](problem, config, rng)
