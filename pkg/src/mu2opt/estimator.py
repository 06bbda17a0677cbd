"""Recursive-momentum gradient estimators.

Two flavors: the corrected momentum that queries at the raw iterates, and
the double-momentum variant that queries at weighted running averages of
the iterates.  The latter is the one whose squared error shrinks like 1/t
regardless of the learning rate driving the iterates.

Each advance draws its token internally and evaluates the two correction
gradients against that same token, so callers cannot break the
shared-sample contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import schedules
from .errors import DiagnosticUnavailable, NumericError
from .problems import StochasticProblem, draw_sample, stoch_grad
from .schedules import MomentumSchedule, WeightSchedule

__all__ = [
    "QueryAverage",
    "Mu2State",
    "StormState",
    "mu2_init",
    "mu2_advance",
    "mu2_advance_batched",
    "storm_init",
    "storm_update",
    "epsilon_sq",
]


class QueryAverage:
    """Running weighted average of the iterates pushed so far.

    Kept as a weighted sum plus prefix weight for the growing-weight
    schedules (numerically stable, and exact for uniform weights); the
    fixed-coefficient schedule mixes with its constant directly since its
    nominal weights grow geometrically.
    """

    def __init__(self, weights: WeightSchedule, w1: np.ndarray):
        self.weights = weights
        self.t = 1
        self.x = np.array(w1, dtype=float)
        if weights.kind != "fixed_gamma":
            self._sum = schedules.alpha(weights, 1) * self.x
            self._prefix = schedules.alpha(weights, 1)

    def push(self, w_next: np.ndarray) -> np.ndarray:
        """Fold in the next iterate; returns the new average."""
        self.t += 1
        if self.weights.kind == "fixed_gamma":
            g = schedules.gamma(self.weights, self.t)
            self.x = g * w_next + (1.0 - g) * self.x
        else:
            a = schedules.alpha(self.weights, self.t)
            self._sum = self._sum + a * w_next
            self._prefix = self._prefix + a
            self.x = self._sum / self._prefix
        return self.x


@dataclass
class Mu2State:
    """Double-momentum estimator state at step ``t``."""

    t: int
    x: np.ndarray
    d: np.ndarray
    average: QueryAverage
    weights: WeightSchedule
    momentum: MomentumSchedule
    samples_used: int


@dataclass
class StormState:
    """Corrected-momentum estimator state; queries live at the iterates."""

    t: int
    w: np.ndarray
    d: np.ndarray
    weights: WeightSchedule
    momentum: MomentumSchedule
    samples_used: int


def _batch_grads(problem, points, tokens):
    """Mean gradient at each point, every token shared across all points."""
    sums = [np.zeros(problem.dimension) for _ in points]
    for z in tokens:
        for acc, p in zip(sums, points):
            acc += stoch_grad(problem, p, z)
    return [acc / len(tokens) for acc in sums]


def mu2_init(
    problem: StochasticProblem,
    x1: np.ndarray,
    rng: np.random.Generator,
    weights: WeightSchedule | None = None,
    momentum: MomentumSchedule | None = None,
    batch: int = 1,
) -> Mu2State:
    """Start at ``x1`` with the first momentum set to a fresh gradient."""
    weights = weights or schedules.linear_weights()
    momentum = momentum or schedules.inverse_alpha_momentum()
    x1 = np.asarray(x1, dtype=float)
    tokens = [draw_sample(problem, rng) for _ in range(batch)]
    (d,) = _batch_grads(problem, [x1], tokens)
    avg = QueryAverage(weights, x1)
    return Mu2State(t=1, x=avg.x, d=d, average=avg, weights=weights,
                    momentum=momentum, samples_used=batch)


def _mu2_step(state: Mu2State, w_next: np.ndarray, problem: StochasticProblem,
              tokens: list) -> Mu2State:
    w_next = np.asarray(w_next, dtype=float)
    if not np.all(np.isfinite(w_next)):
        raise NumericError("non-finite iterate passed to estimator")
    t_next = state.t + 1
    x_next = state.average.push(w_next)
    g_next, g_tilde = _batch_grads(problem, [x_next, state.x], tokens)
    b = schedules.beta(state.momentum, t_next, state.weights)
    state.d = g_next + (1.0 - b) * (state.d - g_tilde)
    state.x = x_next
    state.t = t_next
    state.samples_used += len(tokens)
    return state


def mu2_advance(state: Mu2State, w_next: np.ndarray, problem: StochasticProblem,
                rng: np.random.Generator) -> Mu2State:
    """One round: fold ``w_next`` into the query average, draw one fresh
    token, and apply the corrected-momentum update with the gradient at the
    new and previous averages evaluated under that same token."""
    return _mu2_step(state, w_next, problem, [draw_sample(problem, rng)])


def mu2_advance_batched(state: Mu2State, w_next: np.ndarray, problem: StochasticProblem,
                        rng: np.random.Generator, T_total: int) -> Mu2State:
    """Decaying-batch round: like :func:`mu2_advance` but both correction
    gradients are averaged over ``ceil(T_total / (t+1))`` fresh tokens, each
    token shared between the two evaluation points."""
    b = math.ceil(T_total / (state.t + 1))
    tokens = [draw_sample(problem, rng) for _ in range(b)]
    return _mu2_step(state, w_next, problem, tokens)


def storm_init(
    problem: StochasticProblem,
    w1: np.ndarray,
    rng: np.random.Generator,
    weights: WeightSchedule | None = None,
    momentum: MomentumSchedule | None = None,
) -> StormState:
    weights = weights or schedules.linear_weights()
    momentum = momentum or schedules.inverse_alpha_momentum()
    w1 = np.asarray(w1, dtype=float)
    d = stoch_grad(problem, w1, draw_sample(problem, rng))
    return StormState(t=1, w=w1.copy(), d=d, weights=weights, momentum=momentum,
                      samples_used=1)


def storm_update(state: StormState, w_next: np.ndarray, problem: StochasticProblem,
                 rng: np.random.Generator) -> StormState:
    """One corrected-momentum round at the iterates: a single fresh token
    serves both the gradient at ``w_next`` and the correction at the
    previous iterate."""
    w_next = np.asarray(w_next, dtype=float)
    if not np.all(np.isfinite(w_next)):
        raise NumericError("non-finite iterate passed to estimator")
    t_next = state.t + 1
    z = draw_sample(problem, rng)
    g = stoch_grad(problem, w_next, z)
    g_prev = stoch_grad(problem, state.w, z)
    b = schedules.beta(state.momentum, t_next, state.weights)
    state.d = g + (1.0 - b) * (state.d - g_prev)
    state.w = w_next.copy()
    state.t = t_next
    state.samples_used += 1
    return state


def epsilon_sq(state, problem: StochasticProblem) -> float:
    """Squared deviation of the momentum from the exact gradient at the
    estimator's query point.  Diagnostic only; never feeds back into updates."""
    if problem.exact_grad is None:
        raise DiagnosticUnavailable(f"problem {problem.name!r} exposes no exact gradient")
    point = state.x if isinstance(state, Mu2State) else state.w
    err = state.d - problem.exact_grad(point)
    return float(np.dot(err, err))
