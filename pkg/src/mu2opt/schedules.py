"""Weight and momentum sequences for the averaged-query optimizers.

The linear weights grow like the step index and pair with inverse-weight
momentum; this pairing is what makes the estimator-error recursion
telescope.  A fixed-coefficient reformulation covers the heuristic used
for unconstrained training, where the query average is mixed with a
constant coefficient instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ConfigurationError

__all__ = [
    "WeightSchedule",
    "MomentumSchedule",
    "linear_weights",
    "uniform_weights",
    "fixed_gamma_weights",
    "inverse_alpha_momentum",
    "inverse_t_momentum",
    "fixed_momentum",
    "alpha",
    "alpha_prefix",
    "gamma",
    "beta",
    "alpha_exact",
    "alpha_prefix_exact",
    "beta_exact",
]


@dataclass(frozen=True)
class WeightSchedule:
    kind: str  # "linear" | "uniform" | "fixed_gamma"
    fixed_gamma: float | None = None


@dataclass(frozen=True)
class MomentumSchedule:
    kind: str  # "inverse_alpha" | "inverse_t" | "fixed"
    fixed_beta: float | None = None


def linear_weights() -> WeightSchedule:
    return WeightSchedule("linear")


def uniform_weights() -> WeightSchedule:
    return WeightSchedule("uniform")


def fixed_gamma_weights(g: float) -> WeightSchedule:
    if not 0.0 < g < 1.0:
        raise ConfigurationError(f"fixed gamma must lie in (0, 1), got {g}")
    return WeightSchedule("fixed_gamma", fixed_gamma=float(g))


def inverse_alpha_momentum() -> MomentumSchedule:
    return MomentumSchedule("inverse_alpha")


def inverse_t_momentum() -> MomentumSchedule:
    return MomentumSchedule("inverse_t")


def fixed_momentum(b: float) -> MomentumSchedule:
    if not 0.0 < b <= 1.0:
        raise ConfigurationError(f"fixed beta must lie in (0, 1], got {b}")
    return MomentumSchedule("fixed", fixed_beta=float(b))


def _gamma_ratio_exact(g: float) -> Fraction:
    g_exact = Fraction(g).limit_denominator(10**12)
    return g_exact / (1 - g_exact)


def _check_t(t: int) -> None:
    if t < 1:
        raise ConfigurationError(f"step index must be >= 1, got {t}")


def alpha_exact(schedule: WeightSchedule, t: int) -> Fraction:
    """Weight at step ``t`` as an exact rational."""
    _check_t(t)
    if schedule.kind == "linear":
        return Fraction(t + 1)
    if schedule.kind == "uniform":
        return Fraction(1)
    if schedule.kind == "fixed_gamma":
        # alpha_t = C * alpha_{1:t-1} with C = gamma / (1 - gamma), alpha_1 = 1.
        c = _gamma_ratio_exact(schedule.fixed_gamma)
        if t == 1:
            return Fraction(1)
        return c * (1 + c) ** (t - 2)
    raise ConfigurationError(f"unknown weight schedule {schedule.kind!r}")


def alpha_prefix_exact(schedule: WeightSchedule, t: int) -> Fraction:
    """Sum of the weights over steps 1..t, as an exact rational."""
    _check_t(t)
    if schedule.kind == "linear":
        return Fraction(t * (t + 3), 2)
    if schedule.kind == "uniform":
        return Fraction(t)
    if schedule.kind == "fixed_gamma":
        return (1 + _gamma_ratio_exact(schedule.fixed_gamma)) ** (t - 1)
    raise ConfigurationError(f"unknown weight schedule {schedule.kind!r}")


def alpha(schedule: WeightSchedule, t: int) -> float:
    return float(alpha_exact(schedule, t))


def alpha_prefix(schedule: WeightSchedule, t: int) -> float:
    return float(alpha_prefix_exact(schedule, t))


def gamma(schedule: WeightSchedule, t: int) -> float:
    """Query-averaging coefficient alpha_t / alpha_{1:t}; always 1 at t=1."""
    _check_t(t)
    if t == 1:
        return 1.0
    if schedule.kind == "fixed_gamma":
        return schedule.fixed_gamma
    return float(alpha_exact(schedule, t) / alpha_prefix_exact(schedule, t))


def beta_exact(momentum: MomentumSchedule, t: int, weights: WeightSchedule | None = None) -> Fraction:
    """Momentum coefficient at step ``t`` as an exact rational."""
    _check_t(t)
    if momentum.kind == "inverse_alpha":
        if weights is None:
            raise ConfigurationError("inverse_alpha momentum needs the weight schedule")
        return 1 / alpha_exact(weights, t)
    if momentum.kind == "inverse_t":
        return Fraction(1, t)
    if momentum.kind == "fixed":
        return Fraction(momentum.fixed_beta).limit_denominator(10**12)
    raise ConfigurationError(f"unknown momentum schedule {momentum.kind!r}")


def beta(momentum: MomentumSchedule, t: int, weights: WeightSchedule | None = None) -> float:
    if momentum.kind == "fixed":
        _check_t(t)
        return momentum.fixed_beta
    return float(beta_exact(momentum, t, weights))


def gamma_to_ratio(g: float) -> float:
    """The constant C with alpha_t = C * alpha_{1:t-1}, from gamma = C/(C+1)."""
    if not 0.0 < g < 1.0:
        raise ConfigurationError(f"gamma must lie in (0, 1), got {g}")
    return g / (1.0 - g)


def ratio_to_gamma(c: float) -> float:
    if c <= 0:
        raise ConfigurationError(f"weight ratio must be positive, got {c}")
    return c / (c + 1.0)
