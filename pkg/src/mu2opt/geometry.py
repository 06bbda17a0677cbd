"""Convex feasible sets with orthogonal projection and diameter.

Only the shapes the projected update rules need: Euclidean balls, boxes,
and an "unconstrained" placeholder that carries a user-declared diameter
so noise diagnostics stay computable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

__all__ = ["FeasibleSet", "ball", "box", "unconstrained", "project", "diameter"]


@dataclass(frozen=True)
class FeasibleSet:
    variant: str  # "euclidean_ball" | "box" | "unconstrained"
    dimension: int
    center: np.ndarray | None = None
    radius: float | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    declared_diameter: float | None = None

    @property
    def bounded(self) -> bool:
        return self.variant != "unconstrained"


def ball(center, radius: float) -> FeasibleSet:
    center = np.asarray(center, dtype=float)
    if radius <= 0:
        raise ConfigurationError(f"ball radius must be positive, got {radius}")
    return FeasibleSet("euclidean_ball", center.size, center=center, radius=float(radius))


def box(lower, upper) -> FeasibleSet:
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != upper.shape:
        raise ConfigurationError("box bounds must have the same shape")
    if np.any(lower > upper):
        raise ConfigurationError("box lower bound exceeds upper bound")
    return FeasibleSet("box", lower.size, lower=lower, upper=upper)


def unconstrained(dimension: int, declared_diameter: float) -> FeasibleSet:
    if declared_diameter <= 0:
        raise ConfigurationError("declared_diameter must be positive")
    return FeasibleSet("unconstrained", dimension, declared_diameter=float(declared_diameter))


def project(feasible_set: FeasibleSet, x: np.ndarray) -> np.ndarray:
    """Orthogonal (Euclidean) projection of ``x`` onto the set."""
    x = np.asarray(x, dtype=float)
    if x.size != feasible_set.dimension:
        raise ConfigurationError(
            f"point has dimension {x.size}, set has dimension {feasible_set.dimension}"
        )
    if feasible_set.variant == "unconstrained":
        return x
    if feasible_set.variant == "euclidean_ball":
        offset = x - feasible_set.center
        dist = float(np.linalg.norm(offset))
        # Interior and exact-boundary points are returned unchanged to avoid
        # scaling jitter at dist == radius.
        if dist <= feasible_set.radius:
            return x
        return feasible_set.center + offset * (feasible_set.radius / dist)
    if feasible_set.variant == "box":
        return np.clip(x, feasible_set.lower, feasible_set.upper)
    raise ConfigurationError(f"unknown feasible-set variant {feasible_set.variant!r}")


def diameter(feasible_set: FeasibleSet) -> float:
    """Largest distance between two points of the set."""
    if feasible_set.variant == "euclidean_ball":
        return 2.0 * feasible_set.radius
    if feasible_set.variant == "box":
        return float(np.linalg.norm(feasible_set.upper - feasible_set.lower))
    if feasible_set.variant == "unconstrained":
        return feasible_set.declared_diameter
    raise ConfigurationError(f"unknown feasible-set variant {feasible_set.variant!r}")


def contains(feasible_set: FeasibleSet, x: np.ndarray, tol: float = 1e-9) -> bool:
    """Membership test up to ``tol``, used by feasibility assertions."""
    x = np.asarray(x, dtype=float)
    if feasible_set.variant == "unconstrained":
        return True
    if feasible_set.variant == "euclidean_ball":
        return float(np.linalg.norm(x - feasible_set.center)) <= feasible_set.radius + tol
    return bool(np.all(x >= feasible_set.lower - tol) and np.all(x <= feasible_set.upper + tol))
