"""Stochastic first-order oracles with shared-sample evaluation.

Every problem exposes a gradient map that can be evaluated at several
points under one fixed sample token; the cross-step correction terms of
the recursive momentum estimators rely on that capability.  Synthetic
instances carry analytically known constants (smoothness, gradient noise,
smoothness noise) so estimator-error laws can be checked exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import geometry
from .errors import ConfigurationError, IngestionError, NumericError

__all__ = [
    "StochasticProblem",
    "draw_sample",
    "stoch_grad",
    "stoch_value",
    "make_additive_quadratic",
    "make_curvature_quadratic",
    "make_finite_sum",
    "load_csv_corpus",
    "estimate_sigma_sq",
]


@dataclass(frozen=True)
class StochasticProblem:
    """First-order oracle bundle with declared constants.

    ``grad_fn(x, token)`` realizes the per-sample gradient; calling it twice
    with the same ``(x, token)`` is bit-identical.  Constants set to ``None``
    are unknown and may only be estimated empirically.
    """

    name: str
    dimension: int
    draw_fn: Callable[[np.random.Generator], Any]
    grad_fn: Callable[[np.ndarray, Any], np.ndarray]
    exact_grad: Callable[[np.ndarray], np.ndarray]
    exact_value: Callable[[np.ndarray], float]
    value_fn: Callable[[np.ndarray, Any], float] | None = None
    smoothness: float | None = None
    sigma: float | None = None
    sigma_l_sq: float | None = None
    optimum_point: np.ndarray | None = None
    optimum_value: float | None = None


def _check_finite(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        bad = int(np.flatnonzero(~np.isfinite(x))[0])
        raise NumericError(f"non-finite value at coordinate {bad}")
    return x


def draw_sample(problem: StochasticProblem, rng: np.random.Generator) -> Any:
    """Draw one fresh sample token from the problem's distribution."""
    return problem.draw_fn(rng)


def stoch_grad(problem: StochasticProblem, x: np.ndarray, token: Any) -> np.ndarray:
    """Per-sample gradient at ``x`` under the fixed token."""
    x = _check_finite(x)
    if x.size != problem.dimension:
        raise ConfigurationError(
            f"point has dimension {x.size}, problem has dimension {problem.dimension}"
        )
    return problem.grad_fn(x, token)


def stoch_value(problem: StochasticProblem, x: np.ndarray, token: Any) -> float:
    if problem.value_fn is None:
        raise ConfigurationError(f"problem {problem.name!r} has no per-sample value map")
    return problem.value_fn(_check_finite(x), token)


def make_additive_quadratic(dimension: int, x_star, sigma: float) -> StochasticProblem:
    """Quadratic bowl with additive Gaussian gradient noise.

    The per-sample loss is the bowl plus a linear term ``z . x`` with the
    noise vector scaled so the squared gradient-noise norm has expectation
    ``sigma**2``; the per-sample smoothness noise is exactly zero.
    """
    if dimension < 1:
        raise ConfigurationError("dimension must be >= 1")
    if sigma < 0:
        raise ConfigurationError("sigma must be nonnegative")
    x_star = np.asarray(x_star, dtype=float)
    if x_star.size != dimension:
        raise ConfigurationError("x_star dimension mismatch")
    coord_std = sigma / np.sqrt(dimension)

    def draw(rng: np.random.Generator) -> np.ndarray:
        if sigma == 0.0:
            return np.zeros(dimension)
        return rng.normal(0.0, coord_std, size=dimension)

    return StochasticProblem(
        name="additive_quadratic",
        dimension=dimension,
        draw_fn=draw,
        grad_fn=lambda x, z: (x - x_star) + z,
        exact_grad=lambda x: x - x_star,
        exact_value=lambda x: 0.5 * float(np.dot(x - x_star, x - x_star)),
        value_fn=lambda x, z: 0.5 * float(np.dot(x - x_star, x - x_star)) + float(np.dot(z, x)),
        smoothness=1.0,
        sigma=float(sigma),
        sigma_l_sq=0.0,
        optimum_point=x_star,
        optimum_value=0.0,
    )


def make_curvature_quadratic(
    dimension: int,
    x_star,
    c: float,
    feasible_set: geometry.FeasibleSet | None = None,
) -> StochasticProblem:
    """Quadratic bowl whose curvature is perturbed per sample.

    The per-sample loss scales the bowl by ``1 + zeta`` with ``zeta`` uniform
    on ``[-c, c]``, so the smoothness-noise constant is known in closed form
    (``c**2 / 3``).  The gradient-noise bound depends on how far the feasible
    set reaches from the minimizer; pass the set to have it declared.
    """
    if dimension < 1:
        raise ConfigurationError("dimension must be >= 1")
    if not 0.0 <= c < 1.0:
        raise ConfigurationError(f"curvature noise level must lie in [0, 1), got {c}")
    x_star = np.asarray(x_star, dtype=float)
    if x_star.size != dimension:
        raise ConfigurationError("x_star dimension mismatch")

    sigma = None
    if feasible_set is not None:
        reach = _max_offset(feasible_set, x_star)
        if reach is not None:
            sigma = float(np.sqrt(c * c / 3.0) * reach)

    return StochasticProblem(
        name="curvature_quadratic",
        dimension=dimension,
        draw_fn=lambda rng: float(rng.uniform(-c, c)) if c > 0 else 0.0,
        grad_fn=lambda x, zeta: (1.0 + zeta) * (x - x_star),
        exact_grad=lambda x: x - x_star,
        exact_value=lambda x: 0.5 * float(np.dot(x - x_star, x - x_star)),
        value_fn=lambda x, zeta: (1.0 + zeta) * 0.5 * float(np.dot(x - x_star, x - x_star)),
        smoothness=1.0 + c,
        sigma=sigma,
        sigma_l_sq=c * c / 3.0,
        optimum_point=x_star,
        optimum_value=0.0,
    )


def _max_offset(feasible_set: geometry.FeasibleSet, point: np.ndarray) -> float | None:
    """max ||x - point|| over the set, None when the set is unbounded."""
    if feasible_set.variant == "euclidean_ball":
        return float(np.linalg.norm(feasible_set.center - point)) + feasible_set.radius
    if feasible_set.variant == "box":
        far = np.maximum(np.abs(feasible_set.lower - point), np.abs(feasible_set.upper - point))
        return float(np.linalg.norm(far))
    return None


def make_finite_sum(features, labels, loss: str = "logistic") -> StochasticProblem:
    """Finite-sum objective over a record matrix; tokens are uniform indices.

    Logistic loss expects labels in {-1, +1} (any real labels are mapped by
    sign at ingestion time, see :func:`load_csv_corpus`).
    """
    a = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    if a.ndim != 2 or a.shape[0] == 0:
        raise IngestionError("need a nonempty 2-d feature matrix")
    if y.shape != (a.shape[0],):
        raise IngestionError("label count does not match record count")
    if not np.all(np.isfinite(a)):
        row = int(np.flatnonzero(~np.all(np.isfinite(a), axis=1))[0])
        raise IngestionError(f"non-finite feature in row {row}")
    n, d = a.shape
    row_sq = np.einsum("ij,ij->i", a, a)

    if loss == "logistic":
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise IngestionError("logistic labels must be -1 or +1")
        smoothness = float(np.max(row_sq)) / 4.0

        def grad_i(x: np.ndarray, i: int) -> np.ndarray:
            margin = y[i] * float(np.dot(a[i], x))
            return -y[i] * a[i] * _sigmoid(-margin)

        def value_i(x: np.ndarray, i: int) -> float:
            margin = y[i] * float(np.dot(a[i], x))
            return _log1pexp(-margin)

        def full_grad(x: np.ndarray) -> np.ndarray:
            margins = y * (a @ x)
            return -(a.T @ (y * _sigmoid(-margins))) / n

        def full_value(x: np.ndarray) -> float:
            margins = y * (a @ x)
            return float(np.mean(_log1pexp(-margins)))

    elif loss == "squared":
        smoothness = float(np.max(row_sq))

        def grad_i(x: np.ndarray, i: int) -> np.ndarray:
            return a[i] * (float(np.dot(a[i], x)) - y[i])

        def value_i(x: np.ndarray, i: int) -> float:
            return 0.5 * (float(np.dot(a[i], x)) - y[i]) ** 2

        def full_grad(x: np.ndarray) -> np.ndarray:
            return (a.T @ (a @ x - y)) / n

        def full_value(x: np.ndarray) -> float:
            r = a @ x - y
            return 0.5 * float(np.dot(r, r)) / n

    else:
        raise ConfigurationError(f"unknown loss {loss!r}")

    return StochasticProblem(
        name=f"finite_sum_{loss}",
        dimension=d,
        draw_fn=lambda rng: int(rng.integers(0, n)),
        grad_fn=grad_i,
        exact_grad=full_grad,
        exact_value=full_value,
        value_fn=value_i,
        smoothness=smoothness,
        sigma=None,
        sigma_l_sq=None,
    )


def _sigmoid(v):
    v = np.asarray(v, dtype=float)
    t = np.exp(-np.abs(v))  # overflow-safe in both tails
    res = np.where(v >= 0, 1.0 / (1.0 + t), t / (1.0 + t))
    return res if res.ndim else float(res)


def _log1pexp(v):
    v = np.asarray(v, dtype=float)
    res = np.where(v > 30, v, np.log1p(np.exp(np.minimum(v, 30))))
    return res if res.ndim else float(res)


def load_csv_corpus(path, loss: str = "logistic") -> StochasticProblem:
    """Read a ``label,f1,...,fd`` CSV and build a finite-sum problem.

    Labels are parsed as reals; for logistic loss they are mapped to
    {-1, +1} by sign.  UTF-8, comma-delimited, no quoting.
    """
    rows: list[list[float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not header or header[0] != "label":
            raise IngestionError("expected header row starting with 'label'")
        width = len(header)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise IngestionError(f"row {lineno}: expected {width} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise IngestionError(f"row {lineno}: {exc}") from exc
    if not rows:
        raise IngestionError("empty corpus")
    data = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(data)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(data), axis=1))[0])
        raise IngestionError(f"non-finite value in data row {bad + 2}")
    labels = data[:, 0]
    if loss == "logistic":
        if np.any(labels == 0):
            raise IngestionError("zero label cannot be mapped to a sign")
        labels = np.sign(labels)
    return make_finite_sum(data[:, 1:], labels, loss=loss)


def estimate_sigma_sq(
    problem: StochasticProblem,
    feasible_set: geometry.FeasibleSet,
    rng: np.random.Generator,
    n_points: int = 32,
    n_tokens: int = 512,
) -> float:
    """Empirical gradient-noise bound: max over feasible points of the
    mean squared deviation of per-sample gradients from the exact gradient.

    Reported as an estimate only; no algorithm update consumes it.
    """
    worst = 0.0
    for _ in range(n_points):
        x = geometry.project(feasible_set, rng.normal(size=problem.dimension))
        g_bar = problem.exact_grad(x)
        acc = 0.0
        for _ in range(n_tokens):
            g = stoch_grad(problem, x, draw_sample(problem, rng))
            acc += float(np.dot(g - g_bar, g - g_bar))
        worst = max(worst, acc / n_tokens)
    return worst
