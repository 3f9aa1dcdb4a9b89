"""Smooth test objectives with an analytic smoothness constant and infimum.

Only functions whose ``M`` and ``f*`` are known exactly are provided: every
bound evaluated downstream takes ``M`` and ``f(x1) - f*`` as exact inputs.
``value`` and ``gradient`` work on a single point of shape ``(d,)`` or on a
batch of points of shape ``(n, d)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .numerics import as_vector

__all__ = [
    "Objective",
    "make_quadratic",
    "make_sin_sq_nonconvex",
    "make_objective",
    "initial_point",
    "check_smoothness",
    "check_gradient",
    "sample_ball",
]


@dataclass(frozen=True)
class Objective:
    name: str
    dimension: int
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    smoothness_M: float
    f_star: float
    x_init_default: np.ndarray
    params: dict = field(default_factory=dict, compare=False)

    def f_gap(self, x1) -> float:
        x1 = np.asarray(x1, dtype=np.float64)
        self._check_dim(x1)
        return float(self.value(x1)) - self.f_star

    def _check_dim(self, x: np.ndarray) -> None:
        if x.shape[-1] != self.dimension:
            raise ValueError(f"point has dimension {x.shape[-1]}, objective has {self.dimension}")


def _default_start(d: int) -> np.ndarray:
    # all-ones has norm sqrt(d), so f(x1) - f* grows linearly with d
    return np.ones(d)


def make_quadratic(diag) -> Objective:
    """``f(x) = 0.5 * sum_j diag_j x_j^2`` with ``M = max(diag)`` and ``f* = 0``."""
    diag = as_vector(diag, "diag").copy()
    if diag.ndim != 1:
        raise ValueError("diag must be one-dimensional")
    if np.any(diag <= 0):
        raise ValueError("quadratic diagonal entries must be strictly positive")
    diag.setflags(write=False)

    def value(x):
        x = np.asarray(x, dtype=np.float64)
        return 0.5 * np.sum(diag * x * x, axis=-1)

    def gradient(x):
        return diag * np.asarray(x, dtype=np.float64)

    return Objective(
        name="quadratic",
        dimension=diag.size,
        value=value,
        gradient=gradient,
        smoothness_M=float(diag.max()),
        f_star=0.0,
        x_init_default=_default_start(diag.size),
        params={"diag": diag},
    )


def make_sin_sq_nonconvex(d: int, a: float) -> Objective:
    """``f(x) = sum_j x_j^2/2 + a sin^2(x_j)``.

    The second derivative ``1 + 2a cos(2x)`` is bounded by ``1 + 2a`` in
    absolute value, so ``M = 1 + 2a``; it turns negative for ``a > 1/2``.
    The minimum ``f* = 0`` sits at the origin.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if not a > 0:
        raise ValueError("sin^2 amplitude a must be > 0")
    a = float(a)

    def value(x):
        x = np.asarray(x, dtype=np.float64)
        s = np.sin(x)
        return np.sum(0.5 * x * x + a * s * s, axis=-1)

    def gradient(x):
        x = np.asarray(x, dtype=np.float64)
        return x + a * np.sin(2.0 * x)

    return Objective(
        name="sin_sq",
        dimension=int(d),
        value=value,
        gradient=gradient,
        smoothness_M=1.0 + 2.0 * a,
        f_star=0.0,
        x_init_default=_default_start(int(d)),
        params={"a": a},
    )


def make_objective(kind: str, d: Optional[int] = None, diag=None, spectrum: str = "ones",
                   lambda_min: float = 1e-4, a: float = 1.0) -> Objective:
    """Build an objective from config-style keywords.

    For ``kind="quadratic"`` either ``diag`` is given explicitly or ``d`` is
    combined with ``spectrum``: ``ones`` or ``logspace`` (eigenvalues
    log-uniform from 1 down to ``lambda_min``).
    """
    if kind == "quadratic":
        if diag is not None:
            return make_quadratic(diag)
        if d is None:
            raise ValueError("quadratic needs either diag or d")
        if spectrum == "ones":
            return make_quadratic(np.ones(d))
        if spectrum == "logspace":
            if not 0 < lambda_min <= 1:
                raise ValueError("lambda_min must lie in (0, 1]")
            return make_quadratic(np.logspace(0.0, np.log10(lambda_min), d))
        raise ValueError(f"unknown quadratic spectrum {spectrum!r}")
    if kind == "sin_sq":
        return make_sin_sq_nonconvex(1 if d is None else d, a)
    raise ValueError(f"unknown objective kind {kind!r}")


def initial_point(obj: Objective, spec="default") -> np.ndarray:
    """Resolve an ``x1`` spec: ``default``, ``equal_energy`` or explicit values.

    ``equal_energy`` (quadratics only) puts ``x_j = 1/sqrt(diag_j)`` so each
    coordinate starts with the same suboptimality ``1/2``.
    """
    if isinstance(spec, str):
        if spec == "default":
            return obj.x_init_default.copy()
        if spec == "equal_energy":
            if obj.name != "quadratic":
                raise ValueError("equal_energy start is only defined for quadratics")
            return 1.0 / np.sqrt(obj.params["diag"])
        raise ValueError(f"unknown x1 spec {spec!r}")
    x1 = as_vector(spec, "x1")
    obj._check_dim(x1)
    return x1.copy()


def sample_ball(rng: np.random.Generator, center: np.ndarray, radius: float, n: int) -> np.ndarray:
    """``n`` points uniform in the Euclidean ball around ``center``."""
    d = center.size
    u = rng.standard_normal((n, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / d)
    return center + r[:, None] * u


def check_smoothness(obj: Objective, rng: np.random.Generator, n_pairs: int, radius: float) -> dict:
    """Largest violation of the two-sided descent-lemma inequality over sampled pairs.

    Returned ``max_violation`` is
    ``max |f(y) - f(x) - <grad f(x), y - x>| - M/2 ||y - x||^2``;
    it is <= 0 (up to roundoff) when ``M`` is a valid smoothness constant.
    """
    if n_pairs < 1 or not radius > 0:
        raise ValueError("need n_pairs >= 1 and radius > 0")
    c = obj.x_init_default
    x = sample_ball(rng, c, radius, n_pairs)
    y = sample_ball(rng, c, radius, n_pairs)
    diff = y - x
    gap = np.abs(obj.value(y) - obj.value(x) - np.sum(obj.gradient(x) * diff, axis=-1))
    viol = gap - 0.5 * obj.smoothness_M * np.sum(diff * diff, axis=-1)
    return {"max_violation": float(viol.max()), "n_pairs": n_pairs}


def check_gradient(obj: Objective, rng: np.random.Generator, n_points: int = 100,
                   radius: float = 5.0, h: float = 1e-6) -> dict:
    """Central finite differences against the analytic gradient.

    The relative error at a point is ``||fd - grad||_inf / max(1, ||grad||_inf)``.
    """
    pts = sample_ball(rng, obj.x_init_default, radius, n_points)
    d = obj.dimension
    worst = 0.0
    for x in pts:
        grad = obj.gradient(x)
        steps = h * np.eye(d)
        fd = (obj.value(x + steps) - obj.value(x - steps)) / (2.0 * h)
        err = np.max(np.abs(fd - grad)) / max(1.0, float(np.max(np.abs(grad))))
        worst = max(worst, float(err))
    return {"max_rel_error": worst, "n_points": n_points}
