"""Element-wise vector arithmetic, per-trial random streams and ensemble statistics.

Vectors are plain 1-d ``float64`` numpy arrays. The optimizer and oracle also
accept stacked ``(n_trials, d)`` arrays; every operation here acts on the last
axis only, so a batch of independent trials is processed row by row.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "as_vector",
    "elementwise",
    "norm_sq",
    "quantile",
    "SlopeFit",
    "fit_loglog_slope",
    "rng_stream",
]


def as_vector(values, name: str = "vector") -> np.ndarray:
    """Return ``values`` as a finite float64 array with at least one entry."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.shape[-1] < 1:
        raise ValueError(f"{name} must have dimension >= 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def elementwise(op: str, a, b=None) -> np.ndarray:
    """Apply ``op`` coordinate-wise.

    ``op`` is one of ``mul``, ``div``, ``max`` (binary) or ``square``,
    ``sqrt`` (unary).
    """
    a = np.asarray(a, dtype=np.float64)
    if op in ("square", "sqrt"):
        if b is not None:
            raise ValueError(f"{op} is unary")
        if op == "square":
            return a * a
        if np.any(a < 0):
            raise ValueError("sqrt of a negative entry")
        return np.sqrt(a)

    if op not in ("mul", "div", "max"):
        raise ValueError(f"unknown element-wise op {op!r}")
    if b is None:
        raise ValueError(f"{op} needs two operands")
    b = np.asarray(b, dtype=np.float64)
    _check_same_shape(a, b)
    if op == "mul":
        return a * b
    if op == "max":
        return np.maximum(a, b)
    if np.any(b == 0):
        raise ZeroDivisionError("division by a zero entry")
    return a / b


def norm_sq(a) -> float | np.ndarray:
    """Squared L2 norm over the last axis."""
    a = np.asarray(a, dtype=np.float64)
    out = np.sum(a * a, axis=-1)
    return float(out) if out.ndim == 0 else out


def quantile(samples: Sequence[float], q: float) -> float:
    """Lower empirical quantile: smallest v with at least ceil(q*n) samples <= v."""
    values = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    n = values.size
    if n == 0:
        raise ValueError("quantile of an empty sample")
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    # 1e-9 guards against q*n landing a hair above an integer, e.g. 0.95*1000
    k = max(1, math.ceil(q * n - 1e-9))
    return float(values[k - 1])


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r_squared: float


def fit_loglog_slope(points: Sequence[tuple[float, float]]) -> SlopeFit:
    """Ordinary least squares of ``ln y`` against ``ln T``."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValueError("need at least 3 (T, y) points")
    if np.any(~np.isfinite(pts)) or np.any(pts <= 0):
        raise ValueError("all T and y values must be finite and strictly positive")
    if np.unique(pts[:, 0]).size != pts.shape[0]:
        raise ValueError("T values must be distinct")

    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    xc, yc = lx - lx.mean(), ly - ly.mean()
    slope = float(np.dot(xc, yc) / np.dot(xc, xc))
    intercept = float(ly.mean() - slope * lx.mean())
    ss_tot = float(np.dot(yc, yc))
    resid = yc - slope * xc
    ss_res = float(np.dot(resid, resid))
    if ss_tot == 0.0:
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return SlopeFit(slope=slope, intercept=intercept, r_squared=r2)


def rng_stream(base_seed: int, stream_index: int = 0) -> np.random.Generator:
    """Independent generator for ``(base_seed, stream_index)``.

    Streams come from ``SeedSequence`` spawn keys, so stream ``i`` is the same
    no matter how many other streams exist or in which order they are used.
    """
    if stream_index < 0:
        raise ValueError("stream_index must be non-negative")
    seq = np.random.SeedSequence(entropy=int(base_seed) & 0xFFFFFFFFFFFFFFFF,
                                 spawn_key=(int(stream_index),))
    return np.random.Generator(np.random.PCG64(seq))


def rng_streams(base_seed: int, indices: Iterable[int]) -> list[np.random.Generator]:
    return [rng_stream(base_seed, i) for i in indices]


def check_finite(arr: np.ndarray, what: str, t: Optional[int] = None) -> None:
    if not np.all(np.isfinite(arr)):
        where = f" at iteration {t}" if t is not None else ""
        raise FloatingPointError(f"non-finite {what}{where}")
