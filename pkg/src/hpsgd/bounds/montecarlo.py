"""Monte Carlo checks of the two concentration results.

Each trial draws from its own stream ``rng_stream(seed, i)``; trials are
simulated together as one array but the violation count does not depend on
the batch layout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..numerics import rng_stream
from ..oracle import NoiseModel

__all__ = ["MartingaleSpec", "mc_lemma1", "mc_max_bound", "violation_slack"]

# E exp(Z^2/s^2) = e for Z ~ N(0, v) needs v = s^2 (1 - e^-2)/2
_TIGHT_VAR = -math.expm1(-2.0) / 2.0


def violation_slack(delta: float, n_trials: int, k: float = 3.0) -> float:
    """``k`` binomial standard errors at rate ``delta``."""
    return k * math.sqrt(delta * (1.0 - delta) / n_trials)


@dataclass(frozen=True)
class MartingaleSpec:
    """Martingale difference generator with a random, adapted scale.

    ``adapted_gaussian``: ``sigma_t = clip(base (1 + |Z_{t-1}|), lo, hi)`` and
    ``Z_t ~ N(0, sigma_t^2 (1 - e^-2)/2)``, so ``E_t exp(Z_t^2/sigma_t^2) = e``
    exactly. ``zero``: ``Z_t = 0`` with ``sigma_t = base``.
    ``understate > 1`` reports ``sigma_t / understate`` to the bound while
    drawing with the true scale (negative control).
    """

    kind: str = "adapted_gaussian"
    T: int = 50
    base: float = 0.5
    lo: float = 0.5
    hi: float = 5.0
    understate: float = 1.0

    def __post_init__(self):
        if self.kind not in ("adapted_gaussian", "zero"):
            raise ValueError(f"unknown martingale kind {self.kind!r}")
        if self.T < 1 or not self.base > 0 or not 0 < self.lo <= self.hi or not self.understate > 0:
            raise ValueError("invalid martingale parameters")

    def simulate(self, seed: int, n_trials: int) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(sum_t Z_t, sum_t sigma_t^2)`` per trial, with the reported sigma."""
        if self.kind == "zero":
            return np.zeros(n_trials), np.full(n_trials, self.T * (self.base / self.understate) ** 2)
        normals = np.stack([rng_stream(seed, i).standard_normal(self.T) for i in range(n_trials)])
        z_prev = np.zeros(n_trials)
        sum_z = np.zeros(n_trials)
        sum_s2 = np.zeros(n_trials)
        sd = math.sqrt(_TIGHT_VAR)
        for t in range(self.T):
            sig = np.clip(self.base * (1.0 + np.abs(z_prev)), self.lo, self.hi)
            z = sig * sd * normals[:, t]
            sum_z += z
            sum_s2 += (sig / self.understate) ** 2
            z_prev = z
        return sum_z, sum_s2


def mc_lemma1(spec: MartingaleSpec, lam: float, delta: float, n_trials: int, seed: int) -> dict:
    """Fraction of trials with ``sum Z_t > 3/4 lam sum sigma_t^2 + ln(1/delta)/lam``."""
    if not lam > 0:
        raise ValueError("lambda must be > 0")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    sum_z, sum_s2 = spec.simulate(seed, n_trials)
    bound = 0.75 * lam * sum_s2 + math.log(1.0 / delta) / lam
    violations = int(np.count_nonzero(sum_z > bound))
    return {
        "violation_rate": violations / n_trials,
        "violations": violations,
        "n_trials": n_trials,
        "delta": delta,
        "lambda": lam,
        "T": spec.T,
    }


def mc_max_bound(sigma: float, T: int, delta: float, d: int, n_trials: int, seed: int,
                 noise_kind: str = "gaussian") -> dict:
    """Fraction of trials with ``max_t ||eps_t||^2 > sigma^2 ln(Te/delta)``."""
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    noise = NoiseModel(noise_kind, sigma)
    threshold = sigma ** 2 * math.log(T * math.e / delta)
    max_sq = np.empty(n_trials)
    for i in range(n_trials):
        eps = noise.sample(rng_stream(seed, i), (T, d))
        max_sq[i] = np.max(np.sum(eps * eps, axis=1))
    violations = int(np.count_nonzero(max_sq > threshold))
    return {
        "violation_rate": violations / n_trials,
        "violations": violations,
        "n_trials": n_trials,
        "threshold": threshold,
        "delta": delta,
        "T": T,
        "d": d,
    }
