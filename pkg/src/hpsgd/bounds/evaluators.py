"""Right-hand sides of the high-probability bounds and per-run checks against them.

Every formula takes the realized trajectory quantities it needs (sums of
``||eta_t g_t||^2``, ``||grad f(x_t)||^2``) and the problem constants collected
in :class:`BoundInputs`. The ``delta/2`` and ``delta/3`` splits of the union
bounds appear as the ``ln(2Te/delta)``, ``ln(3Te/delta)``, ``ln(3/delta)``
factors and are kept exactly as derived.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..optimizer import Trajectory
from ..schedules import theorem1_max_c, theorem2_max_alpha

__all__ = [
    "BoundInputs",
    "BoundCheckResult",
    "lemma2_rhs",
    "check_lemma2",
    "theorem1_rhs",
    "check_theorem1",
    "lemma3_rhs",
    "check_lemma3",
    "theorem2_k",
    "theorem2_c_of_t",
    "theorem2_explicit_c",
    "theorem2_rhs",
    "check_theorem2",
    "check_theorem2_intermediate",
]

# relative roundoff allowance when deciding whether a bound holds
HOLDS_RTOL = 1e-9
# relative allowance when comparing a step-size parameter against its cap
CAP_RTOL = 1e-12


@dataclass(frozen=True)
class BoundInputs:
    f_gap: float
    M: float
    mu: float
    sigma: float
    delta: float
    T: int
    eta1_norm: float = 0.0
    d: int = 1
    c: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None

    def __post_init__(self):
        if self.f_gap < 0:
            raise ValueError("f_gap must be >= 0")
        if not self.M > 0:
            raise ValueError("M must be > 0")
        if not 0.0 <= self.mu < 1.0:
            raise ValueError("mu must lie in [0, 1)")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must lie in (0, 1]")
        if self.T < 1 or self.d < 1:
            raise ValueError("T and d must be >= 1")
        if self.eta1_norm < 0:
            raise ValueError("eta1_norm must be >= 0")

    def with_(self, **kw) -> "BoundInputs":
        return replace(self, **kw)


@dataclass(frozen=True)
class BoundCheckResult:
    lhs: float
    rhs: float
    holds: bool
    slack: float

    @classmethod
    def compare(cls, lhs: float, rhs: float) -> "BoundCheckResult":
        lhs, rhs = float(lhs), float(rhs)
        slack = rhs - lhs
        holds = bool(slack >= -HOLDS_RTOL * max(abs(lhs), abs(rhs)))
        return cls(lhs=lhs, rhs=rhs, holds=holds, slack=slack)


def _momentum_noise_factor(p: BoundInputs) -> float:
    """``(1 - mu^T)^2 / (1 - mu)^2``."""
    return (1.0 - p.mu ** p.T) ** 2 / (1.0 - p.mu) ** 2


def lemma2_rhs(p: BoundInputs, sum_eta_g_sq: float) -> float:
    """Upper bound on ``sum_t <eta_t, grad f(x_t)^2>`` for the classic momentum form."""
    if sum_eta_g_sq < 0:
        raise ValueError("sum of ||eta_t g_t||^2 must be >= 0")
    noise = 3.0 * p.eta1_norm * p.sigma ** 2 * _momentum_noise_factor(p) * math.log(1.0 / p.delta)
    return noise + 2.0 * p.f_gap + p.M * (3.0 - p.mu) / (1.0 - p.mu) * sum_eta_g_sq


def check_lemma2(traj: Trajectory, p: BoundInputs) -> BoundCheckResult:
    lhs = float(np.sum(traj.weighted_grad_sq))
    return BoundCheckResult.compare(lhs, lemma2_rhs(p, float(np.sum(traj.eta_g_norm_sq))))


def theorem1_rhs(p: BoundInputs) -> float:
    """Bound on ``min_t ||grad f(x_t)||^2`` for ``eta_t = c/sqrt(t)``, as stated."""
    if p.c is None or not p.c > 0:
        raise ValueError("theorem1_rhs needs c > 0")
    cap = theorem1_max_c(p.M, p.mu, p.T)
    if p.c > cap * (1.0 + CAP_RTOL):
        raise ValueError(f"c={p.c} exceeds the 1/sqrt(t) step-size cap (1-mu^T)/(4M(3-2mu)) = {cap}")
    sqrt_t = math.sqrt(p.T)
    s2 = p.sigma ** 2
    term_f = 4.0 * p.f_gap / (p.c * sqrt_t)
    term_mu = 6.0 * (1.0 - p.mu ** p.T) ** 2 * s2 / ((1.0 - p.mu) ** 2 * sqrt_t)
    term_t = (4.0 * (3.0 - p.mu) * p.c * p.M * s2 * math.log(2.0 * p.T * math.e / p.delta)
              * math.log(p.T) / ((1.0 - p.mu) * sqrt_t))
    return term_f + term_mu + term_t


def check_theorem1(traj: Trajectory, p: BoundInputs) -> BoundCheckResult:
    return BoundCheckResult.compare(traj.min_grad_sq, theorem1_rhs(p))


def _require_adagrad(p: BoundInputs) -> tuple[float, float]:
    if p.alpha is None or p.beta is None or not p.alpha > 0 or not p.beta > 0:
        raise ValueError("Delayed AdaGrad bounds need alpha > 0 and beta > 0")
    return p.alpha, p.beta


def lemma3_rhs(p: BoundInputs, sum_weighted_grad_sq: float, sum_grad_sq: float) -> tuple[float, float]:
    """The two displayed upper bounds on ``sum_t ||eta_t g_t||^2`` for Delayed AdaGrad.

    First: ``4 d alpha^2 sigma^2/beta ln(2Te/delta) + 4 alpha/sqrt(beta) sum <eta_t, grad^2>``.
    Second: ``2 alpha^2 d ln(sqrt(beta + 2 T sigma^2 ln(2Te/delta)/d) + sqrt(2/d sum ||grad||^2))``.
    """
    alpha, beta = _require_adagrad(p)
    log_term = math.log(2.0 * p.T * math.e / p.delta)
    first = (4.0 * p.d * alpha ** 2 * p.sigma ** 2 / beta * log_term
             + 4.0 * alpha / math.sqrt(beta) * sum_weighted_grad_sq)
    second = 2.0 * alpha ** 2 * p.d * math.log(
        math.sqrt(beta + 2.0 * p.T * p.sigma ** 2 * log_term / p.d)
        + math.sqrt(2.0 / p.d * sum_grad_sq))
    return first, second


def check_lemma3(traj: Trajectory, p: BoundInputs) -> tuple[BoundCheckResult, BoundCheckResult]:
    if traj.schedule_kind != "delayed_adagrad":
        raise ValueError(f"the AdaGrad sum bounds apply to delayed_adagrad runs, got {traj.schedule_kind!r}")
    lhs = float(np.sum(traj.eta_g_norm_sq))
    first, second = lemma3_rhs(p, float(np.sum(traj.weighted_grad_sq)), float(np.sum(traj.grad_norm_sq)))
    return BoundCheckResult.compare(lhs, first), BoundCheckResult.compare(lhs, second)


def _check_alpha_cap(p: BoundInputs) -> None:
    alpha, beta = _require_adagrad(p)
    cap = theorem2_max_alpha(p.M, p.mu, beta)
    if alpha > cap * (1.0 + CAP_RTOL):
        raise ValueError(f"alpha={alpha} exceeds the Delayed AdaGrad cap "
                         f"sqrt(beta)(1-mu)/(8M(3-mu)) = {cap}")


def theorem2_k(p: BoundInputs, sum_grad_sq: float) -> float:
    """``K = 2 alpha^2 d ln(sqrt(beta + 2T sigma^2 ln(2Te/delta)/d) + sqrt(2/d) sqrt(sum ||grad||^2))``."""
    return lemma3_rhs(p, 0.0, sum_grad_sq)[1]


def theorem2_c_of_t(p: BoundInputs, K: float, enforce_cap: bool = True) -> float:
    """``C(T)``, the bound on ``sum_t <eta_t, grad f(x_t)^2>`` for Delayed AdaGrad.

    ``4 f_gap + 2M(3-mu)/(1-mu) (K + 4 d alpha^2 sigma^2/beta ln(3Te/delta))
    + 3 ||eta_1|| sigma^2 (1-mu^T)^2/(1-mu)^2 ln(3/delta)``. The factor 2 in front
    of the first two terms is only valid under the alpha cap.
    """
    alpha, beta = _require_adagrad(p)
    if enforce_cap:
        _check_alpha_cap(p)
    s2 = p.sigma ** 2
    inner = K + 4.0 * p.d * alpha ** 2 * s2 / beta * math.log(3.0 * p.T * math.e / p.delta)
    return (4.0 * p.f_gap + 2.0 * p.M * (3.0 - p.mu) / (1.0 - p.mu) * inner
            + 3.0 * p.eta1_norm * s2 * _momentum_noise_factor(p) * math.log(3.0 / p.delta))


def _theorem2_abcd(p: BoundInputs) -> tuple[float, float, float, float]:
    alpha, beta = _require_adagrad(p)
    s2 = p.sigma ** 2
    log3te = math.log(3.0 * p.T * math.e / p.delta)
    ratio = (3.0 - p.mu) / (1.0 - p.mu)
    A = math.sqrt(beta + 2.0 * p.T * s2 * log3te)
    B = math.sqrt(2.0)
    C = (4.0 * p.f_gap / alpha
         + 8.0 * p.M * ratio * p.d * alpha * s2 / beta * log3te
         + 3.0 * p.d * _momentum_noise_factor(p) * s2 / beta * math.log(3.0 / p.delta))
    D = 4.0 * alpha * p.d * p.M * ratio
    return A, B, C, D


def theorem2_explicit_c(p: BoundInputs) -> float:
    """Trajectory-free bound on ``C(T)/alpha``.

    The unknown ``sqrt(sum ||grad||^2)`` inside the logarithm is replaced by
    its implicit-inequality bound ``32B^3D^2 + 2BC + 8B^2 D sqrt(C) + A/B``.
    """
    _check_alpha_cap(p)
    A, B, C, D = _theorem2_abcd(p)
    return C + D * math.log(2.0 * A + 32.0 * B ** 4 * D ** 2 + 2.0 * B ** 2 * C
                            + 8.0 * B ** 3 * D * math.sqrt(C))


def theorem2_rhs(p: BoundInputs) -> float:
    """``(1/T) max(4 Ct^2, Ct sqrt(2 beta + 4 T sigma^2 ln(3Te/delta)))`` with ``Ct = theorem2_explicit_c``."""
    ct = theorem2_explicit_c(p)
    _, beta = _require_adagrad(p)
    tail = math.sqrt(2.0 * beta + 4.0 * p.T * p.sigma ** 2 * math.log(3.0 * p.T * math.e / p.delta))
    return max(4.0 * ct ** 2, ct * tail) / p.T


def check_theorem2(traj: Trajectory, p: BoundInputs) -> BoundCheckResult:
    return BoundCheckResult.compare(traj.min_grad_sq, theorem2_rhs(p))


def check_theorem2_intermediate(traj: Trajectory, p: BoundInputs) -> BoundCheckResult:
    """``sum_t <eta_t, grad^2> <= C(T)`` with ``K`` from the realized gradients."""
    K = theorem2_k(p, float(np.sum(traj.grad_norm_sq)))
    return BoundCheckResult.compare(float(np.sum(traj.weighted_grad_sq)), theorem2_c_of_t(p, K))
