"""Numeric checks of the scalar inequalities, summation identities and
implicit-inequality solvers used along the way to the bounds.

The implicit solvers are checked against an independent oracle: the largest
``x`` satisfying each hypothesis is located by bracketing plus bisection on
the hypothesis itself, then compared with the closed-form bound.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..numerics import rng_stream

__all__ = [
    "verify_scalar_inequalities",
    "verify_summation_identities",
    "verify_implicit_solvers",
    "largest_root_logsolvex",
    "largest_root_solve_x",
    "logsolvex_bound",
    "solve_x_bound",
]

# exp(x) <= x + exp(EXP_QUAD_COEF x^2)
EXP_QUAD_COEF = 9.0 / 16.0
# k x <= YOUNG_K k^2 + YOUNG_X x^2
YOUNG_K = 3.0 / 8.0
YOUNG_X = 2.0 / 3.0


def verify_scalar_inequalities(lo: float = -50.0, hi: float = 50.0, n_1d: int = 200_001,
                               n_2d: int = 501) -> dict:
    """Max of ``LHS - RHS`` on grids; all entries should be <= roundoff.

    ``exp_quadratic``: ``exp(x) - x - exp(9x^2/16)`` on ``n_1d`` points.
    ``young``: ``kx - 3k^2/8 - 2x^2/3`` on an ``n_2d x n_2d`` grid.
    ``kappa_small`` / ``kappa_large``: the exponent comparisons
    ``9k^2/16 <= 3k^2/4`` on ``|k| <= 4/3`` and ``3k^2/8 + 2/3 <= 3k^2/4`` on ``|k| >= 4/3``.
    """
    x = np.linspace(lo, hi, n_1d)
    with np.errstate(over="ignore"):
        exp_quad = np.exp(x) - x - np.exp(EXP_QUAD_COEF * x * x)
    # both sides overflow to inf together only far out, where RHS dominates
    exp_quad = np.where(np.isnan(exp_quad), -np.inf, exp_quad)

    g = np.linspace(lo, hi, n_2d)
    k, xx = np.meshgrid(g, g, indexing="ij")
    young = k * xx - YOUNG_K * k * k - YOUNG_X * xx * xx

    kap_s = np.linspace(-4.0 / 3.0, 4.0 / 3.0, n_1d)
    small = 9.0 * kap_s ** 2 / 16.0 - 0.75 * kap_s ** 2
    kap_l = np.concatenate([np.linspace(4.0 / 3.0, hi, n_1d // 2), -np.linspace(4.0 / 3.0, hi, n_1d // 2)])
    large = 3.0 * kap_l ** 2 / 8.0 + 2.0 / 3.0 - 0.75 * kap_l ** 2

    out = {
        "exp_quadratic": float(exp_quad.max()),
        "young": float(young.max()),
        "kappa_small": float(small.max()),
        "kappa_large": float(large.max()),
        "n_points": int(x.size + young.size + kap_s.size + kap_l.size),
    }
    out["max_violation"] = max(out["exp_quadratic"], out["young"], out["kappa_small"], out["kappa_large"])
    return out


def _rel_err(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


def verify_summation_identities(seed: int, n_cases: int = 1000, max_len: int = 50) -> dict:
    """Random-case check of the double-sum exchange identities and the
    sum-integral bound for ``f(x) = 1/x`` and ``f(x) = 1/sqrt(x)``.

    Identities (brute-force nested loops on both sides):
    ``sum_{t=1}^T a_t sum_{i=1}^t b_i = sum_{t=1}^T b_t sum_{i=t}^T a_i`` and
    ``sum_{t=1}^T a_t sum_{i=0}^{t-1} b_i = sum_{t=0}^{T-1} b_t sum_{i=t+1}^T a_i``.
    Sum-integral: ``sum_{t=1}^T a_t f(a_0 + sum_{i<=t} a_i) <= int_{a_0}^{sum_{t=0}^T a_t} f``.
    """
    rng = rng_stream(seed, 0)
    worst_id1 = worst_id2 = 0.0
    worst_inv = worst_isqrt = -math.inf
    for _ in range(n_cases):
        T = int(rng.integers(1, max_len + 1))
        a = np.concatenate([[0.0], rng.standard_normal(T)])   # a[1..T]
        b = rng.standard_normal(T + 1)                       # b[0..T]

        lhs1 = sum(a[t] * sum(b[i] for i in range(1, t + 1)) for t in range(1, T + 1))
        rhs1 = sum(b[t] * sum(a[i] for i in range(t, T + 1)) for t in range(1, T + 1))
        lhs2 = sum(a[t] * sum(b[i] for i in range(0, t)) for t in range(1, T + 1))
        rhs2 = sum(b[t] * sum(a[i] for i in range(t + 1, T + 1)) for t in range(0, T))
        worst_id1 = max(worst_id1, _rel_err(lhs1, rhs1))
        worst_id2 = max(worst_id2, _rel_err(lhs2, rhs2))

        w = rng.exponential(1.0, T + 1) * rng.choice([0.0, 1.0], T + 1, p=[0.1, 0.9])
        w[0] = rng.uniform(0.05, 2.0)
        s = np.cumsum(w)
        lhs_inv = float(np.sum(w[1:] / s[1:]))
        rhs_inv = math.log(s[-1]) - math.log(w[0])
        lhs_isqrt = float(np.sum(w[1:] / np.sqrt(s[1:])))
        rhs_isqrt = 2.0 * (math.sqrt(s[-1]) - math.sqrt(w[0]))
        worst_inv = max(worst_inv, (lhs_inv - rhs_inv) / max(1.0, abs(rhs_inv)))
        worst_isqrt = max(worst_isqrt, (lhs_isqrt - rhs_isqrt) / max(1.0, abs(rhs_isqrt)))

    return {
        "doublesum_1_max_rel_err": worst_id1,
        "doublesum_2_max_rel_err": worst_id2,
        "sum_integral_inv_max_violation": worst_inv,
        "sum_integral_inv_sqrt_max_violation": worst_isqrt,
        "n_cases": n_cases,
    }


def logsolvex_bound(A: float, B: float, C: float, D: float) -> float:
    return 32.0 * B ** 3 * D ** 2 + 2.0 * B * C + 8.0 * B ** 2 * D * math.sqrt(C) + A / B


def solve_x_bound(A: float, B: float, C: float) -> float:
    return max(2.0 * B * C ** 2, C * math.sqrt(2.0 * A))


def _bisect_last_feasible(h: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                          iters: int = 200) -> float:
    """``h(lo) <= 0 < h(hi)``; shrink to the crossing."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if h(np.array([mid]))[0] <= 0:
            lo = mid
        else:
            hi = mid
    return lo


def _largest_feasible(h: Callable[[np.ndarray], np.ndarray], tail_certified: Callable[[float], bool],
                      n_grid: int = 4001) -> float:
    """sup{x >= 0 : h(x) <= 0}; ``-inf`` if empty.

    ``h`` is vectorized. ``tail_certified(x)`` must guarantee ``h > 0`` on ``[x, inf)``.
    """
    x_hi = 1.0
    while not tail_certified(x_hi):
        x_hi *= 2.0
        if x_hi > 1e300:
            raise OverflowError("could not bracket the feasible set")
    grid = np.unique(np.concatenate([[0.0], np.linspace(0.0, x_hi, n_grid),
                                     np.geomspace(1e-12 * x_hi, x_hi, n_grid)]))
    feas = np.nonzero(h(grid) <= 0)[0]
    if feas.size == 0:
        return -math.inf
    j = int(feas[-1])
    if j == grid.size - 1:
        return float(grid[j])
    return _bisect_last_feasible(h, float(grid[j]), float(grid[j + 1]))


def largest_root_logsolvex(A: float, B: float, C: float, D: float) -> float:
    """Largest ``x >= 0`` with ``x^2 <= (A + Bx)(C + D ln(A + Bx))``."""
    def h(x: np.ndarray) -> np.ndarray:
        u = A + B * x
        with np.errstate(divide="ignore", invalid="ignore"):
            prod = u * (C + D * np.log(u))
        # u = 0 only at x = 0 with A = 0, where the product tends to 0
        return x * x - np.where(u > 0, prod, 0.0)

    def certified(x: float) -> bool:
        u = A + B * x
        if u <= 0:
            return False
        dh = 2 * x - B * (C + D * math.log(u)) - B * D
        d2h = 2 - B * B * D / u
        # d2h grows with x, so h stays convex and increasing from here on
        return h(np.array([x]))[0] > 0 and dh > 0 and d2h > 0

    return _largest_feasible(h, certified)


def largest_root_solve_x(A: float, B: float, C: float) -> float:
    """Largest ``x >= 0`` with ``x <= C sqrt(A + Bx)``."""
    def h(x: np.ndarray) -> np.ndarray:
        return x - C * np.sqrt(A + B * x)

    def certified(x: float) -> bool:
        # h is convex; positive value and slope settle the tail
        u = A + B * x
        dh = 1 - C * B / (2 * math.sqrt(u)) if u > 0 else 1.0
        return h(np.array([x]))[0] > 0 and dh > 0

    return _largest_feasible(h, certified)


def _draw_param(rng: np.random.Generator, zero_prob: float, lo: float, hi: float) -> float:
    if rng.random() < zero_prob:
        return 0.0
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def verify_implicit_solvers(seed: int, n_cases: int = 1000, rtol: float = 1e-12) -> dict:
    """Compare bisection-located suprema with both closed-form bounds."""
    rng = rng_stream(seed, 1)
    log_viol = sx_viol = 0
    log_ratio = sx_ratio = 0.0
    for _ in range(n_cases):
        A = _draw_param(rng, 0.1, 1e-3, 1e3)
        B = _draw_param(rng, 0.0, 1e-2, 1e2)
        C = _draw_param(rng, 0.1, 1e-3, 1e3)
        D = _draw_param(rng, 0.1, 1e-3, 1e2)
        x_star = largest_root_logsolvex(A, B, C, D)
        bound = logsolvex_bound(A, B, C, D)
        if x_star > bound * (1 + rtol):
            log_viol += 1
        if x_star > 0:
            log_ratio = max(log_ratio, x_star / bound)

        A2 = _draw_param(rng, 0.1, 1e-3, 1e3)
        B2 = _draw_param(rng, 0.1, 1e-2, 1e2)
        C2 = _draw_param(rng, 0.1, 1e-3, 1e2)
        x2 = largest_root_solve_x(A2, B2, C2)
        b2 = solve_x_bound(A2, B2, C2)
        if x2 > b2 * (1 + rtol) and not (b2 == 0 and x2 <= 0):
            sx_viol += 1
        if x2 > 0:
            sx_ratio = max(sx_ratio, x2 / b2)
    return {
        "logsolvex_violations": log_viol,
        "solve_x_violations": sx_viol,
        "logsolvex_max_ratio": log_ratio,
        "solve_x_max_ratio": sx_ratio,
        "n_cases": n_cases,
    }
