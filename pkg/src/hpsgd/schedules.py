"""Per-coordinate step-size schedules and the step-size caps of the two theorems.

The delayed schedules use a two-phase protocol per iteration: the step size
for iteration ``t`` is emitted with :meth:`ScheduleState.next_stepsize`
*before* the stochastic gradient of iteration ``t`` is shown to the schedule
with :meth:`ScheduleState.observe_gradient`. The step size therefore cannot
depend on the current noise. The ``nondelayed_adagrad`` kind, which breaks
that independence on purpose, is only reachable through
:meth:`ScheduleState.next_stepsize_nondelayed`.

States may hold a batch of independent trials: ``shape=(n, d)``.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

__all__ = [
    "ScheduleState",
    "ProtocolError",
    "SCHEDULE_KINDS",
    "theorem1_max_c",
    "theorem1_max_c_proof",
    "theorem1_cap",
    "theorem2_max_alpha",
    "theorem2_max_alpha_statement",
]

SCHEDULE_KINDS = ("constant", "inv_sqrt", "delayed_adagrad", "nondelayed_adagrad")


class ProtocolError(RuntimeError):
    """Schedule calls arrived out of order."""


class ScheduleState:
    """Mutable step-size generator owned by a single trial (or trial batch)."""

    def __init__(self, kind: str, shape, c: Optional[float] = None,
                 alpha: Optional[float] = None, beta: Optional[float] = None):
        if kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {kind!r}")
        self.kind = kind
        self.shape = (int(shape),) if np.isscalar(shape) else tuple(shape)
        if kind in ("constant", "inv_sqrt"):
            if c is None or not c > 0:
                raise ValueError(f"{kind} schedule needs c > 0")
        else:
            if alpha is None or beta is None or not alpha > 0 or not beta > 0:
                raise ValueError(f"{kind} schedule needs alpha > 0 and beta > 0")
        self.c = None if c is None else float(c)
        self.alpha = None if alpha is None else float(alpha)
        self.beta = None if beta is None else float(beta)
        self.accumulated = np.zeros(self.shape)
        self.t = 1
        self._emitted = False

    @property
    def dimension(self) -> int:
        return self.shape[-1]

    def _emit(self) -> np.ndarray:
        if self.kind == "constant":
            return np.full(self.shape, self.c)
        if self.kind == "inv_sqrt":
            return np.full(self.shape, self.c / math.sqrt(self.t))
        return self.alpha / np.sqrt(self.beta + self.accumulated)

    def next_stepsize(self) -> np.ndarray:
        """Step size for the current iteration, a function of past gradients only."""
        if self.kind == "nondelayed_adagrad":
            raise ProtocolError("nondelayed_adagrad needs the current gradient; "
                                "use next_stepsize_nondelayed")
        if self._emitted:
            raise ProtocolError(f"step size for t={self.t} already emitted")
        self._emitted = True
        return self._emit()

    def next_stepsize_nondelayed(self, g_current) -> np.ndarray:
        """AdaGrad step size that includes the current gradient (breaks the measurability contract)."""
        if self.kind != "nondelayed_adagrad":
            raise ProtocolError(f"next_stepsize_nondelayed called on a {self.kind} schedule")
        if self._emitted:
            raise ProtocolError(f"step size for t={self.t} already emitted")
        g = self._as_grad(g_current)
        self._emitted = True
        return self.alpha / np.sqrt(self.beta + self.accumulated + g * g)

    def _as_grad(self, g) -> np.ndarray:
        g = np.asarray(g, dtype=np.float64)
        if g.shape != self.shape:
            raise ValueError(f"gradient shape {g.shape} does not match schedule shape {self.shape}")
        return g

    def observe_gradient(self, g) -> None:
        if not self._emitted:
            raise ProtocolError(f"observe_gradient before the step size for t={self.t} was emitted")
        g = self._as_grad(g)
        self.accumulated += g * g
        self.t += 1
        self._emitted = False

    def __repr__(self) -> str:
        params = f"c={self.c}" if self.c is not None else f"alpha={self.alpha}, beta={self.beta}"
        return f"ScheduleState({self.kind}, {params}, t={self.t}, shape={self.shape})"


def _check_mu(mu: float) -> None:
    if not 0.0 <= mu < 1.0:
        raise ValueError(f"momentum mu must lie in [0, 1), got {mu}")


def theorem1_max_c(M: float, mu: float, T: int) -> float:
    """Largest ``c`` allowed by the 1/sqrt(t) theorem as stated: ``(1-mu^T)/(4M(3-2mu))``."""
    _check_mu(mu)
    if not M > 0 or T < 1:
        raise ValueError("need M > 0 and T >= 1")
    return (1.0 - mu ** T) / (4.0 * M * (3.0 - 2.0 * mu))


def theorem1_max_c_proof(M: float, mu: float) -> float:
    """Cap the proof of the 1/sqrt(t) theorem actually uses: ``(1-mu)/(4M(3-mu))``.

    It makes ``1 - 2M(3-mu) eta_1/(1-mu) >= 1/2``.
    """
    _check_mu(mu)
    if not M > 0:
        raise ValueError("need M > 0")
    return (1.0 - mu) / (4.0 * M * (3.0 - mu))


def theorem1_cap(M: float, mu: float, T: int) -> float:
    """The stricter of the stated and proof-derived caps; used for ``c = auto``."""
    return min(theorem1_max_c(M, mu, T), theorem1_max_c_proof(M, mu))


def theorem2_max_alpha(M: float, mu: float, beta: float) -> float:
    """``sqrt(beta)(1-mu)/(8M(3-mu))``, the condition the Delayed AdaGrad proof relies on."""
    _check_mu(mu)
    if not M > 0 or not beta > 0:
        raise ValueError("need M > 0 and beta > 0")
    return math.sqrt(beta) * (1.0 - mu) / (8.0 * M * (3.0 - mu))


def theorem2_max_alpha_statement(M: float, mu: float, beta: float) -> float:
    """The theorem statement's variant ``sqrt(beta)(1-mu)^2/(8M(1+mu))``, for reference."""
    _check_mu(mu)
    if not M > 0 or not beta > 0:
        raise ValueError("need M > 0 and beta > 0")
    return math.sqrt(beta) * (1.0 - mu) ** 2 / (8.0 * M * (1.0 + mu))
