"""Momentum SGD with per-coordinate step sizes.

Two update forms:

``classic`` (heavy ball, step size applied when a gradient arrives)::

    m_t = mu m_{t-1} + eta_t * g_t
    x_{t+1} = x_t - m_t

``current_rate`` (step size applied to the whole buffer)::

    m_t = mu m_{t-1} + g_t
    x_{t+1} = x_t - eta_t * m_t

With a constant step size the two produce the same iterates. With adaptive
step sizes they do not, and only the classic form keeps each step size
independent of the gradients it multiplies.

The engine advances a batch of independent trials at once. Trial ``i`` draws
its noise from its own generator in fixed-length segments, so its trajectory
does not depend on which other trials share the batch.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .objectives import Objective
from .oracle import GradientOracle, NoiseModel
from .schedules import ScheduleState

__all__ = [
    "MomentumState",
    "Trajectory",
    "BatchTrajectory",
    "DivergenceError",
    "step_classic",
    "step_current_rate",
    "run",
    "run_batch",
    "FORMS",
]

FORMS = ("classic", "current_rate")

# noise is drawn per trial in blocks of this many iterations
NOISE_SEGMENT = 256


class DivergenceError(FloatingPointError):
    def __init__(self, iteration: int, trial: Optional[int] = None):
        self.iteration = iteration
        self.trial = trial
        where = f"trial {trial}, " if trial is not None else ""
        super().__init__(f"non-finite iterate ({where}iteration {iteration})")


@dataclass(frozen=True)
class MomentumState:
    x: np.ndarray
    m: np.ndarray
    mu: float
    t: int = 1

    @classmethod
    def initial(cls, x1, mu: float) -> "MomentumState":
        if not 0.0 <= mu < 1.0:
            raise ValueError(f"momentum mu must lie in [0, 1), got {mu}")
        x1 = np.array(x1, dtype=np.float64)
        return cls(x=x1, m=np.zeros_like(x1), mu=float(mu), t=1)


def _check_shapes(state: MomentumState, eta: np.ndarray, g: np.ndarray) -> None:
    if eta.shape != state.x.shape or g.shape != state.x.shape:
        raise ValueError(f"dimension mismatch: x {state.x.shape}, eta {eta.shape}, g {g.shape}")


def step_classic(state: MomentumState, eta, g) -> MomentumState:
    eta = np.asarray(eta, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    _check_shapes(state, eta, g)
    m = state.mu * state.m + eta * g
    return MomentumState(x=state.x - m, m=m, mu=state.mu, t=state.t + 1)


def step_current_rate(state: MomentumState, eta, g) -> MomentumState:
    eta = np.asarray(eta, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    _check_shapes(state, eta, g)
    m = state.mu * state.m + g
    return MomentumState(x=state.x - eta * m, m=m, mu=state.mu, t=state.t + 1)


_STEPS = {"classic": step_classic, "current_rate": step_current_rate}


@dataclass
class Trajectory:
    """Per-iteration records of one run; index ``k`` holds iteration ``t = k + 1``.

    ``grad_norm_sq`` and ``weighted_grad_sq`` use the true gradient at
    ``x_t``, which the algorithm never sees but every bound is stated in.
    """

    grad_norm_sq: np.ndarray
    f_value: np.ndarray
    weighted_grad_sq: np.ndarray   # <eta_t, grad f(x_t)^2>
    eta_g_norm_sq: np.ndarray      # ||eta_t g_t||^2
    eta1: np.ndarray
    x1: np.ndarray
    x_final: np.ndarray
    f_final: float
    schedule_kind: str = ""
    form: str = "classic"
    eta: Optional[np.ndarray] = None
    g: Optional[np.ndarray] = None
    x: Optional[np.ndarray] = None  # iterates x_1 .. x_{T+1}

    @property
    def T(self) -> int:
        return int(self.grad_norm_sq.shape[0])

    @property
    def min_grad_sq(self) -> float:
        return float(self.grad_norm_sq.min())


@dataclass
class BatchTrajectory:
    """Records of ``n`` trials; per-iteration arrays have shape ``(T, n)``."""

    grad_norm_sq: np.ndarray
    f_value: np.ndarray
    weighted_grad_sq: np.ndarray
    eta_g_norm_sq: np.ndarray
    eta1: np.ndarray
    x1: np.ndarray
    x_final: np.ndarray
    f_final: np.ndarray
    schedule_kind: str = ""
    form: str = "classic"
    eta: Optional[np.ndarray] = None
    g: Optional[np.ndarray] = None
    x: Optional[np.ndarray] = None

    @property
    def n_trials(self) -> int:
        return int(self.grad_norm_sq.shape[1])

    def trial(self, i: int) -> Trajectory:
        def col(a):
            return None if a is None else np.ascontiguousarray(a[:, i])

        return Trajectory(
            grad_norm_sq=col(self.grad_norm_sq),
            f_value=col(self.f_value),
            weighted_grad_sq=col(self.weighted_grad_sq),
            eta_g_norm_sq=col(self.eta_g_norm_sq),
            eta1=self.eta1[i].copy(),
            x1=self.x1[i].copy(),
            x_final=self.x_final[i].copy(),
            f_final=float(self.f_final[i]),
            schedule_kind=self.schedule_kind,
            form=self.form,
            eta=col(self.eta),
            g=col(self.g),
            x=col(self.x),
        )


def run_batch(objective: Objective, noise: NoiseModel,
              make_schedule: Callable[[tuple], ScheduleState], mu: float, x1,
              T: int, form: str, rngs: Sequence[np.random.Generator],
              record_vectors: bool = False, trial_offset: int = 0) -> BatchTrajectory:
    """Run ``len(rngs)`` independent trials for ``T`` iterations.

    ``make_schedule(shape)`` builds a fresh schedule for the batch. Each
    iteration emits ``eta_t`` first, then reveals ``g_t`` (except for the
    deliberately non-delayed AdaGrad, which needs ``g_t`` to form ``eta_t``).
    ``trial_offset`` only affects the trial index reported on divergence.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if form not in FORMS:
        raise ValueError(f"unknown momentum form {form!r}")
    n = len(rngs)
    if n < 1:
        raise ValueError("need at least one trial")
    d = objective.dimension
    x1 = np.asarray(x1, dtype=np.float64)
    objective._check_dim(x1)

    sched = make_schedule((n, d))
    step = _STEPS[form]
    state = MomentumState.initial(np.broadcast_to(x1, (n, d)), mu)
    nondelayed = sched.kind == "nondelayed_adagrad"

    rec = {k: np.empty((T, n)) for k in ("grad_norm_sq", "f_value", "weighted_grad_sq", "eta_g_norm_sq")}
    vec = None
    if record_vectors:
        vec = {"eta": np.empty((T, n, d)), "g": np.empty((T, n, d)), "x": np.empty((T + 1, n, d))}
        vec["x"][0] = state.x
    eta1 = None
    noise_block = None

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(T):
            if k % NOISE_SEGMENT == 0:
                # always a full segment, so runs of different T share prefixes
                noise_block = np.stack([noise.sample(r, (NOISE_SEGMENT, d)) for r in rngs], axis=1)
            t = k + 1
            x = state.x
            grad = objective.gradient(x)
            grad_sq = grad * grad
            rec["grad_norm_sq"][k] = grad_sq.sum(axis=-1)
            rec["f_value"][k] = objective.value(x)
            if nondelayed:
                g = grad + noise_block[k % NOISE_SEGMENT]
                eta = sched.next_stepsize_nondelayed(g)
            else:
                eta = sched.next_stepsize()
                g = grad + noise_block[k % NOISE_SEGMENT]
            sched.observe_gradient(g)
            if k == 0:
                eta1 = eta.copy()
            rec["weighted_grad_sq"][k] = (eta * grad_sq).sum(axis=-1)
            eg = eta * g
            rec["eta_g_norm_sq"][k] = (eg * eg).sum(axis=-1)
            state = step(state, eta, g)
            bad = ~np.isfinite(state.x).all(axis=-1)
            if bad.any():
                raise DivergenceError(iteration=t, trial=trial_offset + int(np.argmax(bad)))
            if vec is not None:
                vec["eta"][k] = eta
                vec["g"][k] = g
                vec["x"][k + 1] = state.x

    f_final = objective.value(state.x)
    return BatchTrajectory(
        **rec,
        eta1=eta1,
        x1=np.broadcast_to(x1, (n, d)).copy(),
        x_final=state.x.copy(),
        f_final=np.asarray(f_final, dtype=np.float64),
        schedule_kind=sched.kind,
        form=form,
        **(vec or {}),
    )


def run(oracle: GradientOracle, schedule: ScheduleState, mu: float, x1, T: int,
        form: str = "classic", rng: Optional[np.random.Generator] = None,
        record_vectors: bool = True) -> Trajectory:
    """Single run driven by a caller-owned schedule and generator.

    The schedule must be fresh (``t == 1``) with shape ``(d,)``.
    """
    d = oracle.objective.dimension
    if schedule.shape != (d,):
        raise ValueError(f"schedule shape {schedule.shape} does not match dimension {d}")
    if schedule.t != 1:
        raise ValueError("schedule has already been advanced")
    if rng is None:
        if oracle.noise.kind != "none":
            raise ValueError("a generator is required for noisy oracles")
        rng = np.random.default_rng(0)

    wrapper = _SingleTrialSchedule(schedule)
    batch = run_batch(oracle.objective, oracle.noise, wrapper, mu, x1, T, form, [rng],
                      record_vectors=record_vectors)
    return batch.trial(0)


class _SingleTrialSchedule:
    """Lets a ``(d,)`` schedule drive a batch of one trial."""

    def __init__(self, schedule: ScheduleState):
        self.inner = schedule

    def __call__(self, shape):
        return self

    @property
    def kind(self):
        return self.inner.kind

    def next_stepsize(self):
        return self.inner.next_stepsize()[None, :]

    def next_stepsize_nondelayed(self, g):
        return self.inner.next_stepsize_nondelayed(g[0])[None, :]

    def observe_gradient(self, g):
        self.inner.observe_gradient(g[0])
