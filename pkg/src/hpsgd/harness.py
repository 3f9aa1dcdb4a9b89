"""Trial ensembles: many independent runs of one configuration, their bound
checks, and the rate and momentum-form experiments built on top of them.

A high-probability statement ("with probability at least 1 - delta the run
satisfies X") is tested by running independent trials and checking that the
fraction of trials violating X stays below delta.
"""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np

from . import bounds
from .bounds import BoundCheckResult, BoundInputs
from .numerics import SlopeFit, fit_loglog_slope, quantile, rng_streams
from .objectives import Objective, initial_point, make_objective
from .optimizer import DivergenceError, run_batch
from .oracle import NoiseModel
from .schedules import (
    ScheduleState,
    theorem1_cap,
    theorem1_max_c,
    theorem2_max_alpha,
)

log = logging.getLogger(__name__)

__all__ = [
    "ObjectiveSpec",
    "NoiseSpec",
    "ScheduleSpec",
    "ExperimentConfig",
    "ConfigError",
    "EnsembleResult",
    "RateReport",
    "run_ensemble",
    "rate_experiment",
    "momentum_form_comparison",
    "thread_count",
]

THREADS_ENV = "HPSGD_THREADS"
# trials per batch; fixed so results do not depend on the thread count
CHUNK_TRIALS = 128


class ConfigError(ValueError):
    pass


@dataclass
class ObjectiveSpec:
    kind: str = "quadratic"
    d: int = 10
    diag: Optional[list] = None
    spectrum: str = "logspace"
    lambda_min: float = 1e-4
    a: float = 1.0

    def build(self) -> Objective:
        return make_objective(self.kind, d=self.d, diag=self.diag, spectrum=self.spectrum,
                              lambda_min=self.lambda_min, a=self.a)


@dataclass
class NoiseSpec:
    kind: str = "gaussian"
    sigma: float = 1.0

    def build(self) -> NoiseModel:
        if self.kind == "none" or self.sigma == 0:
            return NoiseModel("none", 0.0)
        return NoiseModel(self.kind, float(self.sigma))


@dataclass
class ScheduleSpec:
    kind: str = "inv_sqrt"
    c: Union[float, str] = "auto"
    alpha: Union[float, str] = "auto"
    beta: float = 1.0


@dataclass
class ExperimentConfig:
    objective: ObjectiveSpec = field(default_factory=ObjectiveSpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    mu: float = 0.5
    form: str = "classic"
    x1: Union[str, list] = "default"
    T: int = 1000
    T_grid: Optional[list] = None
    n_trials: int = 100
    delta: float = 0.05
    base_seed: int = 2020
    force: bool = False

    def validate(self) -> None:
        if not 0.0 <= self.mu < 1.0:
            raise ConfigError(f"mu must lie in [0, 1), got {self.mu}")
        if self.form not in ("classic", "current_rate"):
            raise ConfigError(f"form must be classic or current_rate, got {self.form!r}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if self.T < 1:
            raise ConfigError("T must be >= 1")
        if self.T_grid is not None:
            grid = list(self.T_grid)
            if len(grid) < 1 or any(t < 1 for t in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError("T_grid must be strictly increasing positive integers")
        if self.schedule.kind not in ("constant", "inv_sqrt", "delayed_adagrad", "nondelayed_adagrad"):
            raise ConfigError(f"unknown schedule kind {self.schedule.kind!r}")

    def at(self, T: int) -> "ExperimentConfig":
        return replace(self, T=int(T))

    def resolve(self) -> tuple["ExperimentConfig", list[str]]:
        """Replace ``auto`` step sizes by the theorem caps and enforce the caps.

        Returns the resolved config and human-readable notes for the log.
        Caps depend on ``T``; resolve per horizon.
        """
        self.validate()
        try:
            obj = self.objective.build()
            initial_point(obj, self.x1)
            self.noise.build()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        M = obj.smoothness_M
        sch = self.schedule
        notes = []
        if sch.kind in ("constant", "inv_sqrt"):
            if sch.c == "auto":
                c = theorem1_cap(M, self.mu, self.T)
                notes.append(f"schedule.c=auto -> {c!r} (min of (1-mu^T)/(4M(3-2mu)) and "
                             f"(1-mu)/(4M(3-mu)); M={M}, mu={self.mu}, T={self.T})")
            else:
                c = float(sch.c)
            if not c > 0:
                raise ConfigError("schedule.c must be > 0")
            if sch.kind == "inv_sqrt":
                cap = theorem1_max_c(M, self.mu, self.T)
                if c > cap * (1 + 1e-12):
                    msg = (f"schedule.c={c} exceeds the 1/sqrt(t) cap (1-mu^T)/(4M(3-2mu)) = {cap}")
                    if not self.force:
                        raise ConfigError(msg + "; pass --force to run anyway")
                    notes.append("WARNING: " + msg + " (forced)")
            sch = replace(sch, c=c)
        else:
            if not sch.beta > 0:
                raise ConfigError("schedule.beta must be > 0")
            cap = theorem2_max_alpha(M, self.mu, sch.beta)
            if sch.alpha == "auto":
                alpha = cap
                notes.append(f"schedule.alpha=auto -> {alpha!r} (sqrt(beta)(1-mu)/(8M(3-mu)); "
                             f"M={M}, mu={self.mu}, beta={sch.beta})")
            else:
                alpha = float(sch.alpha)
            if not alpha > 0:
                raise ConfigError("schedule.alpha must be > 0")
            if alpha > cap * (1 + 1e-12):
                msg = f"schedule.alpha={alpha} exceeds the Delayed AdaGrad cap sqrt(beta)(1-mu)/(8M(3-mu)) = {cap}"
                if not self.force:
                    raise ConfigError(msg + "; pass --force to run anyway")
                notes.append("WARNING: " + msg + " (forced)")
            sch = replace(sch, alpha=alpha)
        return replace(self, schedule=sch), notes

    def to_dict(self) -> dict:
        return asdict(self)


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
        return max(1, n)
    return os.cpu_count() or 1


def _schedule_factory(spec: ScheduleSpec) -> Callable[[tuple], ScheduleState]:
    if spec.kind in ("constant", "inv_sqrt"):
        return lambda shape: ScheduleState(spec.kind, shape, c=spec.c)
    return lambda shape: ScheduleState(spec.kind, shape, alpha=spec.alpha, beta=spec.beta)


@dataclass
class EnsembleResult:
    config: ExperimentConfig
    notes: list
    min_grad_sq: np.ndarray
    f_final: np.ndarray
    lemma2: list
    lemma3_first: Optional[list] = None
    lemma3_second: Optional[list] = None
    theorem: Optional[list] = None
    theorem_name: Optional[str] = None
    theorem_rhs: Optional[float] = None
    theorem2_intermediate: Optional[list] = None

    @property
    def T(self) -> int:
        return self.config.T

    @property
    def n_trials(self) -> int:
        return int(self.min_grad_sq.size)

    @property
    def quantiles(self) -> dict:
        q = 1.0 - self.config.delta
        return {
            0.5: quantile(self.min_grad_sq, 0.5),
            0.9: quantile(self.min_grad_sq, 0.9),
            q: quantile(self.min_grad_sq, q),
        }

    @staticmethod
    def _frac(results: Optional[list]) -> Optional[float]:
        if results is None:
            return None
        return sum(not r.holds for r in results) / len(results)

    @property
    def violation_fractions(self) -> dict:
        return {
            "lemma2": self._frac(self.lemma2),
            "lemma3_first": self._frac(self.lemma3_first),
            "lemma3_second": self._frac(self.lemma3_second),
            "theorem": self._frac(self.theorem),
            "theorem2_intermediate": self._frac(self.theorem2_intermediate),
        }


def _base_inputs(cfg: ExperimentConfig, obj: Objective, x1: np.ndarray, noise: NoiseModel) -> BoundInputs:
    sch = cfg.schedule
    kw = {}
    if sch.kind in ("constant", "inv_sqrt"):
        kw["c"] = sch.c
    else:
        kw["alpha"], kw["beta"] = sch.alpha, sch.beta
    return BoundInputs(f_gap=obj.f_gap(x1), M=obj.smoothness_M, mu=cfg.mu, sigma=noise.effective_sigma,
                       delta=cfg.delta, T=cfg.T, d=obj.dimension, **kw)


def run_ensemble(config: ExperimentConfig, threads: Optional[int] = None) -> EnsembleResult:
    """Run ``config.n_trials`` trials of horizon ``config.T``; trial ``i`` uses stream ``i``.

    Trials are processed in fixed chunks of :data:`CHUNK_TRIALS`, distributed
    over ``threads`` workers; the result is the same for any worker count.
    """
    cfg, notes = config.resolve()
    for line in notes:
        log.debug(line)
    obj = cfg.objective.build()
    noise = cfg.noise.build()
    x1 = initial_point(obj, cfg.x1)
    make_schedule = _schedule_factory(cfg.schedule)
    n = cfg.n_trials
    starts = list(range(0, n, CHUNK_TRIALS))

    def work(start):
        idx = range(start, min(start + CHUNK_TRIALS, n))
        return run_batch(obj, noise, make_schedule, cfg.mu, x1, cfg.T, cfg.form,
                         rng_streams(cfg.base_seed, idx), trial_offset=start)

    workers = max(1, min(threads or thread_count(), len(starts)))
    if workers == 1:
        batches = [work(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(work, starts))

    base = _base_inputs(cfg, obj, x1, noise)
    kind = cfg.schedule.kind
    theorem_name = theorem_rhs = None
    if kind == "inv_sqrt" and cfg.schedule.c <= theorem1_max_c(obj.smoothness_M, cfg.mu, cfg.T) * (1 + 1e-12):
        theorem_name, theorem_rhs = "theorem1", bounds.theorem1_rhs(base)
    elif kind == "delayed_adagrad" and cfg.schedule.alpha <= theorem2_max_alpha(
            obj.smoothness_M, cfg.mu, cfg.schedule.beta) * (1 + 1e-12):
        theorem_name, theorem_rhs = "theorem2", bounds.theorem2_rhs(base)

    min_g, f_fin, l2, l3a, l3b, thm, t2i = [], [], [], [], [], [], []
    for batch in batches:
        for j in range(batch.n_trials):
            tr = batch.trial(j)
            p = base.with_(eta1_norm=float(np.linalg.norm(tr.eta1)))
            min_g.append(tr.min_grad_sq)
            f_fin.append(tr.f_final)
            l2.append(bounds.check_lemma2(tr, p))
            if kind == "delayed_adagrad":
                a, b = bounds.check_lemma3(tr, p)
                l3a.append(a)
                l3b.append(b)
            if theorem_name is not None:
                thm.append(BoundCheckResult.compare(tr.min_grad_sq, theorem_rhs))
                if theorem_name == "theorem2":
                    t2i.append(bounds.check_theorem2_intermediate(tr, p))

    return EnsembleResult(
        config=cfg,
        notes=notes,
        min_grad_sq=np.array(min_g),
        f_final=np.array(f_fin),
        lemma2=l2,
        lemma3_first=l3a or None,
        lemma3_second=l3b or None,
        theorem=thm or None,
        theorem_name=theorem_name,
        theorem_rhs=theorem_rhs,
        theorem2_intermediate=t2i or None,
    )


@dataclass
class RateReport:
    slope_fit: SlopeFit
    T: list
    median: list
    q90: list
    slope_running: list
    ensembles: list = field(default_factory=list, repr=False)

    def rows(self):
        return list(zip(self.T, self.median, self.q90, self.slope_running))


def rate_experiment(config: ExperimentConfig,
                    runner: Callable[[ExperimentConfig], EnsembleResult] = run_ensemble) -> RateReport:
    """Median ``min_t ||grad f(x_t)||^2`` per horizon and its log-log slope in ``T``."""
    grid = list(config.T_grid or [])
    if len(grid) < 5:
        raise ConfigError("rate_experiment needs a T_grid with at least 5 points")
    config.validate()
    Ts, med, q90, running, ens = [], [], [], [], []
    for T in grid:
        res = runner(config.at(T))
        Ts.append(int(T))
        med.append(quantile(res.min_grad_sq, 0.5))
        q90.append(quantile(res.min_grad_sq, 0.9))
        ens.append(res)
        if len(Ts) >= 3 and all(v > 0 for v in med):
            running.append(fit_loglog_slope(list(zip(Ts, med))).slope)
        else:
            running.append(math.nan)
    fit = fit_loglog_slope(list(zip(Ts, med)))
    return RateReport(slope_fit=fit, T=Ts, median=med, q90=q90, slope_running=running, ensembles=ens)


def momentum_form_comparison(config: ExperimentConfig) -> dict:
    """Run both momentum forms on identical noise for a constant and a Delayed
    AdaGrad schedule; report ``max_{t<=T+1} ||x_t^classic - x_t^current||``
    (max over trials) for each ``T`` of the grid (or just ``config.T``).

    The constant step is the 1/sqrt(t) cap at the largest horizon; ``alpha``
    and ``beta`` come from the config (``auto`` resolves to the cap).
    """
    config.validate()
    grid = list(config.T_grid or [config.T])
    T_max = grid[-1]
    obj = config.objective.build()
    noise = config.noise.build()
    x1 = initial_point(obj, config.x1)
    M = obj.smoothness_M
    beta = float(config.schedule.beta)
    alpha = config.schedule.alpha
    alpha = theorem2_max_alpha(M, config.mu, beta) if alpha == "auto" else float(alpha)
    c = theorem1_cap(M, config.mu, T_max)
    schedules = {
        "constant": lambda shape: ScheduleState("constant", shape, c=c),
        "delayed_adagrad": lambda shape: ScheduleState("delayed_adagrad", shape, alpha=alpha, beta=beta),
    }
    out = {"T": grid, "c": c, "alpha": alpha, "beta": beta}
    for name, factory in schedules.items():
        running = np.zeros(T_max + 1)
        for start in range(0, config.n_trials, CHUNK_TRIALS):
            idx = range(start, min(start + CHUNK_TRIALS, config.n_trials))
            xs = {}
            for form in ("classic", "current_rate"):
                b = run_batch(obj, noise, factory, config.mu, x1, T_max, form,
                              rng_streams(config.base_seed, idx), record_vectors=True, trial_offset=start)
                xs[form] = b.x
            gap = np.linalg.norm(xs["classic"] - xs["current_rate"], axis=-1).max(axis=1)
            running = np.maximum(running, np.maximum.accumulate(gap))
        # x_1..x_{T+1} occupy indices 0..T
        out[name] = [float(running[T]) for T in grid]
    return out


__all__ += ["DivergenceError"]
