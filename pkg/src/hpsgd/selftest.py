"""Fast invariant suite behind ``hpsgd selftest``."""
from __future__ import annotations

import math
import time
from typing import Callable

import numpy as np

from .bounds import auxiliary
from .numerics import rng_stream, rng_streams
from .objectives import make_quadratic
from .optimizer import run_batch
from .oracle import NoiseModel, verify_b2
from .schedules import ScheduleState

SEED = 2020


def _scalar():
    r = auxiliary.verify_scalar_inequalities()
    return r["max_violation"] <= 1e-12, f"max_violation={r['max_violation']:.3g}"


def _summation():
    r = auxiliary.verify_summation_identities(SEED, n_cases=200)
    worst_id = max(r["doublesum_1_max_rel_err"], r["doublesum_2_max_rel_err"])
    worst_si = max(r["sum_integral_inv_max_violation"], r["sum_integral_inv_sqrt_max_violation"])
    return worst_id <= 1e-10 and worst_si <= 1e-10, f"identity_err={worst_id:.3g} sum_integral={worst_si:.3g}"


def _solvers():
    r = auxiliary.verify_implicit_solvers(SEED, n_cases=200)
    bad = r["logsolvex_violations"] + r["solve_x_violations"]
    return bad == 0, f"violations={bad}"


def _forms():
    obj = make_quadratic(np.logspace(0, -2, 5))
    noise = NoiseModel("gaussian", 1.0)
    xs = []
    for form in ("classic", "current_rate"):
        b = run_batch(obj, noise, lambda s: ScheduleState("constant", s, c=0.05), 0.9, np.ones(5), 200, form,
                      rng_streams(SEED, range(4)), record_vectors=True)
        xs.append(b.x)
    gap = float(np.abs(xs[0] - xs[1]).max())
    return gap <= 1e-12, f"constant-step gap={gap:.3g}"


def _b2():
    worst = 0.0
    for kind, d in (("gaussian", 10), ("gaussian", 100), ("bounded_sphere", 1), ("bounded_sphere", 10)):
        est = verify_b2(NoiseModel(kind, 1.0), d, 100_000, rng_stream(SEED, d))["mgf_estimate"]
        worst = max(worst, est)
    return worst <= math.e + 0.05, f"max mgf_estimate={worst:.5f}"


CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("scalar_inequalities", _scalar),
    ("summation_identities", _summation),
    ("implicit_solvers", _solvers),
    ("form_equivalence", _forms),
    ("b2_spot_check", _b2),
]


def run_selftest(out=print) -> bool:
    ok_all = True
    for name, check in CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = check()
        except Exception as exc:  # a crash is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        ok_all &= ok
        out(f"{'PASS' if ok else 'FAIL'} {name}: {detail} ({time.perf_counter() - t0:.2f}s)")
    return ok_all
