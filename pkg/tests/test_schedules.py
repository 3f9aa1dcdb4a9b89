import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpsgd.numerics import rng_stream
from hpsgd.schedules import (
    ProtocolError,
    ScheduleState,
    theorem1_cap,
    theorem1_max_c,
    theorem1_max_c_proof,
    theorem2_max_alpha,
    theorem2_max_alpha_statement,
)


def test_next_stepsize_examples():
    s = ScheduleState("delayed_adagrad", 3, alpha=1.0, beta=4.0)
    np.testing.assert_array_equal(s.next_stepsize(), [0.5, 0.5, 0.5])

    s = ScheduleState("inv_sqrt", 2, c=0.1)
    for _ in range(3):
        s.next_stepsize()
        s.observe_gradient(np.zeros(2))
    np.testing.assert_allclose(s.next_stepsize(), 0.05, rtol=1e-15)

    s = ScheduleState("delayed_adagrad", 1, alpha=1.0, beta=1.0)
    s.next_stepsize()
    s.observe_gradient([3.0])
    assert s.next_stepsize()[0] == 1 / math.sqrt(10)


def test_observe_gradient_examples():
    s = ScheduleState("delayed_adagrad", 1, alpha=1.0, beta=1.0)
    for g in ([2.0], [1.0], [0.0]):
        s.next_stepsize()
        s.observe_gradient(g)
    np.testing.assert_array_equal(s.accumulated, [5.0])
    s.next_stepsize()
    with pytest.raises(ValueError):
        s.observe_gradient([1.0, 2.0])


def test_protocol_errors():
    s = ScheduleState("delayed_adagrad", 1, alpha=1.0, beta=1.0)
    with pytest.raises(ProtocolError):
        s.observe_gradient([1.0])
    s.next_stepsize()
    with pytest.raises(ProtocolError):
        s.next_stepsize()
    with pytest.raises(ProtocolError):
        s.next_stepsize_nondelayed([1.0])
    with pytest.raises(ProtocolError):
        ScheduleState("nondelayed_adagrad", 1, alpha=1.0, beta=1.0).next_stepsize()


def test_nondelayed_examples():
    s = ScheduleState("nondelayed_adagrad", 1, alpha=1.0, beta=1.0)
    assert s.next_stepsize_nondelayed([3.0])[0] == 1 / math.sqrt(10)
    s2 = ScheduleState("nondelayed_adagrad", 1, alpha=1.0, beta=1.0)
    assert s2.next_stepsize_nondelayed([0.0])[0] == 1.0
    delayed = ScheduleState("delayed_adagrad", 1, alpha=1.0, beta=1.0).next_stepsize()[0]
    assert delayed == 1.0 != 1 / math.sqrt(10)


def test_invalid_params():
    with pytest.raises(ValueError):
        ScheduleState("constant", 1, c=0.0)
    with pytest.raises(ValueError):
        ScheduleState("delayed_adagrad", 1, alpha=1.0)
    with pytest.raises(ValueError):
        ScheduleState("adam", 1, c=1.0)


@pytest.mark.parametrize("kind", ["constant", "inv_sqrt", "delayed_adagrad"])
def test_c1_monotone_over_random_sequences(kind):
    rng = rng_stream(11)
    for _ in range(1000):
        d = int(rng.integers(1, 5))
        T = int(rng.integers(1, 30))
        s = ScheduleState(kind, d, c=0.3, alpha=0.7, beta=0.5)
        prev = np.full(d, np.inf)
        for g in rng.standard_normal((T, d)) * rng.exponential(3.0):
            eta = s.next_stepsize()
            assert np.all(eta > 0) and np.all(eta <= prev)
            prev = eta
            s.observe_gradient(g)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=2), min_size=1, max_size=25),
       st.floats(0.01, 10), st.floats(0.01, 10))
def test_delayed_adagrad_closed_form(gs, alpha, beta):
    s = ScheduleState("delayed_adagrad", 2, alpha=alpha, beta=beta)
    hist = []
    for g in gs:
        eta = s.next_stepsize()
        expected = [alpha / math.sqrt(beta + sum(h[j] * h[j] for h in hist)) for j in range(2)]
        np.testing.assert_array_equal(eta, expected)
        s.observe_gradient(g)
        hist.append(g)


def test_eta1_independent_of_future():
    for seed in range(5):
        s = ScheduleState("delayed_adagrad", 3, alpha=0.2, beta=4.0)
        np.testing.assert_array_equal(s.next_stepsize(), 0.1)
        s.observe_gradient(rng_stream(seed).standard_normal(3))


def test_theorem1_caps():
    assert theorem1_max_c(1.0, 0.0, 5) == pytest.approx(1 / 12)
    assert theorem1_max_c(2.0, 0.5, 10) == pytest.approx((1 - 0.5 ** 10) / 16, rel=1e-15)
    assert theorem1_max_c(2.0, 0.5, 10) == pytest.approx(0.062439, abs=1e-6)
    with pytest.raises(ValueError):
        theorem1_max_c(1.0, 1.0, 5)
    assert theorem1_max_c_proof(1.0, 0.5) == pytest.approx(0.5 / 10)
    assert theorem1_cap(1.0, 0.5, 4096) == min(theorem1_max_c(1.0, 0.5, 4096), 0.05)


def test_theorem2_caps():
    assert theorem2_max_alpha(1.0, 0.0, 1.0) == pytest.approx(1 / 24)
    assert theorem2_max_alpha(1.0, 0.9, 4.0) == pytest.approx(2 * 0.1 / (8 * 2.1), rel=1e-14)
    assert theorem2_max_alpha(1.0, 0.9, 4.0) == pytest.approx(0.0119047, abs=1e-7)
    with pytest.raises(ValueError):
        theorem2_max_alpha(1.0, 0.5, 0.0)
    with pytest.raises(ValueError):
        theorem2_max_alpha(1.0, 1.0, 1.0)
    assert theorem2_max_alpha_statement(1.0, 0.5, 1.0) == pytest.approx(0.25 / 12)
