import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpsgd.numerics import elementwise, fit_loglog_slope, norm_sq, quantile, rng_stream, rng_streams


def test_elementwise_examples():
    np.testing.assert_array_equal(elementwise("mul", [1, 2], [3, 4]), [3, 8])
    np.testing.assert_array_equal(elementwise("sqrt", [4, 9]), [2, 3])
    np.testing.assert_array_equal(elementwise("max", [1, 5], [3, 4]), [3, 5])
    np.testing.assert_array_equal(elementwise("square", [-2, 3]), [4, 9])
    with pytest.raises(ZeroDivisionError):
        elementwise("div", [1, 1], [0, 1])


def test_elementwise_errors():
    with pytest.raises(ValueError):
        elementwise("mul", [1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        elementwise("sqrt", [-1.0])
    with pytest.raises(ValueError):
        elementwise("pow", [1.0], [2.0])
    with pytest.raises(ValueError):
        elementwise("mul", [1.0])


finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=1, max_size=20))
def test_elementwise_matches_scalar_loop(pairs):
    a = [p[0] for p in pairs]
    b = [p[1] if abs(p[1]) >= 1e-3 else 1.0 for p in pairs]
    np.testing.assert_array_equal(elementwise("mul", a, b), [x * y for x, y in zip(a, b)])
    np.testing.assert_array_equal(elementwise("div", a, b), [x / y for x, y in zip(a, b)])
    np.testing.assert_array_equal(elementwise("max", a, b), [max(x, y) for x, y in zip(a, b)])
    np.testing.assert_array_equal(elementwise("square", a), [x * x for x in a])
    np.testing.assert_array_equal(elementwise("sqrt", np.abs(a)), [math.sqrt(abs(x)) for x in a])


def test_norm_sq():
    assert norm_sq([3, 4]) == 25
    assert norm_sq(np.zeros(7)) == 0
    assert norm_sq([1, 1, 1, 1]) == 4
    np.testing.assert_array_equal(norm_sq([[3, 4], [1, 0]]), [25, 1])


def test_quantile_examples():
    assert quantile([1, 2, 3, 4], 0.5) == 2
    assert quantile([7], 0.99) == 7
    assert quantile([5, 1, 3], 1.0) == 5
    # 0.95 * 1000 lands a hair above 950 in floating point
    assert quantile(np.arange(1, 1001), 0.95) == 950
    with pytest.raises(ValueError):
        quantile([], 0.5)
    with pytest.raises(ValueError):
        quantile([1.0], 1.5)


@given(st.lists(finite, min_size=1, max_size=50), st.floats(0, 1))
def test_quantile_properties(xs, q):
    assert quantile(xs, 0.0) == min(xs)
    assert quantile(xs, 1.0) == max(xs)
    v = quantile(xs, q)
    assert v in xs
    assert sum(x <= v for x in xs) >= math.ceil(q * len(xs) - 1e-9)


def test_slope_examples():
    assert fit_loglog_slope([(10, 1), (100, 0.1), (1000, 0.01)]).slope == pytest.approx(-1, abs=1e-9)
    assert fit_loglog_slope([(4, 2), (16, 1), (64, 0.5)]).slope == pytest.approx(-0.5, abs=1e-9)
    fit = fit_loglog_slope([(1, 1), (2, 1), (4, 1)])
    assert fit.slope == 0 and fit.r_squared == 1.0


def test_slope_errors():
    with pytest.raises(ValueError):
        fit_loglog_slope([(1, 1), (2, 1)])
    with pytest.raises(ValueError):
        fit_loglog_slope([(1, 1), (2, 0), (3, 1)])
    with pytest.raises(ValueError):
        fit_loglog_slope([(1, 1), (1, 2), (3, 1)])


@given(st.floats(-3, 3), st.floats(0.01, 100), st.integers(3, 10))
def test_slope_recovers_power_law(p, c, n):
    Ts = [2.0 ** k for k in range(n)]
    fit = fit_loglog_slope([(T, c * T ** p) for T in Ts])
    assert abs(fit.slope - p) < 1e-9
    assert 0.0 <= fit.r_squared <= 1.0


def test_rng_streams_reproducible_and_independent():
    a = rng_stream(7, 3).standard_normal(1000)
    b = rng_stream(7, 3).standard_normal(1000)
    np.testing.assert_array_equal(a, b)
    x, y = (r.standard_normal(100_000) for r in rng_streams(7, [0, 1]))
    assert abs(np.corrcoef(x, y)[0, 1]) < 0.05
    z = rng_stream(8, 0).standard_normal(100_000)
    assert abs(np.corrcoef(x, z)[0, 1]) < 0.05
    with pytest.raises(ValueError):
        rng_stream(1, -1)
