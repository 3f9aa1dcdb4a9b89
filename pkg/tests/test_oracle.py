import math

import numpy as np
import pytest

from hpsgd.numerics import rng_stream
from hpsgd.objectives import make_quadratic, make_sin_sq_nonconvex
from hpsgd.oracle import GradientOracle, NoiseModel, gaussian_scale, sample_gradient, verify_b2


def test_noise_free_is_exact():
    o = GradientOracle(make_quadratic([1.0]), NoiseModel("none"))
    g = sample_gradient(o, [2.0], rng_stream(0))
    np.testing.assert_array_equal(g, [2.0])
    assert sample_gradient(o, [2.0], rng_stream(5))[0] == 2.0


def test_gaussian_mean_unbiased():
    o = GradientOracle(make_quadratic([1.0]), NoiseModel("gaussian", 1.0))
    x = np.full((1_000_000, 1), 2.0)
    g = sample_gradient(o, x, rng_stream(0))
    assert abs(g.mean() - 2.0) < 0.01


def test_bounded_sphere_radius():
    noise = NoiseModel("bounded_sphere", 0.5)
    eps = noise.sample(rng_stream(0), (100_000, 3))
    assert np.all(np.linalg.norm(eps, axis=1) <= 0.5)


@pytest.mark.parametrize("kind", ["gaussian", "bounded_sphere"])
def test_unbiased_at_random_points(kind):
    rng = rng_stream(3)
    obj = make_sin_sq_nonconvex(4, 1.0)
    o = GradientOracle(obj, NoiseModel(kind, 1.0))
    for _ in range(10):
        x = rng.uniform(-3, 3, 4)
        g = sample_gradient(o, np.broadcast_to(x, (100_000, 4)), rng)
        se = g.std(axis=0) / math.sqrt(g.shape[0])
        assert np.all(np.abs(g.mean(axis=0) - obj.gradient(x)) < 5 * se)


def test_gaussian_scale_makes_mgf_exactly_e():
    for d in (1, 2, 10, 100):
        s2 = gaussian_scale(1.0, d) ** 2
        assert (1 - 2 * s2) ** (-d / 2) == pytest.approx(math.e, rel=1e-12)


@pytest.mark.parametrize("d", [10, 100])
def test_b2_gaussian_finite_variance_dims(d):
    est = verify_b2(NoiseModel("gaussian", 1.0), d, 10 ** 6, rng_stream(2020, d))["mgf_estimate"]
    assert 2.5 <= est <= math.e + 0.05


@pytest.mark.parametrize("d", [1, 2, 10, 100])
def test_b2_bounded_sphere_pointwise(d):
    assert verify_b2(NoiseModel("bounded_sphere", 1.0), d, 100_000, rng_stream(1))["mgf_estimate"] <= math.e


def test_b2_inflated_negative_control():
    est = verify_b2(NoiseModel("gaussian", 1.0, inflate=2.0), 1, 10 ** 5, rng_stream(0))["mgf_estimate"]
    assert est > math.e


def test_noise_model_errors():
    with pytest.raises(ValueError):
        NoiseModel("gaussian", 0.0)
    with pytest.raises(ValueError):
        NoiseModel("laplace", 1.0)
    with pytest.raises(ValueError):
        verify_b2(NoiseModel("gaussian", 1.0), 1, 100, rng_stream(0))
    o = GradientOracle(make_quadratic([1.0]), NoiseModel("none"))
    with pytest.raises(ValueError):
        sample_gradient(o, [1.0, 2.0], rng_stream(0))
