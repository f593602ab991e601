"""Closed-form Gaussian values used as ground truth everywhere else."""

import numpy as np
import pytest

from sigw.errors import DimensionOrder, NotPSD
from sigw.gaussian import igw_gaussian, projected_igw_gaussian, sliced_igw_gaussian
from sigw.measures import GaussianMeasure
from sigw.slicing import SliceObjective, mc_estimate, sample_directions

from oracles import random_orthogonal, random_stiefel


def _random_psd(rng, d, scale=1.0):
    f = rng.normal(size=(d, d)) * scale
    return GaussianMeasure(f @ f.T / d)


# ---------------------------------------------------------------------------
# sliced closed form
# ---------------------------------------------------------------------------


def test_sliced_equal_covariances():
    g = GaussianMeasure(np.array([[2.0, 0.3], [0.3, 1.0]]))
    out = sliced_igw_gaussian(g, g)
    assert out.sliced_igw_squared == pytest.approx(0.0, abs=1e-14)
    d = out.delta_star
    assert np.linalg.norm(d.T @ d - np.eye(2)) <= 1e-10


def test_sliced_identity_vs_double():
    for d in (1, 2, 3, 5):
        out = sliced_igw_gaussian(GaussianMeasure(np.eye(d)), GaussianMeasure(2.0 * np.eye(d)))
        assert out.sliced_igw_squared == pytest.approx(1.0, abs=1e-12)


def test_sliced_scalar_into_plane():
    out = sliced_igw_gaussian(GaussianMeasure([[1.0]]), GaussianMeasure(np.eye(2)))
    assert out.sliced_igw_squared == pytest.approx(3.0 / 8.0, abs=1e-14)
    assert out.delta_star.shape == (2, 1)


def test_sliced_rejects_dimension_order():
    with pytest.raises(DimensionOrder):
        sliced_igw_gaussian(GaussianMeasure(np.eye(3)), GaussianMeasure(np.eye(2)))


def test_delta_star_on_stiefel():
    rng = np.random.default_rng(71)
    for _ in range(50):
        d_y = int(rng.integers(1, 8))
        d_x = int(rng.integers(1, d_y + 1))
        out = sliced_igw_gaussian(_random_psd(rng, d_x), _random_psd(rng, d_y))
        d = out.delta_star
        assert np.linalg.norm(d.T @ d - np.eye(d_x)) <= 1e-10
        assert out.sliced_igw_squared >= 0.0


def test_sliced_symmetric_in_spectra_when_square():
    rng = np.random.default_rng(73)
    for _ in range(25):
        d = int(rng.integers(1, 7))
        a, b = _random_psd(rng, d), _random_psd(rng, d)
        v1 = sliced_igw_gaussian(a, b).sliced_igw_squared
        v2 = sliced_igw_gaussian(b, a).sliced_igw_squared
        assert abs(v1 - v2) <= 1e-10 * max(1.0, v1)


def test_sliced_rotation_invariance():
    rng = np.random.default_rng(79)
    for _ in range(25):
        d_y = int(rng.integers(2, 7))
        d_x = int(rng.integers(1, d_y + 1))
        mu, nu = _random_psd(rng, d_x), _random_psd(rng, d_y)
        o = random_orthogonal(rng, d_y)
        rotated = GaussianMeasure(o @ nu.covariance @ o.T)
        v1 = sliced_igw_gaussian(mu, nu).sliced_igw_squared
        v2 = sliced_igw_gaussian(mu, rotated).sliced_igw_squared
        assert abs(v1 - v2) <= 1e-10 * max(1.0, v1)


def test_sliced_rejects_real_psd_violation():
    with pytest.raises(NotPSD):
        GaussianMeasure(np.diag([1.0, -0.5]))


# ---------------------------------------------------------------------------
# full-space closed form
# ---------------------------------------------------------------------------


def test_igw_equal_is_zero():
    g = GaussianMeasure(np.diag([3.0, 1.0]))
    assert igw_gaussian(g, g) == pytest.approx(0.0, abs=1e-14)


def test_igw_hand_value():
    got = igw_gaussian(GaussianMeasure(np.eye(2)), GaussianMeasure(np.diag([4.0, 1.0])))
    assert got == pytest.approx(3.0, abs=1e-12)


def test_igw_isotropic_scaling():
    rng = np.random.default_rng(83)
    for d in (1, 2, 4, 7):
        c = float(rng.uniform(0.1, 5.0))
        got = igw_gaussian(GaussianMeasure(np.eye(d)), GaussianMeasure(c * np.eye(d)))
        assert got == pytest.approx(np.sqrt(d) * abs(1.0 - c), abs=1e-10)


def test_igw_pads_smaller_spectrum():
    got = igw_gaussian(GaussianMeasure([[2.0]]), GaussianMeasure(np.diag([2.0, 1.0])))
    assert got == pytest.approx(1.0, abs=1e-12)


def test_igw_rotation_invariance():
    rng = np.random.default_rng(89)
    for _ in range(25):
        d = int(rng.integers(1, 7))
        a, b = _random_psd(rng, d), _random_psd(rng, d)
        o = random_orthogonal(rng, d)
        v1 = igw_gaussian(a, b)
        v2 = igw_gaussian(a, GaussianMeasure(o @ b.covariance @ o.T))
        assert abs(v1 - v2) <= 1e-10 * max(1.0, v1)


# ---------------------------------------------------------------------------
# per-slice closed form
# ---------------------------------------------------------------------------


def test_projected_zero_when_variances_match():
    mu = GaussianMeasure(np.eye(2))
    nu = GaussianMeasure(np.eye(2))
    theta = np.array([1.0, 0.0])
    assert projected_igw_gaussian(mu, nu, np.eye(2), theta) == pytest.approx(0.0, abs=1e-14)


def test_projected_hand_instance():
    # a = theta^T Delta S_mu Delta^T theta = 2, b = theta^T S_nu theta = 3
    mu = GaussianMeasure([[2.0]])
    nu = GaussianMeasure(np.diag([3.0, 1.0]))
    delta = np.array([[1.0], [0.0]])
    theta = np.array([1.0, 0.0])
    assert projected_igw_gaussian(mu, nu, delta, theta) == pytest.approx(1.0, abs=1e-14)


def test_projected_degenerate_source():
    rng = np.random.default_rng(97)
    mu = GaussianMeasure(np.zeros((2, 2)))
    nu = _random_psd(rng, 3)
    delta = random_stiefel(rng, 3, 2)
    for _ in range(10):
        theta = rng.normal(size=3)
        theta /= np.linalg.norm(theta)
        want = float(theta @ nu.covariance @ theta) ** 2
        got = projected_igw_gaussian(mu, nu, delta, theta)
        assert got == pytest.approx(want, rel=1e-12)


def test_delta_star_one_sided_optimality():
    rng = np.random.default_rng(101)
    mu, nu = _random_psd(rng, 3), _random_psd(rng, 5)
    out = sliced_igw_gaussian(mu, nu)
    dirs = sample_directions(5, 512, seed=404)
    obj = SliceObjective(mu, nu, dirs)
    costs_at_star = np.array(
        [projected_igw_gaussian(mu, nu, out.delta_star, th) for th in dirs.directions]
    )
    base = float(costs_at_star.mean())
    stderr = float(costs_at_star.std(ddof=1)) / np.sqrt(dirs.m)
    for _ in range(100):
        delta = random_stiefel(rng, 5, 3)
        assert mc_estimate(obj, delta) >= base - 2.0 * stderr
