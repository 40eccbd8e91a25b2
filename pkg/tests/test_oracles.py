"""Independent oracles: closed-form 1-D, finite-difference 2-D, SDE sampler."""
import math

import numpy as np
import pytest

from gfpk import (
    DomainError,
    InstabilityError,
    constant_drift,
    custom_drift,
    l2_gamma_distance,
    oracle_1d,
    oracle_1d_selfconsistent,
    oracle_fd_2d,
    oracle_sde,
    tensor_grid,
)
from helpers import cameron_martin


def test_oracle_1d_zero_drift_is_gaussian():
    oracle = oracle_1d(lambda x: np.zeros_like(x))
    phi = np.exp(-0.5 * oracle.x**2) / math.sqrt(2 * math.pi)
    assert np.max(np.abs(oracle.pdf - phi)) <= 1e-10
    assert oracle.mean() == pytest.approx(0.0, abs=1e-12)


def test_oracle_1d_constant_drift_shifted_gaussian():
    c = 0.3
    oracle = oracle_1d(lambda x: np.full_like(x, c))
    assert oracle.mean() == pytest.approx(c, abs=1e-8)
    # gamma-relative form exp(cx - c^2/2)
    rel = oracle.gamma_density()
    mid = np.abs(oracle.x - 1.0).argmin()
    assert rel[mid] == pytest.approx(math.exp(c * oracle.x[mid] - c * c / 2), rel=1e-8)


def test_oracle_1d_domain_too_small():
    with pytest.raises(DomainError, match="boundary"):
        oracle_1d(lambda x: np.full_like(x, 3.0), span=2.0)


def test_oracle_1d_selfconsistent_symmetric():
    oracle = oracle_1d_selfconsistent(lambda z: 0.2 * np.tanh(z))
    assert oracle.mean() == pytest.approx(0.0, abs=1e-10)
    assert oracle.second_moment() == pytest.approx(1.0, abs=0.2)


def test_l2_gamma_distance_exact_match():
    c = 0.3
    rho = cameron_martin(c, 16)
    oracle = oracle_1d(lambda x: np.full_like(x, c))
    assert l2_gamma_distance(rho, oracle) <= 1e-7


def test_sde_zero_drift_recovers_gamma():
    v = constant_drift([0.0])
    moments = oracle_sde(v, None, 1, dt=5e-3, n_steps=2000, n_particles=500, seed=7)
    assert abs(moments.mean[0]) <= 3 * moments.mean_se[0]
    assert abs(moments.second[0, 0] - 1.0) <= 3 * moments.second_se[0, 0]


def test_sde_constant_drift_mean():
    v = constant_drift([0.3])
    moments = oracle_sde(v, None, 1, dt=5e-3, n_steps=2000, n_particles=500, seed=11)
    assert abs(moments.mean[0] - 0.3) <= 3 * moments.mean_se[0]


def test_sde_reproducible_bitwise():
    v = constant_drift([0.1])
    a = oracle_sde(v, None, 1, dt=5e-3, n_steps=400, n_particles=100, seed=3)
    b = oracle_sde(v, None, 1, dt=5e-3, n_steps=400, n_particles=100, seed=3)
    assert np.array_equal(a.mean, b.mean)
    assert np.array_equal(a.second, b.second)


def test_sde_rejects_large_dt():
    with pytest.raises(ValueError, match="dt"):
        oracle_sde(constant_drift([0.0]), None, 1, dt=0.1)


def test_sde_blowup_detection():
    # destabilizing drift v = 3x wrapped with a huge declared bound
    v = custom_drift(lambda p, x, g: 3.0 * x, 1, "H", 1e9)
    with pytest.raises(InstabilityError, match="dt"):
        oracle_sde(v, None, 1, dt=0.01, n_steps=2000, n_particles=100, seed=0)


def test_fd_2d_zero_drift_gaussian():
    fd = oracle_fd_2d(lambda x: np.zeros_like(x), span=6.0, n=81)
    xx, yy = np.meshgrid(fd.x, fd.x, indexing="ij")
    exact = np.exp(-0.5 * (xx**2 + yy**2)) / (2 * math.pi)
    assert np.max(np.abs(fd.values - exact)) <= 1e-3  # O(h^2) at h = 0.15


def test_fd_2d_gradient_drift_closed_form():
    # v = grad W with W = 0.4 * 2 * (log cosh(x1/2) + log cosh(x2/2))
    lam, width = 0.4, 2.0

    def v(x):
        return lam * np.tanh(x / width)

    fd = oracle_fd_2d(v, span=6.0, n=81)
    xx, yy = np.meshgrid(fd.x, fd.x, indexing="ij")
    w = lam * width * (np.log(np.cosh(xx / width)) + np.log(np.cosh(yy / width)))
    exact = np.exp(-0.5 * (xx**2 + yy**2) + w)
    exact /= exact.sum() * fd.h**2
    assert np.max(np.abs(fd.values - exact)) <= 2e-3


def test_fd_2d_convergence_order():
    # halving h must shrink the error by about 4 (second order); a gradient
    # drift is used because the exponentially fitted scheme is essentially
    # exact for the pure Gaussian
    lam, width = 0.4, 2.0

    def err(n):
        fd = oracle_fd_2d(lambda x: lam * np.tanh(x / width), span=6.0, n=n)
        xx, yy = np.meshgrid(fd.x, fd.x, indexing="ij")
        w = lam * width * (np.log(np.cosh(xx / width)) + np.log(np.cosh(yy / width)))
        exact = np.exp(-0.5 * (xx**2 + yy**2) + w)
        exact /= exact.sum() * fd.h**2
        return np.max(np.abs(fd.values - exact))

    e1, e2 = err(40), err(80)
    assert 2.5 <= e1 / e2 <= 6.0


def test_fd_2d_marginal_mass():
    fd = oracle_fd_2d(lambda x: np.zeros_like(x), span=6.0, n=61)
    for axis in (0, 1):
        assert np.sum(fd.marginal(axis)) * fd.h == pytest.approx(1.0, abs=1e-12)
