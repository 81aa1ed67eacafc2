import numpy as np
import pytest

from softarc.errors import EvaluationError
from softarc.numerics import (
    fd_directional,
    fd_gradient,
    fd_jacobian,
    gauss_legendre,
    gauss_legendre_nodes,
)


def test_fd_gradient_polynomial():
    # gradient of a cubic is exact to O(h^2) for central differences
    def f(x):
        return x[0] ** 3 + 2.0 * x[0] * x[1] - x[1] ** 2

    x = np.array([1.3, -0.7])
    g = fd_gradient(f, x)
    exact = np.array([3 * 1.3 ** 2 + 2 * (-0.7), 2 * 1.3 - 2 * (-0.7)])
    assert np.max(np.abs(g - exact)) < 1e-8


def test_fd_gradient_scales_step_with_magnitude():
    # large coordinates must not lose all significant digits
    def f(x):
        return np.sin(x[0] * 1e-4)

    g = fd_gradient(f, np.array([1.0e4]))
    assert abs(g[0] - 1e-4 * np.cos(1.0)) < 1e-10


def test_fd_jacobian_matches_manual_columns():
    def f(x):
        return np.array([x[0] * x[1], x[0] + np.cos(x[1]), x[1] ** 2])

    x = np.array([0.4, 1.1])
    J = fd_jacobian(f, x)
    exact = np.array([[1.1, 0.4], [1.0, -np.sin(1.1)], [0.0, 2.2]])
    assert J.shape == (3, 2)
    assert np.max(np.abs(J - exact)) < 1e-8


def test_fd_directional_matches_full_jacobian_product():
    rng = np.random.default_rng(0)

    def f(x):
        return np.array([np.sin(x[0]) * x[1], x[0] ** 2 - x[1] * x[2], x[2]])

    for _ in range(10):
        x = rng.uniform(-1, 1, size=3)
        d = rng.standard_normal(3)
        got = fd_directional(f, x, d)
        want = fd_jacobian(f, x) @ d
        assert np.max(np.abs(got - want)) < 1e-6


def test_fd_rejects_non_finite_values():
    # the negative probe of the central difference lands outside the domain
    def f(x):
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.array([np.log(x[0])])

    with pytest.raises(EvaluationError):
        fd_jacobian(f, np.array([0.0]))


def test_gauss_legendre_nodes_integrate_polynomials_exactly():
    # order-p rule is exact for polynomials of degree 2p-1 on [0, 1]
    for order in (2, 4, 8, 16):
        nodes, weights = gauss_legendre_nodes(order)
        assert nodes.shape == (order,)
        assert abs(weights.sum() - 1.0) < 1e-14
        for deg in range(2 * order):
            val = np.sum(weights * nodes ** deg)
            assert abs(val - 1.0 / (deg + 1)) < 1e-13, (order, deg)


def test_gauss_legendre_handles_vector_integrands():
    val = gauss_legendre(lambda s: np.array([s, s ** 2]), order=8)
    assert np.max(np.abs(val - [0.5, 1.0 / 3.0])) < 1e-14


def test_gauss_legendre_smooth_transcendental():
    val = gauss_legendre(np.exp, order=16)
    assert abs(val - (np.e - 1.0)) < 1e-14
