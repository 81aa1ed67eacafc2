"""The bending-angle kernels switch between a series branch near zero and a
direct trigonometric branch elsewhere. These tests pin the branch agreement
at the switch point and check each kernel against an independent
high-order quadrature of its defining integral."""

import numpy as np

from softarc.kernels import (
    SERIES_SPLIT,
    d_sin_ratio,
    d_versine_ratio,
    gravity_cos_ratio,
    gravity_sin_ratio,
    inertia_ratio,
    inertia_slope_ratio,
    potential_cos_ratio,
    potential_sin_ratio,
    sin_ratio,
    versine_ratio,
)
from softarc.numerics import gauss_legendre

ALL_KERNELS = [
    sin_ratio,
    versine_ratio,
    d_sin_ratio,
    d_versine_ratio,
    inertia_ratio,
    inertia_slope_ratio,
    gravity_cos_ratio,
    gravity_sin_ratio,
    potential_cos_ratio,
    potential_sin_ratio,
]


def test_branch_agreement_at_split():
    # both branches must agree where the dispatch switches
    eps = 1e-12
    for fn in ALL_KERNELS:
        for sign in (1.0, -1.0):
            u = sign * SERIES_SPLIT
            below = fn(u - sign * eps)
            above = fn(u + sign * eps)
            rel = abs(below - above) / max(1.0, abs(above))
            assert rel < 1e-10, (fn.__name__, sign, rel)


def test_values_at_zero():
    assert sin_ratio(0.0) == 1.0
    assert versine_ratio(0.0) == 0.0
    assert d_sin_ratio(0.0) == 0.0
    assert abs(d_versine_ratio(0.0) - 0.5) < 1e-15
    # straight-configuration inertia kernel: integral of s^2 (s^2/4 + ...) -> 3/20
    assert abs(inertia_ratio(0.0) - 3.0 / 20.0) < 1e-15


def test_parity():
    # x-like quantities are even in q, y-like are odd
    rng = np.random.default_rng(1)
    even = [sin_ratio, d_versine_ratio, inertia_ratio, gravity_sin_ratio,
            potential_cos_ratio]
    odd = [versine_ratio, d_sin_ratio, inertia_slope_ratio, gravity_cos_ratio,
           potential_sin_ratio]
    for _ in range(50):
        u = rng.uniform(-2 * np.pi, 2 * np.pi)
        for fn in even:
            assert abs(fn(u) - fn(-u)) < 1e-13, fn.__name__
        for fn in odd:
            assert abs(fn(u) + fn(-u)) < 1e-13, fn.__name__


def test_array_dispatch_matches_scalar():
    rng = np.random.default_rng(2)
    u = rng.uniform(-7, 7, size=40)
    # include points straddling the switch
    u[:4] = [SERIES_SPLIT - 1e-3, SERIES_SPLIT + 1e-3, -SERIES_SPLIT + 1e-3, 0.0]
    for fn in ALL_KERNELS:
        vec = fn(u)
        scal = np.array([fn(float(v)) for v in u])
        assert np.max(np.abs(vec - scal)) < 1e-15, fn.__name__


def test_kinematic_kernels_against_quadrature():
    # sin_ratio(u) = int_0^1 cos(s u) ds, versine_ratio(u) = int_0^1 sin(s u) ds,
    # and the d_* kernels are their u-derivatives
    rng = np.random.default_rng(3)
    for _ in range(30):
        u = rng.uniform(-2 * np.pi, 2 * np.pi)
        assert abs(sin_ratio(u) - gauss_legendre(lambda s: np.cos(s * u), order=24)) < 1e-13
        assert abs(versine_ratio(u) - gauss_legendre(lambda s: np.sin(s * u), order=24)) < 1e-13
        assert abs(d_sin_ratio(u)
                   - gauss_legendre(lambda s: -s * np.sin(s * u), order=24)) < 1e-13
        assert abs(d_versine_ratio(u)
                   - gauss_legendre(lambda s: s * np.cos(s * u), order=24)) < 1e-13


def test_inertia_kernel_against_quadrature():
    # inertia_ratio(q) = 3 * int_0^1 [ (d/dq s sin_ratio(sq))^2 + (d/dq s versine_ratio(sq))^2 ] ds
    rng = np.random.default_rng(4)
    for _ in range(30):
        q = rng.uniform(-2 * np.pi, 2 * np.pi)

        def sq_norm(s):
            u = s * q
            return (s * s * d_sin_ratio(u)) ** 2 + (s * s * d_versine_ratio(u)) ** 2

        want = 3.0 * gauss_legendre(sq_norm, order=32)
        assert abs(inertia_ratio(q) - want) / max(1.0, abs(want)) < 1e-12


def test_inertia_slope_is_half_negative_derivative():
    # inertia_slope_ratio = -0.5 d/dq inertia_ratio by construction
    rng = np.random.default_rng(5)
    h = 1e-6
    for _ in range(30):
        q = rng.uniform(-2 * np.pi, 2 * np.pi)
        fd = (inertia_ratio(q + h) - inertia_ratio(q - h)) / (2 * h)
        assert abs(-2.0 * inertia_slope_ratio(q) - fd) < 1e-8


def test_gravity_kernels_against_quadrature():
    # gravity_cos_ratio(q) = int_0^1 s^2 d_sin_ratio(s q) ds (x-direction lever),
    # gravity_sin_ratio(q) = int_0^1 s^2 d_versine_ratio(s q) ds
    rng = np.random.default_rng(6)
    for _ in range(30):
        q = rng.uniform(-2 * np.pi, 2 * np.pi)
        want_c = gauss_legendre(lambda s: s * s * d_sin_ratio(s * q), order=32)
        want_s = gauss_legendre(lambda s: s * s * d_versine_ratio(s * q), order=32)
        assert abs(gravity_cos_ratio(q) - want_c) < 1e-13
        assert abs(gravity_sin_ratio(q) - want_s) < 1e-13


def test_potential_kernels_against_quadrature():
    # potential_cos_ratio(q) = int_0^1 (s - s sin_ratio(sq)) ds: drop of the
    # center of mass along the reference direction, measured from straight
    rng = np.random.default_rng(7)
    for _ in range(30):
        q = rng.uniform(-2 * np.pi, 2 * np.pi)
        want_c = gauss_legendre(lambda s: s * (1.0 - sin_ratio(s * q)), order=32)
        want_s = gauss_legendre(lambda s: s * versine_ratio(s * q), order=32)
        assert abs(potential_cos_ratio(q) - want_c) < 1e-13
        assert abs(potential_sin_ratio(q) - want_s) < 1e-13


def test_potential_kernels_are_antiderivatives_of_gravity_kernels():
    # d/dq potential_cos_ratio = -gravity_cos_ratio etc.; the force kernels
    # carry the minus sign of the assembled gravity force
    rng = np.random.default_rng(8)
    h = 1e-6
    for _ in range(30):
        q = rng.uniform(-2 * np.pi, 2 * np.pi)
        fd_c = (potential_cos_ratio(q + h) - potential_cos_ratio(q - h)) / (2 * h)
        fd_s = (potential_sin_ratio(q + h) - potential_sin_ratio(q - h)) / (2 * h)
        assert abs(fd_c + gravity_cos_ratio(q)) < 1e-8
        assert abs(fd_s - gravity_sin_ratio(q)) < 1e-8
