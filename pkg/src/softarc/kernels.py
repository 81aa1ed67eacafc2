"""Scalar ratio kernels shared by the arc kinematics and dynamics.

Every closed-form expression for a bending arc divides by a power of the
bending angle, so each one is evaluated in two branches:

* |u| <  SERIES_SPLIT : truncated Taylor series in u**2 (10 terms, exact
  rational coefficients).  Truncation error at the split point is below
  1e-20 relative for every kernel.
* |u| >= SERIES_SPLIT : the direct trigonometric expression, rearranged
  where possible to avoid subtractive cancellation (1 - cos u is always
  computed as 2*sin(u/2)**2).

The split cannot sit near zero: the direct forms cancel k leading powers
of u and lose roughly k*log10(1/u) digits, e.g. the inertia ratio loses
all 16 digits at u = 1e-4.  At 0.7 the worst branch (inertia slope, a
q**6 cancellation) still carries a relative error under 5e-11, and the
two branches agree to better than 1e-10 everywhere on the circle
|u| = SERIES_SPLIT.

All kernels accept a float or an ndarray.
"""

import math

import numpy as np

SERIES_SPLIT = 0.7

# Taylor coefficients in w = u**2 (exact rationals, see the docstring of
# each kernel for the leading terms).
_SIN_RATIO = (
    1.0, -1 / 6, 1 / 120, -1 / 5040, 1 / 362880, -1 / 39916800,
    1 / 6227020800, -1 / 1307674368000, 1 / 355687428096000,
    -1 / 121645100408832000,
)
_VERSINE_RATIO = (
    1 / 2, -1 / 24, 1 / 720, -1 / 40320, 1 / 3628800, -1 / 479001600,
    1 / 87178291200, -1 / 20922789888000, 1 / 6402373705728000,
    -1 / 2432902008176640000,
)
_D_SIN_RATIO = (
    -1 / 3, 1 / 30, -1 / 840, 1 / 45360, -1 / 3991680, 1 / 518918400,
    -1 / 93405312000, 1 / 22230464256000, -1 / 6758061133824000,
    1 / 2554547108585472000,
)
_D_VERSINE_RATIO = (
    1 / 2, -1 / 8, 1 / 144, -1 / 5760, 1 / 403200, -1 / 43545600,
    1 / 6706022400, -1 / 1394852659200, 1 / 376610217984000,
    -1 / 128047474114560000,
)
_INERTIA_RATIO = (
    3 / 20, -1 / 168, 1 / 8640, -1 / 739200, 1 / 94348800, -1 / 16765056000,
    1 / 3952082534400, -1 / 1192599023616000, 1 / 448166159400960000,
    -1 / 205174736022896640000,
)
_INERTIA_SLOPE_RATIO = (
    1 / 168, -1 / 4320, 1 / 246400, -1 / 23587200, 1 / 3353011200,
    -1 / 658680422400, 1 / 170371289088000, -1 / 56020769925120000,
    1 / 22797192891432960000, -1 / 11240007277776076800000,
)
_GRAVITY_COS_RATIO = (
    -1 / 12, 1 / 180, -1 / 6720, 1 / 453600, -1 / 47900160, 1 / 7264857600,
    -1 / 1494484992000, 1 / 400148356608000, -1 / 135161222676480000,
    1 / 56200036388880384000,
)
_GRAVITY_SIN_RATIO = (
    1 / 6, -1 / 40, 1 / 1008, -1 / 51840, 1 / 4435200, -1 / 566092800,
    1 / 100590336000, -1 / 23712495206400, 1 / 7155594141696000,
    -1 / 2688996956405760000,
)
_POTENTIAL_COS_RATIO = (
    1 / 24, -1 / 720, 1 / 40320, -1 / 3628800, 1 / 479001600,
    -1 / 87178291200, 1 / 20922789888000, -1 / 6402373705728000,
    1 / 2432902008176640000, -1 / 1124000727777607680000,
)
_POTENTIAL_SIN_RATIO = (
    1 / 6, -1 / 120, 1 / 5040, -1 / 362880, 1 / 39916800, -1 / 6227020800,
    1 / 1307674368000, -1 / 355687428096000, 1 / 121645100408832000,
    -1 / 51090942171709440000,
)


def _horner(w, coeffs):
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * w + c
    return acc


def _dispatch(u, coeffs, odd, direct_scalar, direct_array, prefactor_w=False):
    """Evaluate series for |u| < SERIES_SPLIT, the direct form elsewhere.

    odd=True multiplies the series by u (odd kernels), prefactor_w=True
    by u**2 (kernels vanishing to second order).
    """
    if isinstance(u, np.ndarray):
        u = np.asarray(u, dtype=float)
        small = np.abs(u) < SERIES_SPLIT
        w = u * u
        series = _horner(w, coeffs)
        if odd:
            series = u * series
        elif prefactor_w:
            series = w * series
        safe = np.where(small, 1.0, u)
        return np.where(small, series, direct_array(safe))
    u = float(u)
    if abs(u) < SERIES_SPLIT:
        w = u * u
        val = _horner(w, coeffs)
        if odd:
            return u * val
        if prefactor_w:
            return w * val
        return val
    return direct_scalar(u)


def sin_ratio(u):
    """sin(u)/u. Equals 1 at u = 0."""
    return _dispatch(
        u, _SIN_RATIO, False,
        lambda x: math.sin(x) / x,
        lambda x: np.sin(x) / x,
    )


def versine_ratio(u):
    """(1 - cos(u))/u = 2*sin(u/2)**2/u. Equals 0 at u = 0."""
    return _dispatch(
        u, _VERSINE_RATIO, True,
        lambda x: 2.0 * math.sin(0.5 * x) ** 2 / x,
        lambda x: 2.0 * np.sin(0.5 * x) ** 2 / x,
    )


def d_sin_ratio(u):
    """(u*cos(u) - sin(u))/u**2, the derivative of sin_ratio scaled by u."""
    return _dispatch(
        u, _D_SIN_RATIO, True,
        lambda x: (x * math.cos(x) - math.sin(x)) / (x * x),
        lambda x: (x * np.cos(x) - np.sin(x)) / (x * x),
    )


def d_versine_ratio(u):
    """(cos(u) - 1 + u*sin(u))/u**2 = (u*sin(u) - 2*sin(u/2)**2)/u**2."""
    return _dispatch(
        u, _D_VERSINE_RATIO, False,
        lambda x: (x * math.sin(x) - 2.0 * math.sin(0.5 * x) ** 2) / (x * x),
        lambda x: (x * np.sin(x) - 2.0 * np.sin(0.5 * x) ** 2) / (x * x),
    )


def inertia_ratio(q):
    """(q**3 + 6q - 12 sin q + 6 q cos q)/q**5. Equals 3/20 at q = 0.

    The bending inertia of a unit-mass, unit-length arc is
    inertia_ratio(q)/3.
    """
    return _dispatch(
        q, _INERTIA_RATIO, False,
        lambda x: (x ** 3 + 6.0 * x - 12.0 * math.sin(x) + 6.0 * x * math.cos(x))
        / x ** 5,
        lambda x: (x ** 3 + 6.0 * x - 12.0 * np.sin(x) + 6.0 * x * np.cos(x))
        / x ** 5,
    )


def inertia_slope_ratio(q):
    """(q**3 + 12q + 18q cos q + 3q**2 sin q - 30 sin q)/q**6.

    d/dq of inertia_ratio equals -2*inertia_slope_ratio(q). Vanishes
    linearly at q = 0 (leading term q/168).
    """
    return _dispatch(
        q, _INERTIA_SLOPE_RATIO, True,
        lambda x: (
            x ** 3 + 12.0 * x + 18.0 * x * math.cos(x)
            + 3.0 * x * x * math.sin(x) - 30.0 * math.sin(x)
        ) / x ** 6,
        lambda x: (
            x ** 3 + 12.0 * x + 18.0 * x * np.cos(x)
            + 3.0 * x * x * np.sin(x) - 30.0 * np.sin(x)
        ) / x ** 6,
    )


def gravity_cos_ratio(q):
    """(q sin q + 2 cos q - 2)/q**3 = (q sin q - 4 sin(q/2)**2)/q**3.

    Leading term -q/12.
    """
    return _dispatch(
        q, _GRAVITY_COS_RATIO, True,
        lambda x: (x * math.sin(x) - 4.0 * math.sin(0.5 * x) ** 2) / x ** 3,
        lambda x: (x * np.sin(x) - 4.0 * np.sin(0.5 * x) ** 2) / x ** 3,
    )


def gravity_sin_ratio(q):
    """(2 sin q - q - q cos q)/q**3. Equals 1/6 at q = 0."""
    return _dispatch(
        q, _GRAVITY_SIN_RATIO, False,
        lambda x: (2.0 * math.sin(x) - x - x * math.cos(x)) / x ** 3,
        lambda x: (2.0 * np.sin(x) - x - x * np.cos(x)) / x ** 3,
    )


def potential_cos_ratio(q):
    """1/2 - (1 - cos q)/q**2 = (q**2 - 4 sin(q/2)**2)/(2 q**2).

    Leading term q**2/24.
    """
    return _dispatch(
        q, _POTENTIAL_COS_RATIO, False,
        lambda x: (x * x - 4.0 * math.sin(0.5 * x) ** 2) / (2.0 * x * x),
        lambda x: (x * x - 4.0 * np.sin(0.5 * x) ** 2) / (2.0 * x * x),
        prefactor_w=True,
    )


def potential_sin_ratio(q):
    """(q - sin q)/q**2. Leading term q/6."""
    return _dispatch(
        q, _POTENTIAL_SIN_RATIO, True,
        lambda x: (x - math.sin(x)) / (x * x),
        lambda x: (x - np.sin(x)) / (x * x),
    )
