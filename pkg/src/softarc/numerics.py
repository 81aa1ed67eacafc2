"""Finite differences and fixed-order quadrature used throughout the library."""

from functools import lru_cache

import numpy as np

from .errors import EvaluationError

# Central-difference step is scaled per component: h_i = FD_STEP * max(1, |q_i|).
FD_STEP = 1e-6


def _steps(q, h):
    q = np.asarray(q, dtype=float)
    if h is None:
        return FD_STEP * np.maximum(1.0, np.abs(q))
    return np.full(q.shape, float(h))


def fd_gradient(f, q, h=None):
    """Central-difference gradient of a scalar function at q.

    Second-order accurate. Raises EvaluationError if f returns a value
    that is not finite at any probe point.
    """
    q = np.asarray(q, dtype=float)
    steps = _steps(q, h)
    grad = np.empty(q.shape[0])
    for i in range(q.shape[0]):
        qp = q.copy()
        qm = q.copy()
        qp[i] += steps[i]
        qm[i] -= steps[i]
        fp = float(f(qp))
        fm = float(f(qm))
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise EvaluationError(
                f"function returned a non-finite value near component {i}"
            )
        grad[i] = (fp - fm) / (2.0 * steps[i])
    return grad


def fd_jacobian(f, q, h=None):
    """Central-difference Jacobian of a vector function at q, shape (len(f(q)), len(q))."""
    q = np.asarray(q, dtype=float)
    steps = _steps(q, h)
    cols = []
    for i in range(q.shape[0]):
        qp = q.copy()
        qm = q.copy()
        qp[i] += steps[i]
        qm[i] -= steps[i]
        fp = np.asarray(f(qp), dtype=float)
        fm = np.asarray(f(qm), dtype=float)
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise EvaluationError(
                f"function returned a non-finite value near component {i}"
            )
        cols.append((fp - fm) / (2.0 * steps[i]))
    return np.stack(cols, axis=-1)


def fd_directional(f, q, direction, h=1e-6):
    """Central-difference directional derivative of f along `direction`."""
    q = np.asarray(q, dtype=float)
    d = np.asarray(direction, dtype=float)
    fp = np.asarray(f(q + h * d), dtype=float)
    fm = np.asarray(f(q - h * d), dtype=float)
    return (fp - fm) / (2.0 * h)


@lru_cache(maxsize=32)
def gauss_legendre_nodes(order):
    """Nodes and weights for Gauss-Legendre quadrature on [0, 1]."""
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    x, w = np.polynomial.legendre.leggauss(order)
    # map from [-1, 1] to [0, 1]
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(f, order=16):
    """Integrate f over [0, 1] with an `order`-point Gauss-Legendre rule.

    Exact for polynomials of degree <= 2*order - 1. f may return a scalar
    or an ndarray; results are accumulated with the same shape.
    """
    nodes, weights = gauss_legendre_nodes(order)
    total = weights[0] * np.asarray(f(nodes[0]), dtype=float)
    for k in range(1, order):
        total = total + weights[k] * np.asarray(f(nodes[k]), dtype=float)
    return total if total.shape else float(total)
