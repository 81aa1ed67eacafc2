"""Serial chains of constant-curvature segments.

Kinematics compose segment arcs left to right; dynamics come from
per-segment Gauss-Legendre quadrature of the point-mass integrals, so a
one-segment chain reproduces the closed forms in cc.py to quadrature
accuracy. The velocity-coupling matrix is assembled from central
differences of the inertia matrix through the standard symmetric
bracket, which keeps Mdot - 2C skew symmetric by construction.
"""

import math

import numpy as np

from .cc import fk_cc, jacobian_cc
from .errors import RankDeficiencyError
from .model import (
    ChainParams,
    ConstantActuation,
    DynamicsTerms,
    InternalPairOppositeTorques,
    ModelInterface,
    PlanarPose,
    RobotState,
    TipTangentialForce,
    TipTorquePerSegment,
    as_configuration,
)
from .numerics import gauss_legendre_nodes

# Step for the inertia-matrix partial derivatives feeding the symmetric
# bracket. The inertia is smooth and O(m L^2), so 1e-6 balances
# truncation against roundoff.
MASS_FD_STEP = 1e-6


def _node_poses(p: ChainParams, q):
    """Poses of the n + 1 segment boundaries, base frame."""
    n = p.n
    xs = np.empty(n + 1)
    ys = np.empty(n + 1)
    ths = np.empty(n + 1)
    xs[0] = ys[0] = ths[0] = 0.0
    for j, seg in enumerate(p.segments):
        local = fk_cc(1.0, float(q[j]), seg.L)
        c = math.cos(ths[j])
        s = math.sin(ths[j])
        xs[j + 1] = xs[j] + c * local.x - s * local.y
        ys[j + 1] = ys[j] + s * local.x + c * local.y
        ths[j + 1] = ths[j] + local.theta
    return xs, ys, ths


def _check_segment_index(p: ChainParams, i):
    if not 0 <= i < p.n:
        raise IndexError(f"segment index {i} out of range for {p.n} segments")


def fk_chain(i, s_local, q, p: ChainParams) -> PlanarPose:
    """Pose of the point at s_local on segment i (both zero-based from the base).

    s_local may be an ndarray; pose fields then broadcast.
    """
    _check_segment_index(p, i)
    q = as_configuration(q, p.n)
    xs, ys, ths = _node_poses(p, q)
    seg = p.segments[i]
    local = fk_cc(s_local, float(q[i]), seg.L)
    c = math.cos(ths[i])
    s = math.sin(ths[i])
    return PlanarPose(
        x=xs[i] + c * local.x - s * local.y,
        y=ys[i] + s * local.x + c * local.y,
        theta=ths[i] + local.theta,
    )


def _segment_point_jacobian(p, q, i, s_local, node_pose_cache=None):
    """(3, n, S) Jacobian of the points at s_local (array) on segment i."""
    n = p.n
    s_arr = np.atleast_1d(np.asarray(s_local, dtype=float))
    if node_pose_cache is None:
        node_pose_cache = _node_poses(p, q)
    xs, ys, ths = node_pose_cache
    seg = p.segments[i]

    local = fk_cc(s_arr, float(q[i]), seg.L)
    ci = math.cos(ths[i])
    si = math.sin(ths[i])
    px = xs[i] + ci * local.x - si * local.y
    py = ys[i] + si * local.x + ci * local.y

    J = np.zeros((3, n, s_arr.size))
    own = jacobian_cc(s_arr, float(q[i]), seg.L)
    J[0, i] = ci * own[0] - si * own[1]
    J[1, i] = si * own[0] + ci * own[1]
    J[2, i] = s_arr

    # Upstream segments move the whole distal body: their tip Jacobian
    # plus a unit rotation of the point about their tip node.
    for j in range(i):
        tip = jacobian_cc(1.0, float(q[j]), p.segments[j].L)
        cj = math.cos(ths[j])
        sj = math.sin(ths[j])
        tx = cj * tip[0] - sj * tip[1]
        ty = sj * tip[0] + cj * tip[1]
        J[0, j] = tx - (py - ys[j + 1])
        J[1, j] = ty + (px - xs[j + 1])
        J[2, j] = 1.0
    return J


def jacobian_chain(i, s_local, q, p: ChainParams):
    """(3, n) derivative of fk_chain(i, s_local, q) with respect to q.

    Columns for segments beyond i are identically zero.
    """
    _check_segment_index(p, i)
    q = as_configuration(q, p.n)
    return _segment_point_jacobian(p, q, i, float(s_local))[:, :, 0]


def _quadrature_jacobians(p, q, order):
    """Per-segment (3, n, S) node Jacobians sharing one pose pass."""
    nodes, weights = gauss_legendre_nodes(order)
    cache = _node_poses(p, q)
    return [
        _segment_point_jacobian(p, q, i, nodes, node_pose_cache=cache)
        for i in range(p.n)
    ], nodes, weights


def mass_matrix_chain(q, p: ChainParams, order=16):
    """Configuration-space inertia by per-segment quadrature."""
    q = as_configuration(q, p.n)
    jacs, _, w = _quadrature_jacobians(p, q, order)
    M = np.zeros((p.n, p.n))
    for seg, J in zip(p.segments, jacs):
        Jp = J[:2]
        M += seg.m * np.einsum("s,ajs,aks->jk", w, Jp, Jp)
    return M


def gravity_chain(q, p: ChainParams, order=16):
    """Gravity force on the configuration, gradient of gravity_potential_chain."""
    q = as_configuration(q, p.n)
    e = np.array([math.cos(p.phi), math.sin(p.phi)])
    jacs, _, w = _quadrature_jacobians(p, q, order)
    G = np.zeros(p.n)
    for seg, J in zip(p.segments, jacs):
        G -= seg.m * p.g * np.einsum("s,ajs,a->j", w, J[:2], e)
    return G


def gravity_potential_chain(q, p: ChainParams, order=16):
    """Gravity potential relative to the straight shape."""
    q = as_configuration(q, p.n)
    nodes, w = gauss_legendre_nodes(order)
    cache = _node_poses(p, q)
    cphi = math.cos(p.phi)
    sphi = math.sin(p.phi)
    xs, ys, ths = cache
    U = 0.0
    offset = 0.0
    for i, seg in enumerate(p.segments):
        # straight shape keeps every point on the x axis
        xs_straight = offset + nodes * seg.L
        local = fk_cc(nodes, float(q[i]), seg.L)
        ci = math.cos(ths[i])
        si = math.sin(ths[i])
        px = xs[i] + ci * local.x - si * local.y
        py = ys[i] + si * local.x + ci * local.y
        U += seg.m * p.g * float(
            np.sum(w * ((xs_straight - px) * cphi - py * sphi))
        )
        offset += seg.L
    return U


def elastic_chain(q, p: ChainParams):
    """(K force, elastic potential)."""
    q = as_configuration(q, p.n)
    k = np.array([seg.k_bar for seg in p.segments])
    return k * q, 0.5 * float(np.dot(k * q, q))


def coriolis_chain(q, qdot, p: ChainParams, order=16):
    """Velocity-coupling matrix from the symmetric bracket of dM/dq."""
    q = as_configuration(q, p.n)
    qdot = as_configuration(qdot, p.n)
    n = p.n
    dM = np.empty((n, n, n))
    for k in range(n):
        qp = q.copy()
        qm = q.copy()
        qp[k] += MASS_FD_STEP
        qm[k] -= MASS_FD_STEP
        dM[:, :, k] = (
            mass_matrix_chain(qp, p, order) - mass_matrix_chain(qm, p, order)
        ) / (2.0 * MASS_FD_STEP)
    term1 = np.einsum("ijk,k->ij", dM, qdot)
    term2 = np.einsum("ikj,k->ij", dM, qdot)
    term3 = np.einsum("jki,k->ij", dM, qdot)
    return 0.5 * (term1 + term2 - term3)


def actuation_matrix(pattern, q, p: ChainParams):
    """(n, m) actuation map of the given pattern at configuration q."""
    q = as_configuration(q, p.n)
    n = p.n
    if isinstance(pattern, TipTorquePerSegment):
        return np.eye(n)
    if isinstance(pattern, InternalPairOppositeTorques):
        col = np.zeros((n, 1))
        if pattern.discretization == "coarse":
            _check_segment_index(p, pattern.segment)
            col[pattern.segment, 0] = 1.0
        else:
            _check_segment_index(p, pattern.segment)
            _check_segment_index(p, pattern.segment + 1)
            col[pattern.segment, 0] = 1.0
            col[pattern.segment + 1, 0] = -1.0
        return col
    if isinstance(pattern, TipTangentialForce):
        _check_segment_index(p, pattern.segment)
        row_x = jacobian_chain(pattern.segment, 1.0, q, p)[0]
        return row_x.reshape(n, 1)
    if isinstance(pattern, ConstantActuation):
        mat = np.asarray(pattern.matrix, dtype=float)
        if mat.shape[0] != n:
            raise ValueError(
                f"actuation matrix has {mat.shape[0]} rows, chain has {n} segments"
            )
        return mat.copy()
    raise TypeError(f"unknown actuation pattern {type(pattern).__name__}")


def chain_terms(state: RobotState, p: ChainParams, order=16) -> DynamicsTerms:
    """All dynamics terms of the chain at the given state."""
    q = as_configuration(state.q, p.n)
    K, _ = elastic_chain(q, p)
    return DynamicsTerms(
        M=mass_matrix_chain(q, p, order),
        C=coriolis_chain(q, state.qdot, p, order),
        G=gravity_chain(q, p, order),
        K=K,
        D=np.diag([seg.d_bar for seg in p.segments]),
        A=actuation_matrix(p.actuation, q, p),
    )


class PCCChainModel(ModelInterface):
    """Chain of constant-curvature segments under one actuation pattern."""

    def __init__(self, params: ChainParams, order=16):
        self.params = params
        self.order = int(order)
        self.n = params.n
        self._damping = np.diag([seg.d_bar for seg in params.segments])
        self._k = np.array([seg.k_bar for seg in params.segments])
        self._lengths = np.array([seg.L for seg in params.segments])
        self._cum_length = np.concatenate(([0.0], np.cumsum(self._lengths)))
        self._total_length = float(self._cum_length[-1])
        # Constant patterns are built once; q-dependent ones per call.
        self._static_A = None
        if not isinstance(params.actuation, TipTangentialForce):
            self._static_A = actuation_matrix(
                params.actuation, np.zeros(self.n), params
            )
        probe = 0.3 + 0.05 * np.arange(self.n)
        A = actuation_matrix(params.actuation, probe, params)
        sing = np.linalg.svd(A, compute_uv=False)
        if sing[0] == 0.0 or sing[-1] / sing[0] < 1e-10:
            raise RankDeficiencyError(
                "actuation map loses column rank at a generic configuration",
                singular_values=sing,
            )
        self.m = A.shape[1]

    def _locate(self, s):
        s = float(s)
        if not 0.0 <= s <= 1.0:
            raise ValueError("normalized arclength must lie in [0, 1]")
        target = s * self._total_length
        i = int(np.searchsorted(self._cum_length, target, side="right") - 1)
        i = min(max(i, 0), self.n - 1)
        return i, (target - self._cum_length[i]) / self._lengths[i]

    def fk(self, s, q):
        i, s_local = self._locate(s)
        return fk_chain(i, s_local, q, self.params)

    def jacobian(self, s, q):
        i, s_local = self._locate(s)
        return jacobian_chain(i, s_local, q, self.params)

    def contact_jacobian(self, segment, s_local, q):
        return jacobian_chain(segment, s_local, as_configuration(q, self.n), self.params)

    def mass_matrix(self, q):
        return mass_matrix_chain(q, self.params, self.order)

    def coriolis_matrix(self, q, qdot):
        return coriolis_chain(q, qdot, self.params, self.order)

    def static_forces(self, q):
        K, _ = elastic_chain(q, self.params)
        return K, gravity_chain(q, self.params, self.order)

    def damping_matrix(self):
        return self._damping

    def actuation(self, q):
        if self._static_A is not None:
            return self._static_A
        return actuation_matrix(self.params.actuation, q, self.params)

    def potential_energy(self, q):
        q = as_configuration(q, self.n)
        uk = 0.5 * float(np.dot(self._k * q, q))
        return uk, gravity_potential_chain(q, self.params, self.order)
