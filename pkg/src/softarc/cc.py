"""Closed-form kinematics and dynamics of one constant-curvature segment.

The configuration variable q is the total bending angle of the arc; the
normalized arclength s runs from 0 (base) to 1 (tip). The base tangent
is the +x axis and gravity points along (cos phi, sin phi) in that
frame, so phi = 0 hangs the robot along its straight shape and phi = pi
points it straight up against gravity.

The lumped rigid comparison model lives here too: a revolute joint
halfway along the body with the distal half rigid, optionally carrying
the same parallel spring and damper. It answers the same model
interface as the arc.
"""

import math

import numpy as np

from .kernels import (
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
from .model import (
    DynamicsTerms,
    ModelInterface,
    PlanarPose,
    RobotState,
    SegmentParams,
    as_configuration,
)


def fk_cc(s, q, L):
    """Pose of the arc point at normalized arclength s for bending angle q.

    s may be an ndarray, in which case the pose fields broadcast.
    """
    u = s * q
    return PlanarPose(x=L * s * sin_ratio(u), y=L * s * versine_ratio(u), theta=u)


def jacobian_cc(s, q, L):
    """Derivative of fk_cc with respect to q, stacked as (x, y, theta).

    Shape (3,) for scalar s, (3, len(s)) for an array of arclengths.
    """
    u = s * q
    ss = s * s
    return np.array([L * ss * d_sin_ratio(u), L * ss * d_versine_ratio(u), s])


def mass_cc(q, m, L):
    """Bending inertia of a uniform arc of mass m and length L."""
    return (m * L * L / 3.0) * inertia_ratio(q)


def dmass_cc(q, m, L):
    """Derivative of mass_cc with respect to q."""
    return (-2.0 * m * L * L / 3.0) * inertia_slope_ratio(q)


def coriolis_cc(q, qdot, m, L):
    """Velocity-coupling force 0.5 * dM/dq * qdot**2.

    The inertia shrinks as the arc curls, so this force always pushes
    the bending angle away from zero.
    """
    return 0.5 * dmass_cc(q, m, L) * qdot * qdot


def gravity_cc(q, p: SegmentParams):
    """Gravity force on the bending coordinate."""
    return -p.m * p.g * p.L * (
        math.cos(p.phi) * gravity_cos_ratio(q) + math.sin(p.phi) * gravity_sin_ratio(q)
    )


def gravity_potential_cc(q, p: SegmentParams):
    """Gravity potential, normalized to zero at the straight shape."""
    return p.m * p.g * p.L * (
        math.cos(p.phi) * potential_cos_ratio(q) - math.sin(p.phi) * potential_sin_ratio(q)
    )


def impedance_cc(q, qdot, p: SegmentParams):
    """(spring force, damping force) of the distributed elasticity."""
    return p.k_bar * q, p.d_bar * qdot


def elastic_potential_cc(q, p: SegmentParams):
    return 0.5 * p.k_bar * q * q


def cc_terms(state: RobotState, p: SegmentParams) -> DynamicsTerms:
    """All dynamics terms of a single actuated arc (tip torque, A = 1)."""
    q = float(state.q[0])
    qd = float(state.qdot[0])
    spring, _ = impedance_cc(q, qd, p)
    return DynamicsTerms(
        M=np.array([[mass_cc(q, p.m, p.L)]]),
        C=np.array([[0.5 * dmass_cc(q, p.m, p.L) * qd]]),
        G=np.array([gravity_cc(q, p)]),
        K=np.array([spring]),
        D=np.array([[p.d_bar]]),
        A=np.array([[1.0]]),
    )


class CCSegmentModel(ModelInterface):
    """One constant-curvature segment driven by a pure tip torque."""

    n = 1
    m = 1

    def __init__(self, params: SegmentParams):
        self.params = params

    def fk(self, s, q):
        q = as_configuration(q, 1)
        return fk_cc(s, float(q[0]), self.params.L)

    def jacobian(self, s, q):
        q = as_configuration(q, 1)
        return jacobian_cc(s, float(q[0]), self.params.L).reshape(3, 1)

    def mass_matrix(self, q):
        q = as_configuration(q, 1)
        return np.array([[mass_cc(float(q[0]), self.params.m, self.params.L)]])

    def coriolis_matrix(self, q, qdot):
        q = as_configuration(q, 1)
        qdot = as_configuration(qdot, 1)
        dm = dmass_cc(float(q[0]), self.params.m, self.params.L)
        return np.array([[0.5 * dm * float(qdot[0])]])

    def static_forces(self, q):
        q = as_configuration(q, 1)
        qv = float(q[0])
        return (
            np.array([self.params.k_bar * qv]),
            np.array([gravity_cc(qv, self.params)]),
        )

    def damping_matrix(self):
        return np.array([[self.params.d_bar]])

    def actuation(self, q):
        return np.array([[1.0]])

    def potential_energy(self, q):
        q = as_configuration(q, 1)
        qv = float(q[0])
        return (
            elastic_potential_cc(qv, self.params),
            gravity_potential_cc(qv, self.params),
        )

    def terms(self, state: RobotState) -> DynamicsTerms:
        return cc_terms(state, self.params)


# --- lumped rigid approximation ---------------------------------------------
#
# Proximal half clamped to the base, revolute joint at L/2, distal half a
# uniform rigid link of mass m/2. The joint angle plays the role of q.
# Joint inertia (m/2)(L/2)^2/3 = m L^2/24, below the arc's m L^2/20.


def _rigid_gravity(q, p: SegmentParams):
    return (p.m * p.g * p.L / 8.0) * math.sin(q - p.phi)


def _rigid_gravity_potential(q, p: SegmentParams):
    return (p.m * p.g * p.L / 8.0) * (math.cos(p.phi) - math.cos(q - p.phi))


def lumped_rigid_terms(state: RobotState, p: SegmentParams, with_spring=True) -> DynamicsTerms:
    """Dynamics terms of the rigid comparison model.

    with_spring=True matches the arc's parallel elasticity and damping;
    with_spring=False leaves the joint completely passive.
    """
    q = float(state.q[0])
    k = p.k_bar * q if with_spring else 0.0
    d = p.d_bar if with_spring else 0.0
    return DynamicsTerms(
        M=np.array([[p.m * p.L * p.L / 24.0]]),
        C=np.array([[0.0]]),
        G=np.array([_rigid_gravity(q, p)]),
        K=np.array([k]),
        D=np.array([[d]]),
        A=np.array([[1.0]]),
    )


class LumpedRigidModel(ModelInterface):
    """Rigid two-link stand-in for a single arc, torque at the joint."""

    n = 1
    m = 1

    def __init__(self, params: SegmentParams, with_spring=True):
        self.params = params
        self.with_spring = bool(with_spring)

    def fk(self, s, q):
        q = as_configuration(q, 1)
        qv = float(q[0])
        L = self.params.L
        if s < 0.5:
            return PlanarPose(x=s * L, y=0.0, theta=0.0)
        d = (s - 0.5) * L
        return PlanarPose(
            x=0.5 * L + d * math.cos(qv), y=d * math.sin(qv), theta=qv
        )

    def jacobian(self, s, q):
        q = as_configuration(q, 1)
        qv = float(q[0])
        if s < 0.5:
            return np.zeros((3, 1))
        d = (s - 0.5) * self.params.L
        return np.array([[-d * math.sin(qv)], [d * math.cos(qv)], [1.0]])

    def mass_matrix(self, q):
        p = self.params
        return np.array([[p.m * p.L * p.L / 24.0]])

    def coriolis_matrix(self, q, qdot):
        return np.zeros((1, 1))

    def static_forces(self, q):
        q = as_configuration(q, 1)
        qv = float(q[0])
        k = self.params.k_bar * qv if self.with_spring else 0.0
        return np.array([k]), np.array([_rigid_gravity(qv, self.params)])

    def damping_matrix(self):
        d = self.params.d_bar if self.with_spring else 0.0
        return np.array([[d]])

    def actuation(self, q):
        return np.array([[1.0]])

    def potential_energy(self, q):
        q = as_configuration(q, 1)
        qv = float(q[0])
        uk = 0.5 * self.params.k_bar * qv * qv if self.with_spring else 0.0
        return uk, _rigid_gravity_potential(qv, self.params)
