"""Core data types and the model interface.

Configurations are plain 1-D float ndarrays: one bending angle per
segment, in radians, with the straight shape at q = 0. All closed forms
remain finite there. Poses live in the plane of bending; orientation
angles accumulate along the body and are reported unwrapped.
"""

import abc
from dataclasses import dataclass, field

import numpy as np

GRAVITY = 9.81  # standard gravity [m/s^2]


def as_configuration(q, n=None):
    """Coerce q to a finite 1-D float array, optionally checking its length."""
    arr = np.atleast_1d(np.asarray(q, dtype=float))
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("configuration must be a non-empty 1-D array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("configuration contains non-finite entries")
    if n is not None and arr.size != n:
        raise ValueError(f"expected {n} configuration entries, got {arr.size}")
    return arr


@dataclass
class PlanarPose:
    """Position and unwrapped orientation of a body point, base frame."""

    x: float  # [m]
    y: float  # [m]
    theta: float  # [rad], not reduced modulo 2*pi

    def as_array(self):
        return np.array([self.x, self.y, self.theta])


@dataclass
class RobotState:
    """Configuration and configuration velocity."""

    q: np.ndarray
    qdot: np.ndarray

    def __post_init__(self):
        self.q = as_configuration(self.q)
        self.qdot = as_configuration(self.qdot, self.q.size)

    @property
    def n(self):
        return self.q.size


@dataclass
class Wrench2D:
    """Planar wrench: force [N] and out-of-plane torque [N*m], base frame."""

    fx: float = 0.0
    fy: float = 0.0
    tau_z: float = 0.0

    def as_array(self):
        return np.array([self.fx, self.fy, self.tau_z])


@dataclass
class DynamicsTerms:
    """Terms of M qdd + C qd + G + K + D qd = A tau.

    C is the factored velocity-coupling matrix built from the partial
    derivatives of M, so Mdot - 2C stays skew symmetric.
    """

    M: np.ndarray  # inertia, (n, n), symmetric positive definite
    C: np.ndarray  # velocity coupling, (n, n)
    G: np.ndarray  # gravity force, (n,)
    K: np.ndarray  # elastic force, (n,)
    D: np.ndarray  # damping matrix, (n, n)
    A: np.ndarray  # actuation map, (n, m), full column rank at generic q


@dataclass(frozen=True)
class SegmentParams:
    """Physical parameters of one bending segment.

    Mass and stiffness are the arclength integrals over the segment, so
    k_bar multiplies the bending angle directly and d_bar multiplies its
    rate. phi is the angle from the gravity direction to the base tangent.
    """

    m: float  # segment mass [kg]
    L: float  # segment length [m]
    k_bar: float = 0.0  # integrated bending stiffness [N*m/rad]
    d_bar: float = 0.0  # integrated bending damping [N*m*s/rad]
    phi: float = 0.0  # base tangent angle relative to gravity [rad]
    g: float = GRAVITY  # gravity magnitude [m/s^2]

    def __post_init__(self):
        for name in ("m", "L", "k_bar", "d_bar", "phi", "g"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.m <= 0.0:
            raise ValueError("m must be > 0")
        if self.L <= 0.0:
            raise ValueError("L must be > 0")
        if self.k_bar < 0.0:
            raise ValueError("k_bar must be >= 0")
        if self.d_bar < 0.0:
            raise ValueError("d_bar must be >= 0")
        if self.g < 0.0:
            raise ValueError("g must be >= 0")


# --- actuation patterns ----------------------------------------------------
#
# A pattern names how actuator efforts enter the configuration dynamics;
# the resulting map A(q) is produced by chain.actuation_matrix.


@dataclass(frozen=True)
class TipTorquePerSegment:
    """One torque actuator at the tip of every segment: A = identity."""


@dataclass(frozen=True)
class InternalPairOppositeTorques:
    """A single internal moment acting on one segment.

    With "coarse" discretization the actuated segment is one arc and the
    moment enters as a unit torque on it. With "fine" the actuated
    segment is modeled as two consecutive arcs (indices segment and
    segment + 1) that receive opposite unit torques; either way no force
    lands on the segments that follow.
    """

    segment: int
    discretization: str = "coarse"

    def __post_init__(self):
        if self.discretization not in ("coarse", "fine"):
            raise ValueError("discretization must be 'coarse' or 'fine'")
        if self.segment < 0:
            raise ValueError("segment index must be >= 0")


@dataclass(frozen=True)
class TipTangentialForce:
    """A follower force applied at a segment tip along the base x axis.

    The configuration force is the x row of the position Jacobian of that
    tip, so the map depends on q and may lose rank at isolated shapes.
    """

    segment: int

    def __post_init__(self):
        if self.segment < 0:
            raise ValueError("segment index must be >= 0")


@dataclass(frozen=True)
class ConstantActuation:
    """A fixed actuation matrix, one column per actuator."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if mat.ndim != 2 or not np.all(np.isfinite(mat)):
            raise ValueError("actuation matrix must be a finite 2-D array")
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)


ActuationPattern = (
    TipTorquePerSegment
    | InternalPairOppositeTorques
    | TipTangentialForce
    | ConstantActuation
)


@dataclass(frozen=True)
class ChainParams:
    """An ordered run of segments sharing one base frame and gravity.

    All segments must carry the same phi and g: gravity is a single
    global direction that interior segments see through the composed
    kinematics, not a per-segment quantity.
    """

    segments: tuple
    actuation: object = field(default_factory=TipTorquePerSegment)

    def __post_init__(self):
        segs = tuple(self.segments)
        if len(segs) < 1:
            raise ValueError("a chain needs at least one segment")
        for s in segs:
            if not isinstance(s, SegmentParams):
                raise TypeError("segments must be SegmentParams instances")
        base = segs[0]
        for s in segs[1:]:
            if s.phi != base.phi or s.g != base.g:
                raise ValueError("all segments must share phi and g")
        object.__setattr__(self, "segments", segs)

    @property
    def n(self):
        return len(self.segments)

    @property
    def phi(self):
        return self.segments[0].phi

    @property
    def g(self):
        return self.segments[0].g


class ModelInterface(abc.ABC):
    """Shared surface of every planar bending-robot model.

    Implementations are immutable after construction and safe to share
    across threads. `s` is the normalized arclength of the whole body in
    [0, 1]; configuration arrays are never mutated.
    """

    n: int  # configuration dimension
    m: int  # actuator count

    @abc.abstractmethod
    def fk(self, s, q) -> PlanarPose:
        """Pose of the body point at normalized arclength s."""

    @abc.abstractmethod
    def jacobian(self, s, q) -> np.ndarray:
        """(3, n) derivative of fk(s, q) with respect to q."""

    @abc.abstractmethod
    def mass_matrix(self, q) -> np.ndarray:
        """(n, n) configuration-space inertia."""

    @abc.abstractmethod
    def coriolis_matrix(self, q, qdot) -> np.ndarray:
        """(n, n) factored velocity-coupling matrix."""

    @abc.abstractmethod
    def static_forces(self, q):
        """(K, G): elastic and gravity configuration forces, each (n,)."""

    @abc.abstractmethod
    def damping_matrix(self) -> np.ndarray:
        """(n, n) constant damping matrix."""

    @abc.abstractmethod
    def actuation(self, q) -> np.ndarray:
        """(n, m) actuation map at q."""

    @abc.abstractmethod
    def potential_energy(self, q):
        """(U_K, U_G): elastic and gravity potential, zero at q = 0."""

    def terms(self, state: RobotState) -> DynamicsTerms:
        q = as_configuration(state.q, self.n)
        K, G = self.static_forces(q)
        return DynamicsTerms(
            M=self.mass_matrix(q),
            C=self.coriolis_matrix(q, state.qdot),
            G=G,
            K=K,
            D=self.damping_matrix(),
            A=self.actuation(q),
        )

    def contact_jacobian(self, segment, s_local, q) -> np.ndarray:
        """(3, n) Jacobian of the point at s_local on the given segment."""
        if segment != 0:
            raise IndexError("single-segment model has only segment 0")
        return self.jacobian(s_local, q)

    def tip_pose(self, q) -> PlanarPose:
        return self.fk(1.0, q)
