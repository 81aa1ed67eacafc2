"""Parameter containers, state validation, and a coordinate-scaling
invariance property of the analysis layer: rescaling the configuration
coordinate must not change stability verdicts."""

import numpy as np
import pytest

from softarc import (
    CCSegmentModel,
    ChainParams,
    ConstantActuation,
    PlanarPose,
    RobotState,
    SegmentParams,
    TipTorquePerSegment,
    Wrench2D,
    classify_stability,
    solve_equilibrium,
)
from softarc.model import ModelInterface, as_configuration


def test_segment_params_validation():
    with pytest.raises(ValueError):
        SegmentParams(m=-1.0, L=0.25)
    with pytest.raises(ValueError):
        SegmentParams(m=0.5, L=0.0)
    with pytest.raises(ValueError):
        SegmentParams(m=0.5, L=0.25, k_bar=-0.1)
    with pytest.raises(ValueError):
        SegmentParams(m=0.5, L=0.25, d_bar=-0.1)
    p = SegmentParams(m=0.5, L=0.25)
    assert p.k_bar == 0.0 and p.d_bar == 0.0 and p.phi == 0.0 and p.g == 9.81


def test_segment_params_frozen():
    p = SegmentParams(m=0.5, L=0.25)
    with pytest.raises(AttributeError):
        p.m = 1.0


def test_chain_params_properties():
    segs = (SegmentParams(m=0.3, L=0.2, phi=0.4), SegmentParams(m=0.2, L=0.15, phi=0.4))
    cp = ChainParams(segments=segs)
    assert cp.n == 2
    assert cp.phi == 0.4
    assert isinstance(cp.actuation, TipTorquePerSegment)


def test_chain_params_rejects_mixed_frames():
    segs = (SegmentParams(m=0.3, L=0.2, phi=0.0), SegmentParams(m=0.2, L=0.15, phi=0.5))
    with pytest.raises(ValueError):
        ChainParams(segments=segs)


def test_robot_state_shapes():
    st = RobotState(np.array([1.0, 2.0]), np.array([0.0, 0.0]))
    assert st.n == 2
    with pytest.raises(ValueError):
        RobotState(np.array([1.0]), np.array([0.0, 0.0]))


def test_as_configuration_coerces_and_checks():
    q = as_configuration([1, 2], 2)
    assert q.dtype == np.float64 and q.shape == (2,)
    with pytest.raises(ValueError):
        as_configuration([1.0, 2.0], 3)
    with pytest.raises(ValueError):
        as_configuration(np.array([np.nan]), 1)


def test_pose_and_wrench_arrays():
    pose = PlanarPose(1.0, 2.0, 0.5)
    assert np.array_equal(pose.as_array(), [1.0, 2.0, 0.5])
    w = Wrench2D(0.1, -0.2, 0.3)
    assert np.array_equal(w.as_array(), [0.1, -0.2, 0.3])


def test_constant_actuation_copies_matrix():
    mat = np.array([[1.0], [0.5]])
    pat = ConstantActuation(mat)
    mat[0, 0] = 99.0
    assert pat.matrix[0, 0] == 1.0


# --- coordinate scaling invariance --------------------------------------------


class ScaledModel(ModelInterface):
    """View of a base model in the coordinate q' = q / c.

    Generalized forces transform with the Jacobian dq/dq' = c: inertia
    and damping pick up c^2, forces and the input map pick up c.
    """

    def __init__(self, base, c):
        self.base = base
        self.c = float(c)
        self.n = base.n
        self.m = base.m

    def fk(self, s, q):
        return self.base.fk(s, self.c * np.asarray(q))

    def jacobian(self, s, q):
        return self.c * np.asarray(self.base.jacobian(s, self.c * np.asarray(q)))

    def mass_matrix(self, q):
        return self.c ** 2 * self.base.mass_matrix(self.c * np.asarray(q))

    def coriolis_matrix(self, q, qdot):
        return self.c ** 2 * self.base.coriolis_matrix(
            self.c * np.asarray(q), self.c * np.asarray(qdot))

    def static_forces(self, q):
        K, G = self.base.static_forces(self.c * np.asarray(q))
        return self.c * K, self.c * G

    def damping_matrix(self):
        return self.c ** 2 * self.base.damping_matrix()

    def actuation(self, q):
        return self.c * self.base.actuation(self.c * np.asarray(q))

    def potential_energy(self, q):
        return self.base.potential_energy(self.c * np.asarray(q))


def test_stability_verdict_invariant_under_scaling():
    base = CCSegmentModel(SegmentParams(m=0.5, L=0.25, k_bar=0.05, d_bar=0.01, phi=np.pi))
    # frozen landmark: the straight inverted shape is unstable, the curled
    # shape near |q| = 3.156 is stable
    for c in (0.5, 2.0):
        scaled = ScaledModel(base, c)
        rep = classify_stability(scaled, np.array([0.0]))
        assert rep.verdict == "unstable"
        rep = classify_stability(scaled, np.array([3.156035299720 / c]))
        assert rep.verdict == "stable"


def test_equilibrium_maps_through_scaling():
    base = CCSegmentModel(SegmentParams(m=0.5, L=0.25, k_bar=0.05, d_bar=0.01))
    ref = solve_equilibrium(base, np.array([-0.3]), np.array([-2.0]))
    for c in (0.5, 2.0):
        scaled = ScaledModel(base, c)
        # input tau transforms with the same factor as the force row
        rep = solve_equilibrium(scaled, np.array([-0.3]), np.array([-2.0 / c]))
        assert abs(rep.q_bar[0] * c - ref.q_bar[0]) < 1e-8
        assert rep.verdict == ref.verdict
