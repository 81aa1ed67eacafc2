"""Control law catalog. Laws that must collapse onto one another in special
cases are checked for exact agreement; regulation and tracking laws are
checked in closed loop; the task-space and quasi-static maps against
finite-difference ground truth."""

import numpy as np
import pytest

from softarc import (
    CCSegmentModel,
    ChainParams,
    ConstantActuation,
    ConstantReference,
    FeedforwardController,
    InternalPairOppositeTorques,
    PCCChainModel,
    PDSetpointController,
    RobotState,
    SegmentParams,
    SinusoidReference,
    TrackingController,
    UAFeedforwardController,
    UAPDController,
    end_to_end_jacobian,
    ff_regulation,
    ilc_update,
    integrate_kinematic,
    kinematic_task,
    operational_space,
    pd_plus,
    pd_setpoint,
    simulate,
    solve_equilibrium,
    task_space_terms,
    tracking_ff,
    ua_feedforward,
    ua_pd,
    accel,
)
from softarc.errors import UnattainableEquilibriumError

BENCH = SegmentParams(m=0.5, L=0.25, k_bar=0.05, d_bar=0.01, phi=0.0)


def cc(phi=0.0, k_bar=0.05):
    return CCSegmentModel(SegmentParams(m=0.5, L=0.25, k_bar=k_bar, d_bar=0.01, phi=phi))


def chain2(phi=0.0, actuation=None):
    segs = (SegmentParams(m=0.3, L=0.2, k_bar=0.04, d_bar=0.008, phi=phi),
            SegmentParams(m=0.2, L=0.15, k_bar=0.03, d_bar=0.006, phi=phi))
    if actuation is None:
        return PCCChainModel(ChainParams(segments=segs))
    return PCCChainModel(ChainParams(segments=segs, actuation=actuation))


# --- static law algebra ---------------------------------------------------------


def test_ff_is_static_terms_at_target():
    mdl = cc(phi=0.3)
    q_bar = np.array([0.7])
    tau = ff_regulation(mdl, q_bar)
    K, G = mdl.static_forces(q_bar)
    assert np.max(np.abs(tau - (K + G))) < 1e-15


def test_pd_setpoint_zero_gains_collapses_to_ff():
    mdl = cc(phi=0.3)
    q_bar = np.array([0.7])
    st = RobotState(np.array([0.2]), np.array([-0.4]))
    a = pd_setpoint(mdl, q_bar, st, alpha=0.0, beta=0.0)
    b = ff_regulation(mdl, q_bar)
    assert np.array_equal(a, b)


def test_pd_setpoint_at_rest_on_target_collapses_to_ff():
    mdl = cc(phi=0.3)
    q_bar = np.array([0.7])
    st = RobotState(q_bar.copy(), np.zeros(1))
    a = pd_setpoint(mdl, q_bar, st, alpha=0.8, beta=0.1)
    b = ff_regulation(mdl, q_bar)
    assert np.max(np.abs(a - b)) < 1e-15


def test_ua_pd_identity_actuation_collapses_to_pd_setpoint():
    mdl = cc(phi=0.3)
    q_bar = np.array([0.7])
    st = RobotState(np.array([0.2]), np.array([-0.4]))
    a = ua_pd(mdl, q_bar, st, alpha=0.8, beta=0.1)
    b = pd_setpoint(mdl, q_bar, st, alpha=0.8, beta=0.1)
    assert np.max(np.abs(a - b)) < 1e-14


def test_ua_feedforward_identity_actuation_collapses_to_ff():
    mdl = cc(phi=0.3)
    q_bar = np.array([0.7])
    a = ua_feedforward(mdl, q_bar)
    b = ff_regulation(mdl, q_bar)
    assert np.max(np.abs(a - b)) < 1e-14


def test_tracking_constant_reference_collapses_to_pd():
    # zero velocity and acceleration references cancel the motion terms,
    # leaving the spring/gravity feedforward: identical to pd_setpoint
    mdl = cc(phi=0.3)
    q_bar = np.array([0.7])
    ref = ConstantReference(q_bar)
    st = RobotState(np.array([0.5]), np.array([0.1]))
    a = tracking_ff(mdl, ref, st, alpha=0.6, beta=0.2, t=1.3)
    b = pd_setpoint(mdl, q_bar, st, alpha=0.6, beta=0.2)
    assert np.max(np.abs(a - b)) < 1e-14


def test_pd_plus_on_reference_matches_tracking_structure():
    # at zero tracking error with a constant reference both laws reduce
    # to the same static compensation
    mdl = cc(phi=0.3)
    q_bar = np.array([0.7])
    ref = ConstantReference(q_bar)
    st = RobotState(q_bar.copy(), np.zeros(1))
    a = pd_plus(mdl, ref, st, alpha=0.6, beta=0.2, t=0.0)
    b = ff_regulation(mdl, q_bar)
    assert np.max(np.abs(a - b)) < 1e-14


def test_pd_plus_matches_tracking_on_matched_state():
    # with state exactly on a moving reference the two laws differ only
    # in where M, C are evaluated, which coincides there
    mdl = cc(phi=0.3)
    ref = SinusoidReference(amplitude=np.array([0.4]), omega=1.7)
    t = 0.9
    q_bar, qd_bar, _ = ref(t)
    st = RobotState(q_bar.copy(), qd_bar.copy())
    a = pd_plus(mdl, ref, st, alpha=0.6, beta=0.2, t=t)
    b = tracking_ff(mdl, ref, st, alpha=0.6, beta=0.2, t=t)
    assert np.max(np.abs(a - b)) < 1e-12


def test_ua_feedforward_rejects_unattainable_target():
    mdl = chain2(actuation=InternalPairOppositeTorques(segment=0))
    with pytest.raises(UnattainableEquilibriumError):
        ua_feedforward(mdl, np.array([0.9, 0.7]))


def test_ua_feedforward_round_trip():
    # settle under a held input, then ask the law to reproduce that input
    mdl = chain2(actuation=InternalPairOppositeTorques(segment=0))
    tau_bar = np.array([0.02])
    rep = solve_equilibrium(mdl, tau_bar, np.zeros(2))
    back = ua_feedforward(mdl, rep.q_bar)
    assert np.max(np.abs(back - tau_bar)) < 1e-8


# --- closed-loop behaviour ------------------------------------------------------


def test_physical_p_loop_equivalence():
    # proportional feedback is indistinguishable from a stiffer spring:
    # pd_setpoint(alpha) on the soft plant reproduces, step for step, the
    # feedforward law on a plant whose spring rate is k_bar + alpha
    alpha = 0.3
    soft = cc(k_bar=0.05)
    stiff = cc(k_bar=0.05 + alpha)
    q_bar = np.array([0.9])

    class PD:
        def __call__(self, t, state):
            return pd_setpoint(soft, q_bar, state, alpha=alpha, beta=0.0)

    class FFStiff:
        def __call__(self, t, state):
            K, G = stiff.static_forces(q_bar)
            return K + G

    st = RobotState(np.array([0.4]), np.zeros(1))
    a = simulate(soft, PD(), st, duration=1.0, dt=1e-3)
    b = simulate(stiff, FFStiff(), st, duration=1.0, dt=1e-3)
    assert np.max(np.abs(a.q - b.q)) < 1e-12


def test_feedforward_regulates_stable_target():
    mdl = cc(phi=0.0)
    q_bar = np.array([0.8])
    ctl = FeedforwardController(mdl, q_bar)
    st = RobotState(np.array([0.9]), np.zeros(1))
    traj = simulate(mdl, ctl, st, duration=5.0, dt=1e-3)
    assert abs(traj.q[-1, 0] - 0.8) < 1e-6


def test_pd_beats_feedforward_on_weak_spring():
    # inverted arc with spring too weak to hold the straight shape
    mgl12 = 0.5 * 9.81 * 0.25 / 12.0
    weak = cc(phi=np.pi, k_bar=0.9 * mgl12)
    q_bar = np.zeros(1)
    st = RobotState(np.array([0.05]), np.zeros(1))
    ff = simulate(weak, FeedforwardController(weak, q_bar), st, duration=10.0, dt=1e-3)
    assert abs(ff.q[-1, 0]) > 0.5  # fell away
    pd = simulate(weak, PDSetpointController(weak, q_bar, alpha=0.2 * mgl12, beta=0.0),
                  st, duration=10.0, dt=1e-3)
    assert abs(pd.q[-1, 0]) < 1e-3


def test_tracking_follows_slow_sinusoid():
    mdl = cc(phi=0.0)
    ref = SinusoidReference(amplitude=np.array([0.5]), omega=2 * np.pi * 0.25)
    ctl = TrackingController(mdl, ref, alpha=2.0, beta=0.2)
    st = RobotState(np.zeros(1), np.zeros(1))
    traj = simulate(mdl, ctl, st, duration=8.0, dt=1e-3)
    # compare against the reference over the second half (transient gone)
    half = traj.times >= 4.0
    err = traj.q[half, 0] - 0.5 * np.sin(2 * np.pi * 0.25 * traj.times[half])
    rms = np.sqrt(np.mean(err ** 2))
    assert rms < 0.005


def test_tracking_measured_compensation_also_converges():
    mdl = cc(phi=0.0)
    ref = SinusoidReference(amplitude=np.array([0.4]), omega=2 * np.pi * 0.2)
    ctl = TrackingController(mdl, ref, alpha=2.0, beta=0.2, compensate_on="measured")
    st = RobotState(np.zeros(1), np.zeros(1))
    traj = simulate(mdl, ctl, st, duration=6.0, dt=1e-3)
    half = traj.times >= 3.0
    err = traj.q[half, 0] - 0.4 * np.sin(2 * np.pi * 0.2 * traj.times[half])
    assert np.sqrt(np.mean(err ** 2)) < 0.01


def test_ua_pd_stabilizes_collocated_direction():
    mdl = chain2(phi=np.pi, actuation=None)
    # recompute with one actuator aligned with the unstable mode
    from softarc import classify_stability, configuration_stiffness

    H = configuration_stiffness(mdl, np.zeros(2))
    ev, V = np.linalg.eigh(H)
    assert ev[0] < 0.0 < ev[1]  # exactly one unstable direction for this build
    a_col = V[:, [0]]
    mdl_col = chain2(phi=np.pi, actuation=ConstantActuation(a_col))
    alpha = 2.0 * abs(ev[0])
    rep = classify_stability(mdl_col, np.zeros(2), alpha=alpha)
    assert rep.verdict == "stable"
    ctl = UAPDController(mdl_col, np.zeros(2), alpha=alpha, beta=0.05)
    st = RobotState(np.array([0.01, -0.008]), np.zeros(2))
    traj = simulate(mdl_col, ctl, st, duration=10.0, dt=1e-3)
    assert np.max(np.abs(traj.q[-1])) < 1e-3
    assert np.max(np.abs(traj.q[-1])) < np.max(np.abs(traj.q[0]))


# --- kinematic task loop --------------------------------------------------------


def test_kinematic_task_rate_solves_task():
    mdl = chain2()
    q = np.array([-1.5, -1.2])
    x = mdl.tip_pose(q).as_array()[:2]
    x_bar = x + np.array([0.01, 0.02])
    cmd = kinematic_task(mdl, x_bar, np.zeros(2), q, K_e=3.0)
    J = np.asarray(mdl.jacobian(1.0, q))[:2]
    assert np.max(np.abs(J @ cmd.qdot - 3.0 * (x_bar - x))) < 1e-12
    assert not cmd.damped


def test_kinematic_task_minimum_norm_in_redundancy():
    # 1-D task on a 2-dof chain: the command must have no null-space part
    mdl = chain2()
    q = np.array([0.8, -0.5])
    x = mdl.tip_pose(q).as_array()[:1]
    cmd = kinematic_task(mdl, x + 0.01, np.zeros(1), q, K_e=1.0)
    J = np.asarray(mdl.jacobian(1.0, q))[:1]
    lsq = np.linalg.lstsq(J, np.array([0.01]), rcond=None)[0]
    assert np.max(np.abs(cmd.qdot - lsq)) < 1e-12


def test_kinematic_task_damps_near_singularity():
    mdl = cc()
    # a straight arc cannot move its tip in the x direction: jacobian row
    # vanishes and the command must switch to the damped branch
    q = np.zeros(1)
    cmd = kinematic_task(mdl, np.array([0.26]), np.zeros(1), q, K_e=1.0)
    assert cmd.damped
    assert np.all(np.isfinite(cmd.qdot))


def test_integrate_kinematic_exponential_decay():
    mdl = chain2()
    q0 = np.array([-2.0, -2.0])
    x0 = mdl.tip_pose(q0).as_array()[:2]
    x_bar = x0 + np.array([0.005, -0.004])
    T = 1.2
    times, qs, damped = integrate_kinematic(mdl, x_bar, np.zeros(2), q0,
                                            duration=T, dt=1e-3, K_e=2.0 * np.eye(2))
    assert not damped
    e0 = np.linalg.norm(x_bar - x0)
    for k in (300, 700, len(times) - 1):
        xk = mdl.tip_pose(qs[k]).as_array()[:2]
        want = e0 * np.exp(-2.0 * times[k])
        assert abs(np.linalg.norm(x_bar - xk) - want) < 1e-6 * e0


# --- quasi-static input-to-tip map ----------------------------------------------


def test_end_to_end_jacobian_matches_fd_resolve():
    mdl = cc()
    tau_bar = np.array([-0.1])
    J = end_to_end_jacobian(mdl, tau_bar)
    assert J.shape == (3, 1)
    d = 1e-5
    qp = solve_equilibrium(mdl, tau_bar + d, np.zeros(1)).q_bar
    qm = solve_equilibrium(mdl, tau_bar - d, np.zeros(1)).q_bar
    fd = (mdl.tip_pose(qp).as_array() - mdl.tip_pose(qm).as_array()) / (2 * d)
    assert np.max(np.abs(J[:, 0] - fd)) / np.max(np.abs(fd)) < 1e-6


def test_end_to_end_jacobian_underactuated_shape():
    mdl = chain2(actuation=InternalPairOppositeTorques(segment=0))
    J = end_to_end_jacobian(mdl, np.array([0.01]))
    assert J.shape == (3, 1)


# --- task-space dynamics --------------------------------------------------------


def test_task_space_terms_consistency():
    mdl = chain2()
    st = RobotState(np.array([0.6, -0.4]), np.array([0.5, -0.3]))
    ts = task_space_terms(mdl, st, task_dim=2)
    M = mdl.mass_matrix(st.q)
    J = ts.J
    lam_want = np.linalg.inv(J @ np.linalg.solve(M, J.T))
    assert np.max(np.abs(ts.lam - lam_want)) < 1e-10
    # dynamically consistent pseudoinverse: J jm_pinv = I
    assert np.max(np.abs(J @ ts.jm_pinv - np.eye(2))) < 1e-10


def test_operational_space_achieves_commanded_force():
    segs3 = tuple(SegmentParams(m=0.3, L=0.2, k_bar=0.04, d_bar=0.008, phi=0.5)
                  for _ in range(3))
    Amat = np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    mdl = PCCChainModel(ChainParams(segments=segs3, actuation=ConstantActuation(Amat)))
    rng = np.random.default_rng(33)
    for _ in range(10):
        st = RobotState(rng.uniform(-1.5, 1.5, size=3), rng.uniform(-1, 1, size=3))
        f = rng.uniform(-1, 1, size=2)
        tau = operational_space(mdl, st, f)
        ts = task_space_terms(mdl, st, task_dim=2)
        qdd = accel(mdl, st, tau)
        xdd = ts.J @ qdd + ts.Jdot @ st.qdot
        t = mdl.terms(st)
        lhs = ts.lam @ xdd + ts.eta + ts.jm_pinv.T @ (t.G + t.K + t.D @ st.qdot)
        assert np.max(np.abs(lhs - f)) < 1e-10


def test_jdot_matches_fd_along_trajectory():
    mdl = chain2()
    q = np.array([0.7, -0.9])
    qd = np.array([0.4, 0.6])
    ts = task_space_terms(mdl, RobotState(q, qd), task_dim=2)
    h = 1e-6

    def J_of(qv):
        return np.asarray(mdl.jacobian(1.0, qv))[:2]

    fd = (J_of(q + h * qd) - J_of(q - h * qd)) / (2 * h)
    assert np.max(np.abs(ts.Jdot - fd)) < 1e-5


# --- iterative learning ---------------------------------------------------------


def test_ilc_update_rule():
    tau = np.array([[0.1], [0.2]])
    err = np.array([[1.0], [-1.0]])
    out = ilc_update(tau, err, gamma=0.5)
    assert np.array_equal(out, [[0.6], [-0.3]])
    with pytest.raises(ValueError):
        ilc_update(tau, np.array([[1.0]]), gamma=0.5)


def test_ilc_zero_gain_is_identity():
    tau = np.array([[0.3], [0.4]])
    out = ilc_update(tau, np.array([[9.0], [9.0]]), gamma=0.0)
    assert np.array_equal(out, tau)
