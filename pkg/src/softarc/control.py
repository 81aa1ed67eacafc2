"""Model-based control laws and closed-loop helpers.

Free functions compute one input vector from the current state and the
references; the controller classes wrap them with cached setpoint terms
and the signature the simulator expects. Set-point controllers also
expose the energy-based candidate function their convergence argument
rests on, so simulations can log it as a channel.
"""

from dataclasses import dataclass, replace

import numpy as np

from .analysis import (
    ATTAINABILITY_TOL,
    PINV_CUTOFF,
    _actuation_of,
    attainability,
    lyapunov_value,
    solve_equilibrium,
)
from .errors import (
    RankDeficiencyError,
    SingularStiffnessError,
    UnattainableEquilibriumError,
)
from .model import ModelInterface, RobotState, as_configuration
from .numerics import fd_directional
from .sim import simulate


def _gain(value, size, name="gain"):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return float(arr) * np.eye(size)
    if arr.shape != (size, size):
        raise ValueError(f"{name} must be scalar or {size}x{size}")
    return arr


def _require_identity_actuation(model, q):
    A = model.actuation(q)
    if A.shape != (model.n, model.n) or not np.allclose(A, np.eye(model.n)):
        raise ValueError(
            "this law assumes one independent generalized torque per coordinate"
        )


def _with_pattern(model, pattern):
    """Clone a chain model under a different actuation pattern."""
    if pattern is None:
        return model
    from .chain import PCCChainModel

    params = getattr(model, "params", None)
    if params is None or not hasattr(params, "segments"):
        raise ValueError("explicit patterns need a chain model carrying ChainParams")
    return PCCChainModel(replace(params, actuation=pattern), order=model.order)


# ---------------------------------------------------------------- set-point


def ff_regulation(model: ModelInterface, q_bar) -> np.ndarray:
    """Constant input holding q_bar: the static forces evaluated there."""
    q_bar = as_configuration(q_bar, model.n)
    _require_identity_actuation(model, q_bar)
    K, G = model.static_forces(q_bar)
    return K + G


def pd_setpoint(model, q_bar, state: RobotState, alpha, beta) -> np.ndarray:
    """Static compensation plus proportional-derivative feedback."""
    q_bar = as_configuration(q_bar, model.n)
    alpha = _gain(alpha, model.n, "alpha")
    beta = _gain(beta, model.n, "beta")
    tau = ff_regulation(model, q_bar)
    return tau + alpha @ (q_bar - state.q) - beta @ state.qdot


def tracking_ff(model, ref, state: RobotState, alpha, beta, t) -> np.ndarray:
    """Reference-dynamics compensation with PD correction.

    Inertia and velocity coupling are evaluated on the reference triple;
    the damping feedforward uses the physical (constant) damping matrix.
    """
    q_bar, qd_bar, qdd_bar = (as_configuration(v, model.n) for v in ref(t))
    alpha = _gain(alpha, model.n, "alpha")
    beta = _gain(beta, model.n, "beta")
    _require_identity_actuation(model, q_bar)
    M = model.mass_matrix(q_bar)
    C = model.coriolis_matrix(q_bar, qd_bar)
    D = model.damping_matrix()
    K, G = model.static_forces(q_bar)
    tau = M @ qdd_bar + C @ qd_bar + D @ qd_bar + K + G
    return tau + alpha @ (q_bar - state.q) + beta @ (qd_bar - state.qdot)


def pd_plus(model, ref, state: RobotState, alpha, beta, t) -> np.ndarray:
    """Tracking law with inertia, velocity and gravity terms on the
    measured state; the elastic feedforward stays on the reference."""
    q_bar, qd_bar, qdd_bar = (as_configuration(v, model.n) for v in ref(t))
    alpha = _gain(alpha, model.n, "alpha")
    beta = _gain(beta, model.n, "beta")
    _require_identity_actuation(model, state.q)
    M = model.mass_matrix(state.q)
    C = model.coriolis_matrix(state.q, state.qdot)
    D = model.damping_matrix()
    K_bar, _ = model.static_forces(q_bar)
    _, G_meas = model.static_forces(state.q)
    tau = M @ qdd_bar + C @ qd_bar + D @ qd_bar + K_bar + G_meas
    return tau + alpha @ (q_bar - state.q) + beta @ (qd_bar - state.qdot)


# ------------------------------------------------------------ underactuated


def ua_feedforward(model, q_bar, pattern=None) -> np.ndarray:
    """Least-squares input holding q_bar through a non-square actuation map."""
    q_bar = as_configuration(q_bar, model.n)
    residual = attainability(model, q_bar, pattern)
    if residual > ATTAINABILITY_TOL:
        raise UnattainableEquilibriumError(
            f"static forces leave the actuation span by {residual:.3e} N m"
        )
    A = _actuation_of(model, q_bar, pattern)
    K, G = model.static_forces(q_bar)
    return np.linalg.pinv(A, rcond=PINV_CUTOFF) @ (K + G)


def ua_pd(model, q_bar, state: RobotState, alpha, beta, pattern=None) -> np.ndarray:
    """Underactuated PD: feedback enters through the transposed map."""
    q_bar = as_configuration(q_bar, model.n)
    A = _actuation_of(model, q_bar, pattern)
    m = A.shape[1]
    alpha = _gain(alpha, m, "alpha")
    beta = _gain(beta, m, "beta")
    tau = ua_feedforward(model, q_bar, pattern)
    return tau + alpha @ (A.T @ (q_bar - state.q)) - beta @ (A.T @ state.qdot)


# ----------------------------------------------------------------- kinematic


@dataclass(frozen=True)
class KinematicCommand:
    qdot: np.ndarray
    damped: bool  # True when the damped least-squares fallback engaged


def _task_rows(model, q, k):
    if not 1 <= k <= 3:
        raise ValueError("task dimension must be 1, 2 or 3 pose coordinates")
    x = model.tip_pose(q).as_array()[:k]
    J = np.asarray(model.jacobian(1.0, q))[:k]
    return x, J


def kinematic_task(model, x_bar, xdot_bar, q, K_e) -> KinematicCommand:
    """Resolved-rate command q_dot = J^+ (K_e (x_bar - x) + xdot_bar).

    Near a row-rank loss of J the Moore-Penrose inverse is replaced by a
    damped least-squares inverse and the command is flagged.
    """
    q = as_configuration(q, model.n)
    x_bar = np.atleast_1d(np.asarray(x_bar, dtype=float))
    xdot_bar = np.atleast_1d(np.asarray(xdot_bar, dtype=float))
    k = x_bar.size
    if xdot_bar.size != k:
        raise ValueError("x_bar and xdot_bar disagree on the task dimension")
    if k > model.n:
        raise ValueError("task dimension exceeds the configuration dimension")
    K_e = _gain(K_e, k, "K_e")
    x, J = _task_rows(model, q, k)
    rate = K_e @ (x_bar - x) + xdot_bar

    U, sing, Vt = np.linalg.svd(J, full_matrices=False)
    if sing[0] == 0.0:
        # no achievable task motion at all; the minimum-norm command is rest
        return KinematicCommand(qdot=np.zeros(model.n), damped=True)
    damped = sing[-1] / sing[0] < 1e-8
    if damped:
        lam = 1e-6 * sing[0]
        qdot = J.T @ np.linalg.solve(J @ J.T + lam**2 * np.eye(k), rate)
    else:
        qdot = Vt.T @ ((U.T @ rate) / sing)
    return KinematicCommand(qdot=qdot, damped=damped)


def integrate_kinematic(model, x_bar, xdot_bar, q0, duration, dt, K_e):
    """Integrate the resolved-rate loop on the first-order kinematics.

    x_bar / xdot_bar may be constants or callables of time. Returns
    (times, configurations, damped_ever).
    """
    x_fn = x_bar if callable(x_bar) else (lambda t: x_bar)
    xd_fn = xdot_bar if callable(xdot_bar) else (lambda t: xdot_bar)
    q = as_configuration(q0, model.n).copy()
    steps = max(1, int(round(duration / dt)))
    times = dt * np.arange(steps + 1)
    out = np.empty((steps + 1, model.n))
    out[0] = q
    damped_ever = False

    def f(t, qv):
        nonlocal damped_ever
        cmd = kinematic_task(model, x_fn(t), xd_fn(t), qv, K_e)
        damped_ever = damped_ever or cmd.damped
        return cmd.qdot

    for k in range(steps):
        t = times[k]
        k1 = f(t, q)
        k2 = f(t + 0.5 * dt, q + 0.5 * dt * k1)
        k3 = f(t + 0.5 * dt, q + 0.5 * dt * k2)
        k4 = f(t + dt, q + dt * k3)
        q = q + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = q
    return times, out, damped_ever


# ------------------------------------------------------- quasi-static sensitivity


def end_to_end_jacobian(model, tau_bar, pattern=None, q0=None) -> np.ndarray:
    """Sensitivity of the tip pose to the input at the settled equilibrium.

    Composes the tip Jacobian with the inverse static force field
    Jacobian and the actuation map; valid where the equilibrium map is
    differentiable and exact when the map is configuration independent.
    """
    mdl = _with_pattern(model, pattern)
    tau_bar = np.atleast_1d(np.asarray(tau_bar, dtype=float))
    if q0 is None:
        q0 = np.zeros(mdl.n)
    report = solve_equilibrium(mdl, tau_bar, q0)
    H = report.hessian
    sing = np.linalg.svd(H, compute_uv=False)
    if sing[0] == 0.0 or sing[-1] / sing[0] < PINV_CUTOFF:
        raise SingularStiffnessError(
            "static force field Jacobian is singular at the equilibrium"
        )
    A = mdl.actuation(report.q_bar)
    J = np.asarray(mdl.jacobian(1.0, report.q_bar))
    return J @ np.linalg.solve(H, A)


# ------------------------------------------------------------- task dynamics


@dataclass(frozen=True)
class TaskSpaceTerms:
    """Tip-task reformulation of the dynamics at one state."""

    J: np.ndarray  # (k, n) task rows of the tip Jacobian
    Jdot: np.ndarray  # (k, n) time derivative along the current velocity
    lam: np.ndarray  # (k, k) task inertia
    eta: np.ndarray  # (k,) velocity-product terms
    jm_pinv: np.ndarray  # (n, k) inertia-weighted pseudo-inverse of J


def task_space_terms(model, state: RobotState, task_dim=2) -> TaskSpaceTerms:
    q = state.q
    qdot = state.qdot
    M = model.mass_matrix(q)
    C = model.coriolis_matrix(q, qdot)
    _, J = _task_rows(model, q, task_dim)
    Jdot = fd_directional(
        lambda x: np.asarray(model.jacobian(1.0, x))[:task_dim], q, qdot
    )
    Minv_Jt = np.linalg.solve(M, J.T)
    lam = np.linalg.inv(J @ Minv_Jt)
    JMinvC = J @ np.linalg.solve(M, C)
    eta = lam @ ((JMinvC - Jdot) @ qdot)
    return TaskSpaceTerms(J=J, Jdot=Jdot, lam=lam, eta=eta, jm_pinv=Minv_Jt @ lam)


def operational_space(model, state: RobotState, f_task, pattern=None) -> np.ndarray:
    """Input realizing the task force f on the tip-task dynamics.

    Routes f through the inertia-weighted right inverse of the task
    input map, so the closed task dynamics see exactly f on their right
    side. The task dimension must match the number of actuators.
    """
    mdl = _with_pattern(model, pattern)
    f = np.atleast_1d(np.asarray(f_task, dtype=float))
    k = f.size
    if k != mdl.m:
        raise ValueError(
            f"task dimension {k} must equal the actuator count {mdl.m}"
        )
    ts = task_space_terms(mdl, state, k)
    M = mdl.mass_matrix(state.q)
    A = mdl.actuation(state.q)
    JMinv = np.linalg.solve(M, ts.J.T).T
    JMA = JMinv @ A
    sing = np.linalg.svd(JMA, compute_uv=False)
    if sing[0] == 0.0 or sing[-1] / sing[0] < 1e-10:
        raise RankDeficiencyError(
            "task input map is rank deficient at this state",
            singular_values=sing,
        )
    P_MA = np.linalg.solve(JMA, JMinv)
    return P_MA @ (ts.J.T @ f)


# -------------------------------------------------------------------- ILC


def ilc_update(tau_prev, e_prev, gamma) -> np.ndarray:
    """One repetition of the proportional learning rule, per sample."""
    tau_prev = np.asarray(tau_prev, dtype=float)
    e_prev = np.asarray(e_prev, dtype=float)
    if tau_prev.shape != e_prev.shape:
        raise ValueError("input and error traces must share shape and sampling")
    return tau_prev + float(gamma) * e_prev


# ------------------------------------------------------------- references


class ConstantReference:
    """Constant setpoint with zero derivatives."""

    def __init__(self, q_bar):
        self.q_bar = as_configuration(q_bar)
        self._zero = np.zeros_like(self.q_bar)

    def __call__(self, t):
        return self.q_bar, self._zero, self._zero


class SinusoidReference:
    """offset + amplitude * sin(omega t + phase), per coordinate."""

    def __init__(self, amplitude, omega, offset=None, phase=0.0):
        self.amplitude = np.atleast_1d(np.asarray(amplitude, dtype=float))
        self.omega = float(omega)
        self.offset = (
            np.zeros_like(self.amplitude)
            if offset is None
            else np.atleast_1d(np.asarray(offset, dtype=float))
        )
        self.phase = float(phase)

    def __call__(self, t):
        arg = self.omega * t + self.phase
        q = self.offset + self.amplitude * np.sin(arg)
        qd = self.amplitude * self.omega * np.cos(arg)
        qdd = -self.amplitude * self.omega**2 * np.sin(arg)
        return q, qd, qdd


# ------------------------------------------------------------- controllers


class ConstantController:
    """Open loop: a fixed input vector."""

    def __init__(self, tau):
        self.tau = np.atleast_1d(np.asarray(tau, dtype=float))

    def __call__(self, t, state):
        return self.tau


class FeedforwardController:
    """Holds a setpoint with the constant static compensation."""

    def __init__(self, model, q_bar):
        self.model = model
        self.q_bar = as_configuration(q_bar, model.n)
        self.tau = ff_regulation(model, self.q_bar)

    def __call__(self, t, state):
        return self.tau

    def lyapunov(self, state):
        return lyapunov_value(self.model, state, self.q_bar)


class PDSetpointController:
    def __init__(self, model, q_bar, alpha, beta):
        self.model = model
        self.q_bar = as_configuration(q_bar, model.n)
        self.alpha = _gain(alpha, model.n, "alpha")
        self.beta = _gain(beta, model.n, "beta")
        self._ff = ff_regulation(model, self.q_bar)

    def __call__(self, t, state):
        err = self.q_bar - state.q
        return self._ff + self.alpha @ err - self.beta @ state.qdot

    def lyapunov(self, state):
        # candidate extended with the proportional term's potential
        err = self.q_bar - state.q
        return lyapunov_value(self.model, state, self.q_bar) + 0.5 * float(
            err @ self.alpha @ err
        )


class UAFeedforwardController:
    def __init__(self, model, q_bar, pattern=None):
        self.model = model
        self.q_bar = as_configuration(q_bar, model.n)
        self.tau = ua_feedforward(model, self.q_bar, pattern)

    def __call__(self, t, state):
        return self.tau

    def lyapunov(self, state):
        return lyapunov_value(self.model, state, self.q_bar)


class UAPDController:
    def __init__(self, model, q_bar, alpha, beta, pattern=None):
        self.model = model
        self.q_bar = as_configuration(q_bar, model.n)
        self.A = _actuation_of(model, self.q_bar, pattern)
        m = self.A.shape[1]
        self.alpha = _gain(alpha, m, "alpha")
        self.beta = _gain(beta, m, "beta")
        self._ff = ua_feedforward(model, self.q_bar, pattern)

    def __call__(self, t, state):
        err = self.A.T @ (self.q_bar - state.q)
        return self._ff + self.alpha @ err - self.beta @ (self.A.T @ state.qdot)

    def lyapunov(self, state):
        err = self.A.T @ (self.q_bar - state.q)
        return lyapunov_value(self.model, state, self.q_bar) + 0.5 * float(
            err @ self.alpha @ err
        )


class TrackingController:
    """Trajectory tracking law.

    compensate_on="reference" evaluates the inertia and velocity terms
    on the reference triple; "measured" evaluates them on the measured
    state (gravity too), keeping only the elastic feedforward on the
    reference.
    """

    def __init__(self, model, ref, alpha, beta, compensate_on="reference"):
        if compensate_on not in ("reference", "measured"):
            raise ValueError("compensate_on must be 'reference' or 'measured'")
        self.model = model
        self.ref = ref
        self.alpha = alpha
        self.beta = beta
        self.compensate_on = compensate_on

    def __call__(self, t, state):
        if self.compensate_on == "reference":
            return tracking_ff(self.model, self.ref, state, self.alpha, self.beta, t)
        return pd_plus(self.model, self.ref, state, self.alpha, self.beta, t)


class TraceController:
    """Plays back a sampled input trace, linearly interpolated in time."""

    def __init__(self, times, values):
        self.times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[0] != self.times.size:
            raise ValueError("trace length does not match its time base")
        self.values = values

    def __call__(self, t, state):
        return np.array(
            [np.interp(t, self.times, self.values[:, j])
             for j in range(self.values.shape[1])]
        )


class ILCExperiment:
    """Repeated-trial learning of a feedforward input trace.

    Each trial plays the current trace from the same initial state,
    measures the configuration error against the reference, and applies
    the proportional update. Owns its iteration memory; one instance per
    experiment.
    """

    def __init__(self, model, ref, initial: RobotState, duration, dt, gamma,
                 control_period=None):
        if model.m != model.n:
            raise ValueError("trace learning on the configuration error "
                             "needs one actuator per coordinate")
        self.model = model
        self.ref = ref
        self.initial = initial
        self.duration = float(duration)
        self.dt = float(dt)
        self.gamma = float(gamma)
        self.control_period = control_period
        steps = max(1, int(round(self.duration / self.dt)))
        self.times = self.dt * np.arange(steps + 1)
        self.trace = np.zeros((steps + 1, model.m))
        self.rms_history = []

    def reference_trace(self):
        return np.stack([as_configuration(self.ref(t)[0], self.model.n)
                         for t in self.times])

    def run_iteration(self):
        """One trial: simulate, measure, learn. Returns the trial RMS error."""
        controller = TraceController(self.times, self.trace)
        traj = simulate(
            self.model,
            controller,
            self.initial,
            self.duration,
            dt=self.dt,
            control_period=self.control_period,
        )
        error = self.reference_trace() - traj.q
        rms = float(np.sqrt(np.mean(error**2)))
        self.trace = ilc_update(self.trace, error, self.gamma)
        self.rms_history.append(rms)
        return rms

    def run(self, iterations):
        return [self.run_iteration() for _ in range(int(iterations))]
