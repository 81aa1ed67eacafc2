"""Fixed-step time integration with energy accounting.

Classical RK4 with the control law re-evaluated at every stage by
default; an optional hold period freezes the input between samples the
way a discrete deployment would. Fixed stepping keeps trajectories
bit-reproducible, which the CSV export relies on.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import SingularInertiaError
from .model import ModelInterface, RobotState, Wrench2D, as_configuration


@dataclass(frozen=True)
class ExternalContact:
    """Constant wrench applied at a fixed point of the robot."""

    segment: int
    s_local: float
    wrench: Wrench2D

    def __post_init__(self):
        if not 0.0 <= self.s_local <= 1.0:
            raise ValueError("s_local must lie in [0, 1]")


Controller = Optional[Callable[[float, RobotState], np.ndarray]]


def _input_vector(model, tau):
    if tau is None:
        return np.zeros(model.m)
    arr = np.atleast_1d(np.asarray(tau, dtype=float))
    if arr.shape != (model.m,):
        raise ValueError(f"input has shape {arr.shape}, model expects ({model.m},)")
    return arr


def accel(model: ModelInterface, state: RobotState, tau, contacts=()) -> np.ndarray:
    """Configuration acceleration from the force balance at the state."""
    terms = model.terms(state)
    tau = _input_vector(model, tau)
    rhs = terms.A @ tau - terms.C @ state.qdot - terms.G - terms.K
    rhs -= terms.D @ state.qdot
    for c in contacts:
        Jc = model.contact_jacobian(c.segment, c.s_local, state.q)
        rhs += Jc.T @ c.wrench.as_array()
    try:
        # Cholesky doubles as the positive-definiteness gate.
        np.linalg.cholesky(terms.M)
    except np.linalg.LinAlgError:
        raise SingularInertiaError(
            "inertia matrix is not positive definite at this configuration"
        ) from None
    return np.linalg.solve(terms.M, rhs)


def _eval_controller(controller, model, t, state):
    if controller is None:
        return np.zeros(model.m)
    return _input_vector(model, controller(t, state))


def _rk4(model, state, controller, dt, t, contacts):
    """One step; returns (next state, input sampled at the step start)."""
    q = state.q
    qd = state.qdot

    tau1 = _eval_controller(controller, model, t, state)
    a1 = accel(model, state, tau1, contacts)

    s2 = RobotState(q + 0.5 * dt * qd, qd + 0.5 * dt * a1)
    a2 = accel(model, s2, _eval_controller(controller, model, t + 0.5 * dt, s2), contacts)

    s3 = RobotState(q + 0.5 * dt * s2.qdot, qd + 0.5 * dt * a2)
    a3 = accel(model, s3, _eval_controller(controller, model, t + 0.5 * dt, s3), contacts)

    s4 = RobotState(q + dt * s3.qdot, qd + dt * a3)
    a4 = accel(model, s4, _eval_controller(controller, model, t + dt, s4), contacts)

    q_next = q + dt / 6.0 * (qd + 2.0 * s2.qdot + 2.0 * s3.qdot + s4.qdot)
    qd_next = qd + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    return RobotState(q_next, qd_next), tau1


def rk4_step(model, state, controller, dt, t=0.0, contacts=()) -> RobotState:
    """Classical fourth-order step from time t."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    return _rk4(model, state, controller, dt, t, contacts)[0]


@dataclass
class Trajectory:
    """Uniformly sampled simulation record.

    Rows are aligned: sample k holds the state at times[k], the input
    applied at the start of step k (last row repeats the final input)
    and the energy split at that state.
    """

    times: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    inputs: np.ndarray
    kinetic: np.ndarray
    elastic: np.ndarray
    gravity: np.ndarray
    lyapunov: Optional[np.ndarray] = None

    def __post_init__(self):
        N = self.times.size
        for name in ("q", "qdot", "inputs", "kinetic", "elastic", "gravity"):
            if getattr(self, name).shape[0] != N:
                raise ValueError(f"channel {name} length does not match times")
        if self.lyapunov is not None and self.lyapunov.shape[0] != N:
            raise ValueError("lyapunov channel length does not match times")

    @property
    def total(self) -> np.ndarray:
        return self.kinetic + self.elastic + self.gravity

    def state(self, k) -> RobotState:
        return RobotState(self.q[k], self.qdot[k])

    @property
    def final_state(self) -> RobotState:
        return self.state(-1)

    def to_csv(self, path_or_file) -> None:
        """Write the record as CSV to a path or an open text stream."""
        n = self.q.shape[1]
        m = self.inputs.shape[1]
        header = (
            ["t"]
            + [f"q{i + 1}" for i in range(n)]
            + [f"qd{i + 1}" for i in range(n)]
            + [f"tau{i + 1}" for i in range(m)]
            + ["E_kin", "U_K", "U_G", "E_tot"]
        )
        if self.lyapunov is not None:
            header.append("V")
        total = self.total
        if hasattr(path_or_file, "write"):
            self._write_csv(path_or_file, header, total)
        else:
            with open(path_or_file, "w", newline="") as fh:
                self._write_csv(fh, header, total)

    def _write_csv(self, fh, header, total) -> None:
        fh.write(",".join(header) + "\n")
        for k in range(self.times.size):
            row = [self.times[k]]
            row.extend(self.q[k])
            row.extend(self.qdot[k])
            row.extend(self.inputs[k])
            row.extend((self.kinetic[k], self.elastic[k], self.gravity[k], total[k]))
            if self.lyapunov is not None:
                row.append(self.lyapunov[k])
            fh.write(",".join("%.17g" % v for v in row) + "\n")


class _HeldInput:
    """Zero-order hold: resample the wrapped law every `period` seconds."""

    def __init__(self, controller, period):
        self.controller = controller
        self.period = float(period)
        self.next_sample = -np.inf
        self.value = None

    def sample(self, model, t, state):
        if t >= self.next_sample - 1e-12:
            self.value = _eval_controller(self.controller, model, t, state)
            self.next_sample = (np.floor(t / self.period + 0.5) + 1.0) * self.period
        return self.value


def simulate(
    model: ModelInterface,
    controller: Controller,
    initial: RobotState,
    duration,
    dt=1e-4,
    contacts: Sequence[ExternalContact] = (),
    control_period=None,
) -> Trajectory:
    """Integrate the closed loop and record states, inputs and energies.

    When the controller exposes a `lyapunov(state)` method the trajectory
    carries its value as an extra channel.
    """
    if duration <= 0.0:
        raise ValueError("duration must be positive")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if control_period is not None and control_period < dt:
        raise ValueError("control period shorter than the integration step")

    steps = max(1, int(round(duration / dt)))
    n = initial.n
    m = model.m
    N = steps + 1

    times = dt * np.arange(N)
    qs = np.empty((N, n))
    qds = np.empty((N, n))
    taus = np.empty((N, m))
    e_kin = np.empty(N)
    u_k = np.empty(N)
    u_g = np.empty(N)
    lyap_fn = getattr(controller, "lyapunov", None)
    lyap = np.empty(N) if callable(lyap_fn) else None

    hold = _HeldInput(controller, control_period) if control_period else None

    state = RobotState(initial.q, initial.qdot)
    for k in range(N):
        t = times[k]
        qs[k] = state.q
        qds[k] = state.qdot
        M = model.mass_matrix(state.q)
        e_kin[k] = 0.5 * float(state.qdot @ M @ state.qdot)
        u_k[k], u_g[k] = model.potential_energy(state.q)
        if lyap is not None:
            lyap[k] = lyap_fn(state)
        if k == steps:
            if hold is not None:
                taus[k] = hold.sample(model, t, state)
            else:
                taus[k] = _eval_controller(controller, model, t, state)
            break
        if hold is not None:
            tau_k = hold.sample(model, t, state)
            state, _ = _rk4(model, state, lambda tt, ss: tau_k, dt, t, contacts)
            taus[k] = tau_k
        else:
            state, taus[k] = _rk4(model, state, controller, dt, t, contacts)

    return Trajectory(
        times=times,
        q=qs,
        qdot=qds,
        inputs=taus,
        kinetic=e_kin,
        elastic=u_k,
        gravity=u_g,
        lyapunov=lyap,
    )
