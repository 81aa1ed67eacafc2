"""Equilibria, local stability, and stiffness analysis.

An equilibrium balances the static forces against the actuation map,
K(q) + G(q) = A(q) tau. Stability is read off the symmetrized Jacobian
of the static force field at the equilibrium, optionally augmented with
the proportional-feedback term A alpha A^T; the verdict is the sign
pattern of its eigenvalues with a noise-floor band around zero.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    NonConvergenceError,
    NotAnEquilibriumError,
    RankDeficiencyError,
)
from .model import ModelInterface, RobotState, as_configuration
from .numerics import fd_jacobian

# Success threshold on the static force residual [N m].
RESIDUAL_TOL = 1e-10
# Attainability slack used when classifying a configuration without a
# known input; covers solver and projector roundoff.
ATTAINABILITY_TOL = 1e-8
# Relative singular-value cutoff for every pseudo-inverse in here.
PINV_CUTOFF = 1e-12
MAX_ITERATIONS = 200
MAX_HALVINGS = 30


@dataclass
class EquilibriumReport:
    q_bar: np.ndarray
    residual: float
    hessian: np.ndarray
    min_eigenvalue: float
    verdict: str  # "stable" | "unstable" | "marginal"


def _static_residual(model, q, tau_bar):
    K, G = model.static_forces(q)
    return K + G - model.actuation(q) @ tau_bar


def _actuation_of(model, q, pattern):
    if pattern is None:
        return model.actuation(q)
    from .chain import actuation_matrix  # local import, avoids a cycle

    params = getattr(model, "params", None)
    if params is None or not hasattr(params, "segments"):
        raise ValueError("explicit patterns need a chain model carrying ChainParams")
    return actuation_matrix(pattern, as_configuration(q, model.n), params)


def configuration_stiffness(model: ModelInterface, q) -> np.ndarray:
    """Symmetrized Jacobian of the static force field K + G at q."""
    q = as_configuration(q, model.n)

    def field(x):
        K, G = model.static_forces(x)
        return K + G

    H = fd_jacobian(field, q)
    return 0.5 * (H + H.T)


def _classify(H):
    eigs = np.linalg.eigvalsh(H)
    min_eig = float(eigs[0])
    tol = 1e-8 * max(float(np.abs(eigs).max()), 1.0e-300)
    if min_eig > tol:
        verdict = "stable"
    elif min_eig < -tol:
        verdict = "unstable"
    else:
        verdict = "marginal"
    return min_eig, verdict


def solve_equilibrium(model: ModelInterface, tau_bar, q0) -> EquilibriumReport:
    """Damped Newton iteration on the static force residual.

    Backtracks by halving until the residual norm decreases; falls back
    to a gradient step when the Newton direction is unusable. Raises
    NonConvergenceError (carrying the last iterate) after 200 iterations
    or a complete stall.
    """
    tau_bar = np.atleast_1d(np.asarray(tau_bar, dtype=float))
    if tau_bar.shape != (model.m,):
        raise ValueError(f"input has shape {tau_bar.shape}, model expects ({model.m},)")
    q = as_configuration(q0, model.n).copy()

    r = _static_residual(model, q, tau_bar)
    rnorm = float(np.linalg.norm(r))
    for _ in range(MAX_ITERATIONS):
        if rnorm < RESIDUAL_TOL:
            H = configuration_stiffness(model, q)
            min_eig, verdict = _classify(H)
            return EquilibriumReport(
                q_bar=q,
                residual=rnorm,
                hessian=H,
                min_eigenvalue=min_eig,
                verdict=verdict,
            )

        Jr = fd_jacobian(lambda x: _static_residual(model, x, tau_bar), q)
        step = None
        try:
            cand = np.linalg.solve(Jr, -r)
            if np.all(np.isfinite(cand)):
                step = cand
        except np.linalg.LinAlgError:
            step = None
        if step is None:
            grad = Jr.T @ r
            scale = float(np.linalg.norm(Jr)) ** 2
            step = -grad / max(scale, 1e-30)

        improved = False
        scale = 1.0
        for _ in range(MAX_HALVINGS + 1):
            q_try = q + scale * step
            r_try = _static_residual(model, q_try, tau_bar)
            rnorm_try = float(np.linalg.norm(r_try))
            if rnorm_try < rnorm:
                q, r, rnorm = q_try, r_try, rnorm_try
                improved = True
                break
            scale *= 0.5
        if not improved:
            # Newton stalled; one gradient attempt before giving up.
            grad = Jr.T @ r
            gnorm2 = float(np.linalg.norm(Jr @ grad)) ** 2
            if gnorm2 > 0.0:
                scale = float(np.dot(r, Jr @ grad)) / gnorm2
                for _ in range(MAX_HALVINGS + 1):
                    q_try = q - scale * grad
                    r_try = _static_residual(model, q_try, tau_bar)
                    rnorm_try = float(np.linalg.norm(r_try))
                    if rnorm_try < rnorm:
                        q, r, rnorm = q_try, r_try, rnorm_try
                        improved = True
                        break
                    scale *= 0.5
            if not improved:
                raise NonConvergenceError(
                    "equilibrium search stalled",
                    last_iterate=q,
                    residual_norm=rnorm,
                )

    raise NonConvergenceError(
        f"no equilibrium within {MAX_ITERATIONS} iterations",
        last_iterate=q,
        residual_norm=rnorm,
    )


def scan_equilibria_1d(model: ModelInterface, tau_bar, q_range, grid_points=400):
    """All isolated equilibria of a one-dof model inside q_range.

    Brackets sign changes of (K + G)/A - tau on a uniform grid and
    polishes each bracket with the Newton solver. Cells where the scalar
    actuation entry nearly vanishes are skipped, so a sign flip across
    an actuation pole is not mistaken for a root.
    """
    if model.n != 1:
        raise ValueError("grid scan is defined for one-dof models")
    tau_arr = np.atleast_1d(np.asarray(tau_bar, dtype=float))
    lo, hi = float(q_range[0]), float(q_range[1])
    if not hi > lo:
        raise ValueError("empty scan range")
    grid = np.linspace(lo, hi, int(grid_points))

    vals = []
    for qv in grid:
        K, G = model.static_forces([qv])
        a = float(model.actuation(np.array([qv]))[0, 0])
        vals.append(None if abs(a) < 1e-12 else (float(K[0] + G[0]) / a - float(tau_arr[0])))

    reports = []
    span = hi - lo
    for k in range(len(grid) - 1):
        f0, f1 = vals[k], vals[k + 1]
        if f0 is None or f1 is None:
            continue
        if f0 == 0.0:
            bracket_mid = grid[k]
        elif f0 * f1 < 0.0:
            bracket_mid = grid[k] - f0 * (grid[k + 1] - grid[k]) / (f1 - f0)
        else:
            continue
        try:
            rep = solve_equilibrium(model, tau_arr, np.array([bracket_mid]))
        except NonConvergenceError:
            continue
        root = float(rep.q_bar[0])
        if not lo - 1e-9 * span <= root <= hi + 1e-9 * span:
            continue
        if any(abs(root - float(r.q_bar[0])) < 1e-6 * span for r in reports):
            continue
        reports.append(rep)
    reports.sort(key=lambda r: float(r.q_bar[0]))
    return reports


def attainability(model: ModelInterface, q_bar, pattern=None) -> float:
    """Norm of the static force component outside the actuation span."""
    q_bar = as_configuration(q_bar, model.n)
    A = _actuation_of(model, q_bar, pattern)
    sing = np.linalg.svd(A, compute_uv=False)
    if sing[0] == 0.0 or sing[-1] / sing[0] < PINV_CUTOFF:
        raise RankDeficiencyError(
            "actuation map is column rank deficient", singular_values=sing
        )
    K, G = model.static_forces(q_bar)
    force = K + G
    A_left = np.linalg.pinv(A, rcond=PINV_CUTOFF)
    return float(np.linalg.norm(force - A @ (A_left @ force)))


def classify_stability(
    model: ModelInterface, q_bar, alpha=None, pattern=None
) -> EquilibriumReport:
    """Verdict on an equilibrium from the static force field Jacobian.

    The configuration must be holdable by some constant input (checked
    through the actuation-span projector). With alpha given, the
    proportional feedback contribution A alpha A^T is added before the
    eigenvalues are read, which models the closed-loop force field.
    """
    q_bar = as_configuration(q_bar, model.n)
    residual = attainability(model, q_bar, pattern)
    K, G = model.static_forces(q_bar)
    scale = max(1.0, float(np.linalg.norm(K + G)))
    if residual > ATTAINABILITY_TOL * scale:
        raise NotAnEquilibriumError(
            f"static force residual {residual:.3e} exceeds tolerance; "
            "no constant input holds this configuration"
        )

    H = configuration_stiffness(model, q_bar)
    if alpha is not None:
        A = _actuation_of(model, q_bar, pattern)
        m = A.shape[1]
        alpha_mat = np.asarray(alpha, dtype=float)
        if alpha_mat.ndim == 0:
            alpha_mat = float(alpha_mat) * np.eye(m)
        if alpha_mat.shape != (m, m):
            raise ValueError(f"gain must be {m}x{m}")
        H = H + A @ alpha_mat @ A.T
        H = 0.5 * (H + H.T)
    min_eig, verdict = _classify(H)
    return EquilibriumReport(
        q_bar=q_bar,
        residual=residual,
        hessian=H,
        min_eigenvalue=min_eig,
        verdict=verdict,
    )


def lyapunov_value(model: ModelInterface, state: RobotState, q_bar) -> float:
    """Energy-based candidate function centered on the target configuration.

    Kinetic energy plus the total potential re-centered at q_bar, plus
    the linear correction that moves the minimum of the potential onto
    q_bar itself.
    """
    q_bar = as_configuration(q_bar, model.n)
    M = model.mass_matrix(state.q)
    uk, ug = model.potential_energy(state.q)
    uk_bar, ug_bar = model.potential_energy(q_bar)
    K_bar, G_bar = model.static_forces(q_bar)
    kinetic = 0.5 * float(state.qdot @ M @ state.qdot)
    centered = (uk + ug) - (uk_bar + ug_bar)
    correction = float((K_bar + G_bar) @ (q_bar - state.q))
    return kinetic + centered + correction


def min_potential_margin(model, q_bar, radius=0.3, samples=200, seed=0) -> float:
    """Smallest Lyapunov value on a sampled ball around q_bar.

    Positive return means the re-centered potential dominates locally;
    it is a sampled check, not a proof. Radius is the caller's choice of
    neighborhood.
    """
    q_bar = as_configuration(q_bar, model.n)
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(int(samples)):
        direction = rng.standard_normal(model.n)
        direction /= max(np.linalg.norm(direction), 1e-30)
        delta = direction * radius * rng.uniform(0.05, 1.0)
        value = lyapunov_value(model, RobotState(q_bar + delta, np.zeros(model.n)), q_bar)
        worst = min(worst, value)
    return float(worst)


def cartesian_stiffness(model: ModelInterface, q, i, s_local) -> np.ndarray:
    """Contact-frame congruence of the configuration-space stiffness.

    Maps the static force field Jacobian through the contact Jacobian,
    J_c H J_c^T (3x3 for the planar wrench). Rank is bounded by the
    number of configuration variables.
    """
    q = as_configuration(q, model.n)
    Jc = model.contact_jacobian(i, s_local, q)
    H = configuration_stiffness(model, q)
    return Jc @ H @ Jc.T
