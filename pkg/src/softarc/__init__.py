"""Planar continuum soft-robot dynamics, analysis, and control.

Closed-form constant-curvature segment models, quadrature-backed
multi-segment chains, equilibrium and stability analysis, a catalog of
model-based control laws, and a fixed-step simulator with a batch CLI.
"""

from .analysis import (
    EquilibriumReport,
    attainability,
    cartesian_stiffness,
    classify_stability,
    configuration_stiffness,
    lyapunov_value,
    min_potential_margin,
    scan_equilibria_1d,
    solve_equilibrium,
)
from .cc import (
    CCSegmentModel,
    LumpedRigidModel,
    cc_terms,
    elastic_potential_cc,
    fk_cc,
    gravity_cc,
    gravity_potential_cc,
    impedance_cc,
    jacobian_cc,
    lumped_rigid_terms,
    mass_cc,
    coriolis_cc,
)
from .chain import (
    PCCChainModel,
    actuation_matrix,
    chain_terms,
    fk_chain,
    gravity_chain,
    gravity_potential_chain,
    jacobian_chain,
    mass_matrix_chain,
)
from .control import (
    ConstantController,
    ConstantReference,
    FeedforwardController,
    ILCExperiment,
    KinematicCommand,
    PDSetpointController,
    SinusoidReference,
    TraceController,
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
    task_space_terms,
    tracking_ff,
    ua_feedforward,
    ua_pd,
)
from .errors import (
    EvaluationError,
    NonConvergenceError,
    NotAnEquilibriumError,
    RankDeficiencyError,
    ScenarioError,
    SingularInertiaError,
    SingularStiffnessError,
    SoftarcError,
    UnattainableEquilibriumError,
)
from .model import (
    ChainParams,
    ConstantActuation,
    DynamicsTerms,
    InternalPairOppositeTorques,
    ModelInterface,
    PlanarPose,
    RobotState,
    SegmentParams,
    TipTangentialForce,
    TipTorquePerSegment,
    Wrench2D,
)
from .scenario import (
    Scenario,
    build_contacts,
    build_controller,
    build_initial_state,
    build_model,
    load_scenario,
    parse_scenario,
    serialize_scenario,
)
from .sim import ExternalContact, Trajectory, accel, rk4_step, simulate

__version__ = "1.0.0"

__all__ = [
    "CCSegmentModel",
    "ChainParams",
    "ConstantActuation",
    "ConstantController",
    "ConstantReference",
    "DynamicsTerms",
    "EquilibriumReport",
    "EvaluationError",
    "ExternalContact",
    "FeedforwardController",
    "ILCExperiment",
    "InternalPairOppositeTorques",
    "KinematicCommand",
    "LumpedRigidModel",
    "ModelInterface",
    "NonConvergenceError",
    "NotAnEquilibriumError",
    "PCCChainModel",
    "PDSetpointController",
    "PlanarPose",
    "RankDeficiencyError",
    "RobotState",
    "Scenario",
    "ScenarioError",
    "SegmentParams",
    "SingularInertiaError",
    "SingularStiffnessError",
    "SinusoidReference",
    "SoftarcError",
    "TipTangentialForce",
    "TipTorquePerSegment",
    "TraceController",
    "TrackingController",
    "Trajectory",
    "UAFeedforwardController",
    "UAPDController",
    "UnattainableEquilibriumError",
    "Wrench2D",
    "accel",
    "actuation_matrix",
    "attainability",
    "build_contacts",
    "build_controller",
    "build_initial_state",
    "build_model",
    "cartesian_stiffness",
    "cc_terms",
    "chain_terms",
    "classify_stability",
    "configuration_stiffness",
    "coriolis_cc",
    "elastic_potential_cc",
    "end_to_end_jacobian",
    "ff_regulation",
    "fk_cc",
    "fk_chain",
    "gravity_cc",
    "gravity_chain",
    "gravity_potential_cc",
    "gravity_potential_chain",
    "ilc_update",
    "impedance_cc",
    "integrate_kinematic",
    "jacobian_cc",
    "jacobian_chain",
    "kinematic_task",
    "load_scenario",
    "lumped_rigid_terms",
    "lyapunov_value",
    "mass_cc",
    "mass_matrix_chain",
    "min_potential_margin",
    "operational_space",
    "parse_scenario",
    "pd_plus",
    "pd_setpoint",
    "rk4_step",
    "scan_equilibria_1d",
    "serialize_scenario",
    "simulate",
    "solve_equilibrium",
    "task_space_terms",
    "tracking_ff",
    "ua_feedforward",
    "ua_pd",
]
