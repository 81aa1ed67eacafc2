"""Scenario files: schema, validation, and builders.

A scenario is a single YAML document with explicit units in every field
name (`L_m`, `k_bar_Nm`, `phi_rad`), because unit mix-ups are the
dominant failure mode in dynamics configs. Parsing validates the whole
document before anything runs; errors carry the dotted field path and
the source line.
"""

from dataclasses import asdict, dataclass, field
from typing import Optional, Tuple

import numpy as np
import yaml

from .cc import CCSegmentModel, LumpedRigidModel
from .chain import PCCChainModel
from .errors import ScenarioError
from .model import (
    ChainParams,
    ConstantActuation,
    InternalPairOppositeTorques,
    RobotState,
    SegmentParams,
    TipTangentialForce,
    TipTorquePerSegment,
    Wrench2D,
)
from .sim import ExternalContact

MODEL_KINDS = ("cc", "pcc", "rigid", "rigid_pea")
ACTUATION_PATTERNS = (
    "tip_torque_per_segment",
    "internal_pair_opposite_torques",
    "tip_tangential_force",
    "constant",
)
CONTROLLER_TYPES = (
    "constant",
    "feedforward",
    "pd_setpoint",
    "tracking_ff",
    "pd_plus",
    "ua_feedforward",
    "ua_pd",
)
REFERENCE_TYPES = ("constant", "sinusoid")


@dataclass(frozen=True)
class SegmentSpec:
    m_kg: float
    L_m: float
    k_bar_Nm: float = 0.0
    d_bar_Nms: float = 0.0


@dataclass(frozen=True)
class ActuationSpec:
    pattern: str = "tip_torque_per_segment"
    segment: Optional[int] = None
    discretization: Optional[str] = None
    matrix: Optional[Tuple[Tuple[float, ...], ...]] = None


@dataclass(frozen=True)
class ReferenceSpec:
    type: str
    q_bar_rad: Optional[Tuple[float, ...]] = None
    amplitude_rad: Optional[Tuple[float, ...]] = None
    omega_radps: Optional[float] = None
    offset_rad: Optional[Tuple[float, ...]] = None
    phase_rad: float = 0.0


@dataclass(frozen=True)
class ControllerSpec:
    type: str
    tau: Optional[Tuple[float, ...]] = None
    q_bar_rad: Optional[Tuple[float, ...]] = None
    alpha: object = None  # scalar or matrix rows
    beta: object = None
    reference: Optional[ReferenceSpec] = None


@dataclass(frozen=True)
class ContactSpec:
    segment: int
    s_local: float
    fx_N: float = 0.0
    fy_N: float = 0.0
    tau_z_Nm: float = 0.0


@dataclass(frozen=True)
class AnalysisSpec:
    tau_bar: Optional[Tuple[float, ...]] = None
    q_range_rad: Optional[Tuple[float, float]] = None
    grid_points: int = 800
    q0_rad: Optional[Tuple[float, ...]] = None
    alpha: object = None


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    segments: Tuple[SegmentSpec, ...]
    phi_rad: float
    duration_s: float
    initial_q_rad: Tuple[float, ...]
    initial_qdot_radps: Tuple[float, ...]
    g_mps2: float = 9.81
    actuation: ActuationSpec = field(default_factory=ActuationSpec)
    dt_s: float = 1e-4
    control_period_s: Optional[float] = None
    controller: Optional[ControllerSpec] = None
    contacts: Tuple[ContactSpec, ...] = ()
    analysis: Optional[AnalysisSpec] = None
    output_csv: Optional[str] = None
    sweep_field: Optional[str] = None
    sweep_values: Optional[Tuple[float, ...]] = None

    @property
    def n(self):
        return len(self.segments)


# ------------------------------------------------------------ line mapping


def _collect_lines(node, prefix, out):
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            path = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
            out[path] = key_node.start_mark.line + 1
            _collect_lines(value_node, path, out)
    elif isinstance(node, yaml.SequenceNode):
        for idx, item in enumerate(node.value):
            path = f"{prefix}.{idx}"
            out[path] = item.start_mark.line + 1
            _collect_lines(item, path, out)


class _Ctx:
    """Carries the field-path -> source-line map into every validator."""

    def __init__(self, lines):
        self.lines = lines

    def fail(self, path, message):
        raise ScenarioError(message, field=path, line=self.lines.get(path))


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _get_mapping(ctx, data, path, required=False):
    parent, _, key = path.rpartition(".")
    value = data.get(key) if isinstance(data, dict) else None
    if value is None:
        if required:
            ctx.fail(parent or path, f"missing required section '{key}'")
        return None
    if not isinstance(value, dict):
        ctx.fail(path, "expected a mapping")
    return value


def _number(ctx, mapping, path, default=None, required=False, minimum=None,
            positive=False):
    key = path.rpartition(".")[2]
    if key not in mapping or mapping[key] is None:
        if required:
            ctx.fail(path, f"missing required field '{key}'")
        return default
    v = mapping[key]
    if not _is_number(v):
        ctx.fail(path, f"expected a number, got {type(v).__name__}")
    v = float(v)
    if positive and not v > 0.0:
        ctx.fail(path, "must be > 0")
    if minimum is not None and v < minimum:
        ctx.fail(path, f"must be >= {minimum}")
    return v


def _integer(ctx, mapping, path, default=None, required=False, minimum=None):
    key = path.rpartition(".")[2]
    if key not in mapping or mapping[key] is None:
        if required:
            ctx.fail(path, f"missing required field '{key}'")
        return default
    v = mapping[key]
    if not isinstance(v, int) or isinstance(v, bool):
        ctx.fail(path, f"expected an integer, got {type(v).__name__}")
    if minimum is not None and v < minimum:
        ctx.fail(path, f"must be >= {minimum}")
    return int(v)


def _string(ctx, mapping, path, default=None, required=False, choices=None):
    key = path.rpartition(".")[2]
    if key not in mapping or mapping[key] is None:
        if required:
            ctx.fail(path, f"missing required field '{key}'")
        return default
    v = mapping[key]
    if not isinstance(v, str):
        ctx.fail(path, f"expected a string, got {type(v).__name__}")
    if choices is not None and v not in choices:
        ctx.fail(path, f"must be one of {', '.join(choices)}")
    return v


def _number_list(ctx, mapping, path, length=None, default=None, required=False):
    key = path.rpartition(".")[2]
    if key not in mapping or mapping[key] is None:
        if required:
            ctx.fail(path, f"missing required field '{key}'")
        return default
    v = mapping[key]
    if not isinstance(v, list) or not all(_is_number(x) for x in v):
        ctx.fail(path, "expected a list of numbers")
    if length is not None and len(v) != length:
        ctx.fail(path, f"expected {length} entries, got {len(v)}")
    return tuple(float(x) for x in v)


def _gain_value(ctx, mapping, path):
    key = path.rpartition(".")[2]
    if key not in mapping or mapping[key] is None:
        return None
    v = mapping[key]
    if _is_number(v):
        return float(v)
    if isinstance(v, list) and v and all(
        isinstance(row, list) and all(_is_number(x) for x in row) for row in v
    ):
        width = len(v[0])
        if any(len(row) != width for row in v):
            ctx.fail(path, "gain matrix rows have inconsistent lengths")
        return tuple(tuple(float(x) for x in row) for row in v)
    ctx.fail(path, "expected a scalar gain or a matrix (list of rows)")


# ---------------------------------------------------------------- parsing


def parse_scenario(text) -> Scenario:
    """Validate a YAML scenario document into a Scenario value."""
    try:
        data = yaml.safe_load(text)
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ScenarioError(
            f"not valid YAML: {getattr(exc, 'problem', exc)}",
            line=None if mark is None else mark.line + 1,
        ) from None
    lines = {}
    if root is not None:
        _collect_lines(root, "", lines)
    ctx = _Ctx(lines)
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping at the top level")

    known = {"name", "model", "simulation", "controller", "contacts",
             "analysis", "output", "sweep"}
    for key in data:
        if key not in known:
            ctx.fail(str(key), f"unknown section '{key}'")

    name = _string(ctx, data, "name", default="scenario")

    model = _get_mapping(ctx, data, "model", required=True)
    kind = _string(ctx, model, "model.kind", required=True, choices=MODEL_KINDS)
    segs_raw = model.get("segments")
    if not isinstance(segs_raw, list) or not segs_raw:
        ctx.fail("model.segments", "expected a non-empty list of segments")
    if kind != "pcc" and len(segs_raw) != 1:
        ctx.fail("model.segments", f"kind '{kind}' takes exactly one segment")
    segments = []
    for i, seg in enumerate(segs_raw):
        base = f"model.segments.{i}"
        if not isinstance(seg, dict):
            ctx.fail(base, "expected a mapping")
        segments.append(SegmentSpec(
            m_kg=_number(ctx, seg, f"{base}.m_kg", required=True, positive=True),
            L_m=_number(ctx, seg, f"{base}.L_m", required=True, positive=True),
            k_bar_Nm=_number(ctx, seg, f"{base}.k_bar_Nm", default=0.0, minimum=0.0),
            d_bar_Nms=_number(ctx, seg, f"{base}.d_bar_Nms", default=0.0, minimum=0.0),
        ))
        for key in seg:
            if key not in {"m_kg", "L_m", "k_bar_Nm", "d_bar_Nms"}:
                ctx.fail(f"{base}.{key}", f"unknown segment field '{key}'")
    phi = _number(ctx, model, "model.phi_rad", default=0.0)
    g = _number(ctx, model, "model.g_mps2", default=9.81, minimum=0.0)

    act_raw = model.get("actuation")
    if act_raw is None:
        actuation = ActuationSpec()
    else:
        if not isinstance(act_raw, dict):
            ctx.fail("model.actuation", "expected a mapping")
        pattern = _string(ctx, act_raw, "model.actuation.pattern",
                          required=True, choices=ACTUATION_PATTERNS)
        segment = _integer(ctx, act_raw, "model.actuation.segment", minimum=0)
        disc = _string(ctx, act_raw, "model.actuation.discretization",
                       choices=("coarse", "fine"))
        matrix = None
        if pattern == "constant":
            rows = act_raw.get("matrix")
            if (not isinstance(rows, list) or not rows
                    or not all(isinstance(r, list) for r in rows)):
                ctx.fail("model.actuation.matrix",
                         "constant pattern needs a matrix (list of rows)")
            width = len(rows[0])
            for r_i, row in enumerate(rows):
                if len(row) != width or not all(_is_number(x) for x in row):
                    ctx.fail(f"model.actuation.matrix.{r_i}",
                             "rows must be equal-length lists of numbers")
            if len(rows) != len(segments):
                ctx.fail("model.actuation.matrix",
                         f"needs {len(segments)} rows, one per segment")
            matrix = tuple(tuple(float(x) for x in row) for row in rows)
        if pattern in ("internal_pair_opposite_torques", "tip_tangential_force"):
            if segment is None:
                ctx.fail("model.actuation.segment",
                         f"pattern '{pattern}' needs a segment index")
            if segment >= len(segments):
                ctx.fail("model.actuation.segment", "segment index out of range")
        if pattern == "internal_pair_opposite_torques" and disc == "fine":
            if segment + 1 >= len(segments):
                ctx.fail("model.actuation.segment",
                         "fine discretization needs a following segment")
        actuation = ActuationSpec(pattern=pattern, segment=segment,
                                  discretization=disc, matrix=matrix)
    if kind != "pcc" and actuation.pattern != "tip_torque_per_segment":
        ctx.fail("model.actuation.pattern",
                 f"kind '{kind}' supports only tip_torque_per_segment")

    n = len(segments)
    sim = _get_mapping(ctx, data, "simulation", required=True)
    duration = _number(ctx, sim, "simulation.duration_s", required=True,
                       positive=True)
    dt = _number(ctx, sim, "simulation.dt_s", default=1e-4, positive=True)
    q0 = _number_list(ctx, sim, "simulation.initial_q_rad", length=n,
                      required=True)
    qd0 = _number_list(ctx, sim, "simulation.initial_qdot_radps", length=n,
                       default=tuple(0.0 for _ in range(n)))
    period = _number(ctx, sim, "simulation.control_period_s", positive=True)
    if period is not None and period < dt:
        ctx.fail("simulation.control_period_s",
                 "control period must be >= dt_s")

    controller = None
    ctl_raw = data.get("controller")
    if ctl_raw is not None:
        if not isinstance(ctl_raw, dict):
            ctx.fail("controller", "expected a mapping")
        ctype = _string(ctx, ctl_raw, "controller.type", required=True,
                        choices=CONTROLLER_TYPES)
        ref_spec = None
        ref_raw = ctl_raw.get("reference")
        if ref_raw is not None:
            if not isinstance(ref_raw, dict):
                ctx.fail("controller.reference", "expected a mapping")
            rtype = _string(ctx, ref_raw, "controller.reference.type",
                            required=True, choices=REFERENCE_TYPES)
            if rtype == "constant":
                ref_spec = ReferenceSpec(
                    type=rtype,
                    q_bar_rad=_number_list(ctx, ref_raw,
                                           "controller.reference.q_bar_rad",
                                           length=n, required=True),
                )
            else:
                ref_spec = ReferenceSpec(
                    type=rtype,
                    amplitude_rad=_number_list(
                        ctx, ref_raw, "controller.reference.amplitude_rad",
                        length=n, required=True),
                    omega_radps=_number(ctx, ref_raw,
                                        "controller.reference.omega_radps",
                                        required=True),
                    offset_rad=_number_list(ctx, ref_raw,
                                            "controller.reference.offset_rad",
                                            length=n),
                    phase_rad=_number(ctx, ref_raw,
                                      "controller.reference.phase_rad",
                                      default=0.0),
                )
        tau = _number_list(ctx, ctl_raw, "controller.tau")
        q_bar = _number_list(ctx, ctl_raw, "controller.q_bar_rad", length=n)
        alpha = _gain_value(ctx, ctl_raw, "controller.alpha")
        beta = _gain_value(ctx, ctl_raw, "controller.beta")
        if ctype == "constant" and tau is None:
            ctx.fail("controller.tau", "constant controller needs tau")
        if ctype in ("feedforward", "pd_setpoint", "ua_feedforward", "ua_pd") \
                and q_bar is None:
            ctx.fail("controller.q_bar_rad", f"'{ctype}' needs q_bar_rad")
        if ctype in ("pd_setpoint", "ua_pd", "tracking_ff", "pd_plus"):
            if alpha is None or beta is None:
                ctx.fail("controller.alpha", f"'{ctype}' needs alpha and beta")
        if ctype in ("tracking_ff", "pd_plus") and ref_spec is None:
            ctx.fail("controller.reference", f"'{ctype}' needs a reference")
        controller = ControllerSpec(type=ctype, tau=tau, q_bar_rad=q_bar,
                                    alpha=alpha, beta=beta, reference=ref_spec)

    contacts = []
    con_raw = data.get("contacts")
    if con_raw is not None:
        if not isinstance(con_raw, list):
            ctx.fail("contacts", "expected a list")
        for i, c in enumerate(con_raw):
            base = f"contacts.{i}"
            if not isinstance(c, dict):
                ctx.fail(base, "expected a mapping")
            seg_idx = _integer(ctx, c, f"{base}.segment", required=True,
                               minimum=0)
            if seg_idx >= n:
                ctx.fail(f"{base}.segment", "segment index out of range")
            s_local = _number(ctx, c, f"{base}.s_local", required=True,
                              minimum=0.0)
            if s_local > 1.0:
                ctx.fail(f"{base}.s_local", "must lie in [0, 1]")
            contacts.append(ContactSpec(
                segment=seg_idx,
                s_local=s_local,
                fx_N=_number(ctx, c, f"{base}.fx_N", default=0.0),
                fy_N=_number(ctx, c, f"{base}.fy_N", default=0.0),
                tau_z_Nm=_number(ctx, c, f"{base}.tau_z_Nm", default=0.0),
            ))

    analysis = None
    ana_raw = data.get("analysis")
    if ana_raw is not None:
        if not isinstance(ana_raw, dict):
            ctx.fail("analysis", "expected a mapping")
        q_range = _number_list(ctx, ana_raw, "analysis.q_range_rad", length=2)
        if q_range is not None and not q_range[1] > q_range[0]:
            ctx.fail("analysis.q_range_rad", "range must be increasing")
        analysis = AnalysisSpec(
            tau_bar=_number_list(ctx, ana_raw, "analysis.tau_bar"),
            q_range_rad=q_range,
            grid_points=_integer(ctx, ana_raw, "analysis.grid_points",
                                 default=800, minimum=3),
            q0_rad=_number_list(ctx, ana_raw, "analysis.q0_rad", length=n),
            alpha=_gain_value(ctx, ana_raw, "analysis.alpha"),
        )

    output_csv = None
    out_raw = data.get("output")
    if out_raw is not None:
        if not isinstance(out_raw, dict):
            ctx.fail("output", "expected a mapping")
        output_csv = _string(ctx, out_raw, "output.csv")

    sweep_field = None
    sweep_values = None
    sweep_raw = data.get("sweep")
    if sweep_raw is not None:
        if not isinstance(sweep_raw, dict):
            ctx.fail("sweep", "expected a mapping")
        sweep_field = _string(ctx, sweep_raw, "sweep.field", required=True)
        sweep_values = _number_list(ctx, sweep_raw, "sweep.values",
                                    required=True)
        if len(sweep_values) < 1:
            ctx.fail("sweep.values", "needs at least one value")

    return Scenario(
        name=name,
        kind=kind,
        segments=tuple(segments),
        phi_rad=phi,
        g_mps2=g,
        actuation=actuation,
        duration_s=duration,
        dt_s=dt,
        initial_q_rad=q0,
        initial_qdot_radps=qd0,
        control_period_s=period,
        controller=controller,
        contacts=tuple(contacts),
        analysis=analysis,
        output_csv=output_csv,
        sweep_field=sweep_field,
        sweep_values=sweep_values,
    )


def load_scenario(path) -> Scenario:
    try:
        with open(path, "r") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc}") from None
    return parse_scenario(text)


# -------------------------------------------------------------- serializing


def _prune(value):
    """Drop None entries and empty containers so round-trips are stable."""
    if isinstance(value, dict):
        out = {k: _prune(v) for k, v in value.items()}
        return {k: v for k, v in out.items() if v is not None and v != {} and v != []}
    if isinstance(value, (list, tuple)):
        return [_prune(v) for v in value]
    return value


def scenario_to_dict(scn: Scenario) -> dict:
    doc = {
        "name": scn.name,
        "model": {
            "kind": scn.kind,
            "segments": [asdict(s) for s in scn.segments],
            "phi_rad": scn.phi_rad,
            "g_mps2": scn.g_mps2,
            "actuation": asdict(scn.actuation),
        },
        "simulation": {
            "duration_s": scn.duration_s,
            "dt_s": scn.dt_s,
            "initial_q_rad": list(scn.initial_q_rad),
            "initial_qdot_radps": list(scn.initial_qdot_radps),
            "control_period_s": scn.control_period_s,
        },
        "controller": None if scn.controller is None else asdict(scn.controller),
        "contacts": [asdict(c) for c in scn.contacts],
        "analysis": None if scn.analysis is None else asdict(scn.analysis),
        "output": None if scn.output_csv is None else {"csv": scn.output_csv},
        "sweep": None if scn.sweep_field is None else {
            "field": scn.sweep_field,
            "values": list(scn.sweep_values),
        },
    }
    return _prune(doc)


def serialize_scenario(scn: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(scn), sort_keys=True,
                          default_flow_style=False)


def with_field(scn: Scenario, dotted, value) -> Scenario:
    """Scenario copy with one dotted field replaced (sweep plumbing)."""
    doc = scenario_to_dict(scn)
    doc.pop("sweep", None)
    parts = dotted.split(".")
    node = doc
    try:
        for part in parts[:-1]:
            node = node[int(part)] if isinstance(node, list) else node[part]
        last = parts[-1]
        if isinstance(node, list):
            node[int(last)] = value
        else:
            if last not in node:
                raise KeyError(last)
            node[last] = value
    except (KeyError, IndexError, ValueError, TypeError):
        raise ScenarioError(f"no such field '{dotted}'", field=dotted) from None
    return parse_scenario(yaml.safe_dump(doc))


# ---------------------------------------------------------------- builders


def _segment_params(spec: SegmentSpec, phi, g) -> SegmentParams:
    return SegmentParams(m=spec.m_kg, L=spec.L_m, k_bar=spec.k_bar_Nm,
                         d_bar=spec.d_bar_Nms, phi=phi, g=g)


def build_pattern(spec: ActuationSpec):
    if spec.pattern == "tip_torque_per_segment":
        return TipTorquePerSegment()
    if spec.pattern == "internal_pair_opposite_torques":
        return InternalPairOppositeTorques(
            segment=spec.segment,
            discretization=spec.discretization or "coarse",
        )
    if spec.pattern == "tip_tangential_force":
        return TipTangentialForce(segment=spec.segment)
    return ConstantActuation(matrix=np.asarray(spec.matrix, dtype=float))


def build_model(scn: Scenario):
    params = [_segment_params(s, scn.phi_rad, scn.g_mps2) for s in scn.segments]
    if scn.kind == "cc":
        return CCSegmentModel(params[0])
    if scn.kind == "rigid":
        return LumpedRigidModel(params[0], with_spring=False)
    if scn.kind == "rigid_pea":
        return LumpedRigidModel(params[0], with_spring=True)
    chain = ChainParams(segments=tuple(params),
                        actuation=build_pattern(scn.actuation))
    return PCCChainModel(chain)


def build_initial_state(scn: Scenario) -> RobotState:
    return RobotState(np.array(scn.initial_q_rad),
                      np.array(scn.initial_qdot_radps))


def build_contacts(scn: Scenario):
    return tuple(
        ExternalContact(
            segment=c.segment,
            s_local=c.s_local,
            wrench=Wrench2D(fx=c.fx_N, fy=c.fy_N, tau_z=c.tau_z_Nm),
        )
        for c in scn.contacts
    )


def build_reference(spec: ReferenceSpec):
    from .control import ConstantReference, SinusoidReference

    if spec.type == "constant":
        return ConstantReference(np.array(spec.q_bar_rad))
    return SinusoidReference(
        amplitude=np.array(spec.amplitude_rad),
        omega=spec.omega_radps,
        offset=None if spec.offset_rad is None else np.array(spec.offset_rad),
        phase=spec.phase_rad,
    )


def _gain_matrix(value):
    if isinstance(value, tuple):
        return np.asarray(value, dtype=float)
    return value


def build_controller(scn: Scenario, model):
    from . import control

    spec = scn.controller
    if spec is None:
        return None
    if spec.type == "constant":
        return control.ConstantController(np.array(spec.tau))
    if spec.type == "feedforward":
        return control.FeedforwardController(model, np.array(spec.q_bar_rad))
    if spec.type == "pd_setpoint":
        return control.PDSetpointController(
            model, np.array(spec.q_bar_rad),
            _gain_matrix(spec.alpha), _gain_matrix(spec.beta))
    if spec.type == "ua_feedforward":
        return control.UAFeedforwardController(model, np.array(spec.q_bar_rad))
    if spec.type == "ua_pd":
        return control.UAPDController(
            model, np.array(spec.q_bar_rad),
            _gain_matrix(spec.alpha), _gain_matrix(spec.beta))
    ref = build_reference(spec.reference)
    mode = "reference" if spec.type == "tracking_ff" else "measured"
    return control.TrackingController(
        model, ref, _gain_matrix(spec.alpha), _gain_matrix(spec.beta),
        compensate_on=mode)
