"""Batch command line front-end.

Exit codes: 0 success, 1 usage error, 2 scenario schema violation
(reported with line/field diagnostics, nothing written), 3 numerical
failure. Output files are deterministic for a given scenario and flag
set; sweeps fan out across processes, one file per grid cell.
"""

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .analysis import classify_stability, scan_equilibria_1d, solve_equilibrium
from .cc import CCSegmentModel, LumpedRigidModel
from .control import ConstantController
from .errors import ScenarioError, SoftarcError
from .model import RobotState, SegmentParams
from .scenario import (
    Scenario,
    build_contacts,
    build_controller,
    build_initial_state,
    build_model,
    load_scenario,
    parse_scenario,
    serialize_scenario,
    with_field,
)
from .sim import simulate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SCHEMA = 2
EXIT_NUMERIC = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; route everything
    # through _UsageError so usage problems map to exit code 1 instead.
    def error(self, message):
        raise _UsageError(message)


def _fmt(x):
    return "%.12g" % float(x)


def _prepare(scn: Scenario, args):
    if getattr(args, "dt", None) is not None:
        if args.dt <= 0:
            raise ScenarioError("dt override must be > 0", field="simulation.dt_s")
        scn = replace(scn, dt_s=args.dt)
    if getattr(args, "duration", None) is not None:
        if args.duration <= 0:
            raise ScenarioError("duration override must be > 0",
                                field="simulation.duration_s")
        scn = replace(scn, duration_s=args.duration)
    return scn


def _run_simulation(scn: Scenario):
    model = build_model(scn)
    controller = build_controller(scn, model)
    contacts = build_contacts(scn)
    initial = build_initial_state(scn)
    traj = simulate(
        model,
        controller,
        initial,
        scn.duration_s,
        dt=scn.dt_s,
        contacts=contacts,
        control_period=scn.control_period_s,
    )
    return model, controller, traj


def _summary_lines(scn, model, controller, traj):
    lines = [
        f"scenario: {scn.name}",
        f"model: {scn.kind} (n={model.n}, m={model.m})",
        f"duration_s: {_fmt(scn.duration_s)}",
        f"dt_s: {_fmt(scn.dt_s)}",
        "final_q: " + " ".join(_fmt(v) for v in traj.q[-1]),
        "final_qdot: " + " ".join(_fmt(v) for v in traj.qdot[-1]),
        "final_input: " + " ".join(_fmt(v) for v in traj.inputs[-1]),
        f"final_total_energy_J: {_fmt(traj.total[-1])}",
    ]
    q_bar = getattr(controller, "q_bar", None)
    if q_bar is not None:
        err = float(np.linalg.norm(traj.q[-1] - q_bar))
        lines.append(f"final_setpoint_error: {_fmt(err)}")
    try:
        report = solve_equilibrium(model, traj.inputs[-1], traj.q[-1])
        lines.append("nearby_equilibrium: " + " ".join(_fmt(v) for v in report.q_bar))
        lines.append(f"nearby_equilibrium_verdict: {report.verdict}")
        lines.append(
            f"distance_to_equilibrium: "
            f"{_fmt(np.linalg.norm(traj.q[-1] - report.q_bar))}"
        )
    except (SoftarcError, np.linalg.LinAlgError):
        lines.append("nearby_equilibrium: none found from the final state")
    return lines


def run_scenario(path, out_dir=".", dt=None, duration=None) -> int:
    """Simulate a scenario file and write its CSV and summary artifacts."""

    class _Args:
        pass

    args = _Args()
    args.dt = dt
    args.duration = duration
    scn = _prepare(load_scenario(path), args)
    model, controller, traj = _run_simulation(scn)
    os.makedirs(out_dir, exist_ok=True)
    csv_name = scn.output_csv or f"{scn.name}.csv"
    csv_path = os.path.join(out_dir, csv_name)
    traj.to_csv(csv_path)
    summary_path = os.path.join(out_dir, f"{scn.name}_summary.txt")
    with open(summary_path, "w") as fh:
        fh.write("\n".join(_summary_lines(scn, model, controller, traj)) + "\n")
    print(f"wrote {csv_path}")
    print(f"wrote {summary_path}")
    return EXIT_OK


def _cmd_simulate(args):
    return run_scenario(args.scenario, out_dir=args.out, dt=args.dt,
                        duration=args.duration)


def _cmd_equilibria(args):
    scn = load_scenario(args.scenario)
    model = build_model(scn)
    if model.n != 1:
        raise ScenarioError("the equilibria scan handles one-segment models",
                            field="model.segments")
    ana = scn.analysis
    tau_bar = np.zeros(model.m)
    q_range = (-2.0 * math.pi, 2.0 * math.pi)
    grid = 800
    if ana is not None:
        if ana.tau_bar is not None:
            tau_bar = np.array(ana.tau_bar)
        if ana.q_range_rad is not None:
            q_range = ana.q_range_rad
        grid = ana.grid_points
    reports = scan_equilibria_1d(model, tau_bar, q_range, grid)
    lines = [
        f"scenario: {scn.name}",
        "tau_bar: " + " ".join(_fmt(v) for v in tau_bar),
        f"q_range: {_fmt(q_range[0])} {_fmt(q_range[1])}",
        f"equilibria_found: {len(reports)}",
    ]
    for k, rep in enumerate(reports):
        lines.append(
            f"equilibrium_{k}: q={_fmt(rep.q_bar[0])} "
            f"residual={rep.residual:.3e} verdict={rep.verdict} "
            f"min_eig={_fmt(rep.min_eigenvalue)}"
        )
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{scn.name}_equilibria.txt")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_stability(args):
    scn = load_scenario(args.scenario)
    model = build_model(scn)
    ana = scn.analysis
    tau_bar = np.zeros(model.m)
    q0 = np.array(scn.initial_q_rad)
    alpha = None
    if ana is not None:
        if ana.tau_bar is not None:
            tau_bar = np.array(ana.tau_bar)
        if ana.q0_rad is not None:
            q0 = np.array(ana.q0_rad)
        if ana.alpha is not None:
            alpha = np.asarray(ana.alpha, dtype=float)
    solved = solve_equilibrium(model, tau_bar, q0)
    report = classify_stability(model, solved.q_bar, alpha=alpha)
    lines = [
        f"scenario: {scn.name}",
        "tau_bar: " + " ".join(_fmt(v) for v in tau_bar),
        "q_bar: " + " ".join(_fmt(v) for v in report.q_bar),
        f"residual: {solved.residual:.3e}",
        f"verdict: {report.verdict}",
        f"min_eigenvalue: {_fmt(report.min_eigenvalue)}",
    ]
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{scn.name}_stability.txt")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    print(f"wrote {path}")
    return EXIT_OK


# -------------------------------------------------------------- reproduce

# One-segment bench values used across the comparison plots:
# m=0.5 kg, L=0.25 m, average stiffness 0.05 N m, equivalent damping
# 0.01 N m s, released from q=pi/3 at rest.
_BENCH = dict(m=0.5, L=0.25, k_bar=0.05, d_bar=0.01)
_PANELS = {
    "a": dict(tau=0.0, phi=0.0),
    "b": dict(tau=-0.3, phi=0.0),
    "c": dict(tau=0.0, phi=-math.pi / 2.0),
}


def _panel_models(phi):
    p = SegmentParams(m=_BENCH["m"], L=_BENCH["L"], k_bar=_BENCH["k_bar"],
                      d_bar=_BENCH["d_bar"], phi=phi)
    bare = SegmentParams(m=_BENCH["m"], L=_BENCH["L"], k_bar=0.0, d_bar=0.0,
                         phi=phi)
    return (
        ("cc", CCSegmentModel(p)),
        ("rigid_pea", LumpedRigidModel(p, with_spring=True)),
        ("rigid", LumpedRigidModel(bare, with_spring=False)),
    )


def _cmd_reproduce(args):
    if args.target != "cc-evolution":
        raise _UsageError(f"unknown reproduce target '{args.target}'")
    panels = [args.panel] if args.panel else ["a", "b", "c"]
    dt = args.dt if args.dt is not None else 1e-3
    duration = args.duration if args.duration is not None else 8.0
    if dt <= 0 or duration <= 0:
        raise _UsageError("dt and duration must be > 0")
    os.makedirs(args.out, exist_ok=True)
    initial = RobotState([math.pi / 3.0], [0.0])
    for panel in panels:
        setup = _PANELS[panel]
        controller = ConstantController([setup["tau"]])
        for label, model in _panel_models(setup["phi"]):
            traj = simulate(model, controller, initial, duration, dt=dt)
            path = os.path.join(args.out, f"cc_evolution_{panel}_{label}.csv")
            traj.to_csv(path)
            print(f"wrote {path}")
    return EXIT_OK


# ------------------------------------------------------------------ sweep


def _sweep_cell(payload):
    """Worker: simulate one serialized cell and write its CSV."""
    text, csv_path = payload
    scn = parse_scenario(text)
    _, _, traj = _run_simulation(scn)
    traj.to_csv(csv_path)
    return [float(v) for v in traj.q[-1]]


def _cmd_sweep(args):
    scn = load_scenario(args.scenario)
    if scn.sweep_field is None:
        raise ScenarioError("scenario has no sweep section", field="sweep")
    # Validate every cell before anything is written.
    cells = []
    for idx, value in enumerate(scn.sweep_values):
        cell = with_field(scn, scn.sweep_field, value)
        cell = replace(cell, name=f"{scn.name}_{idx}")
        cells.append((idx, value, cell))
    os.makedirs(args.out, exist_ok=True)
    payloads = []
    for idx, value, cell in cells:
        csv_path = os.path.join(args.out, f"{cell.name}.csv")
        payloads.append((serialize_scenario(cell), csv_path))
    jobs = args.jobs if args.jobs else min(len(cells), os.cpu_count() or 1)
    if jobs <= 1 or len(cells) == 1:
        finals = [_sweep_cell(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            finals = list(pool.map(_sweep_cell, payloads))
    index_path = os.path.join(args.out, f"{scn.name}_sweep_index.csv")
    n = len(finals[0])
    header = ["cell", "value", "csv"] + [f"final_q{i + 1}" for i in range(n)]
    with open(index_path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for (idx, value, cell), final in zip(cells, finals):
            row = [str(idx), "%.17g" % value, f"{cell.name}.csv"]
            row += ["%.17g" % v for v in final]
            fh.write(",".join(row) + "\n")
    for payload in payloads:
        print(f"wrote {payload[1]}")
    print(f"wrote {index_path}")
    return EXIT_OK


# ------------------------------------------------------------------- main


def _build_parser():
    parser = _Parser(prog="softarc",
                     description="planar soft-robot simulation toolbox")
    sub = parser.add_subparsers(dest="command")

    def add_common(p, scenario_arg=True):
        if scenario_arg:
            p.add_argument("scenario", help="scenario YAML file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--dt", type=float, default=None,
                       help="override the integration step [s]")
        p.add_argument("--duration", type=float, default=None,
                       help="override the simulated duration [s]")

    p_sim = sub.add_parser("simulate", help="integrate a scenario, write CSV")
    add_common(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_eq = sub.add_parser("equilibria",
                          help="scan a one-segment scenario for equilibria")
    p_eq.add_argument("scenario")
    p_eq.add_argument("--out", default=".")
    p_eq.set_defaults(func=_cmd_equilibria)

    p_st = sub.add_parser("stability",
                          help="solve an equilibrium and classify it")
    p_st.add_argument("scenario")
    p_st.add_argument("--out", default=".")
    p_st.set_defaults(func=_cmd_stability)

    p_rep = sub.add_parser("reproduce",
                           help="regenerate the bench comparison data")
    p_rep.add_argument("target", help="data set name (cc-evolution)")
    p_rep.add_argument("panel", nargs="?", choices=["a", "b", "c"],
                       default=None)
    p_rep.add_argument("--out", default=".")
    p_rep.add_argument("--dt", type=float, default=None)
    p_rep.add_argument("--duration", type=float, default=None)
    p_rep.set_defaults(func=_cmd_reproduce)

    p_sw = sub.add_parser("sweep", help="run a scenario's parameter sweep")
    p_sw.add_argument("scenario")
    p_sw.add_argument("--out", default=".")
    p_sw.add_argument("--jobs", type=int, default=None,
                      help="worker processes (default: one per cell)")
    p_sw.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "command", None) is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (SoftarcError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def console_entry():
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
