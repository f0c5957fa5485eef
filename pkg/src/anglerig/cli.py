"""Command-line interface.

Subcommands: check (rigidity report), deps (dependency findings),
construct (run a plan), simulate (closed-loop run: CSV + event sidecar +
figures), frames (local-frame invariance experiment).  Files use degrees;
exit codes are a stable contract:

  check:     0 infinitesimally rigid, 2 flexible, 1 error
  deps:      0 no findings, 2 findings, 1 error
  construct: 0 success, 1 error (step index reported)
  simulate:  0 converged without events, 2 finished unconverged,
             3 event halt, 4 numerical blowup, 1 error
  frames:    0 success, 1 error
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .angularity import angle_function, validate
from .construction import build
from .errors import (
    AngleRigError,
    EventHalt,
    NumericalBlowup,
    SubsetSearchBudgetExceeded,
    ValidationError,
)
from .rigidity import classify, detect_dependent_structures
from .simulate import local_frame_experiment, simulate


def _out_path(args, default_suffix: str) -> Path:
    if args.output:
        return Path(args.output)
    stem = Path(args.input)
    return stem.with_name(stem.stem + default_suffix)


def _load_valid_angularity(args):
    a = io.load_angularity(args.input)
    findings = validate(a)
    if findings:
        lines = "; ".join(f"{f.kind}{f.members}: {f.message}" for f in findings)
        raise ValidationError(f"invalid angularity: {lines}")
    return a


def _cmd_check(args) -> int:
    a = _load_valid_angularity(args)
    report = classify(a, rank_abs_tol=args.tol)
    out = _out_path(args, ".report.json")
    io.write_json(io.report_to_dict(report), out)
    verdict = "infinitesimally rigid" if report.infinitesimally_rigid else "flexible"
    print(
        f"rank {report.rank}/{report.max_rank} ({verdict}); "
        f"minimally rigid: {report.minimally_rigid}; report: {out}"
    )
    if args.plot:
        from .plots import render_angularity_figure

        fig = out.with_suffix("").with_suffix(".png")
        render_angularity_figure(a, fig)
        print(f"figure: {fig}")
    return 0 if report.infinitesimally_rigid else 2


def _cmd_deps(args) -> int:
    a = _load_valid_angularity(args)
    try:
        findings = detect_dependent_structures(
            a.angle_set, a.vertex_count, realized=angle_function(a)
        )
        complete = True
    except SubsetSearchBudgetExceeded as exc:
        findings = exc.partial
        complete = False
        print(f"warning: {exc}", file=sys.stderr)
    out = _out_path(args, ".deps.json")
    io.write_json(
        {"findings": [io.finding_to_dict(f) for f in findings], "complete": complete},
        out,
    )
    for f in findings:
        print(f"{f.kind}: {list(f.members)}" + (f" {f.detail}" if f.detail else ""))
    print(f"{len(findings)} finding(s); report: {out}")
    return 2 if findings else 0


def _cmd_construct(args) -> int:
    plan = io.load_plan(args.input)
    result = build(plan)
    out = _out_path(args, ".built.json")
    io.write_json(io.build_result_to_dict(result), out)
    rep = result.report
    print(
        f"built N={result.angularity.vertex_count}, M={result.angularity.constraint_count}; "
        f"rank {rep.rank}/{rep.max_rank}; globally-rigid certificate: "
        f"{result.globally_rigid_certificate}; output: {out}"
    )
    for idx, alts in enumerate(result.step_alternatives):
        if len(alts) > 1:
            pts = ", ".join(f"({q[0]:.6g}, {q[1]:.6g})" for q in alts)
            print(f"step {idx}: {len(alts)} candidate placements: {pts}")
    if args.plot:
        from .plots import render_angularity_figure

        fig = out.with_suffix("").with_suffix(".png")
        render_angularity_figure(result.angularity, fig, result.step_alternatives)
        print(f"figure: {fig}")
    return 0


def _sim_setup(args):
    spec, initial, file_cfg = io.load_simulation_input(args.input)
    cfg = io.make_sim_config(
        file_cfg, step_size=args.step, duration=args.duration, seed=args.seed
    )
    return spec, initial, cfg


def _write_sim_outputs(args, traj, out_csv: Path) -> None:
    io.write_trajectory_csv(traj, out_csv)
    sidecar = out_csv.with_suffix(".events.json")
    io.write_json(io.trajectory_sidecar(traj), sidecar)
    print(f"trajectory: {out_csv}; events: {sidecar}")
    if args.plot:
        from .plots import render_trajectory_figures

        for fig in render_trajectory_figures(traj, out_csv.with_suffix("")):
            print(f"figure: {fig}")


def _cmd_simulate(args) -> int:
    spec, initial, cfg = _sim_setup(args)
    out_csv = _out_path(args, ".traj.csv")
    try:
        traj = simulate(spec, initial, cfg)
    except EventHalt as exc:
        _write_sim_outputs(args, exc.trajectory, out_csv)
        print(f"halted: {exc}")
        return 3
    except NumericalBlowup as exc:
        if exc.trajectory is not None:
            _write_sim_outputs(args, exc.trajectory, out_csv)
        print(f"blowup: {exc}")
        return 4
    _write_sim_outputs(args, traj, out_csv)
    final = float(np.abs(traj.angle_errors[-1]).max())
    print(
        f"t={traj.times[-1]:g}s, max |error| {final:.3e}, "
        f"converged: {traj.converged}"
    )
    return 0 if traj.converged else 2


def _cmd_frames(args) -> int:
    spec, initial, cfg = _sim_setup(args)
    traj_g, traj_l, deviation = local_frame_experiment(
        spec, initial, cfg, frame_seed=cfg.seed
    )
    out = _out_path(args, ".frames.json")
    io.write_json(
        {
            "max_deviation": deviation,
            "converged": [traj_g.converged, traj_l.converged],
        },
        out,
    )
    print(f"max deviation between global and local-frame runs: {deviation:.3e}")
    print(f"report: {out}")
    if args.plot:
        from .plots import render_trajectory_figures

        for fig in render_trajectory_figures(traj_g, out.with_suffix("")):
            print(f"figure: {fig}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anglerig",
        description="Planar angle rigidity analysis and angle-only formation simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, plot_default: bool):
        p.add_argument("--input", required=True, help="input JSON file")
        p.add_argument("--output", help="output path (default: next to the input)")
        p.add_argument("--format", choices=("json", "csv"), default=None,
                       help="output format hint (reports are JSON, trajectories CSV)")
        p.add_argument("--tol", type=float, default=None,
                       help="absolute SVD tolerance for rank decisions")
        if plot_default:
            p.add_argument("--plot", dest="plot", action="store_true", default=True)
            p.add_argument("--no-plot", dest="plot", action="store_false",
                           help="skip figure rendering")
        else:
            p.add_argument("--plot", dest="plot", action="store_true", default=False,
                           help="also render a figure")

    p_check = sub.add_parser("check", help="classify an angularity's rigidity")
    common(p_check, plot_default=False)
    p_check.set_defaults(func=_cmd_check)

    p_deps = sub.add_parser("deps", help="detect dependent constraint structures")
    common(p_deps, plot_default=False)
    p_deps.set_defaults(func=_cmd_deps)

    p_con = sub.add_parser("construct", help="execute a vertex-addition plan")
    common(p_con, plot_default=False)
    p_con.set_defaults(func=_cmd_construct)

    for name, func, help_text in (
        ("simulate", _cmd_simulate, "integrate the closed-loop formation"),
        ("frames", _cmd_frames, "compare global vs local-frame runs"),
    ):
        p = sub.add_parser(name, help=help_text)
        common(p, plot_default=True)
        p.add_argument("--step", type=float, default=None, help="integrator step size [s]")
        p.add_argument("--duration", type=float, default=None, help="simulated horizon [s]")
        p.add_argument("--seed", type=int, default=None, help="seed for randomized frames")
        p.set_defaults(func=func)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AngleRigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
