"""File formats: angularity / plan / formation JSON, trajectory CSV.

All angles are degrees in files and radians in memory.  Vertex ids are
1-based in both.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .angularity import AngleTriplet, Angularity
from .construction import (
    AdditionStep,
    BuildResult,
    ConstructionPlan,
    LinearConstraintSpec,
    QuadraticConstraintSpec,
)
from .control import AddedAgentTargets, FormationSpec
from .errors import ParseError, ValidationError
from .rigidity import DependencyFinding, RigidityReport
from .simulate import SimConfig, Trajectory


def _load_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _req(obj: dict, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"missing field '{key}' in {where}")
    return obj[key]


def _deg(value, where: str) -> float:
    try:
        return math.radians(float(value))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: expected a number in degrees, got {value!r}") from exc


# ---------------------------------------------------------------------------
# Angularity
# ---------------------------------------------------------------------------

def angularity_from_dict(d: dict) -> Angularity:
    n = int(_req(d, "vertices", "angularity"))
    positions = np.asarray(_req(d, "positions", "angularity"), dtype=float)
    if positions.ndim != 2 or positions.shape[1] != 2:
        raise ParseError("'positions' must be a list of [x, y] pairs")
    if positions.shape[0] != n:
        raise ValidationError(
            f"'vertices' says {n} but {positions.shape[0]} positions given"
        )
    trips = []
    for idx, entry in enumerate(_req(d, "angles", "angularity")):
        where = f"angles[{idx}]"
        target = entry.get("target_deg") if isinstance(entry, dict) else None
        trips.append(
            AngleTriplet(
                int(_req(entry, "i", where)),
                int(_req(entry, "j", where)),
                int(_req(entry, "k", where)),
                None if target is None else _deg(target, where),
            )
        )
    return Angularity(positions, tuple(trips))


def angularity_to_dict(a: Angularity) -> dict:
    return {
        "vertices": a.vertex_count,
        "positions": [[float(x), float(y)] for x, y in a.positions],
        "angles": [
            {
                "i": t.i,
                "j": t.j,
                "k": t.k,
                "target_deg": None if t.target is None else math.degrees(t.target),
            }
            for t in a.angle_set
        ],
    }


def load_angularity(path) -> Angularity:
    return angularity_from_dict(_load_json(path))


# ---------------------------------------------------------------------------
# Rigidity report
# ---------------------------------------------------------------------------

def finding_to_dict(f: DependencyFinding) -> dict:
    out = {"kind": f.kind, "members": [list(m) for m in f.members]}
    if f.detail:
        out["detail"] = dict(f.detail)
    return out


def report_to_dict(report: RigidityReport) -> dict:
    return {
        "rank": report.rank,
        "max_rank": report.max_rank,
        "infinitesimally_rigid": report.infinitesimally_rigid,
        "minimally_rigid": report.minimally_rigid,
        "independent_angles": report.independent_angles,
        "nullspace_dim": report.nullspace_dim,
        "findings": [finding_to_dict(f) for f in report.dependency_findings],
        "min_involvement": report.min_involvement,
    }


# ---------------------------------------------------------------------------
# Construction plan
# ---------------------------------------------------------------------------

def _constraint_from_dict(d: dict, where: str):
    kind = _req(d, "kind", where)
    if kind == "linear":
        return LinearConstraintSpec(
            anchor=int(_req(d, "anchor", where)),
            reference=int(_req(d, "reference", where)),
            angle=_deg(_req(d, "angle_deg", where), where),
        )
    if kind == "quadratic":
        chord = _req(d, "chord", where)
        if len(chord) != 2:
            raise ParseError(f"{where}: 'chord' must hold two vertex ids")
        return QuadraticConstraintSpec(
            chord_a=int(chord[0]),
            chord_b=int(chord[1]),
            angle=_deg(_req(d, "angle_deg", where), where),
            side=d.get("side", "left"),
        )
    raise ParseError(f"{where}: unknown constraint kind {kind!r}")


def _constraint_to_dict(c) -> dict:
    if isinstance(c, LinearConstraintSpec):
        return {
            "kind": "linear",
            "anchor": c.anchor,
            "reference": c.reference,
            "angle_deg": math.degrees(c.angle),
        }
    return {
        "kind": "quadratic",
        "chord": [c.chord_a, c.chord_b],
        "angle_deg": math.degrees(c.angle),
        "side": c.side,
    }


def plan_from_dict(d: dict) -> ConstructionPlan:
    seed = _req(d, "seed", "plan")
    targets = _req(seed, "targets_deg", "plan.seed")
    if len(targets) != 2:
        raise ParseError("plan.seed.targets_deg must hold two angles")
    steps = []
    for idx, sd in enumerate(d.get("steps", [])):
        where = f"steps[{idx}]"
        hint = sd.get("branch_hint")
        steps.append(
            AdditionStep(
                kind=str(_req(sd, "type", where)),
                constraints=tuple(
                    _constraint_from_dict(c, f"{where}.constraints[{ci}]")
                    for ci, c in enumerate(_req(sd, "constraints", where))
                ),
                branch_hint=None if hint is None else (float(hint[0]), float(hint[1])),
            )
        )
    return ConstructionPlan(
        seed_positions=np.asarray(_req(seed, "positions", "plan.seed"), dtype=float),
        seed_targets=(
            _deg(targets[0], "plan.seed.targets_deg"),
            _deg(targets[1], "plan.seed.targets_deg"),
        ),
        steps=tuple(steps),
    )


def plan_to_dict(plan: ConstructionPlan) -> dict:
    return {
        "seed": {
            "positions": [[float(x), float(y)] for x, y in plan.seed_positions],
            "targets_deg": [math.degrees(t) for t in plan.seed_targets],
        },
        "steps": [
            {
                "type": s.kind,
                "constraints": [_constraint_to_dict(c) for c in s.constraints],
                "branch_hint": None if s.branch_hint is None else list(s.branch_hint),
            }
            for s in plan.steps
        ],
    }


def load_plan(path) -> ConstructionPlan:
    return plan_from_dict(_load_json(path))


def build_result_to_dict(result: BuildResult) -> dict:
    return {
        "angularity": angularity_to_dict(result.angularity),
        "report": report_to_dict(result.report),
        "certificate": result.globally_rigid_certificate,
        "generic_positions": result.generic_positions,
        "alternatives": [
            [[float(x), float(y)] for x, y in alts] for alts in result.step_alternatives
        ],
    }


# ---------------------------------------------------------------------------
# Formation spec and simulation input
# ---------------------------------------------------------------------------

def formation_spec_from_dict(d: dict) -> FormationSpec:
    tri = _req(d, "triangle_targets_deg", "spec")
    if len(tri) != 3:
        raise ParseError("spec.triangle_targets_deg must hold three angles")
    added = []
    for idx, entry in enumerate(d.get("added", [])):
        where = f"spec.added[{idx}]"
        anchors = _req(entry, "anchors", where)
        targets = _req(entry, "targets_deg", where)
        if len(anchors) != 3 or len(targets) != 2:
            raise ParseError(f"{where}: need three anchors and two targets")
        added.append(
            AddedAgentTargets(
                agent=int(_req(entry, "i", where)),
                anchors=tuple(int(j) for j in anchors),
                targets=(_deg(targets[0], where), _deg(targets[1], where)),
            )
        )
    spec = FormationSpec(
        tuple(_deg(t, "spec.triangle_targets_deg") for t in tri), tuple(added)
    )
    declared = d.get("N")
    if declared is not None and int(declared) != spec.agent_count:
        raise ValidationError(
            f"spec says N={declared} but defines {spec.agent_count} agents"
        )
    return spec


def formation_spec_to_dict(spec: FormationSpec) -> dict:
    return {
        "N": spec.agent_count,
        "triangle_targets_deg": [math.degrees(t) for t in spec.triangle_targets],
        "added": [
            {
                "i": a.agent,
                "anchors": list(a.anchors),
                "targets_deg": [math.degrees(t) for t in a.targets],
            }
            for a in spec.added
        ],
    }


def simulation_input_from_dict(d: dict) -> tuple[FormationSpec, np.ndarray, dict]:
    """Parse a simulate input file: spec, initial positions, config overrides."""
    spec = formation_spec_from_dict(_req(d, "spec", "input"))
    initial = np.asarray(_req(d, "initial_positions", "input"), dtype=float)
    cfg = d.get("config", {})
    if not isinstance(cfg, dict):
        raise ParseError("'config' must be an object")
    return spec, initial, cfg


def load_simulation_input(path) -> tuple[FormationSpec, np.ndarray, dict]:
    return simulation_input_from_dict(_load_json(path))


def make_sim_config(file_cfg: dict, **overrides) -> SimConfig:
    """SimConfig from file-level settings plus (non-None) CLI overrides."""
    known = {
        "step_size",
        "duration",
        "integrator",
        "collision_epsilon",
        "collinearity_epsilon",
        "seed",
        "frame_mode",
    }
    unknown = set(file_cfg) - known
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    merged = dict(file_cfg)
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    return SimConfig(**merged)


# ---------------------------------------------------------------------------
# Trajectory output
# ---------------------------------------------------------------------------

def write_trajectory_csv(traj: Trajectory, path) -> None:
    """One row per logged step: t, per-agent x/y, per-constraint errors."""
    n = traj.agent_count
    k = traj.angle_errors.shape[1]
    header = (
        ["t"]
        + [f"{c}_{i}" for i in range(1, n + 1) for c in ("x", "y")]
        + [f"e_{m}" for m in range(1, k + 1)]
    )
    flat = np.column_stack(
        [traj.times, traj.positions.reshape(len(traj.times), 2 * n), traj.angle_errors]
    )
    np.savetxt(path, flat, fmt="%.17g", delimiter=",", header=",".join(header), comments="")


def trajectory_sidecar(traj: Trajectory) -> dict:
    return {
        "events": [
            {"t": ev.time, "kind": ev.kind, "agents": list(ev.agents)}
            for ev in traj.events
        ],
        "rates": [
            None if r is None else {"rate": r[0], "r_squared": r[1]}
            for r in traj.fitted_rates
        ],
        "converged": traj.converged,
        "metadata": dict(traj.metadata),
    }


def write_json(data: dict, path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=False) + "\n")
