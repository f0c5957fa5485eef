"""Shipped example angularities, construction plans, and formation specs.

These are the concrete instances exercised by the test suite and handy as
CLI inputs.  The four-vertex flex-ambiguity instance pins its two triangle
angles to the closed forms arccos((4*sqrt3-2)/(2*sqrt(17-4*sqrt3))) and
arccos((19-8*sqrt3)/(sqrt(25-12*sqrt3)*sqrt(17-4*sqrt3))) (about 39.06 and
37.87 degrees); the embedding below realizes both exactly, with the ray
constraint at 30 degrees and the inscribed-arc constraint at 45 degrees.
"""

from __future__ import annotations

import math

import numpy as np

from .angularity import AngleTriplet, Angularity, signed_angle
from .construction import (
    AdditionStep,
    ConstructionPlan,
    LinearConstraintSpec,
    QuadraticConstraintSpec,
)
from .control import AddedAgentTargets, FormationSpec

_SQRT3 = math.sqrt(3.0)

#: Triangle angle at vertex 2 of the flex-ambiguity instance (radians).
AMBIGUITY_ANGLE_AT_2 = math.acos((4 * _SQRT3 - 2) / (2 * math.sqrt(17 - 4 * _SQRT3)))

#: Triangle angle at vertex 3 of the flex-ambiguity instance (radians).
AMBIGUITY_ANGLE_AT_3 = math.acos(
    (19 - 8 * _SQRT3) / (math.sqrt(25 - 12 * _SQRT3) * math.sqrt(17 - 4 * _SQRT3))
)


def ambiguity_base() -> Angularity:
    """Seed triangle of the flex-ambiguity instance, with its two angle targets."""
    positions = np.array([[0.0, 0.0], [2.0, 0.0], [3.0 - 2.0 * _SQRT3, 2.0]])
    return Angularity(
        positions,
        (
            AngleTriplet(3, 2, 1, AMBIGUITY_ANGLE_AT_2),
            AngleTriplet(1, 3, 2, AMBIGUITY_ANGLE_AT_3),
        ),
    )


def ambiguity_step(branch_hint=None) -> AdditionStep:
    """Type-II step pinning vertex 4 by a 30-degree ray and a 45-degree arc."""
    return AdditionStep(
        kind="II-1",
        constraints=(
            LinearConstraintSpec(anchor=3, reference=2, angle=math.pi / 6),
            QuadraticConstraintSpec(chord_a=1, chord_b=2, angle=math.pi / 4, side="left"),
        ),
        branch_hint=branch_hint,
    )


def ambiguity_plan() -> ConstructionPlan:
    """The flex-ambiguity instance as a construction plan.

    The plan's seed convention targets the interior angles at seed vertices
    1 and 2, so the instance is shipped with its vertices relabeled
    (old 2 -> 1, old 3 -> 2, old 1 -> 3); the realized four angles are the
    same four values.
    """
    positions = np.array([[2.0, 0.0], [3.0 - 2.0 * _SQRT3, 2.0], [0.0, 0.0]])
    step = AdditionStep(
        kind="II-1",
        constraints=(
            LinearConstraintSpec(anchor=2, reference=1, angle=math.pi / 6),
            QuadraticConstraintSpec(chord_a=3, chord_b=1, angle=math.pi / 4, side="left"),
        ),
    )
    return ConstructionPlan(
        positions, (AMBIGUITY_ANGLE_AT_2, AMBIGUITY_ANGLE_AT_3), (step,)
    )


def triplet_cycle_angularity() -> Angularity:
    """Six chained triplets closing a cycle: a dependent angle set."""
    positions = np.array(
        [[0.0, 0.0], [2.1, 0.3], [3.4, 1.9], [2.7, 3.8], [0.8, 4.1], [-0.9, 2.2]]
    )
    trips = tuple(
        AngleTriplet(1 + a % 6, 1 + (a + 1) % 6, 1 + (a + 2) % 6) for a in range(6)
    )
    return Angularity(positions, trips)


def fan_angularity() -> Angularity:
    """Three angles partitioning the full turn around vertex 1."""
    positions = np.array([[1.1, 0.9], [3.2, 1.4], [0.2, 3.1], [-0.6, -1.3]])
    return Angularity(
        positions,
        (AngleTriplet(2, 1, 3), AngleTriplet(3, 1, 4), AngleTriplet(4, 1, 2)),
    )


def overconstrained_angularity() -> Angularity:
    """Seven triplets hiding five constraints on only four vertices."""
    positions = np.array(
        [[0.0, 0.0], [2.3, 0.4], [1.1, 2.9], [3.6, 2.2], [-1.2, 1.7]]
    )
    trips = (
        AngleTriplet(1, 4, 2),
        AngleTriplet(4, 2, 1),
        AngleTriplet(1, 3, 2),
        AngleTriplet(1, 2, 3),
        AngleTriplet(3, 4, 2),
        AngleTriplet(5, 1, 4),
        AngleTriplet(5, 4, 1),
    )
    return Angularity(positions, trips)


def triangle_two_angles() -> Angularity:
    """Minimal rigid example: a triangle with two interior angles constrained."""
    positions = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, -0.5 * _SQRT3]])
    return Angularity(
        positions,
        (AngleTriplet(3, 1, 2, math.pi / 3), AngleTriplet(1, 2, 3, math.pi / 3)),
    )


def equilateral_positions() -> np.ndarray:
    """Unit equilateral triangle with the first edge on the x-axis."""
    return np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.5 * _SQRT3]])


def triangle_formation_spec() -> FormationSpec:
    """Equal 60-degree targets for the three triangle agents."""
    return FormationSpec((math.pi / 3, math.pi / 3, math.pi / 3))


def _signed(desired: np.ndarray, i: int, j: int, k: int) -> float:
    return signed_angle(desired[i - 1], desired[j - 1], desired[k - 1])


_FOUR_AGENT_EXTRA = np.array([[0.5, 1.55]])
_SIX_AGENT_EXTRA = np.array([[0.5, 1.55], [-0.55, -0.35], [1.55, -0.35]])

#: anchors (j1, j2, j3) per added agent; the middle anchor is the nearest one,
#: which is the sufficient condition for the added agent's stability.
_SIX_AGENT_ANCHORS = {4: (1, 3, 2), 5: (2, 1, 3), 6: (3, 2, 1)}


def _formation_from_positions(desired: np.ndarray, anchors: dict[int, tuple[int, int, int]]) -> FormationSpec:
    added = []
    for agent in sorted(anchors):
        j1, j2, j3 = anchors[agent]
        added.append(
            AddedAgentTargets(
                agent,
                (j1, j2, j3),
                (_signed(desired, j1, agent, j2), _signed(desired, j2, agent, j3)),
            )
        )
    return FormationSpec((math.pi / 3,) * 3, tuple(added))


def four_agent_positions() -> np.ndarray:
    """Desired shape for the 4-agent demo: equilateral plus one apex agent."""
    return np.vstack([equilateral_positions(), _FOUR_AGENT_EXTRA])


def four_agent_spec() -> FormationSpec:
    """4-agent spec whose added agent satisfies the nearest-middle-anchor condition."""
    return _formation_from_positions(four_agent_positions(), {4: _SIX_AGENT_ANCHORS[4]})


def six_agent_positions() -> np.ndarray:
    """Desired shape for the 6-agent demo built by three case-3 additions."""
    return np.vstack([equilateral_positions(), _SIX_AGENT_EXTRA])


def six_agent_spec() -> FormationSpec:
    return _formation_from_positions(six_agent_positions(), _SIX_AGENT_ANCHORS)


def six_agent_plan() -> ConstructionPlan:
    """The 6-agent shape as a sequence of Type-I case-3 vertex additions."""
    desired = six_agent_positions()
    steps = []
    for agent in (4, 5, 6):
        j1, j2, j3 = _SIX_AGENT_ANCHORS[agent]
        steps.append(
            AdditionStep(
                kind="I-3",
                constraints=(
                    QuadraticConstraintSpec(j1, j2, _signed(desired, j1, agent, j2), "left"),
                    QuadraticConstraintSpec(j2, j3, _signed(desired, j2, agent, j3), "left"),
                ),
            )
        )
    return ConstructionPlan(
        desired[:3], (math.pi / 3, math.pi / 3), tuple(steps)
    )


def perturbed_positions(desired, magnitude: float = 0.04, seed: int = 7) -> np.ndarray:
    """Desired positions plus a reproducible uniform jitter per coordinate."""
    desired = np.asarray(desired, dtype=float)
    rng = np.random.default_rng(seed)
    return desired + rng.uniform(-magnitude, magnitude, size=desired.shape)
