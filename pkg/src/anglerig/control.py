"""Angle-only formation control laws and their linearized error dynamics.

Agents are single integrators that can measure only angles between
bearings to other agents; interior angles come from arccos of bearing dot
products, so no shared coordinate frame is needed.  Agents 1-3 regulate the
interior angles of a triangle; each later agent regulates two angles formed
with three already-placed anchors, matching a Type-I (case 3) vertex
addition of the target shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .angularity import AngleTriplet, Angularity
from .construction import inscribed_arc, intersect
from .errors import (
    CoincidentAgents,
    CollinearConfiguration,
    DegenerateSpec,
    ValidationError,
)

#: Controlled angles with sin below this are treated as collinear.
COLLINEAR_SIN_EPS = 1e-8

#: Triangle targets must sum to pi within this.
TRIANGLE_SUM_TOL = 1e-9


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class AgentState:
    """An agent's global position and the rotation of its local frame.

    ``frame_rotation`` maps local coordinates to global ones; the position
    itself is never fed to the control law.
    """

    id: int
    position: np.ndarray
    frame_rotation: np.ndarray = field(default_factory=lambda: np.eye(2))

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        r = np.asarray(self.frame_rotation, dtype=float)
        if np.abs(r @ r.T - np.eye(2)).max() > 1e-12 or abs(np.linalg.det(r) - 1.0) > 1e-12:
            raise ValidationError("frame_rotation must be a proper rotation")
        object.__setattr__(self, "frame_rotation", r)


@dataclass(frozen=True)
class AddedAgentTargets:
    """Two desired angles an added agent forms with its three anchors."""

    agent: int
    anchors: tuple[int, int, int]
    targets: tuple[float, float]


@dataclass(frozen=True)
class FormationSpec:
    """Desired-angle specification for an N-agent formation.

    ``triangle_targets`` are the interior angles at agents 1..3 (radians,
    each in (0, pi), summing to pi).  Each ``added`` entry binds agent i >= 4
    to anchors (j1, j2, j3) below it with targets for the angles (j1, i, j2)
    and (j2, i, j3).  The implied desired shape is the sequential inscribed-
    arc realization; its edge lengths feed stability checks only, never the
    control law.
    """

    triangle_targets: tuple[float, float, float]
    added: tuple[AddedAgentTargets, ...] = ()

    def __post_init__(self):
        tri = tuple(float(t) for t in self.triangle_targets)
        if len(tri) != 3 or not all(0.0 < t < math.pi for t in tri):
            raise ValidationError("triangle targets must be three angles in (0, pi)")
        if abs(sum(tri) - math.pi) > TRIANGLE_SUM_TOL:
            raise ValidationError("triangle targets must sum to pi")
        object.__setattr__(self, "triangle_targets", tri)
        object.__setattr__(self, "added", tuple(self.added))
        for pos, add in enumerate(self.added):
            expect = 4 + pos
            if add.agent != expect:
                raise ValidationError(f"added agents must be sequential; expected {expect}")
            if len(add.anchors) != 3 or len(set(add.anchors)) != 3:
                raise ValidationError(f"agent {add.agent} needs three distinct anchors")
            if any(not 1 <= j < add.agent for j in add.anchors):
                raise ValidationError(f"agent {add.agent} anchors must be placed earlier")
            if any(not 0.0 < t < math.pi for t in add.targets):
                raise ValidationError(f"agent {add.agent} targets must lie in (0, pi)")

    @property
    def agent_count(self) -> int:
        return 3 + len(self.added)

    def constraints(self) -> tuple[AngleTriplet, ...]:
        """Controlled angles as triplets (j, i, k) with their targets."""
        a1, a2, a3 = self.triangle_targets
        trips = [
            AngleTriplet(3, 1, 2, a1),
            AngleTriplet(1, 2, 3, a2),
            AngleTriplet(2, 3, 1, a3),
        ]
        for add in self.added:
            j1, j2, j3 = add.anchors
            trips.append(AngleTriplet(j1, add.agent, j2, add.targets[0]))
            trips.append(AngleTriplet(j2, add.agent, j3, add.targets[1]))
        return tuple(trips)


def bearing(p_i, p_j) -> np.ndarray:
    """Unit vector from agent i toward agent j."""
    p_i = np.asarray(p_i, dtype=float)
    p_j = np.asarray(p_j, dtype=float)
    d = p_j - p_i
    n = math.hypot(d[0], d[1])
    if n <= 1e-12:
        raise CoincidentAgents("bearing between coincident agents")
    return d / n


def measured_angle(p_i, p_j, p_k) -> float:
    """Interior angle at i between bearings to j and k: arccos(z_ij . z_ik)."""
    z_ij = bearing(p_i, p_j)
    z_ik = bearing(p_i, p_k)
    return math.acos(min(1.0, max(-1.0, float(z_ij @ z_ik))))


def _positions(states) -> np.ndarray:
    if isinstance(states, np.ndarray):
        return states
    if states and isinstance(states[0], AgentState):
        return np.array([s.position for s in states])
    return np.asarray(states, dtype=float)


def control_triangle(i: int, states, spec: FormationSpec) -> np.ndarray:
    """Bisector control for triangle agent i in {1, 2, 3}.

    The velocity is -(alpha_i - alpha_i*) (z_to_next + z_to_prev); its norm
    never exceeds twice the angle error.  Raises CollinearConfiguration when
    the measured angle is numerically flat, where bisector semantics break.
    """
    if i not in (1, 2, 3):
        raise ValidationError("control_triangle drives agents 1..3 only")
    pos = _positions(states)
    nxt = 1 if i == 3 else i + 1
    prv = 3 if i == 1 else i - 1
    z_next = bearing(pos[i - 1], pos[nxt - 1])
    z_prev = bearing(pos[i - 1], pos[prv - 1])
    cos_a = min(1.0, max(-1.0, float(z_next @ z_prev)))
    if math.sqrt(max(0.0, 1.0 - cos_a * cos_a)) < COLLINEAR_SIN_EPS:
        raise CollinearConfiguration(f"triangle angle at agent {i} is collinear")
    err = math.acos(cos_a) - spec.triangle_targets[i - 1]
    return -err * (z_next + z_prev)


def control_added(i: int, states, spec: FormationSpec) -> np.ndarray:
    """Two-term bisector control for an added agent i >= 4."""
    add = next((x for x in spec.added if x.agent == i), None)
    if add is None:
        raise ValidationError(f"agent {i} has no added-agent targets")
    pos = _positions(states)
    j1, j2, j3 = add.anchors
    z1 = bearing(pos[i - 1], pos[j1 - 1])
    z2 = bearing(pos[i - 1], pos[j2 - 1])
    z3 = bearing(pos[i - 1], pos[j3 - 1])
    e1 = math.acos(min(1.0, max(-1.0, float(z1 @ z2)))) - add.targets[0]
    e2 = math.acos(min(1.0, max(-1.0, float(z2 @ z3)))) - add.targets[1]
    return -e1 * (z1 + z2) - e2 * (z2 + z3)


def control_unified(i: int, states, constraints) -> np.ndarray:
    """Sum of bisector terms over every triplet whose middle vertex is agent i.

    Equals control_triangle / control_added on their structures, and commutes
    with rigid rotations applied to all positions.
    """
    pos = _positions(states)
    u = np.zeros(2)
    for t in constraints:
        if t.j != i:
            continue
        if t.target is None:
            raise ValidationError(f"triplet {t.vertices()} carries no target")
        z_a = bearing(pos[i - 1], pos[t.i - 1])
        z_b = bearing(pos[i - 1], pos[t.k - 1])
        err = math.acos(min(1.0, max(-1.0, float(z_a @ z_b)))) - t.target
        u -= err * (z_a + z_b)
    return u


def local_frame_control(i: int, states, constraints) -> np.ndarray:
    """The same law computed from bearings expressed in agent i's own frame.

    Measures z^b = R_i^T z, sums the law in local coordinates, and maps the
    result back through R_i; since angle errors are scalars this reproduces
    the global-frame law.
    """
    state = next(s for s in states if s.id == i)
    r = state.frame_rotation
    pos = _positions(states)
    u_local = np.zeros(2)
    for t in constraints:
        if t.j != i:
            continue
        z_a = r.T @ bearing(pos[i - 1], pos[t.i - 1])
        z_b = r.T @ bearing(pos[i - 1], pos[t.k - 1])
        err = math.acos(min(1.0, max(-1.0, float(z_a @ z_b)))) - t.target
        u_local -= err * (z_a + z_b)
    return r @ u_local


def error_dynamics_triangle(angles, lengths) -> np.ndarray:
    """Closed-loop matrix F with e_dot = F e for the triangle's angle errors.

    ``angles`` are the current interior angles (a1, a2, a3); ``lengths`` the
    current side lengths (l12, l23, l31).  Diagonal entries are
    -sin(a_i)(1/l_i,next + 1/l_i,prev); off-diagonal (i, j) entries are
    sin(a_j)/l_ij.  Entries depend only on the current state, not on targets.
    """
    a1, a2, a3 = (float(x) for x in angles)
    l12, l23, l31 = (float(x) for x in lengths)
    if min(l12, l23, l31) <= 0.0:
        raise DegenerateSpec("side lengths must be positive")
    if min(math.sin(a1), math.sin(a2), math.sin(a3)) < COLLINEAR_SIN_EPS:
        raise CollinearConfiguration("triangle is numerically collinear")
    g1 = math.sin(a1) * (1.0 / l12 + 1.0 / l31)
    g2 = math.sin(a2) * (1.0 / l12 + 1.0 / l23)
    g3 = math.sin(a3) * (1.0 / l31 + 1.0 / l23)
    return np.array(
        [
            [-g1, math.sin(a2) / l12, math.sin(a3) / l31],
            [math.sin(a1) / l12, -g2, math.sin(a3) / l23],
            [math.sin(a1) / l31, math.sin(a2) / l23, -g3],
        ]
    )


@dataclass(frozen=True)
class LinearizationReport:
    """Reduced linearized error dynamics around zero error."""

    matrix: np.ndarray
    trace: float
    determinant: float
    eigenvalues: np.ndarray
    hurwitz: bool
    length_condition: bool | None = None


def _report(matrix: np.ndarray, length_condition: bool | None = None) -> LinearizationReport:
    eig = np.linalg.eigvals(matrix)
    return LinearizationReport(
        matrix=matrix,
        trace=float(np.trace(matrix)),
        determinant=float(np.linalg.det(matrix)),
        eigenvalues=eig,
        hurwitz=bool(np.all(eig.real < 0.0)),
        length_condition=length_condition,
    )


def triangle_lengths(spec: FormationSpec) -> tuple[float, float, float]:
    """Desired side lengths (l12, l23, l31) at unit scale (l12 = 1)."""
    a1, a2, a3 = spec.triangle_targets
    return (1.0, math.sin(a1) / math.sin(a3), math.sin(a2) / math.sin(a3))


def linearize_triangle(spec: FormationSpec, lengths=None) -> LinearizationReport:
    """Reduced 2x2 linearization of the triangle error dynamics at the target.

    Uses e1 + e2 + e3 = 0 to eliminate the third error.  For any valid
    specification the matrix is Hurwitz; a non-Hurwitz outcome indicates a
    degenerate specification and raises.
    """
    if lengths is None:
        lengths = triangle_lengths(spec)
    a1, a2, a3 = spec.triangle_targets
    l12, l23, l31 = (float(x) for x in lengths)
    if min(l12, l23, l31) <= 0.0:
        raise DegenerateSpec("desired lengths must be positive")
    g1 = math.sin(a1) * (1.0 / l12 + 1.0 / l31)
    g2 = math.sin(a2) * (1.0 / l12 + 1.0 / l23)
    f12 = math.sin(a2) / l12
    f13 = math.sin(a3) / l31
    f21 = math.sin(a1) / l12
    f23 = math.sin(a3) / l23
    l1 = np.array([[-(g1 + f13), f12 - f13], [f21 - f23, -(g2 + f23)]])
    report = _report(l1)
    if not report.hurwitz:
        raise DegenerateSpec("triangle linearization is not Hurwitz")
    return report


def canonical_realization(spec: FormationSpec) -> np.ndarray:
    """Positions of the desired shape at unit scale, first edge on the x-axis.

    Agent 1 sits at the origin, agent 2 at (1, 0), agent 3 above the axis;
    each added agent is placed at the intersection of its two inscribed-angle
    arcs (read as counterclockwise angles), i.e. by replaying the Type-I
    case-3 additions.  The shape is defined up to similarity; this fixes one
    representative.
    """
    a1, a2, a3 = spec.triangle_targets
    l13 = math.sin(a2) / math.sin(a3)
    pos = np.zeros((spec.agent_count, 2))
    pos[1] = (1.0, 0.0)
    pos[2] = (l13 * math.cos(a1), l13 * math.sin(a1))
    for add in spec.added:
        j1, j2, j3 = add.anchors
        arc1 = inscribed_arc(pos[j1 - 1], pos[j2 - 1], add.targets[0], "left")
        arc2 = inscribed_arc(pos[j2 - 1], pos[j3 - 1], add.targets[1], "left")
        pts = intersect(arc1, arc2)
        if not pts:
            raise DegenerateSpec(
                f"agent {add.agent}: target arcs do not meet; shape unrealizable"
            )
        pos[add.agent - 1] = pts[0]
    return pos


def linearize_added(
    spec: FormationSpec, agent: int, positions=None
) -> LinearizationReport:
    """2x2 linearization of an added agent's error dynamics at the target.

    ``positions`` defaults to the canonical realization; only length ratios
    and target angles enter, so any similar copy gives the same eigenvalue
    signs.  Also reports whether the sufficient length condition holds: the
    middle anchor strictly nearest among the three.
    """
    add = next((x for x in spec.added if x.agent == agent), None)
    if add is None:
        raise ValidationError(f"agent {agent} has no added-agent targets")
    pos = canonical_realization(spec) if positions is None else np.asarray(positions, dtype=float)
    j1, j2, j3 = add.anchors
    p_i = pos[agent - 1]
    l1 = math.hypot(*(pos[j1 - 1] - p_i))
    l2 = math.hypot(*(pos[j2 - 1] - p_i))
    l3 = math.hypot(*(pos[j3 - 1] - p_i))
    if min(l1, l2, l3) <= 1e-12:
        raise DegenerateSpec("added agent coincides with an anchor")
    s_a = math.sin(measured_angle(p_i, pos[j1 - 1], pos[j2 - 1]))
    s_b = math.sin(measured_angle(p_i, pos[j2 - 1], pos[j3 - 1]))
    s_o = math.sin(measured_angle(p_i, pos[j3 - 1], pos[j1 - 1]))
    j11 = -s_a * (1.0 / l1 + 1.0 / l2)
    j22 = -s_b * (1.0 / l3 + 1.0 / l2)
    j12 = -(s_a + s_o) / l1 + s_b / l2
    j21 = -(s_b + s_o) / l3 + s_a / l2
    return _report(
        np.array([[j11, j12], [j21, j22]]),
        length_condition=bool(l1 > l2 and l3 > l2),
    )


def formation_spec_from_angularity(a: Angularity) -> FormationSpec:
    """Read a sequentially constructed angularity back into a FormationSpec.

    Expects the seed's two constrained interior angles on vertices of the
    first triangle and, for each vertex i >= 4, two targeted triplets with
    middle vertex i whose outer legs share one anchor.
    """
    seed = [t for t in a.angle_set if set(t.vertices()) <= {1, 2, 3}]
    if len(seed) != 2:
        raise ValidationError("expected exactly two seed triangle constraints")
    by_mid = {t.j: t.target for t in seed}
    if len(by_mid) != 2 or any(v is None for v in by_mid.values()):
        raise ValidationError("seed constraints must target two distinct vertices")
    missing = ({1, 2, 3} - set(by_mid)).pop()
    tri = [0.0, 0.0, 0.0]
    for j, val in by_mid.items():
        tri[j - 1] = val
    tri[missing - 1] = math.pi - sum(tri)

    added = []
    for i in range(4, a.vertex_count + 1):
        mine = [t for t in a.angle_set if t.j == i]
        if len(mine) != 2 or any(t.target is None for t in mine):
            raise ValidationError(f"vertex {i} needs exactly two targeted constraints")
        t1, t2 = mine
        shared = set((t1.i, t1.k)) & set((t2.i, t2.k))
        if len(shared) != 1:
            raise ValidationError(f"vertex {i} constraints must share one anchor")
        j2 = shared.pop()
        first, second = (t1, t2) if t1.k == j2 else (t2, t1)
        if first.k != j2 or second.i != j2:
            raise ValidationError(f"vertex {i} constraints do not chain through {j2}")
        added.append(
            AddedAgentTargets(
                agent=i,
                anchors=(first.i, j2, second.k),
                targets=(first.target, second.target),
            )
        )
    return FormationSpec(tuple(tri), tuple(added))
