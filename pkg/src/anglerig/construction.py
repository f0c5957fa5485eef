"""Constraint loci and vertex-addition construction of angle rigid angularities.

A new vertex can be pinned by two constraints, each of which is either a
ray (linear in the position) or an inscribed-angle arc over a chord of two
placed vertices (quadratic).  Type-I anchor patterns intersect in at most
one point and preserve global rigidity; Type-II patterns may intersect in
two, which is exactly the flex ambiguity that keeps angle rigidity a local
property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .angularity import AngleTriplet, Angularity, signed_angle
from .errors import (
    AlignedRays,
    AmbiguousBranch,
    BuildStepError,
    CaseViolation,
    CoincidentPoints,
    DegenerateChord,
    NoIntersection,
    ValidationError,
)
from .rigidity import RigidityReport, classify, is_generic_configuration

#: Intersections closer than this to a chord endpoint are endpoint artifacts.
ENDPOINT_EPS = 1e-9

#: Quadratic discriminants within this of zero count as tangency.
TANGENT_EPS = 1e-10

#: Minimum ray parameter; keeps new vertices off the ray's own origin.
RAY_T_MIN = 1e-9

#: Realized seed angles must match their targets this closely.
SEED_ANGLE_TOL = 1e-6


def _unit(v: np.ndarray) -> np.ndarray:
    n = math.hypot(v[0], v[1])
    if n <= 1e-15:
        raise CoincidentPoints("zero-length direction")
    return v / n


def _cross(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _rot(v: np.ndarray, theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


@dataclass(frozen=True)
class Ray:
    """Half-line from ``origin`` along the unit vector ``direction``."""

    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=float)
        d = np.asarray(self.direction, dtype=float)
        if abs(math.hypot(d[0], d[1]) - 1.0) > 1e-12:
            raise ValueError("ray direction must be unit length")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", d)

    def point_at(self, t: float) -> np.ndarray:
        return self.origin + t * self.direction


@dataclass(frozen=True)
class InscribedArc:
    """Locus of points seeing a directed chord under a fixed signed angle.

    The arc is the part of the circle on ``side`` ("left"/"right") of the
    directed chord a->b.  On the left arc the counterclockwise angle from the
    ray toward a to the ray toward b equals ``inscribed_angle``; the right
    arc is the same locus for the reversed chord.
    """

    chord_a: np.ndarray
    chord_b: np.ndarray
    inscribed_angle: float
    center: np.ndarray
    radius: float
    side: str

    def contains(self, q, tol: float = 1e-9) -> bool:
        """Whether ``q`` lies on this arc (circle membership and correct side)."""
        q = np.asarray(q, dtype=float)
        if abs(math.hypot(*(q - self.center)) - self.radius) > tol * max(1.0, self.radius):
            return False
        s = _cross(self.chord_b - self.chord_a, q - self.chord_a)
        return s > 0.0 if self.side == "left" else s < 0.0

    def midpoint(self) -> np.ndarray:
        """The arc point farthest from the chord, on the arc's side."""
        n = _unit(np.array([-(self.chord_b - self.chord_a)[1], (self.chord_b - self.chord_a)[0]]))
        if self.side == "right":
            n = -n
        return self.center + self.radius * n


def constraint_ray(anchor, reference, beta: float) -> Ray:
    """Ray of points q with signed angle (reference, anchor, q) equal to ``beta``.

    The direction is the unit vector from anchor toward reference rotated
    counterclockwise by beta.
    """
    anchor = np.asarray(anchor, dtype=float)
    reference = np.asarray(reference, dtype=float)
    d = reference - anchor
    if math.hypot(d[0], d[1]) <= 1e-15:
        raise CoincidentPoints("ray anchor and reference coincide")
    return Ray(anchor, _rot(_unit(d), beta))


def inscribed_arc(a, b, beta: float, side: str = "left") -> InscribedArc:
    """Arc over chord a->b whose inscribed angle is ``beta`` in (0, pi).

    The center sits on the chord's perpendicular bisector at signed distance
    (|b - a| / 2) * cot(beta) toward the requested side; the radius is
    |b - a| / (2 sin(beta)).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (0.0 < beta < math.pi):
        raise ValueError("inscribed angle must lie in (0, pi)")
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    chord = b - a
    l = math.hypot(chord[0], chord[1])
    if l <= 1e-15:
        raise DegenerateChord("chord endpoints coincide")
    n_left = np.array([-chord[1], chord[0]]) / l
    if side == "right":
        n_left = -n_left
    center = (a + b) / 2.0 + (l / 2.0) / math.tan(beta) * n_left
    radius = l / (2.0 * math.sin(beta))
    return InscribedArc(a, b, beta, center, radius, side)


def _ray_ray(r1: Ray, r2: Ray) -> list[np.ndarray]:
    denom = _cross(r1.direction, r2.direction)
    if abs(denom) <= 1e-12:
        raise AlignedRays("rays are parallel or collinear")
    delta = r2.origin - r1.origin
    t1 = _cross(delta, r2.direction) / denom
    t2 = _cross(delta, r1.direction) / denom
    if t1 < RAY_T_MIN or t2 < RAY_T_MIN:
        return []
    return [r1.point_at(t1)]


def _ray_circle_params(ray: Ray, center, radius) -> list[float]:
    oc = ray.origin - center
    b = float(ray.direction @ oc)
    c0 = float(oc @ oc) - radius * radius
    disc = b * b - c0
    if abs(disc) <= TANGENT_EPS:
        return [-b]
    if disc < 0.0:
        return []
    root = math.sqrt(disc)
    return [-b - root, -b + root]


def _ray_arc(ray: Ray, arc: InscribedArc) -> list[np.ndarray]:
    pts = []
    for t in _ray_circle_params(ray, arc.center, arc.radius):
        if t < RAY_T_MIN:
            continue
        q = ray.point_at(t)
        if _near_endpoints(q, arc):
            continue
        if arc.contains(q):
            pts.append(q)
    return pts


def _arc_arc(a1: InscribedArc, a2: InscribedArc) -> list[np.ndarray]:
    delta = a2.center - a1.center
    d = math.hypot(delta[0], delta[1])
    if d <= 1e-12:
        if abs(a1.radius - a2.radius) <= 1e-12:
            raise CaseViolation("arcs lie on the same circle")
        return []
    ex = delta / d
    a = (d * d + a1.radius**2 - a2.radius**2) / (2.0 * d)
    h2 = a1.radius**2 - a * a
    if abs(h2) <= TANGENT_EPS:
        candidates = [a1.center + a * ex]
    elif h2 < 0.0:
        return []
    else:
        h = math.sqrt(h2)
        ey = np.array([-ex[1], ex[0]])
        candidates = [a1.center + a * ex + h * ey, a1.center + a * ex - h * ey]
    pts = []
    for q in candidates:
        if _near_endpoints(q, a1) or _near_endpoints(q, a2):
            continue
        if a1.contains(q) and a2.contains(q):
            pts.append(q)
    return pts


def _near_endpoints(q: np.ndarray, arc: InscribedArc) -> bool:
    return (
        math.hypot(*(q - arc.chord_a)) <= ENDPOINT_EPS
        or math.hypot(*(q - arc.chord_b)) <= ENDPOINT_EPS
    )


def intersect(locus1, locus2) -> list[np.ndarray]:
    """Points common to two constraint loci (0, 1 or 2 of them).

    Chord endpoints and ray origins are excluded: a constrained vertex may
    not collapse onto a vertex that defines its constraint.  Rays that are
    parallel raise AlignedRays; two arcs on one circle raise CaseViolation.
    """
    if isinstance(locus1, Ray) and isinstance(locus2, Ray):
        return _ray_ray(locus1, locus2)
    if isinstance(locus1, Ray) and isinstance(locus2, InscribedArc):
        return _ray_arc(locus1, locus2)
    if isinstance(locus1, InscribedArc) and isinstance(locus2, Ray):
        return _ray_arc(locus2, locus1)
    if isinstance(locus1, InscribedArc) and isinstance(locus2, InscribedArc):
        return _arc_arc(locus1, locus2)
    raise TypeError(f"cannot intersect {type(locus1)} with {type(locus2)}")


@dataclass(frozen=True)
class LinearConstraintSpec:
    """New vertex on the ray from ``anchor`` rotated ``angle`` CCW past ``reference``."""

    anchor: int
    reference: int
    angle: float

    def vertices(self) -> tuple[int, ...]:
        return (self.anchor, self.reference)


@dataclass(frozen=True)
class QuadraticConstraintSpec:
    """New vertex on the inscribed arc over the chord (chord_a, chord_b)."""

    chord_a: int
    chord_b: int
    angle: float
    side: str = "left"

    def vertices(self) -> tuple[int, ...]:
        return (self.chord_a, self.chord_b)


ConstraintSpec = LinearConstraintSpec | QuadraticConstraintSpec

TYPE_I_KINDS = ("I-1", "I-2", "I-3")
TYPE_II_KINDS = ("II-1", "II-2")


@dataclass(frozen=True)
class AdditionStep:
    """One vertex addition: a case label, two constraints, optional branch hint."""

    kind: str
    constraints: tuple[ConstraintSpec, ConstraintSpec]
    branch_hint: tuple[float, float] | None = None
    new_vertex: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if self.kind not in TYPE_I_KINDS + TYPE_II_KINDS:
            raise ValidationError(f"unknown addition kind {self.kind!r}")
        if len(self.constraints) != 2:
            raise ValidationError("an addition step takes exactly two constraints")

    @property
    def is_type1(self) -> bool:
        return self.kind in TYPE_I_KINDS


def _locus(spec: ConstraintSpec, a: Angularity):
    if isinstance(spec, LinearConstraintSpec):
        return constraint_ray(a.position(spec.anchor), a.position(spec.reference), spec.angle)
    return inscribed_arc(
        a.position(spec.chord_a), a.position(spec.chord_b), spec.angle, spec.side
    )


def _new_triplet(spec: ConstraintSpec, new_id: int) -> AngleTriplet:
    # Oriented so the realized signed angle equals the constraint angle.
    if isinstance(spec, LinearConstraintSpec):
        return AngleTriplet(spec.reference, spec.anchor, new_id, target=spec.angle)
    if spec.side == "left":
        return AngleTriplet(spec.chord_a, new_id, spec.chord_b, target=spec.angle)
    return AngleTriplet(spec.chord_b, new_id, spec.chord_a, target=spec.angle)


def _check_ids(step: AdditionStep, a: Angularity) -> None:
    n = a.vertex_count
    for spec in step.constraints:
        for v in spec.vertices():
            if not 1 <= v <= n:
                raise CaseViolation(f"constraint references unplaced vertex {v}")
    if step.new_vertex is not None and step.new_vertex != n + 1:
        raise CaseViolation(
            f"new vertex id must be {n + 1}, got {step.new_vertex}"
        )


def _validate_case(step: AdditionStep) -> None:
    c1, c2 = step.constraints
    lin = [c for c in step.constraints if isinstance(c, LinearConstraintSpec)]
    quad = [c for c in step.constraints if isinstance(c, QuadraticConstraintSpec)]
    kind = step.kind
    if kind == "I-1":
        if len(lin) != 2:
            raise CaseViolation("case I-1 takes two linear constraints")
        if lin[0].anchor == lin[1].anchor:
            raise CaseViolation("case I-1 rays must start from distinct vertices")
    elif kind == "I-2":
        if len(lin) != 1 or len(quad) != 1:
            raise CaseViolation("case I-2 takes one linear and one quadratic constraint")
        if lin[0].anchor not in quad[0].vertices():
            raise CaseViolation("case I-2 ray must start from a chord endpoint")
    elif kind == "I-3":
        if len(quad) != 2:
            raise CaseViolation("case I-3 takes two quadratic constraints")
        shared = set(quad[0].vertices()) & set(quad[1].vertices())
        if len(shared) != 1:
            raise CaseViolation("case I-3 chords must share exactly one endpoint")
    elif kind == "II-1":
        if len(lin) != 1 or len(quad) != 1:
            raise CaseViolation("case II-1 takes one linear and one quadratic constraint")
        if lin[0].anchor in quad[0].vertices():
            raise CaseViolation("case II-1 ray must not start from a chord endpoint")
        if len({lin[0].anchor, *quad[0].vertices()}) != 3:
            raise CaseViolation("case II-1 involves three distinct vertices")
    elif kind == "II-2":
        if len(quad) != 2:
            raise CaseViolation("case II-2 takes two quadratic constraints")
        if len({*quad[0].vertices(), *quad[1].vertices()}) != 4:
            raise CaseViolation("case II-2 chords must be disjoint")
    else:  # pragma: no cover - guarded in AdditionStep
        raise CaseViolation(f"unknown kind {kind}")
    del c1, c2


def _candidates(step: AdditionStep, a: Angularity) -> list[np.ndarray]:
    loci = [_locus(spec, a) for spec in step.constraints]
    pts = intersect(loci[0], loci[1])
    # A placement may not collapse onto any already placed vertex.
    return [
        q
        for q in pts
        if all(math.hypot(*(q - p)) > ENDPOINT_EPS for p in a.positions)
    ]


def _append_vertex(a: Angularity, step: AdditionStep, q: np.ndarray) -> Angularity:
    new_id = a.vertex_count + 1
    positions = np.vstack([a.positions, q])
    triplets = a.angle_set + tuple(_new_triplet(spec, new_id) for spec in step.constraints)
    return Angularity(positions, triplets)


def add_vertex_type1(a: Angularity, step: AdditionStep) -> Angularity:
    """Place a new vertex through a Type-I addition (globally unique point)."""
    if step.kind not in TYPE_I_KINDS:
        raise CaseViolation(f"{step.kind} is not a Type-I case")
    _check_ids(step, a)
    _validate_case(step)
    pts = _candidates(step, a)
    if not pts:
        raise NoIntersection("type-I constraints do not meet")
    if len(pts) > 1:
        raise CaseViolation("type-I constraints met in more than one point")
    return _append_vertex(a, step, pts[0])


def _pick_branch(
    pts: list[np.ndarray], step: AdditionStep, a: Angularity
) -> np.ndarray:
    if len(pts) == 1:
        return pts[0]
    if step.branch_hint is not None:
        ref = np.asarray(step.branch_hint, dtype=float)
    else:
        quad = next(
            c for c in step.constraints if isinstance(c, QuadraticConstraintSpec)
        )
        ref = _locus(quad, a).midpoint()
    d = [math.hypot(*(q - ref)) for q in pts]
    order = sorted(range(len(pts)), key=d.__getitem__)
    if abs(d[order[0]] - d[order[1]]) <= 1e-12:
        raise AmbiguousBranch("branch rule cannot separate the candidate placements")
    return pts[order[0]]


def add_vertex_type2(
    a: Angularity, step: AdditionStep
) -> tuple[Angularity, list[np.ndarray]]:
    """Place a new vertex through a Type-II addition.

    Returns the angularity with the branch-selected placement together with
    the full list of candidate placements (two of them in the ambiguous
    case).  Without a branch hint the candidate nearest the arc midpoint is
    taken.
    """
    if step.kind not in TYPE_II_KINDS:
        raise CaseViolation(f"{step.kind} is not a Type-II case")
    _check_ids(step, a)
    _validate_case(step)
    pts = _candidates(step, a)
    if not pts:
        raise NoIntersection("type-II constraints do not meet")
    chosen = _pick_branch(pts, step, a)
    return _append_vertex(a, step, chosen), pts


@dataclass(frozen=True)
class ConstructionPlan:
    """Seed triangle plus an ordered list of vertex additions.

    The seed constrains the interior angles at vertices 1 and 2; triplet
    orientation follows the winding of the seed positions so the recorded
    signed angles equal the targets.
    """

    seed_positions: np.ndarray
    seed_targets: tuple[float, float]
    steps: tuple[AdditionStep, ...] = field(default_factory=tuple)

    def __post_init__(self):
        pos = np.array(self.seed_positions, dtype=float)
        if pos.shape != (3, 2):
            raise ValidationError("seed takes exactly three positions")
        pos.flags.writeable = False
        object.__setattr__(self, "seed_positions", pos)
        object.__setattr__(self, "seed_targets", tuple(float(t) for t in self.seed_targets))
        object.__setattr__(self, "steps", tuple(self.steps))


def seed_angularity(positions, targets) -> Angularity:
    """Three-vertex angularity with interior angles at vertices 1 and 2 constrained.

    Both targets must lie in (0, pi) and leave room for a positive third
    angle; the realized angles must match the targets.
    """
    pos = np.array(positions, dtype=float)
    a_t, b_t = float(targets[0]), float(targets[1])
    if not (0.0 < a_t < math.pi and 0.0 < b_t < math.pi):
        raise ValidationError("seed targets must lie in (0, pi)")
    if a_t + b_t >= math.pi:
        raise ValidationError("seed targets must sum below pi")
    orient = _cross(pos[1] - pos[0], pos[2] - pos[0])
    if abs(orient) <= 1e-12:
        raise ValidationError("seed positions are collinear")
    if orient > 0.0:
        trips = (AngleTriplet(2, 1, 3, a_t), AngleTriplet(3, 2, 1, b_t))
    else:
        trips = (AngleTriplet(3, 1, 2, a_t), AngleTriplet(1, 2, 3, b_t))
    a = Angularity(pos, trips)
    for t in a.angle_set:
        realized = signed_angle(pos[t.i - 1], pos[t.j - 1], pos[t.k - 1])
        if abs(realized - t.target) > SEED_ANGLE_TOL:
            raise ValidationError(
                f"seed angle {t.vertices()} realizes {realized:.9f}, target {t.target:.9f}"
            )
    return a


@dataclass(frozen=True)
class BuildResult:
    """Outcome of executing a construction plan."""

    angularity: Angularity
    report: RigidityReport
    globally_rigid_certificate: bool
    step_alternatives: tuple[tuple[np.ndarray, ...], ...]
    generic_positions: bool


def build(plan: ConstructionPlan) -> BuildResult:
    """Execute a plan: realize the seed, run every step, classify the result.

    The global-rigidity certificate is set exactly when every step is
    Type-I.  Step failures are re-raised as BuildStepError with the zero-based
    step index attached.  Non-generic byproducts are flagged, not rejected.
    """
    a = seed_angularity(plan.seed_positions, plan.seed_targets)
    alternatives: list[tuple[np.ndarray, ...]] = []
    for idx, step in enumerate(plan.steps):
        try:
            if step.is_type1:
                a = add_vertex_type1(a, step)
                alternatives.append((a.positions[-1].copy(),))
            else:
                a, alts = add_vertex_type2(a, step)
                alternatives.append(tuple(alts))
        except Exception as exc:
            raise BuildStepError(idx, exc) from exc
    return BuildResult(
        angularity=a,
        report=classify(a),
        globally_rigid_certificate=all(s.is_type1 for s in plan.steps),
        step_alternatives=tuple(alternatives),
        generic_positions=is_generic_configuration(a),
    )
