"""Angularity data model and signed-angle evaluation.

An angularity is a set of N >= 3 planar vertices together with an ordered
set of angle triplets (i, j, k).  The triplet's angle is measured at the
middle vertex j, counterclockwise from the ray j->i to the ray j->k, and
lives in [0, 2*pi).  Vertex ids are 1-based throughout the public API;
positions are stored row-per-vertex in an (N, 2) float array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CoincidentPoints, MismatchedStructure

TWO_PI = 2.0 * math.pi

#: Distance below which two vertices count as coincident.
COINCIDENCE_EPS = 1e-12

#: Default tolerance for equivalence / congruence comparisons (radians).
DEFAULT_ANGLE_TOL = 1e-6


def wrap_angle(theta: float) -> float:
    """Wrap an angle to [0, 2*pi)."""
    r = math.fmod(theta, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if r >= TWO_PI:  # fmod of a tiny negative can land exactly on 2*pi
        r = 0.0
    return r


def circular_difference(a: float, b: float) -> float:
    """Absolute distance between two angles measured on the circle, in [0, pi]."""
    d = math.fmod(a - b, TWO_PI)
    if d < -math.pi:
        d += TWO_PI
    elif d > math.pi:
        d -= TWO_PI
    return abs(d)


@dataclass(frozen=True)
class AngleTriplet:
    """Ordered triplet (i, j, k): the angle at vertex j from ray j->i to ray j->k.

    ``target`` is an optional prescribed value in [0, 2*pi) radians; it is
    carried along for constraint bookkeeping and never affects evaluation.
    """

    i: int
    j: int
    k: int
    target: float | None = None

    def vertices(self) -> tuple[int, int, int]:
        return (self.i, self.j, self.k)

    def reversed(self) -> "AngleTriplet":
        """The explementary triplet (k, j, i)."""
        return AngleTriplet(self.k, self.j, self.i, self.target)

    def with_target(self, target: float | None) -> "AngleTriplet":
        return replace(self, target=target)


@dataclass(frozen=True, eq=False)
class Angularity:
    """Vertices, angle set, and planar embedding.

    ``positions`` is an (N, 2) array (vertex v at row v-1) and is treated as
    immutable; all operations on angularities are pure functions.
    """

    positions: np.ndarray
    angle_set: tuple[AngleTriplet, ...] = field(default_factory=tuple)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError("positions must be an (N, 2) array")
        pos.flags.writeable = False
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "angle_set", tuple(self.angle_set))

    @property
    def vertex_count(self) -> int:
        return self.positions.shape[0]

    @property
    def constraint_count(self) -> int:
        return len(self.angle_set)

    def position(self, vertex: int) -> np.ndarray:
        """Position of a 1-based vertex id."""
        return self.positions[vertex - 1]

    def with_positions(self, positions) -> "Angularity":
        return Angularity(positions, self.angle_set)

    def targets(self) -> np.ndarray:
        """Target vector in radians; NaN where a triplet has no target."""
        return np.array(
            [t.target if t.target is not None else math.nan for t in self.angle_set]
        )


def signed_angle(p_i, p_j, p_k) -> float:
    """Counterclockwise angle at ``p_j`` from ray to ``p_i`` to ray to ``p_k``.

    Returns a value in [0, 2*pi).  Computed from ray azimuths so that values
    near the 0/2*pi seam stay well conditioned.
    """
    p_i = np.asarray(p_i, dtype=float)
    p_j = np.asarray(p_j, dtype=float)
    p_k = np.asarray(p_k, dtype=float)
    a = p_i - p_j
    b = p_k - p_j
    if math.hypot(a[0], a[1]) <= COINCIDENCE_EPS or math.hypot(b[0], b[1]) <= COINCIDENCE_EPS:
        raise CoincidentPoints("angle rays require distinct endpoints")
    return wrap_angle(math.atan2(b[1], b[0]) - math.atan2(a[1], a[0]))


def angle_function(a: Angularity) -> np.ndarray:
    """Stacked vector of the angularity's constrained angles, in angle-set order."""
    pos = a.positions
    return np.array(
        [signed_angle(pos[t.i - 1], pos[t.j - 1], pos[t.k - 1]) for t in a.angle_set]
    )


def interior_angle(p_i, p_j, p_k) -> float:
    """Unsigned angle at ``p_j`` in [0, pi], the arccos of the rays' dot product."""
    theta = signed_angle(p_i, p_j, p_k)
    return min(theta, TWO_PI - theta)


def _require_same_structure(a: Angularity, b: Angularity) -> None:
    if a.vertex_count != b.vertex_count:
        raise MismatchedStructure(
            f"vertex counts differ: {a.vertex_count} vs {b.vertex_count}"
        )
    if tuple(t.vertices() for t in a.angle_set) != tuple(t.vertices() for t in b.angle_set):
        raise MismatchedStructure("angle sets differ")


def is_equivalent(a: Angularity, b: Angularity, tol: float = DEFAULT_ANGLE_TOL) -> bool:
    """True when every constrained angle agrees between the two embeddings.

    Angles are compared on the circle, so 2*pi - eps and eps count as 2*eps
    apart.  Raises MismatchedStructure when the two angularities do not share
    vertex count and angle set.
    """
    _require_same_structure(a, b)
    fa = angle_function(a)
    fb = angle_function(b)
    return all(circular_difference(x, y) <= tol for x, y in zip(fa, fb))


def is_congruent(a: Angularity, b: Angularity, tol: float = DEFAULT_ANGLE_TOL) -> bool:
    """True when all N(N-1)(N-2) ordered-triple angles agree between embeddings."""
    if a.vertex_count != b.vertex_count:
        raise MismatchedStructure(
            f"vertex counts differ: {a.vertex_count} vs {b.vertex_count}"
        )
    n = a.vertex_count
    pa, pb = a.positions, b.positions
    for j in range(n):
        for i in range(n):
            if i == j:
                continue
            for k in range(n):
                if k == j or k == i:
                    continue
                ta = signed_angle(pa[i], pa[j], pa[k])
                tb = signed_angle(pb[i], pb[j], pb[k])
                if circular_difference(ta, tb) > tol:
                    return False
    return True


@dataclass(frozen=True)
class ValidationFinding:
    """One violated angularity invariant."""

    kind: str
    members: tuple[int, ...]
    message: str


def validate(a: Angularity) -> list[ValidationFinding]:
    """Report every violated invariant; an empty list means the angularity is valid."""
    findings: list[ValidationFinding] = []
    n = a.vertex_count
    pos = a.positions

    if n < 3:
        findings.append(
            ValidationFinding("TooFewVertices", (), f"need at least 3 vertices, got {n}")
        )

    for u in range(n):
        for v in range(u + 1, n):
            if np.hypot(*(pos[u] - pos[v])) <= COINCIDENCE_EPS:
                findings.append(
                    ValidationFinding(
                        "CoincidentPoints",
                        (u + 1, v + 1),
                        f"vertices {u + 1} and {v + 1} coincide",
                    )
                )

    seen: dict[tuple[int, int, int], int] = {}
    for idx, t in enumerate(a.angle_set):
        trips = t.vertices()
        if len(set(trips)) != 3:
            findings.append(
                ValidationFinding(
                    "DegenerateTriplet", trips, f"triplet {trips} repeats a vertex"
                )
            )
            continue
        if not all(1 <= v <= n for v in trips):
            findings.append(
                ValidationFinding(
                    "BadIndices", trips, f"triplet {trips} references a missing vertex"
                )
            )
            continue
        if trips in seen:
            findings.append(
                ValidationFinding(
                    "DuplicateTriplet", trips, f"triplet {trips} appears twice"
                )
            )
        rev = (t.k, t.j, t.i)
        if rev in seen:
            findings.append(
                ValidationFinding(
                    "ExplementaryPair",
                    trips,
                    f"triplets {rev} and {trips} are explementary",
                )
            )
        seen[trips] = idx
        if t.target is not None and not (0.0 <= t.target < TWO_PI):
            findings.append(
                ValidationFinding(
                    "TargetOutOfRange",
                    trips,
                    f"target {t.target} outside [0, 2*pi)",
                )
            )
    return findings
