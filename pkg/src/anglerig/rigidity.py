"""Angle rigidity matrix, rank classification, and dependency detection.

The rigidity matrix B has one row per angle triplet and two columns per
vertex (x then y, vertex-major).  Its null space always contains the four
trivial motions (two translations, rotation, uniform scaling), so the rank
can never exceed 2N - 4; an angularity is infinitesimally angle rigid
exactly when the rank reaches that ceiling.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .angularity import TWO_PI, AngleTriplet, Angularity, angle_function
from .errors import CoincidentPoints, NumericalFailure, SubsetSearchBudgetExceeded

#: Default safety factor on the SVD rank threshold.
RANK_SAFETY = 1e3

#: sin of the collinearity threshold used by the genericity surrogate.
GENERIC_SIN_EPS = 1e-6

#: Tolerance for a fan's angles to close up to full turns.
FAN_CLOSURE_TOL = 1e-6

#: Largest angle set enumerated exhaustively for overconstrained subsets.
SUBSET_ENUMERATION_CAP = 20


def _perp(v: np.ndarray) -> np.ndarray:
    """Rotate a 2-vector counterclockwise by pi/2."""
    return np.array([-v[1], v[0]])


def _n_block(p_a: np.ndarray, p_b: np.ndarray) -> np.ndarray:
    """Row block N_ab = ((p_a - p_b)^perp / |p_a - p_b|^2)."""
    d = p_a - p_b
    l2 = float(d @ d)
    if l2 <= 1e-24:
        raise CoincidentPoints("rigidity row requires distinct vertices")
    return _perp(d) / l2


@dataclass(frozen=True)
class RigidityMatrix:
    """Dense M x 2N angle rigidity matrix with its row index.

    Columns are vertex-major: (x_1, y_1, x_2, y_2, ...).  Row m corresponds
    to ``triplets[m]`` and equals minus the gradient of that signed angle.
    """

    entries: np.ndarray
    triplets: tuple[AngleTriplet, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def rigidity_matrix(a: Angularity) -> RigidityMatrix:
    """Assemble the angle rigidity matrix of an angularity.

    The row for (i, j, k) carries N_ij at vertex i's columns, N_ji + N_kj at
    vertex j's and N_jk at vertex k's; each row's blocks sum to zero, which
    encodes translation invariance.
    """
    pos = a.positions
    n = a.vertex_count
    m = a.constraint_count
    b = np.zeros((m, 2 * n))
    for row, t in enumerate(a.angle_set):
        pi, pj, pk = pos[t.i - 1], pos[t.j - 1], pos[t.k - 1]
        n_ij = _n_block(pi, pj)
        n_jk = _n_block(pj, pk)
        ci, cj, ck = 2 * (t.i - 1), 2 * (t.j - 1), 2 * (t.k - 1)
        b[row, ci : ci + 2] += n_ij
        b[row, cj : cj + 2] += -n_ij - n_jk
        b[row, ck : ck + 2] += n_jk
    return RigidityMatrix(b, a.angle_set)


@dataclass(frozen=True)
class TrivialMotionBasis:
    """The four angle-preserving velocity fields: translations, rotation, scaling."""

    q1: np.ndarray
    q2: np.ndarray
    q3: np.ndarray
    q4: np.ndarray

    def as_matrix(self) -> np.ndarray:
        """Stack the basis as a (2N, 4) matrix."""
        return np.stack([self.q1, self.q2, self.q3, self.q4], axis=1)


def trivial_motion_basis(positions) -> TrivialMotionBasis:
    """Translation, rotation, and scaling velocity fields for given positions.

    q1/q2 translate along x/y, q3 rotates every vertex about the origin
    (velocity p^perp), and q4 scales radially (velocity p).  The four vectors
    are linearly independent unless all positions sit at the origin.
    """
    pos = np.asarray(positions, dtype=float)
    n = pos.shape[0]
    q1 = np.tile([1.0, 0.0], n)
    q2 = np.tile([0.0, 1.0], n)
    q3 = np.column_stack([-pos[:, 1], pos[:, 0]]).ravel()
    q4 = pos.ravel().copy()
    return TrivialMotionBasis(q1, q2, q3, q4)


def numerical_rank(matrix, safety: float = RANK_SAFETY, abs_tol: float | None = None) -> int:
    """Rank by counting singular values above a threshold.

    The default threshold is sigma_max * max(rows, cols) * eps * safety;
    pass ``abs_tol`` to use an absolute cutoff instead.
    """
    m = np.asarray(matrix, dtype=float)
    if m.size == 0:
        return 0
    try:
        sigma = np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - numpy rarely fails here
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0
    if abs_tol is not None:
        tau = abs_tol
    else:
        tau = sigma[0] * max(m.shape) * np.finfo(m.dtype).eps * safety
    return int(np.count_nonzero(sigma > tau))


def is_generic_configuration(a: Angularity, sin_eps: float = GENERIC_SIN_EPS) -> bool:
    """Numerical surrogate for genericity: no constrained triple is collinear.

    Exact algebraic independence is untestable in floating point; random
    non-degenerate samples realize the generic rank with probability one, so
    a configuration counts as generic when every constrained triplet spans a
    triangle with |sin| above ``sin_eps`` and no two vertices coincide.
    """
    pos = a.positions
    n = a.vertex_count
    for u in range(n):
        for v in range(u + 1, n):
            if np.hypot(*(pos[u] - pos[v])) <= 1e-12:
                return False
    for t in a.angle_set:
        pi, pj, pk = pos[t.i - 1], pos[t.j - 1], pos[t.k - 1]
        u = pi - pj
        v = pk - pj
        denom = np.hypot(*u) * np.hypot(*v)
        if denom <= 0.0 or abs(u[0] * v[1] - u[1] * v[0]) / denom < sin_eps:
            return False
    return True


@dataclass(frozen=True)
class DependencyFinding:
    """One combinatorial reason for rigidity-matrix row dependency."""

    kind: str  # TripletCycle | FanAroundVertex | OverconstrainedSubset
    members: tuple[tuple[int, int, int], ...]
    detail: dict = field(default_factory=dict)


def _chain_cycles(triplets: list[tuple[int, int, int]]) -> list[tuple[int, ...]]:
    """Directed cycles under the relation (i,j,k) -> (j,k,*)."""
    edges: dict[int, list[int]] = {idx: [] for idx in range(len(triplets))}
    for a_idx, ta in enumerate(triplets):
        for b_idx, tb in enumerate(triplets):
            if a_idx != b_idx and (ta[1], ta[2]) == (tb[0], tb[1]):
                edges[a_idx].append(b_idx)

    cycles: set[tuple[int, ...]] = set()

    def walk(start: int, node: int, path: list[int], on_path: set[int]) -> None:
        for nxt in edges[node]:
            if nxt == start and len(path) >= 2:
                rot = min(range(len(path)), key=lambda r: path[r])
                cycles.add(tuple(path[rot:] + path[:rot]))
            elif nxt > start and nxt not in on_path:
                path.append(nxt)
                on_path.add(nxt)
                walk(start, nxt, path, on_path)
                on_path.discard(nxt)
                path.pop()

    for start in range(len(triplets)):
        walk(start, start, [start], {start})
    return sorted(cycles)


def _fan_cycles(triplets: list[tuple[int, int, int]]) -> list[tuple[int, ...]]:
    """Index cycles of triplets sharing a middle vertex and chaining by outer legs."""
    by_mid: dict[int, list[int]] = {}
    for idx, t in enumerate(triplets):
        by_mid.setdefault(t[1], []).append(idx)

    cycles: set[tuple[int, ...]] = set()
    for members in by_mid.values():
        if len(members) < 3:
            continue
        succ: dict[int, list[int]] = {idx: [] for idx in members}
        for a_idx in members:
            for b_idx in members:
                if a_idx != b_idx and triplets[a_idx][2] == triplets[b_idx][0]:
                    succ[a_idx].append(b_idx)

        def walk(start: int, node: int, path: list[int], on_path: set[int]) -> None:
            for nxt in succ[node]:
                if nxt == start and len(path) >= 3:
                    rot = min(range(len(path)), key=lambda r: path[r])
                    cycles.add(tuple(path[rot:] + path[:rot]))
                elif nxt > start and nxt not in on_path:
                    path.append(nxt)
                    on_path.add(nxt)
                    walk(start, nxt, path, on_path)
                    on_path.discard(nxt)
                    path.pop()

        for start in members:
            walk(start, start, [start], {start})
    return sorted(cycles)


def _fan_closes(angles: list[float | None]) -> bool:
    """True when the fan's angles are unknown or sum to a positive full-turn multiple."""
    if any(v is None for v in angles):
        # A leg cycle around one vertex always sums to an integer number of
        # full turns, so absent values the combinatorial cycle is decisive.
        return True
    s = float(sum(angles))
    turns = round(s / TWO_PI)
    return turns >= 1 and abs(s - turns * TWO_PI) <= FAN_CLOSURE_TOL


def detect_dependent_structures(
    angle_set,
    vertex_count: int,
    realized=None,
    subset_cap: int = SUBSET_ENUMERATION_CAP,
) -> list[DependencyFinding]:
    """Find combinatorial structures that force dependent rigidity-matrix rows.

    Three patterns are searched: chained triplet cycles, fans whose legs
    close a full turn around a shared middle vertex, and minimal subsets A'
    with more constraints than 2N' - 4 allows on their N' vertices.  Fans use
    the triplets' target angles, or ``realized`` values when given, to check
    the full-turn closure.  The subset search is exhaustive; when the angle
    set exceeds ``subset_cap`` a SubsetSearchBudgetExceeded is raised carrying
    the findings of the other detectors in ``partial``.
    """
    triplets = [
        t.vertices() if isinstance(t, AngleTriplet) else tuple(t) for t in angle_set
    ]
    targets: list[float | None]
    if realized is not None:
        targets = [float(v) for v in realized]
    else:
        targets = [
            t.target if isinstance(t, AngleTriplet) else None for t in angle_set
        ]

    findings: list[DependencyFinding] = []

    for cycle in _chain_cycles(triplets):
        findings.append(
            DependencyFinding("TripletCycle", tuple(triplets[i] for i in cycle))
        )

    for cycle in _fan_cycles(triplets):
        if _fan_closes([targets[i] for i in cycle]):
            findings.append(
                DependencyFinding(
                    "FanAroundVertex",
                    tuple(triplets[i] for i in cycle),
                    {"vertex": triplets[cycle[0]][1]},
                )
            )

    m = len(triplets)
    if m > subset_cap:
        raise SubsetSearchBudgetExceeded(
            f"angle set size {m} exceeds enumeration cap {subset_cap}",
            partial=findings,
        )

    minimal: list[frozenset[int]] = []
    for size in range(1, m + 1):
        for combo in itertools.combinations(range(m), size):
            chosen = frozenset(combo)
            if any(prev <= chosen for prev in minimal):
                continue
            verts = set()
            for idx in combo:
                verts.update(triplets[idx])
            if size > 2 * len(verts) - 4:
                minimal.append(chosen)
                findings.append(
                    DependencyFinding(
                        "OverconstrainedSubset",
                        tuple(triplets[i] for i in combo),
                        {"n_prime": len(verts), "m_prime": size},
                    )
                )
    return findings


def min_constraint_involvement(a: Angularity) -> int:
    """Minimum over vertices of the number of triplets that mention the vertex."""
    counts = np.zeros(a.vertex_count, dtype=int)
    for t in a.angle_set:
        for v in set(t.vertices()):
            counts[v - 1] += 1
    return int(counts.min()) if a.vertex_count else 0


@dataclass(frozen=True)
class RigidityReport:
    """Rank-based classification of one angularity."""

    rank: int
    max_rank: int
    infinitesimally_rigid: bool
    minimally_rigid: bool
    independent_angles: bool
    nullspace_dim: int
    dependency_findings: tuple[DependencyFinding, ...]
    min_involvement: int


def classify(
    a: Angularity,
    rank_safety: float = RANK_SAFETY,
    rank_abs_tol: float | None = None,
) -> RigidityReport:
    """Build the full rigidity report for an angularity.

    Infinitesimal rigidity means rank B = 2N - 4; minimal rigidity
    additionally requires the angle count to equal 2N - 4, so that removing
    any constraint loses rigidity.
    """
    b = rigidity_matrix(a)
    rank = numerical_rank(b.entries, safety=rank_safety, abs_tol=rank_abs_tol)
    n = a.vertex_count
    m = a.constraint_count
    max_rank = 2 * n - 4
    rigid = rank == max_rank

    try:
        findings = detect_dependent_structures(
            a.angle_set, n, realized=angle_function(a)
        )
    except SubsetSearchBudgetExceeded as exc:
        findings = exc.partial

    return RigidityReport(
        rank=rank,
        max_rank=max_rank,
        infinitesimally_rigid=rigid,
        minimally_rigid=rigid and m == max_rank,
        independent_angles=rank == m,
        nullspace_dim=2 * n - rank,
        dependency_findings=tuple(findings),
        min_involvement=min_constraint_involvement(a),
    )
