"""Fixed-step closed-loop simulation of angle-only formations.

All agents integrate simultaneously from one state snapshot per step under
the unified bisector law.  The run is deterministic for a given
(spec, initial positions, config, seed); events (collision between
constraint-sharing agents, collinearity of a controlled angle, numerical
blowup) stop the run early and surface the trajectory integrated so far.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .control import FormationSpec
from .errors import (
    CoincidentAgents,
    EventHalt,
    InsufficientData,
    NumericalBlowup,
    ValidationError,
)

#: |error| threshold under which a run counts as converged.
CONVERGENCE_TOL = 1e-6

#: Coordinates beyond this magnitude abort the run.
BLOWUP_LIMIT = 1e12

#: Fit window bounds for exponential-rate estimation.
FIT_FLOOR = 1e-10
FIT_DISCARD = 1e-12


@dataclass(frozen=True)
class SimConfig:
    """Integration and monitoring parameters for one run."""

    step_size: float = 1e-3
    duration: float = 20.0
    integrator: str = "RK4"  # or "Euler"
    collision_epsilon: float = 1e-4
    collinearity_epsilon: float = 1e-8
    seed: int = 0
    frame_mode: str = "global"  # or "random_local_frames"

    def __post_init__(self):
        if self.step_size <= 0.0:
            raise ValidationError("step_size must be positive")
        if self.duration < self.step_size:
            raise ValidationError("duration must cover at least one step")
        if self.integrator not in ("RK4", "Euler"):
            raise ValidationError("integrator must be 'RK4' or 'Euler'")
        if self.frame_mode not in ("global", "random_local_frames"):
            raise ValidationError("frame_mode must be 'global' or 'random_local_frames'")


@dataclass(frozen=True)
class SimEvent:
    time: float
    kind: str
    agents: tuple[int, ...]


@dataclass(frozen=True)
class Trajectory:
    """Logged run: one row per step, plus events and fitted decay rates."""

    times: np.ndarray  # (T,)
    positions: np.ndarray  # (T, N, 2)
    angle_errors: np.ndarray  # (T, K)
    events: tuple[SimEvent, ...]
    converged: bool
    fitted_rates: tuple[tuple[float, float] | None, ...]
    metadata: dict = field(default_factory=dict)

    @property
    def agent_count(self) -> int:
        return self.positions.shape[1]

    @property
    def final_positions(self) -> np.ndarray:
        return self.positions[-1]


class _System:
    """Index arrays and the vectorized right-hand side for one formation."""

    def __init__(self, spec: FormationSpec, frames: np.ndarray | None):
        constraints = spec.constraints()
        self.spec = spec
        self.mid = np.array([t.j - 1 for t in constraints])
        self.leg_a = np.array([t.i - 1 for t in constraints])
        self.leg_b = np.array([t.k - 1 for t in constraints])
        self.targets = np.array([t.target for t in constraints])
        self.labels = tuple(f"e_{t.i}{t.j}{t.k}" for t in constraints)
        self.frames = frames  # (N, 2, 2) local->global rotations, or None
        pairs = set()
        for t in constraints:
            i, j, k = t.i - 1, t.j - 1, t.k - 1
            pairs.update({tuple(sorted(p)) for p in ((i, j), (j, k), (i, k))})
        self.sharing_pairs = np.array(sorted(pairs))  # (P, 2), 0-based

    def bearings(self, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        va = p[self.leg_a] - p[self.mid]
        vb = p[self.leg_b] - p[self.mid]
        la = np.sqrt(va[:, 0] ** 2 + va[:, 1] ** 2)
        lb = np.sqrt(vb[:, 0] ** 2 + vb[:, 1] ** 2)
        if la.min() <= 1e-12 or lb.min() <= 1e-12:
            raise CoincidentAgents("coincident agents inside a controlled angle")
        return va / la[:, None], vb / lb[:, None]

    def errors(self, p: np.ndarray) -> np.ndarray:
        za, zb = self.bearings(p)
        cos_a = np.clip(np.sum(za * zb, axis=1), -1.0, 1.0)
        return np.arccos(cos_a) - self.targets

    def rhs(self, p: np.ndarray) -> np.ndarray:
        za, zb = self.bearings(p)
        if self.frames is not None:
            rt = np.swapaxes(self.frames[self.mid], 1, 2)
            za = np.einsum("kij,kj->ki", rt, za)
            zb = np.einsum("kij,kj->ki", rt, zb)
        cos_a = np.clip(np.sum(za * zb, axis=1), -1.0, 1.0)
        err = np.arccos(cos_a) - self.targets
        contrib = -err[:, None] * (za + zb)
        u = np.zeros_like(p)
        np.add.at(u, self.mid, contrib)
        if self.frames is not None:
            u = np.einsum("nij,nj->ni", self.frames, u)
        return u


def _draw_frames(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    thetas = rng.uniform(0.0, 2.0 * math.pi, size=n)
    frames = np.empty((n, 2, 2))
    frames[:, 0, 0] = np.cos(thetas)
    frames[:, 0, 1] = -np.sin(thetas)
    frames[:, 1, 0] = np.sin(thetas)
    frames[:, 1, 1] = np.cos(thetas)
    return frames


def _step(system: _System, p: np.ndarray, h: float, integrator: str) -> np.ndarray:
    if integrator == "Euler":
        return p + h * system.rhs(p)
    k1 = system.rhs(p)
    k2 = system.rhs(p + 0.5 * h * k1)
    k3 = system.rhs(p + 0.5 * h * k2)
    k4 = system.rhs(p + h * k3)
    return p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _fit_all(times: np.ndarray, errors: np.ndarray):
    rates = []
    for col in range(errors.shape[1]):
        try:
            rates.append(fit_exponential_rate(times, np.abs(errors[:, col])))
        except InsufficientData:
            rates.append(None)
    return tuple(rates)


def simulate(spec: FormationSpec, initial_positions, cfg: SimConfig = SimConfig()) -> Trajectory:
    """Integrate the closed-loop formation and log every step.

    Initial positions must already be admissible: pairwise separated and
    with no controlled angle collinear (the invariant-region hypotheses).
    An event raises EventHalt carrying the truncated trajectory; coordinates
    beyond the blowup limit raise NumericalBlowup likewise.
    """
    p = np.array(initial_positions, dtype=float)
    n = spec.agent_count
    if p.shape != (n, 2):
        raise ValidationError(f"initial positions must be ({n}, 2)")
    frames = (
        _draw_frames(n, cfg.seed) if cfg.frame_mode == "random_local_frames" else None
    )
    system = _System(spec, frames)

    dists = _pair_distances(p, _all_pairs(n))
    if dists.min() < cfg.collision_epsilon:
        raise ValidationError("initial positions contain a near-collision")
    sin_a = np.sin(system.errors(p) + system.targets)
    if sin_a.min() < cfg.collinearity_epsilon:
        raise ValidationError("initial formation has a collinear controlled angle")

    steps = int(round(cfg.duration / cfg.step_size))
    times = np.arange(steps + 1) * cfg.step_size
    pos_log = np.empty((steps + 1, n, 2))
    err_log = np.empty((steps + 1, len(system.targets)))
    events: list[SimEvent] = []
    warned_pairs: set[tuple[int, int]] = set()
    all_pairs = _all_pairs(n)
    sharing = {tuple(q) for q in system.sharing_pairs}

    def finish(upto: int, converged: bool) -> Trajectory:
        t_used = times[: upto + 1]
        e_used = err_log[: upto + 1]
        return Trajectory(
            times=t_used,
            positions=pos_log[: upto + 1],
            angle_errors=e_used,
            events=tuple(events),
            converged=converged,
            fitted_rates=_fit_all(t_used, e_used),
            metadata={
                "integrator": cfg.integrator,
                "step_size": cfg.step_size,
                "checked_horizon": float(t_used[-1]),
                "collision_epsilon": cfg.collision_epsilon,
                "collinearity_epsilon": cfg.collinearity_epsilon,
                "frame_mode": cfg.frame_mode,
                "max_initial_abs_error": float(np.abs(err_log[0]).max()),
                "small_velocity_assumption": "initial angle errors taken small",
                "channels": list(system.labels),
            },
        )

    halt: SimEvent | None = None
    upto = 0
    for s in range(steps + 1):
        err = system.errors(p)
        pos_log[s] = p
        err_log[s] = err
        upto = s

        if s > 0:
            t_now = times[s]
            if np.abs(p).max() > BLOWUP_LIMIT:
                raise NumericalBlowup(
                    f"coordinate exceeded {BLOWUP_LIMIT:g} at t={t_now:g}",
                    trajectory=finish(s, False),
                )
            sin_a = np.sin(err + system.targets)
            flat = np.flatnonzero(sin_a < cfg.collinearity_epsilon)
            if flat.size:
                k = flat[0]
                halt = SimEvent(
                    float(t_now),
                    "collinearity",
                    (system.leg_a[k] + 1, system.mid[k] + 1, system.leg_b[k] + 1),
                )
                break
            dists = _pair_distances(p, all_pairs)
            close = np.flatnonzero(dists < cfg.collision_epsilon)
            for idx in close:
                pair = tuple(all_pairs[idx])
                agents = (pair[0] + 1, pair[1] + 1)
                if pair in sharing:
                    halt = SimEvent(float(t_now), "collision", agents)
                    break
                if pair not in warned_pairs:
                    warned_pairs.add(pair)
                    events.append(SimEvent(float(t_now), "collision_warning", agents))
            if halt is not None:
                break

        if s == steps:
            break
        try:
            p = _step(system, p, cfg.step_size, cfg.integrator)
        except CoincidentAgents:
            halt = SimEvent(float(times[s + 1]), "collision", ())
            break

    if halt is not None:
        events.append(halt)
        raise EventHalt(
            f"{halt.kind} at t={halt.time:g}", trajectory=finish(upto, False)
        )

    converged = bool(np.all(np.abs(err_log[steps]) < CONVERGENCE_TOL))
    return finish(steps, converged)


def _all_pairs(n: int) -> np.ndarray:
    return np.array([(i, j) for i in range(n) for j in range(i + 1, n)])


def _pair_distances(p: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    d = p[pairs[:, 0]] - p[pairs[:, 1]]
    return np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2)


def fit_exponential_rate(times, abs_error_series) -> tuple[float, float]:
    """Least-squares decay rate of log|e| over the mid-decay window.

    Samples are kept where |e| lies in [1e-10, half the initial error], which
    skips both the transient and the numerical noise floor.  Returns
    (rate, r_squared) with rate positive for decay; raises InsufficientData
    with fewer than 10 usable samples.
    """
    t = np.asarray(times, dtype=float)
    e = np.abs(np.asarray(abs_error_series, dtype=float))
    if t.shape != e.shape:
        raise ValidationError("times and series must have matching shapes")
    keep = e >= FIT_DISCARD
    if not keep.any():
        raise InsufficientData("series vanishes everywhere")
    e0 = e[0]
    window = keep & (e >= FIT_FLOOR) & (e <= 0.5 * e0)
    if int(window.sum()) < 10:
        raise InsufficientData(f"only {int(window.sum())} samples in the fit window")
    x = t[window]
    y = np.log(e[window])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return (float(-slope), float(r2))


def local_frame_experiment(
    spec: FormationSpec, initial_positions, cfg: SimConfig, frame_seed: int
) -> tuple[Trajectory, Trajectory, float]:
    """Run once globally and once with random fixed per-agent frames.

    Returns both trajectories and the maximum position deviation between
    them; since angle errors are scalars the two laws are equivalent and the
    deviation stays at integration roundoff.
    """
    traj_global = simulate(spec, initial_positions, replace(cfg, frame_mode="global"))
    traj_local = simulate(
        spec,
        initial_positions,
        replace(cfg, frame_mode="random_local_frames", seed=frame_seed),
    )
    upto = min(traj_global.positions.shape[0], traj_local.positions.shape[0])
    deviation = float(
        np.abs(traj_global.positions[:upto] - traj_local.positions[:upto]).max()
    )
    return traj_global, traj_local, deviation


@dataclass(frozen=True)
class MonitorReport:
    """Invariant checks over a finished trajectory."""

    max_triangle_error_sum: float
    min_pair_distance: float
    min_sin_angle: float
    violations: tuple[str, ...]


def monitor_invariants(traj: Trajectory, spec: FormationSpec) -> MonitorReport:
    """Check the closed-loop invariants along a trajectory.

    Verifies that the triangle errors cancel (e1 + e2 + e3 = 0 up to
    roundoff), that constraint-sharing agents stay separated, and that no
    controlled angle reaches collinearity.
    """
    system = _System(spec, None)
    err = traj.angle_errors
    sum_tri = float(np.abs(err[:, :3].sum(axis=1)).max())
    sin_min = float(np.sin(err + system.targets[None, :]).min())
    dmin = math.inf
    for p in traj.positions:
        dmin = min(dmin, float(_pair_distances(p, system.sharing_pairs).min()))
    violations = []
    col_eps = traj.metadata.get("collision_epsilon", 1e-4)
    lin_eps = traj.metadata.get("collinearity_epsilon", 1e-8)
    if sum_tri > 1e-9:
        violations.append(f"triangle error sum reached {sum_tri:g}")
    if dmin < col_eps:
        violations.append(f"constraint-sharing agents approached to {dmin:g}")
    if sin_min < lin_eps:
        violations.append(f"a controlled angle reached sin = {sin_min:g}")
    for ev in traj.events:
        if ev.kind in ("collision", "collinearity"):
            violations.append(f"{ev.kind} event at t={ev.time:g}")
    return MonitorReport(
        max_triangle_error_sum=sum_tri,
        min_pair_distance=dmin,
        min_sin_angle=sin_min,
        violations=tuple(violations),
    )
