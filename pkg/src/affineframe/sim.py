"""Closed-loop tracking of affine targets with scripted topology events.

Leaders sit on their targets ``A r_l + b``. Followers run the single
integrator law ``p_f' = -(Omega_ff p_f + Omega_fl p_l)``, whose error
``delta_f = p_f - p_f*`` obeys ``delta_f' = -Omega_ff delta_f`` because affine
images of the nominal configuration lie in the stress kernel. Integration is
explicit Euler; targets are piecewise constant in time.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .construction import DEFAULT_S, AdditionRequest, add_vertex
from .errors import AuditError, DegenerateConfigurationError, FrameworkError
from .framework import Framework, omega_blocks
from .pruning import delete_edge, delete_vertex
from .verify import AuditReport, spectral_audit

DET_ATOL = 1e-9
DEFAULT_DT_FACTOR = 0.01


class UnstableStepError(FrameworkError):
    """``dt`` exceeds the explicit-Euler stability bound ``2 / lambda_max(Omega_ff)``."""


class ScenarioError(FrameworkError):
    """An event could not be applied; carries the event time and the partial trace."""

    def __init__(self, time: float, event, cause: Exception, trace: "Trace"):
        super().__init__(f"t={time:g}: {type(event).__name__} failed: {cause}")
        self.time = time
        self.event = event
        self.cause = cause
        self.trace = trace


# -- trajectories ----------------------------------------------------------


@dataclass(frozen=True)
class AffineSegment:
    A: np.ndarray
    b: np.ndarray
    duration: float

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.shape != (len(b), len(b)):
            raise ValueError(f"A must be {len(b)}x{len(b)}, got {A.shape}")
        if abs(np.linalg.det(A)) <= DET_ATOL:
            raise DegenerateConfigurationError("affine target matrix is singular")
        if not self.duration > 0:
            raise ValueError("segment duration must be positive")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)


class AffineTrajectory:
    """Piecewise-constant ``(A, b)``; the last segment holds after its end."""

    def __init__(self, segments: Sequence[AffineSegment]):
        if not segments:
            raise ValueError("a trajectory needs at least one segment")
        dims = {len(s.b) for s in segments}
        if len(dims) != 1:
            raise ValueError("segments disagree on dimension")
        self.segments = tuple(segments)
        self.dim = dims.pop()
        self.switch_times = tuple(np.cumsum([s.duration for s in self.segments]))

    @classmethod
    def constant(cls, dim: int, duration: float = 1.0, A=None, b=None) -> "AffineTrajectory":
        A = np.eye(dim) if A is None else A
        b = np.zeros(dim) if b is None else b
        return cls([AffineSegment(A, b, duration)])

    @property
    def duration(self) -> float:
        return float(self.switch_times[-1])

    def segment_at(self, t: float) -> AffineSegment:
        k = int(np.searchsorted(self.switch_times, t, side="right"))
        return self.segments[min(k, len(self.segments) - 1)]

    def at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        seg = self.segment_at(t)
        return seg.A, seg.b


def target_configuration(framework: Framework, A, b) -> np.ndarray:
    """``A r_i + b`` for every vertex, in ``ids`` order."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if abs(np.linalg.det(A)) <= DET_ATOL:
        raise DegenerateConfigurationError("affine target matrix is singular")
    return framework.positions @ A.T + np.asarray(b, dtype=float)


def follower_fixed_point(framework: Framework, leader_positions) -> np.ndarray:
    """Follower positions solving ``Omega_ff p_f = -Omega_fl p_l`` (followers in ``ids`` order).

    ``leader_positions`` follows ``framework.leaders`` order.
    """
    p_l = np.asarray(leader_positions, dtype=float).reshape(len(framework.leaders), framework.dim)
    _, _, omega_fl, omega_ff = omega_blocks(framework)
    try:
        chol = np.linalg.cholesky(omega_ff)
    except np.linalg.LinAlgError:
        raise DegenerateConfigurationError("follower block of the stress is not positive definite") from None
    y = np.linalg.solve(chol, -omega_fl @ p_l)
    return np.linalg.solve(chol.T, y)


def step_limit(framework: Framework) -> float:
    """Largest stable Euler step, ``2 / lambda_max(Omega_ff)``."""
    _, _, _, omega_ff = omega_blocks(framework)
    if omega_ff.size == 0:
        return math.inf
    return 2.0 / float(np.linalg.eigvalsh(omega_ff)[-1])


def default_dt(framework: Framework) -> float:
    return DEFAULT_DT_FACTOR * step_limit(framework) / 2.0


# -- traces ----------------------------------------------------------------


@dataclass
class TraceSample:
    t: float
    ids: tuple[int, ...]
    positions: np.ndarray
    errors: np.ndarray   # per-agent distance to target, ids order

    @property
    def error_norm(self) -> float:
        return float(np.linalg.norm(self.errors))


@dataclass
class EventRecord:
    t: float
    label: str
    audit: AuditReport

    @property
    def passed(self) -> bool:
        return self.audit.passed


@dataclass
class Trace:
    samples: list[TraceSample] = field(default_factory=list)
    events: list[EventRecord] = field(default_factory=list)
    boundaries: list[float] = field(default_factory=list)  # event and target-switch times

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def error_norms(self) -> np.ndarray:
        return np.array([s.error_norm for s in self.samples])

    def error_at_end(self, t: float) -> float:
        """Error norm of the first sample at time ``t``: the state just before an event or switch."""
        for s in self.samples:
            if s.t >= t - 1e-12:
                return s.error_norm
        raise ValueError(f"no sample at or after t={t}")

    def intervals(self) -> list[tuple[float, float]]:
        """Consecutive ``(start, end)`` spans between boundaries."""
        if not self.samples:
            return []
        cuts = sorted({self.samples[0].t, *self.boundaries, self.samples[-1].t})
        return [(a, b) for a, b in zip(cuts, cuts[1:]) if b > a]

    def decay_rate(self, t0: float, t1: float, floor: float = 1e-9) -> float:
        """Least-squares slope of ``log error_norm`` over ``(t0, t1]``, ignoring errors below ``floor``."""
        t, e = self.times, self.error_norms
        mask = (t > t0) & (t <= t1) & (e > floor)
        if np.count_nonzero(mask) < 2:
            return math.nan
        return float(np.polyfit(t[mask], np.log(e[mask]), 1)[0])

    def to_csv(self, path) -> None:
        """Long format: one row per agent per sample with columns ``t,id,x,y[,z],err``."""
        dim = self.samples[0].positions.shape[1] if self.samples else 2
        axes = ["x", "y", "z"][:dim]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "id", *axes, "err"])
            for s in self.samples:
                for vid, p, err in zip(s.ids, s.positions, s.errors):
                    w.writerow([repr(s.t), vid, *(repr(float(x)) for x in p), repr(float(err))])


# -- integration -----------------------------------------------------------


def _sample(framework: Framework, t: float, positions: np.ndarray, trajectory: AffineTrajectory) -> TraceSample:
    A, b = trajectory.at(t)
    err = np.linalg.norm(positions - target_configuration(framework, A, b), axis=1)
    return TraceSample(t, framework.ids, positions.copy(), err)


def _advance(trace: Trace, framework: Framework, positions: np.ndarray, trajectory: AffineTrajectory, dt: float, t0: float, t1: float, record_every: int) -> np.ndarray:
    """Euler-integrate from ``t0`` to ``t1``, splitting at target switches."""
    limit = step_limit(framework)
    if dt >= limit:
        raise UnstableStepError(f"dt={dt:g} violates the stability bound {limit:g}")
    idx = framework.index
    li = [idx[v] for v in framework.leaders]
    fi = [idx[v] for v in framework.followers]
    _, _, omega_fl, omega_ff = omega_blocks(framework)
    p = positions.copy()
    cuts = [t0] + [s for s in trajectory.switch_times if t0 < s < t1] + [t1]
    for a, b in zip(cuts, cuts[1:]):
        A, bvec = trajectory.at(a)
        target = target_configuration(framework, A, bvec)
        p[li] = target[li]
        p_l = p[li]
        drive = omega_fl @ p_l
        steps = max(1, math.ceil((b - a) / dt - 1e-9))
        h = (b - a) / steps
        p_f = p[fi]
        for k in range(1, steps + 1):
            p_f = p_f - h * (omega_ff @ p_f + drive)
            if k % record_every == 0 or k == steps:
                p[fi] = p_f
                # errors are measured against this segment's target, also at its end
                err = np.linalg.norm(p - target, axis=1)
                trace.samples.append(TraceSample(a + k * h if k < steps else b, framework.ids, p.copy(), err))
        p[fi] = p_f
        if b < t1:
            trace.boundaries.append(b)
    return p


def integrate(
    framework: Framework,
    initial: np.ndarray | None,
    trajectory: AffineTrajectory,
    dt: float | None = None,
    horizon: float | None = None,
    *,
    record_every: int = 1,
) -> Trace:
    """Track ``trajectory`` from ``initial`` positions (``ids`` order) for ``horizon`` seconds.

    ``initial`` defaults to the nominal configuration. ``dt`` defaults to
    :func:`default_dt`; ``horizon`` to the trajectory's duration.
    """
    dt = default_dt(framework) if dt is None else float(dt)
    if not dt > 0:
        raise ValueError("dt must be positive")
    horizon = trajectory.duration if horizon is None else float(horizon)
    if initial is None:
        initial = framework.positions
    p = np.array(initial, dtype=float).reshape(framework.n, framework.dim)
    trace = Trace()
    trace.samples.append(_sample(framework, 0.0, p, trajectory))
    _advance(trace, framework, p, trajectory, dt, 0.0, horizon, record_every)
    return trace


# -- scenarios -------------------------------------------------------------


@dataclass(frozen=True)
class AddVertexEvent:
    time: float
    point: tuple[float, ...]           # nominal coordinates
    s: float = DEFAULT_S
    parents: tuple[int, ...] | None = None
    start: tuple[float, ...] | None = None   # physical join position; default: its current target


@dataclass(frozen=True)
class DeleteEdgeEvent:
    time: float
    j: int
    k: int
    relay: tuple[float, ...] | None = None
    anchor: int | None = None


@dataclass(frozen=True)
class DeleteVertexEvent:
    time: float
    u: int


Event = Union[AddVertexEvent, DeleteEdgeEvent, DeleteVertexEvent]


@dataclass(frozen=True)
class ScenarioScript:
    events: tuple[Event, ...] = ()
    d_per: float | None = None

    def __post_init__(self):
        times = [e.time for e in self.events]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("event timestamps must be nondecreasing")
        if any(t < 0 for t in times):
            raise ValueError("event timestamps must be nonnegative")


def _label(ev: Event) -> str:
    if isinstance(ev, AddVertexEvent):
        return f"add vertex at {tuple(ev.point)}"
    if isinstance(ev, DeleteEdgeEvent):
        return f"delete edge ({ev.j}, {ev.k})"
    return f"delete vertex {ev.u}"


def apply_event(framework: Framework, event: Event, d_per: float | None = None) -> Framework:
    if isinstance(event, AddVertexEvent):
        return add_vertex(framework, AdditionRequest(tuple(event.point), parents=event.parents, s=event.s, d_per=d_per))
    if isinstance(event, DeleteEdgeEvent):
        return delete_edge(framework, event.j, event.k, d_per=d_per, relay=event.relay, anchor=event.anchor)
    if isinstance(event, DeleteVertexEvent):
        return delete_vertex(framework, event.u, d_per=d_per)
    raise TypeError(f"unknown event {event!r}")


def _carry_state(old: Framework, new: Framework, p: np.ndarray, A, b, event: Event) -> np.ndarray:
    """Map the state onto the new vertex set; newcomers start at their join positions."""
    target = target_configuration(new, A, b)
    out = target.copy()
    for v in new.ids:
        if v in old.index:
            out[new.index[v]] = p[old.index[v]]
    if isinstance(event, AddVertexEvent) and event.start is not None:
        fresh = [v for v in new.ids if v not in old.index]
        for v in fresh:
            out[new.index[v]] = np.asarray(event.start, dtype=float)
    return out


def run_scenario(
    framework: Framework,
    script: ScenarioScript,
    trajectory: AffineTrajectory,
    dt: float | None = None,
    *,
    horizon: float | None = None,
    initial: np.ndarray | None = None,
    record_every: int = 1,
) -> Trace:
    """Integrate between events and apply each event, auditing after it.

    A fixed ``dt`` is checked against every intermediate framework; without
    one, each inter-event span uses :func:`default_dt` of its framework.
    Agents start at the nominal configuration unless ``initial`` is given.
    Raises :class:`ScenarioError` carrying the partial trace when an event
    fails or leaves a framework that does not pass the audit.
    """
    horizon = trajectory.duration if horizon is None else float(horizon)
    if dt is not None and dt >= step_limit(framework):
        raise UnstableStepError(f"dt={dt:g} violates the stability bound {step_limit(framework):g}")
    if initial is None:
        initial = framework.positions
    p = np.array(initial, dtype=float).reshape(framework.n, framework.dim)
    trace = Trace()
    trace.samples.append(_sample(framework, 0.0, p, trajectory))
    trace.events.append(EventRecord(0.0, "initial", spectral_audit(framework)))
    t = 0.0
    fw = framework
    for ev in script.events:
        if ev.time > horizon:
            break
        if ev.time > t:
            step = default_dt(fw) if dt is None else dt
            p = _advance(trace, fw, p, trajectory, step, t, ev.time, record_every)
            t = ev.time
        try:
            new = apply_event(fw, ev, script.d_per)
        except FrameworkError as exc:
            raise ScenarioError(ev.time, ev, exc, trace) from exc
        report = spectral_audit(new)
        trace.events.append(EventRecord(ev.time, _label(ev), report))
        if not report.passed:
            raise ScenarioError(ev.time, ev, AuditError("; ".join(report.failures()), report), trace)
        A, b = trajectory.at(t)
        p = _carry_state(fw, new, p, A, b, ev)
        fw = new
        trace.boundaries.append(t)
        trace.samples.append(_sample(fw, t, p, trajectory))
    if horizon > t:
        step = default_dt(fw) if dt is None else dt
        _advance(trace, fw, p, trajectory, step, t, horizon, record_every)
    trace.boundaries = sorted(set(trace.boundaries))
    return trace
