"""Vertex addition and batch growth.

A new vertex ``u`` is attached to ``d+1`` parents. With ``phi`` the unit null
vector over the parents' and ``u``'s positions, the stress gains the block
``s * phi phi^T`` on those ``d+2`` vertices. That block is PSD, annihilates
every affine image of the configuration, and gives ``u`` the diagonal entry
``s * phi[-1]**2 > 0``, which is what keeps the stress PSD with the right
rank and the follower block positive definite.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import (
    AuditError,
    DegenerateConfigurationError,
    FrameworkError,
    PerceptionError,
    TopologyError,
)
from .framework import Framework, HierarchyRecord, apply_block
from .geometry import as_points, compute_phi, is_general_position
from .verify import DEFAULT_TOLERANCES, Tolerances, spectral_audit

DEFAULT_S = 1.0
#: Default conditioning margin for sampled growth points (see random_growth_points).
MIN_PHI = 0.2


@dataclass(frozen=True)
class AdditionRequest:
    """Where a new vertex goes and how it is attached.

    Either ``parents`` (``d+1`` ids) or ``d_per`` decides the parent set; with
    neither, every existing vertex counts as perceived.
    """

    point: tuple[float, ...]
    parents: tuple[int, ...] | None = None
    s: float = DEFAULT_S
    d_per: float | None = None
    vid: int | None = None

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError(f"scaling s must be positive, got {self.s}")
        if self.d_per is not None and not self.d_per > 0:
            raise ValueError("perception radius must be positive")


def select_parents_from(ids: Sequence[int], positions: np.ndarray, p_u, d_per: float | None) -> tuple[int, ...]:
    """Position-only parent selection shared by :func:`select_parents` and point samplers.

    Candidates within ``d_per`` are ranked by ``(distance, id)``; the first
    ``d+1``-combination in lexicographic rank order that is in general
    position together with ``p_u`` wins.
    """
    d = positions.shape[1]
    p_u = as_points(p_u, d)[0]
    ids_arr = np.asarray(ids)
    dist = np.linalg.norm(positions - p_u, axis=1)
    mask = np.ones(len(ids_arr), dtype=bool) if d_per is None else dist <= d_per
    if np.count_nonzero(mask) < d + 1:
        raise PerceptionError(
            f"only {np.count_nonzero(mask)} vertices within perception radius {d_per}; need {d + 1}"
        )
    cand_ids = ids_arr[mask]
    cand_dist = dist[mask]
    order = np.lexsort((cand_ids, cand_dist))
    cand_ids = cand_ids[order]
    cand_pts = positions[mask][order]
    for combo in combinations(range(len(cand_ids)), d + 1):
        pts = np.vstack([cand_pts[list(combo)], p_u])
        if is_general_position(pts):
            return tuple(int(cand_ids[c]) for c in combo)
    raise DegenerateConfigurationError("no perceived subset is in general position with the new point")


def select_parents(framework: Framework, p_u, d_per: float | None) -> tuple[int, ...]:
    """The ``d+1`` nearest perceived vertices usable as parents for ``p_u``."""
    return select_parents_from(framework.ids, framework.positions, p_u, d_per)


def _attach(framework: Framework, point: np.ndarray, parents: tuple[int, ...], s: float, vid: int, phi: np.ndarray | None = None) -> Framework:
    """Append ``vid`` with the block ``s phi phi^T`` over ``parents + (vid,)``. No audit."""
    if phi is None:
        phi = compute_phi(np.vstack([framework.points(parents), point]))
    vids = parents + (vid,)
    edges = dict(framework.edges)
    apply_block(edges, vids, s * np.outer(phi, phi))
    hier = dict(framework.hierarchy)
    level = max(hier[p].level for p in parents) + 1
    hier[vid] = HierarchyRecord(vid, parents, tuple(float(x) for x in phi), float(s), level)
    for p in parents:
        rec = hier[p]
        hier[p] = rec.with_children(rec.children | {vid})
    positions = np.vstack([framework.positions, point])
    return framework._derive(ids=framework.ids + (vid,), positions=positions, edges=edges, hierarchy=hier)


def _checked(result: Framework, what: str, audit: bool, tolerances: Tolerances) -> Framework:
    if audit:
        report = spectral_audit(result, tolerances)
        if not report.passed:
            raise AuditError(f"{what} failed the audit: " + "; ".join(report.failures()), report)
    return result


def add_vertex(framework: Framework, req: AdditionRequest, *, audit: bool = True, tolerances: Tolerances = DEFAULT_TOLERANCES) -> Framework:
    """Attach a new follower to ``d+1`` parents and return the grown framework."""
    d = framework.dim
    point = as_points(req.point, d)[0]
    vid = framework.next_id() if req.vid is None else int(req.vid)
    if vid in framework.index:
        raise TopologyError(f"vertex id {vid} already exists")
    if req.parents is None:
        parents = select_parents(framework, point, req.d_per)
    else:
        parents = tuple(int(p) for p in req.parents)
        if len(parents) != d + 1 or len(set(parents)) != d + 1:
            raise TopologyError(f"need {d + 1} distinct parents, got {parents}")
        missing = [p for p in parents if p not in framework.index]
        if missing:
            raise TopologyError(f"unknown parent ids {missing}")
        if req.d_per is not None:
            far = [p for p in parents if np.linalg.norm(framework.position(p) - point) > req.d_per]
            if far:
                raise PerceptionError(f"parents {far} are beyond perception radius {req.d_per}")
    pts = np.vstack([framework.points(parents), point])
    if not is_general_position(pts):
        raise DegenerateConfigurationError(f"new point and parents {parents} are not in general position")
    result = _attach(framework, point, parents, req.s, vid)
    return _checked(result, f"adding vertex {vid}", audit, tolerances)


class GrowthError(FrameworkError):
    """A point in a batch could not be added; ``index`` says which one."""

    def __init__(self, index: int, cause: Exception):
        super().__init__(f"point {index}: {cause}")
        self.index = index
        self.cause = cause


def grow(framework: Framework, points, s: float = DEFAULT_S, d_per: float | None = None, *, audit: bool = True, tolerances: Tolerances = DEFAULT_TOLERANCES) -> Framework:
    """Add ``points`` one after another, each attached to its nearest usable parents.

    Insertion order matters: each point sees the vertices added before it.
    Two additions commute only when neither is a parent of the other's
    footprint.
    """
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return framework
    pts = as_points(pts, framework.dim)
    for k, p in enumerate(pts):
        try:
            framework = add_vertex(framework, AdditionRequest(tuple(p), s=s, d_per=d_per), audit=audit, tolerances=tolerances)
        except FrameworkError as exc:
            raise GrowthError(k, exc) from exc
    return framework


def random_growth_points(
    framework: Framework,
    count: int,
    rng: np.random.Generator,
    d_per: float | None = None,
    spread: float | None = None,
    max_attempts: int = 1000,
    min_phi: float = MIN_PHI,
) -> np.ndarray:
    """Sample ``count`` points that can be added in order.

    Each candidate is drawn uniformly in a ball of radius ``spread`` around a
    randomly chosen existing (or already sampled) vertex and rejected unless
    it has a usable parent set whose phi entries all have magnitude at least
    ``min_phi``. Near-degenerate parent sets give tiny phi entries and a
    stress whose smallest nonzero eigenvalue drifts toward the zero
    tolerance as the swarm grows. ``spread`` defaults to ``d_per`` or,
    without a perception radius, to the current position scale.
    """
    d = framework.dim
    ids = list(framework.ids)
    row = {v: k for k, v in enumerate(ids)}
    positions = framework.positions.copy()
    if spread is None:
        spread = d_per if d_per is not None else max(framework.position_scale, 1.0)
    out = np.empty((count, d))
    next_id = framework.next_id()
    for k in range(count):
        for _ in range(max_attempts):
            center = positions[rng.integers(len(ids))]
            direction = rng.normal(size=d)
            direction /= np.linalg.norm(direction)
            cand = center + spread * rng.random() ** (1.0 / d) * direction
            try:
                parents = select_parents_from(ids, positions, cand, d_per)
            except FrameworkError:
                continue
            rows = [row[p] for p in parents]
            phi = compute_phi(np.vstack([positions[rows], cand]))
            if np.min(np.abs(phi)) >= min_phi:
                break
        else:
            raise PerceptionError(f"no admissible point found for sample {k} in {max_attempts} attempts")
        out[k] = cand
        row[next_id] = len(ids)
        ids.append(next_id)
        next_id += 1
        positions = np.vstack([positions, cand])
    return out
