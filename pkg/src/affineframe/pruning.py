"""Edge deletion and vertex deletion that keep the stress certified.

Edge ``(j, k)`` is removed by adding a rank-one block ``s_ed * phi phi^T``
over ``j``, ``k`` and ``d`` support vertices, with ``s_ed`` chosen so the
``(j, k)`` entry cancels. The result stays certified whenever ``s_ed > 0``.
If no existing support works, a relay vertex is placed where the sign of
``s_ed`` comes out right.

An outer vertex (no children, ``d+1`` neighbors) is removed with a rank-one
Schur-complement update. An inner vertex is removed by peeling off its own
addition block and its children's, then re-attaching the children to
substitute parents.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .construction import DEFAULT_S, _attach, _checked
from .errors import (
    DegenerateConfigurationError,
    DimensionError,
    FrameworkError,
    InadmissibleRegionError,
    NoUniquePhiError,
    PerceptionError,
    StaleHierarchyError,
    TopologyError,
)
from .framework import EDGE_RTOL, Framework, HierarchyRecord, apply_block, edge_key
from .geometry import Region, as_points, classify_region, compute_phi, is_general_position
from .verify import DEFAULT_TOLERANCES, Tolerances

POSITIVE_WEIGHT_REGIONS = frozenset({Region.A, Region.D, Region.G})
NEGATIVE_WEIGHT_REGIONS = frozenset({Region.B, Region.C, Region.E, Region.F})


@dataclass(frozen=True)
class DeletionSupport:
    """Vertices and scaling that cancel edge ``(j, k)`` without a relay.

    ``phi`` is ordered as ``(*anchors, j, k, q)``; in the plane there is a
    single anchor ``i``.
    """

    edge: tuple[int, int]
    anchors: tuple[int, ...]
    q: int
    phi: np.ndarray
    s_ed: float

    @property
    def vertices(self) -> tuple[int, ...]:
        return (*self.anchors, *self.edge, self.q)


def deletion_scaling(omega_jk: float, phi_j: float, phi_k: float) -> float:
    """Scaling that zeroes the ``(j, k)`` stress entry: ``-Omega_jk / (phi_j phi_k)``.

    Invariant under rescaling of phi together with the block ``s phi phi^T``.
    """
    if omega_jk == 0.0:
        return 0.0
    return -omega_jk / (phi_j * phi_k)


def _require_edge(framework: Framework, j: int, k: int) -> float:
    for v in (j, k):
        if v not in framework.index:
            raise TopologyError(f"unknown vertex {v}")
    if not framework.has_edge(j, k):
        raise TopologyError(f"no edge between {j} and {k}")
    return framework.weight(j, k)


def edge_deletion_scaling(framework: Framework, i, j: int, k: int, q: int) -> tuple[np.ndarray, float]:
    """``(phi, s_ed)`` for cancelling edge ``(j, k)`` with support ``i`` and ``q``.

    ``i`` may be a single id (plane) or a sequence of ``d-1`` ids.
    """
    anchors = (i,) if isinstance(i, (int, np.integer)) else tuple(i)
    if len(anchors) != framework.dim - 1:
        raise DimensionError(f"need {framework.dim - 1} anchor vertices in R^{framework.dim}")
    w_jk = _require_edge(framework, j, k)
    vids = (*anchors, j, k, q)
    if len(set(vids)) != len(vids):
        raise TopologyError(f"support vertices must be distinct from each other and from the edge: {vids}")
    phi = compute_phi(framework.points(vids))
    a = len(anchors)
    return phi, deletion_scaling(-w_jk, phi[a], phi[a + 1])


def common_perceived(framework: Framework, j: int, k: int, d_per: float | None) -> list[int]:
    """Vertices within ``d_per`` of both ``j`` and ``k``, in id order."""
    nj = set(framework.perceived(j, d_per, exclude=(k,)))
    nk = set(framework.perceived(k, d_per, exclude=(j,)))
    return sorted(nj & nk)


def find_deletion_support(
    framework: Framework,
    j: int,
    k: int,
    d_per: float | None = None,
    time_limit: float | None = None,
    min_phi: float = 0.0,
) -> DeletionSupport | None:
    """First support set (id order) giving a positive scaling, or ``None``.

    ``time_limit`` (seconds) bounds the local search; hitting it also
    returns ``None`` so the caller can fall back to a relay. ``min_phi``
    skips supports whose phi has an entry smaller in magnitude: nearly
    collinear supports pass the general-position test but give a huge
    scaling, and many such deletions push the smallest nonzero stress
    eigenvalue toward the zero tolerance.
    """
    _require_edge(framework, j, k)
    d = framework.dim
    common = common_perceived(framework, j, k, d_per)
    start = time.perf_counter()
    for combo in combinations(common, d):
        if time_limit is not None and time.perf_counter() - start > time_limit:
            return None
        anchors, q = combo[:-1], combo[-1]
        try:
            phi, s_ed = edge_deletion_scaling(framework, anchors if d > 2 else anchors[0], j, k, q)
        except NoUniquePhiError:
            continue
        if s_ed > 0 and np.min(np.abs(phi)) >= min_phi:
            return DeletionSupport(edge_key(j, k), tuple(anchors), q, phi, s_ed)
    return None


def delete_edge_direct(framework: Framework, support: DeletionSupport, *, audit: bool = True, tolerances: Tolerances = DEFAULT_TOLERANCES) -> Framework:
    """Remove ``support.edge`` by adding ``s_ed * phi phi^T`` on the support vertices."""
    if not support.s_ed > 0:
        raise ValueError(f"scaling must be positive to keep the stress certified, got {support.s_ed}")
    j, k = support.edge
    _require_edge(framework, j, k)
    edges = dict(framework.edges)
    apply_block(edges, support.vertices, support.s_ed * np.outer(support.phi, support.phi))
    edges.pop(edge_key(j, k), None)
    result = framework._derive(edges=edges)
    return _checked(result, f"deleting edge {support.edge}", audit, tolerances)


def admissible_relay_regions(framework: Framework, j: int, k: int) -> frozenset[Region]:
    """Regions of the triangle ``(i, j, k)`` where a relay yields a positive scaling."""
    w = _require_edge(framework, j, k)
    if w > 0:
        return POSITIVE_WEIGHT_REGIONS
    if w < 0:
        return NEGATIVE_WEIGHT_REGIONS
    raise TopologyError(f"edge ({j}, {k}) has zero weight")


def _fmt_regions(regions) -> str:
    return "{" + ", ".join(sorted(r.name for r in regions)) + "}"


def _relay_stage(framework: Framework, anchor: int, j: int, k: int, p_r: np.ndarray, vid: int) -> tuple[np.ndarray, float]:
    """Region check and scaling for a relay attached to ``(anchor, j, k)``."""
    if framework.dim != 2:
        raise DimensionError("relay placement is defined in the plane only")
    if anchor in (j, k) or anchor not in framework.index:
        raise TopologyError(f"invalid anchor vertex {anchor}")
    pts = np.vstack([framework.points((anchor, j, k)), p_r])
    if not is_general_position(pts):
        raise DegenerateConfigurationError("relay and its three parents are not in general position")
    admissible = admissible_relay_regions(framework, j, k)
    region = classify_region(p_r, pts[:3])
    if region not in admissible:
        sign = "positive" if framework.weight(j, k) > 0 else "negative"
        raise InadmissibleRegionError(
            f"relay lies in region {region.name}; with a {sign} weight on ({j}, {k}) "
            f"it must lie in {_fmt_regions(admissible)}",
            region,
            admissible,
        )
    phi = compute_phi(pts)
    s_bar = deletion_scaling(-framework.weight(j, k), phi[1], phi[2])
    return phi, s_bar


def _check_perceived(framework: Framework, center, vids: Sequence[int], d_per: float | None, what: str):
    if d_per is None:
        return
    c = as_points(center, framework.dim)[0]
    far = [v for v in vids if np.linalg.norm(framework.position(v) - c) > d_per]
    if far:
        raise PerceptionError(f"{what}: vertices {far} are beyond perception radius {d_per}")


def delete_edge_with_relay(
    framework: Framework,
    j: int,
    k: int,
    anchor: int,
    relay_point,
    *,
    vid: int | None = None,
    d_per: float | None = None,
    audit: bool = True,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Framework:
    """Remove edge ``(j, k)`` by attaching a relay vertex to ``(anchor, j, k)``."""
    _require_edge(framework, j, k)
    p_r = as_points(relay_point, framework.dim)[0]
    if d_per is not None and anchor not in common_perceived(framework, j, k, d_per):
        raise PerceptionError(f"anchor {anchor} is not perceived by both {j} and {k}")
    _check_perceived(framework, p_r, (anchor, j, k), d_per, "relay")
    vid = framework.next_id() if vid is None else int(vid)
    if vid in framework.index:
        raise TopologyError(f"vertex id {vid} already exists")
    phi, s_bar = _relay_stage(framework, anchor, j, k, p_r, vid)
    result = _attach(framework, p_r, (anchor, j, k), s_bar, vid, phi)
    edges = dict(result.edges)
    edges.pop(edge_key(j, k), None)
    result = result._derive(edges=edges)
    return _checked(result, f"deleting edge ({j}, {k}) via relay {vid}", audit, tolerances)


def _tag(exc: FrameworkError, stage: str) -> FrameworkError:
    exc.stage = stage
    if exc.args:
        exc.args = (f"[{stage}] {exc.args[0]}",) + exc.args[1:]
    return exc


def delete_edge_two_relays(
    framework: Framework,
    j: int,
    k: int,
    r1: tuple,
    r2,
    *,
    s: float = DEFAULT_S,
    d_per: float | None = None,
    audit: bool = True,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Framework:
    """Remove edge ``(j, k)`` when its endpoints share no perceived vertex.

    ``r1`` is ``(point, third_parent)``: the first relay is attached to
    ``(j, k, third_parent)`` with scaling ``s``. The second relay ``r2`` is
    attached to ``(r1, j, k)`` with the scaling that cancels ``(j, k)``.
    """
    from .construction import AdditionRequest, add_vertex

    _require_edge(framework, j, k)
    if d_per is not None and common_perceived(framework, j, k, d_per):
        raise TopologyError(f"vertices {j} and {k} share perceived neighbors; use a single relay")
    p1, third = r1
    r1_id = framework.next_id()
    try:
        stage1 = add_vertex(
            framework,
            AdditionRequest(tuple(as_points(p1, framework.dim)[0]), parents=(j, k, int(third)), s=s, d_per=d_per, vid=r1_id),
            audit=audit,
            tolerances=tolerances,
        )
    except FrameworkError as exc:
        raise _tag(exc, "relay 1") from None
    try:
        p2 = as_points(r2, framework.dim)[0]
        _check_perceived(stage1, p2, (r1_id, j, k), d_per, "relay 2")
        if not stage1.has_edge(j, k):
            raise TopologyError(f"edge ({j}, {k}) vanished after the first relay")
        r2_id = r1_id + 1
        phi, s_bar = _relay_stage(stage1, r1_id, j, k, p2, r2_id)
        result = _attach(stage1, p2, (r1_id, j, k), s_bar, r2_id, phi)
        edges = dict(result.edges)
        edges.pop(edge_key(j, k), None)
        result = result._derive(edges=edges)
        return _checked(result, f"deleting edge ({j}, {k}) via relays {r1_id}, {r2_id}", audit, tolerances)
    except FrameworkError as exc:
        raise _tag(exc, "relay 2") from None


# -- vertex deletion -------------------------------------------------------


def _require_deletable(framework: Framework, u: int) -> None:
    if u not in framework.index:
        raise TopologyError(f"unknown vertex {u}")
    if framework.is_leader(u):
        raise TopologyError(f"vertex {u} is a leader; leaders are never deleted")
    if len(framework.followers) <= 1:
        raise TopologyError("refusing to delete the last follower")


def _drop_vertex(framework: Framework, u: int, edges: dict, hier: dict) -> Framework:
    for key in [e for e in edges if u in e]:
        del edges[key]
    hier.pop(u, None)
    keep = [x for x in range(framework.n) if framework.ids[x] != u]
    ids = tuple(framework.ids[x] for x in keep)
    positions = framework.positions[keep].copy()
    return framework._derive(ids=ids, positions=positions, edges=edges, hierarchy=hier)


def delete_outer_vertex(framework: Framework, u: int, *, audit: bool = True, tolerances: Tolerances = DEFAULT_TOLERANCES) -> Framework:
    """Remove a childless follower with exactly ``d+1`` neighbors.

    Subtracts ``Omega_phi Omega_phi^T / Omega_uu`` over the neighbors and
    ``u`` (a Schur complement), which zeroes ``u``'s row and column exactly.
    """
    _require_deletable(framework, u)
    d = framework.dim
    rec = framework.hierarchy[u]
    if rec.children:
        raise TopologyError(f"vertex {u} is an inner node with children {sorted(rec.children)}; use delete_inner_vertex")
    nbrs = tuple(sorted(framework.neighbors(u)))
    if len(nbrs) != d + 1:
        raise TopologyError(f"vertex {u} has {len(nbrs)} neighbors; outer deletion needs exactly {d + 1}")
    if framework.n < d + 3:
        raise TopologyError(f"framework too small to delete a vertex (n={framework.n})")
    if not is_general_position(framework.points(nbrs + (u,))):
        raise DegenerateConfigurationError(f"vertex {u} and its neighbors are not in general position")
    omega_phi = np.array([-framework.weight(a, u) for a in nbrs] + [0.0])
    omega_uu = -float(np.sum(omega_phi[:-1]))
    if not omega_uu > 0:
        raise DegenerateConfigurationError(f"diagonal stress entry of {u} is not positive ({omega_uu})")
    omega_phi[-1] = omega_uu
    edges = dict(framework.edges)
    apply_block(edges, nbrs + (u,), np.outer(omega_phi, omega_phi) / omega_uu, sign=-1.0)
    hier = dict(framework.hierarchy)
    for p in rec.parents:
        if p in hier:
            hier[p] = hier[p].with_children(hier[p].children - {u})
    result = _drop_vertex(framework, u, edges, hier)
    return _checked(result, f"deleting outer vertex {u}", audit, tolerances)


def _replace(parents: tuple[int, ...], old: int, new: int) -> tuple[int, ...]:
    return tuple(new if p == old else p for p in parents)


def _recompute_levels(hier: dict[int, HierarchyRecord]) -> dict[int, HierarchyRecord]:
    levels: dict[int, int] = {}

    def level(v: int) -> int:
        if v in levels:
            return levels[v]
        stack = [v]
        while stack:
            x = stack[-1]
            pending = [p for p in hier[x].parents if p not in levels]
            if pending:
                stack.extend(pending)
                continue
            stack.pop()
            levels[x] = 0 if not hier[x].parents else 1 + max(levels[p] for p in hier[x].parents)
        return levels[v]

    out = {}
    for v, rec in hier.items():
        lv = level(v)
        out[v] = rec if rec.level == lv else HierarchyRecord(rec.vid, rec.parents, rec.phi, rec.s, lv, rec.children)
    return out


def delete_inner_vertex(
    framework: Framework,
    u: int,
    *,
    d_per: float | None = None,
    audit: bool = True,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Framework:
    """Remove a follower that has children and re-attach the children.

    The child with the lowest hierarchy level (ties by id) inherits ``u``'s
    place: it swaps ``u`` for one of ``u``'s parents. Every other child swaps
    ``u`` for the heir, or for one of ``u``'s parents when the heir is
    already among its parents. Each re-parented child keeps its scaling.
    """
    _require_deletable(framework, u)
    rec_u = framework.hierarchy[u]
    if not rec_u.children:
        raise TopologyError(f"vertex {u} has no children; use delete_outer_vertex")
    if rec_u.is_root:
        raise TopologyError(f"vertex {u} belongs to the seed and has no addition record to remove")
    hier = dict(framework.hierarchy)
    children = sorted(rec_u.children, key=lambda c: (hier[c].level, c))

    # peel off the blocks of u and of its children
    edges = dict(framework.edges)
    for vids, block in [rec_u.block()] + [hier[c].block() for c in children]:
        apply_block(edges, vids, block, sign=-1.0)
    scale = max((abs(w) for w in edges.values()), default=1.0)
    leftover = {e: w for e, w in edges.items() if u in e and abs(w) > 1e3 * EDGE_RTOL * scale}
    if leftover:
        raise StaleHierarchyError(
            f"stress row of {u} is not the sum of its recorded addition blocks "
            f"(left over: {leftover}); it was modified by a later edit"
        )
    for e in [e for e in edges if u in e]:
        del edges[e]

    def usable(child: int, parents: tuple[int, ...]) -> bool:
        pts = np.vstack([framework.points(parents), framework.position(child)])
        if not is_general_position(pts):
            return False
        if d_per is not None:
            dist = np.linalg.norm(pts[:-1] - pts[-1], axis=1)
            if np.any(dist > d_per):
                return False
        return True

    def reparent(child: int, first_choice: int | None) -> tuple[int, ...]:
        old = hier[child].parents
        options = [] if first_choice is None else [first_choice]
        options += sorted(set(rec_u.parents) - set(old))
        for r in options:
            cand = _replace(old, u, r)
            if usable(child, cand):
                return cand
        raise DegenerateConfigurationError(f"child {child} of {u} has no valid replacement parent")

    # new parent sets: the heir first, then the other children
    heir = children[0]
    new_parents = {heir: reparent(heir, None)}
    for c in children[1:]:
        first = heir if heir not in hier[c].parents else None
        new_parents[c] = reparent(c, first)

    # re-attach every child with its stored scaling
    for c, parents in new_parents.items():
        phi = compute_phi(np.vstack([framework.points(parents), framework.position(c)]))
        apply_block(edges, parents + (c,), hier[c].s * np.outer(phi, phi))
        old = hier[c]
        hier[c] = HierarchyRecord(c, parents, tuple(float(x) for x in phi), old.s, old.level, old.children)

    for p in rec_u.parents:
        hier[p] = hier[p].with_children(hier[p].children - {u})
    for c, parents in new_parents.items():
        for p in parents:
            if p != u and c not in hier[p].children:
                hier[p] = hier[p].with_children(hier[p].children | {c})
    hier.pop(u)
    hier = _recompute_levels(hier)
    result = _drop_vertex(framework, u, edges, hier)
    return _checked(result, f"deleting inner vertex {u}", audit, tolerances)


def delete_vertex(framework: Framework, u: int, *, d_per: float | None = None, audit: bool = True, tolerances: Tolerances = DEFAULT_TOLERANCES) -> Framework:
    """Dispatch to outer or inner deletion based on the hierarchy."""
    if u in framework.index and framework.hierarchy[u].children:
        return delete_inner_vertex(framework, u, d_per=d_per, audit=audit, tolerances=tolerances)
    return delete_outer_vertex(framework, u, audit=audit, tolerances=tolerances)


def delete_edge(
    framework: Framework,
    j: int,
    k: int,
    *,
    d_per: float | None = None,
    relay=None,
    anchor: int | None = None,
    time_limit: float | None = None,
    min_phi: float = 0.0,
    audit: bool = True,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Framework:
    """Case dispatch: direct deletion if a support exists, else a relay at ``relay``.

    Without an explicit ``anchor`` the first common perceived vertex (id
    order) for which the relay is admissible is used.
    """
    support = find_deletion_support(framework, j, k, d_per, time_limit, min_phi)
    if support is not None:
        return delete_edge_direct(framework, support, audit=audit, tolerances=tolerances)
    if relay is None:
        raise TopologyError(f"edge ({j}, {k}) has no direct deletion support; a relay point is required")
    if anchor is not None:
        return delete_edge_with_relay(framework, j, k, anchor, relay, d_per=d_per, audit=audit, tolerances=tolerances)
    common = common_perceived(framework, j, k, d_per)
    if not common:
        raise TopologyError(f"vertices {j} and {k} share no perceived vertex; two relays are required")
    last: FrameworkError | None = None
    for a in common:
        try:
            return delete_edge_with_relay(framework, j, k, a, relay, d_per=d_per, audit=audit, tolerances=tolerances)
        except (InadmissibleRegionError, DegenerateConfigurationError, PerceptionError) as exc:
            last = exc
    assert last is not None
    raise last
