"""The Framework value: graph, configuration, leaders, stress and hierarchy.

A :class:`Framework` never changes after construction. Every edit in
:mod:`affineframe.construction` and :mod:`affineframe.pruning` builds a new
one, copying only O(n + m) bookkeeping and touching the stress locally.

Stress is stored as a sparse map of edge weights ``w_ij``; the dense stress
matrix is assembled on demand with ``Omega_ij = -w_ij`` off the diagonal and
zero row sums.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DegenerateConfigurationError, DimensionError, TopologyError
from .geometry import affinely_independent, as_points, compute_phi

#: Relative threshold below which an updated weight is treated as a non-edge.
EDGE_RTOL = 1e-9

Edge = tuple[int, int]


def edge_key(i: int, j: int) -> Edge:
    if i == j:
        raise TopologyError(f"self-loop on vertex {i}")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class HierarchyRecord:
    """How a vertex entered the framework.

    ``parents`` and ``phi`` share an order: ``phi`` is the null vector over
    ``(p[parents[0]], ..., p[parents[-1]], p[vid])``. Level-0 vertices have
    no parents, an empty ``phi`` and ``s == 0``.
    """

    vid: int
    parents: tuple[int, ...] = ()
    phi: tuple[float, ...] = ()
    s: float = 0.0
    level: int = 0
    children: frozenset[int] = frozenset()

    @property
    def is_root(self) -> bool:
        return not self.parents

    def block(self) -> tuple[tuple[int, ...], np.ndarray]:
        """Vertex ids and the ``s * phi phi^T`` block this addition contributed."""
        ids = self.parents + (self.vid,)
        phi = np.asarray(self.phi)
        return ids, self.s * np.outer(phi, phi)

    def with_children(self, children: Iterable[int]) -> "HierarchyRecord":
        return HierarchyRecord(self.vid, self.parents, self.phi, self.s, self.level, frozenset(children))


@dataclass(frozen=True, eq=False)
class Framework:
    """Immutable weighted framework in R^2 or R^3 with ``d+1`` leaders.

    Use :func:`seed_framework` or :meth:`build` rather than calling the
    constructor with hand-made mappings.
    """

    dim: int
    ids: tuple[int, ...]
    positions: np.ndarray
    leaders: tuple[int, ...]
    edges: Mapping[Edge, float]
    hierarchy: Mapping[int, HierarchyRecord] = field(default_factory=dict)

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise DimensionError(f"dimension must be 2 or 3, got {self.dim}")
        if self.positions.shape != (len(self.ids), self.dim):
            raise DimensionError(
                f"positions shape {self.positions.shape} does not match {len(self.ids)} ids in R^{self.dim}"
            )
        if len(set(self.ids)) != len(self.ids):
            raise TopologyError("duplicate vertex id")
        if len(self.leaders) != self.dim + 1 or len(set(self.leaders)) != self.dim + 1:
            raise TopologyError(f"a framework in R^{self.dim} needs exactly {self.dim + 1} leaders")
        index = self.index
        if any(v not in index for v in self.leaders):
            raise TopologyError("leader id not among vertices")
        if not affinely_independent(self.positions[[index[v] for v in self.leaders]]):
            raise DegenerateConfigurationError("leader positions are not affinely independent")

    @classmethod
    def build(
        cls,
        dim: int,
        ids: Sequence[int],
        positions,
        leaders: Sequence[int],
        edges: Mapping[Edge, float] | Iterable[tuple[int, int, float]] = (),
        hierarchy: Mapping[int, HierarchyRecord] | None = None,
    ) -> "Framework":
        """Validate and freeze user-provided data."""
        pos = as_points(positions, dim).copy()
        pos.setflags(write=False)
        ids = tuple(int(v) for v in ids)
        idset = set(ids)
        items = edges.items() if isinstance(edges, Mapping) else (((i, j), w) for i, j, w in edges)
        emap: dict[Edge, float] = {}
        for (i, j), w in items:
            key = edge_key(int(i), int(j))
            if key[0] not in idset or key[1] not in idset:
                raise TopologyError(f"edge {key} references an unknown vertex")
            if not np.isfinite(w):
                raise ValueError(f"edge {key} has non-finite weight")
            if key in emap:
                raise TopologyError(f"edge {key} listed twice")
            if w != 0.0:
                emap[key] = float(w)
        hier = dict(hierarchy or {})
        for v in ids:
            hier.setdefault(v, HierarchyRecord(v))
        return cls(dim, ids, pos, tuple(int(v) for v in leaders), MappingProxyType(emap), MappingProxyType(hier))

    # -- lookups -----------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.ids)

    @cached_property
    def index(self) -> dict[int, int]:
        return {v: k for k, v in enumerate(self.ids)}

    @cached_property
    def followers(self) -> tuple[int, ...]:
        lead = set(self.leaders)
        return tuple(v for v in self.ids if v not in lead)

    def is_leader(self, v: int) -> bool:
        return v in self.leaders

    def position(self, v: int) -> np.ndarray:
        return self.positions[self.index[v]]

    def points(self, vids: Iterable[int]) -> np.ndarray:
        index = self.index
        return self.positions[[index[v] for v in vids]]

    def weight(self, i: int, j: int) -> float:
        return self.edges.get(edge_key(i, j), 0.0)

    def has_edge(self, i: int, j: int) -> bool:
        return edge_key(i, j) in self.edges

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        nbrs: dict[int, set[int]] = {v: set() for v in self.ids}
        for i, j in self.edges:
            nbrs[i].add(j)
            nbrs[j].add(i)
        return {v: frozenset(s) for v, s in nbrs.items()}

    def neighbors(self, v: int) -> frozenset[int]:
        return self.adjacency[v]

    def children(self, v: int) -> frozenset[int]:
        return self.hierarchy[v].children

    def level(self, v: int) -> int:
        return self.hierarchy[v].level

    def perceived(self, v_or_point, d_per: float | None, exclude: Iterable[int] = ()) -> list[int]:
        """Ids within ``d_per`` of a vertex id or a point, nearest first (ties by id)."""
        if isinstance(v_or_point, (int, np.integer)):
            center = self.position(int(v_or_point))
            skip = {int(v_or_point), *exclude}
        else:
            center = as_points(v_or_point, self.dim)[0]
            skip = set(exclude)
        dist = np.linalg.norm(self.positions - center, axis=1)
        ids = np.asarray(self.ids)
        mask = np.ones(self.n, dtype=bool) if d_per is None else dist <= d_per
        if skip:
            mask &= ~np.isin(ids, list(skip))
        order = np.lexsort((ids[mask], dist[mask]))
        return [int(v) for v in ids[mask][order]]

    @property
    def weight_scale(self) -> float:
        return max((abs(w) for w in self.edges.values()), default=0.0)

    @property
    def position_scale(self) -> float:
        return float(np.max(np.abs(self.positions))) if self.n else 0.0

    @cached_property
    def stress(self) -> np.ndarray:
        """Dense stress matrix in ``ids`` order (read-only, cached)."""
        omega = assemble_stress(self)
        omega.setflags(write=False)
        return omega

    def next_id(self) -> int:
        return max(self.ids) + 1

    def __repr__(self) -> str:
        return (
            f"Framework(dim={self.dim}, n={self.n}, edges={len(self.edges)}, "
            f"leaders={list(self.leaders)})"
        )

    # -- internal derivation ----------------------------------------------

    def _derive(
        self,
        *,
        ids=None,
        positions=None,
        edges: dict | None = None,
        hierarchy: dict | None = None,
    ) -> "Framework":
        """Copy with replaced parts; inputs are trusted (already validated)."""
        if positions is not None:
            positions.setflags(write=False)
        return Framework(
            self.dim,
            self.ids if ids is None else tuple(ids),
            self.positions if positions is None else positions,
            self.leaders,
            self.edges if edges is None else MappingProxyType(edges),
            self.hierarchy if hierarchy is None else MappingProxyType(hierarchy),
        )


def apply_block(edges: dict[Edge, float], vids: Sequence[int], block: np.ndarray, sign: float = 1.0) -> None:
    """Add ``sign * block`` onto the stress entries of ``vids``, in place.

    ``block`` must have zero row sums, so only off-diagonal entries need
    recording: ``Omega_ab += block_ab`` is ``w_ab -= block_ab``. Weights that
    cancel to below ``EDGE_RTOL * max|w|`` are removed.
    """
    m = len(vids)
    touched = []
    for a in range(m):
        for b in range(a + 1, m):
            delta = sign * block[a, b]
            if delta == 0.0:
                continue
            key = edge_key(vids[a], vids[b])
            edges[key] = edges.get(key, 0.0) - delta
            touched.append(key)
    if not touched:
        return
    scale = max(abs(w) for w in edges.values())
    for key in touched:
        if key in edges and abs(edges[key]) < EDGE_RTOL * scale:
            del edges[key]


def assemble_stress(framework: Framework) -> np.ndarray:
    """Dense ``n x n`` stress matrix in the framework's ``ids`` order."""
    n = framework.n
    omega = np.zeros((n, n))
    if not framework.edges:
        return omega
    index = framework.index
    keys = np.array([(index[i], index[j]) for i, j in framework.edges], dtype=int)
    w = np.fromiter(framework.edges.values(), dtype=float, count=len(keys))
    rows, cols = keys[:, 0], keys[:, 1]
    omega[rows, cols] = -w
    omega[cols, rows] = -w
    omega[np.arange(n), np.arange(n)] = np.bincount(rows, w, n) + np.bincount(cols, w, n)
    return omega


def equilibrium_residual(framework: Framework) -> float:
    """``max_i || sum_j w_ij (p_j - p_i) ||``; zero for an equilibrium stress."""
    if not framework.edges:
        return 0.0
    index = framework.index
    keys = np.array([(index[i], index[j]) for i, j in framework.edges], dtype=int)
    w = np.fromiter(framework.edges.values(), dtype=float, count=len(keys))
    p = framework.positions
    force = w[:, None] * (p[keys[:, 1]] - p[keys[:, 0]])
    acc = np.zeros_like(p)
    np.add.at(acc, keys[:, 0], force)
    np.add.at(acc, keys[:, 1], -force)
    return float(np.max(np.linalg.norm(acc, axis=1)))


def omega_blocks(framework: Framework):
    """``(Omega_ll, Omega_lf, Omega_fl, Omega_ff)`` with leaders first.

    Leaders keep the order of ``framework.leaders``; followers keep ``ids`` order.
    """
    omega = framework.stress
    index = framework.index
    li = [index[v] for v in framework.leaders]
    fi = [index[v] for v in framework.followers]
    return (
        omega[np.ix_(li, li)],
        omega[np.ix_(li, fi)],
        omega[np.ix_(fi, li)],
        omega[np.ix_(fi, fi)],
    )


def seed_framework(points, s: float = 1.0, ids: Sequence[int] | None = None, leaders: Sequence[int] | None = None) -> Framework:
    """Level-0 framework on ``d+2`` points: the complete graph with stress ``s * phi phi^T``.

    The first ``d+1`` points are the leaders unless ``leaders`` says otherwise.
    All seed vertices are hierarchy roots.
    """
    pts = as_points(points)
    d = pts.shape[1]
    if pts.shape[0] != d + 2:
        raise DimensionError(f"a seed in R^{d} has {d + 2} points, got {pts.shape[0]}")
    if not s > 0:
        raise ValueError("scaling s must be positive")
    ids = tuple(range(1, d + 3)) if ids is None else tuple(int(v) for v in ids)
    leaders = ids[: d + 1] if leaders is None else tuple(leaders)
    phi = compute_phi(pts)
    edges: dict[Edge, float] = {}
    apply_block(edges, ids, s * np.outer(phi, phi))
    return Framework.build(d, ids, pts, leaders, edges)
