"""Small reference frameworks used by tests, demos and the CLI.

Ids start at 1 and the first ``d+1`` seed vertices are the leaders.
"""
from __future__ import annotations

import numpy as np

from .construction import AdditionRequest, add_vertex
from .framework import Framework, seed_framework

SQUARE = [(0.0, 1.0), (1.0, 0.0), (0.0, -1.0), (-1.0, 0.0)]


def square_framework(s: float = 4.0) -> Framework:
    """Four vertices on the unit diamond, complete graph, stress ``s phi phi^T``.

    With ``s = 4`` the weight on edge ``(2, 3)`` is ``1`` and no pair of the
    other two vertices can cancel it with a positive scaling.
    """
    return seed_framework(SQUARE, s=s)


def square_with_outer_vertex(s: float = 4.0, s_u: float = 1.0) -> Framework:
    """:func:`square_framework` plus vertex 5 at ``(1, -1)`` attached to ``(1, 2, 3)``.

    Edge ``(2, 3)`` then carries stress entry ``-0.8`` and can be deleted
    directly with support ``(1, 5)`` and scaling 4.
    """
    return add_vertex(square_framework(s), AdditionRequest((1.0, -1.0), parents=(1, 2, 3), s=s_u))


#: Positions of the nine-vertex two-level hierarchy, by id.
LAYERED_POSITIONS = {
    1: (8.0, 0.0),
    2: (0.0, 8.0),
    3: (-8.0, 0.0),
    4: (0.0, -8.0),
    5: (9.0, -10.0),
    6: (0.0, -12.0),
    7: (11.0, 1.0),
    8: (14.0, -14.0),
    9: (-7.0, -5.0),
}
#: Parent sets of the non-seed vertices, in insertion order.
LAYERED_PARENTS = {
    5: (1, 3, 4),
    6: (1, 4, 5),
    7: (1, 2, 5),
    8: (1, 5, 6),
    9: (3, 4, 6),
}


def layered_framework(s: float = 1.0) -> Framework:
    """Nine vertices where 5 is an inner node with children 6, 7, 8.

    Vertices 1..4 form the seed (leaders 1, 2, 3); every later vertex is
    added with scaling ``s`` to the parents in :data:`LAYERED_PARENTS`.
    """
    fw = seed_framework([LAYERED_POSITIONS[v] for v in (1, 2, 3, 4)], s=s)
    for v, parents in LAYERED_PARENTS.items():
        fw = add_vertex(fw, AdditionRequest(LAYERED_POSITIONS[v], parents=parents, s=s, vid=v))
    return fw


def tetrahedron_seed(s: float = 1.0) -> Framework:
    """3D seed: unit simplex plus one interior-offset point."""
    pts = np.array([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (0.6, 0.7, 0.8)], dtype=float)
    return seed_framework(pts, s=s)


def _affine(angle: float, scale=(1.0, 1.0), shear: float = 0.0) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]]) @ np.array([[scale[0], shear], [0.0, scale[1]]])


#: Target maneuver: one affine map per interval of the scripted scenario.
MANEUVER_TARGETS = [
    (_affine(0.3), (2.0, 1.0)),
    (_affine(0.6, (1.2, 0.9)), (4.0, 2.0)),
    (_affine(0.6, (1.5, 0.8), 0.2), (6.0, 2.0)),
    (_affine(0.9, (1.5, 0.8)), (8.0, 3.0)),
    (_affine(1.2), (10.0, 3.0)),
    (_affine(1.2, (0.8, 0.8)), (12.0, 4.0)),
    (_affine(1.5, (0.8, 1.1), -0.2), (14.0, 4.0)),
    (_affine(1.5), (16.0, 5.0)),
]


def maneuver_scenario(settle: float = 14.0):
    """Layered framework, seven topology events and an eight-segment target path.

    Events: two edge deletions, two arrivals, then both arrivals and the
    inner vertex 5 leave. Every event coincides with a target switch, and
    each segment lasts ``settle / lambda_min(Omega_ff)`` for the framework
    active during it, so the slowest error mode shrinks by ``exp(-settle)``.
    Returns ``(framework, script, trajectory)``.
    """
    from .framework import omega_blocks
    from .sim import (
        AddVertexEvent,
        AffineSegment,
        AffineTrajectory,
        DeleteEdgeEvent,
        DeleteVertexEvent,
        ScenarioScript,
        apply_event,
    )

    fw = layered_framework()
    plan = [
        DeleteEdgeEvent(0.0, 4, 9),
        DeleteEdgeEvent(0.0, 6, 8),
        AddVertexEvent(0.0, (12.0, -6.0)),
        AddVertexEvent(0.0, (-10.0, -11.0)),
        DeleteVertexEvent(0.0, 10),
        DeleteVertexEvent(0.0, 11),
        DeleteVertexEvent(0.0, 5),
    ]
    durations = []
    for ev in [None] + plan:
        if ev is not None:
            fw = apply_event(fw, ev)
        lam = float(np.linalg.eigvalsh(omega_blocks(fw)[3])[0])
        durations.append(float(np.ceil(settle / lam)))
    times = np.cumsum(durations)
    events = tuple(type(ev)(float(t), *[getattr(ev, f) for f in ev.__dataclass_fields__ if f != "time"]) for ev, t in zip(plan, times))
    segments = [AffineSegment(A, np.array(b), d) for (A, b), d in zip(MANEUVER_TARGETS, durations)]
    return layered_framework(), ScenarioScript(events), AffineTrajectory(segments)
