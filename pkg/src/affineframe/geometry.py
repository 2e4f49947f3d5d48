"""Euclidean predicates and the phi-vector behind every stress update.

All functions accept array-likes of shape ``(m, d)`` (a list of points) and
return plain numpy values. Nothing here knows about graphs.
"""
from __future__ import annotations

import enum
from itertools import combinations

import numpy as np

from .errors import (
    AmbiguousRegionError,
    DegenerateConfigurationError,
    DimensionError,
    NoUniquePhiError,
)

#: Relative singular-value threshold for affine independence.
RANK_RTOL = 1e-9
#: Barycentric coordinates closer to zero than this count as "on the side".
BOUNDARY_ATOL = 1e-9


class Region(enum.Enum):
    """Sign class of a point relative to an ordered triangle ``(v_i, v_j, v_k)``.

    The value is the sign triple of the point's barycentric coordinates, which
    is also the sign triple of the three edge weights a vertex placed there
    receives when attached to the triangle with a positive scaling.
    """

    A = (1, -1, -1)
    B = (1, 1, -1)
    C = (-1, 1, -1)
    D = (-1, 1, 1)
    E = (-1, -1, 1)
    F = (1, -1, 1)
    G = (1, 1, 1)

    @property
    def signs(self) -> tuple[int, int, int]:
        return self.value

    @classmethod
    def from_signs(cls, signs) -> "Region":
        key = tuple(int(s) for s in signs)
        try:
            return _BY_SIGNS[key]
        except KeyError:
            raise ValueError(f"sign pattern {key} is not a region") from None


_BY_SIGNS = {r.value: r for r in Region}


def as_points(points, d: int | None = None) -> np.ndarray:
    """Coerce to a float ``(m, d)`` array, checking dimension and finiteness."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise DimensionError(f"expected a list of points, got shape {arr.shape}")
    if d is not None and arr.shape[1] != d:
        raise DimensionError(f"expected points of dimension {d}, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise DimensionError("point coordinates must be finite")
    return arr


def affinely_independent(points, d: int | None = None) -> bool:
    """True iff the points admit no nontrivial affine dependency.

    Decided on the difference vectors ``p_i - p_0``: their smallest singular
    value must be at least ``RANK_RTOL`` times the largest. This is the rank
    test of the homogeneous matrix ``[p; 1]`` made independent of units.
    """
    pts = as_points(points, d)
    m, dim = pts.shape
    if m > dim + 1:
        return False
    if m == 1:
        return True
    diffs = pts[1:] - pts[0]
    sv = np.linalg.svd(diffs, compute_uv=False)
    if sv[0] == 0.0:
        return False
    return bool(sv[-1] >= RANK_RTOL * sv[0])


def is_general_position(points, d: int | None = None) -> bool:
    """True iff every ``d+1``-subset of the points is affinely independent.

    Exhaustive over subsets; meant for local neighborhoods, not whole swarms.
    """
    pts = as_points(points, d)
    m, dim = pts.shape
    if m <= dim + 1:
        return affinely_independent(pts)
    return all(affinely_independent(pts[list(c)]) for c in combinations(range(m), dim + 1))


def barycentric(q, simplex) -> np.ndarray:
    """Barycentric coordinates of ``q`` with respect to ``d+1`` simplex vertices."""
    s = as_points(simplex)
    d = s.shape[1]
    if s.shape[0] != d + 1:
        raise DimensionError(f"a simplex in R^{d} has {d + 1} vertices, got {s.shape[0]}")
    q = as_points(q, d)[0]
    if not affinely_independent(s):
        raise DegenerateConfigurationError("degenerate simplex")
    lhs = np.vstack([s.T, np.ones(d + 1)])
    rhs = np.append(q, 1.0)
    return np.linalg.solve(lhs, rhs)


def classify_region(q, triangle) -> Region:
    """Region of ``q`` relative to the ordered triangle ``(v_i, v_j, v_k)``.

    Raises :class:`AmbiguousRegionError` for points on an extended side.
    """
    tri = as_points(triangle, 2)
    lam = barycentric(q, tri)
    if np.any(np.abs(lam) < BOUNDARY_ATOL):
        raise AmbiguousRegionError(f"point lies on an extended triangle side (barycentric {lam})")
    return Region.from_signs(np.sign(lam))


def compute_phi(points) -> np.ndarray:
    """Unit null vector of the homogeneous matrix of ``d+2`` points.

    The result satisfies ``sum(phi) == 0`` and ``sum(phi_i * p_i) == 0``, has
    Euclidean norm one and a positive last entry.
    """
    pts = as_points(points)
    m, d = pts.shape
    if m != d + 2:
        raise DimensionError(f"phi needs {d + 2} points in R^{d}, got {m}")
    if not is_general_position(pts):
        raise NoUniquePhiError("points are not in general position")
    homog = np.vstack([pts.T, np.ones(m)])
    _, _, vt = np.linalg.svd(homog)
    phi = vt[-1]
    phi = phi / np.linalg.norm(phi)
    if phi[-1] < 0:
        phi = -phi
    return phi
