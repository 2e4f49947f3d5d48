from itertools import combinations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from affineframe.errors import AmbiguousRegionError, DegenerateConfigurationError, DimensionError, NoUniquePhiError
from affineframe.geometry import (
    Region,
    affinely_independent,
    barycentric,
    classify_region,
    compute_phi,
    is_general_position,
)

TRI = np.array([(0.0, 1.0), (1.0, 0.0), (0.0, -1.0)])
coord = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


# -- affine independence ---------------------------------------------------

def test_triangle_is_affinely_independent():
    # exact homogeneous determinant is -2
    assert affinely_independent(TRI, 2)


def test_collinear_points_are_dependent():
    assert not affinely_independent([(0, 0), (1, 1), (2, 2)], 2)


def test_single_point_is_independent():
    assert affinely_independent([(0.0, 0.0)], 2)


def test_coincident_points_are_dependent():
    assert not affinely_independent([(1, 1), (1, 1)], 2)


def test_too_many_points_are_dependent():
    assert not affinely_independent([(0, 0), (1, 0), (0, 1), (1, 1)], 2)


def test_dimension_mismatch_raises():
    with pytest.raises(DimensionError):
        affinely_independent([(0, 0, 0)], 2)


def test_independence_does_not_depend_on_units():
    tiny = 1e-6 * np.array([(0, 0), (1, 0), (0, 1)])
    assert affinely_independent(tiny)
    assert affinely_independent(1e6 * tiny)


# -- general position ------------------------------------------------------

def test_five_example_points_are_in_general_position():
    pts = [(0, 1), (1, 0), (0, -1), (-1, 0), (1, -1)]
    assert is_general_position(pts, 2)


def test_three_collinear_break_general_position():
    assert not is_general_position([(0, 0), (1, 0), (2, 0), (0, 1)], 2)


def test_two_points_are_in_general_position():
    assert is_general_position([(3, 4), (5, 6)], 2)


def _triple_margin(pts):
    """Smallest relative singular value over all triples; near 0 means almost collinear."""
    out = np.inf
    for c in combinations(range(len(pts)), 3):
        sv = np.linalg.svd(pts[list(c)][1:] - pts[c[0]], compute_uv=False)
        out = min(out, sv[-1] / sv[0] if sv[0] > 0 else 0.0)
    return out


@given(
    arrays(np.float64, (5, 2), elements=coord),
    st.floats(0, 2 * np.pi),
    st.floats(0.2, 5),
    st.floats(0.2, 5),
    st.floats(-1, 1),
    arrays(np.float64, 2, elements=coord),
)
def test_general_position_is_affine_invariant(pts, angle, sx, sy, shear, b):
    c, s = np.cos(angle), np.sin(angle)
    A = np.array([[c, -s], [s, c]]) @ np.array([[sx, shear], [0, sy]])
    margin = _triple_margin(pts)
    if 1e-12 < margin < 1e-3:
        return  # too close to the tolerance to expect a stable answer
    assert is_general_position(pts @ A.T + b) == is_general_position(pts)


@given(st.integers(0, 4), st.integers(0, 4), st.floats(-3, 3))
def test_planted_collinearity_is_detected_after_affine_map(a, b, t):
    if a == b:
        return
    pts = np.array([(0.0, 0.0), (3.0, 1.0), (-1.0, 4.0), (5.0, -2.0), (2.0, 7.0)])
    k = next(x for x in range(5) if x not in (a, b))
    pts[k] = pts[a] + t * (pts[b] - pts[a])
    A = np.array([[2.0, 0.5], [-0.3, 1.5]])
    assert not is_general_position(pts @ A.T + 1.0)


# -- barycentric -----------------------------------------------------------

def test_centroid_has_equal_weights():
    np.testing.assert_allclose(barycentric(TRI.mean(axis=0), TRI), [1 / 3] * 3, atol=1e-15)


def test_vertex_has_unit_weight():
    np.testing.assert_allclose(barycentric(TRI[0], TRI), [1, 0, 0], atol=1e-15)


def test_outside_point_weights():
    # exact oracle: (-1/2, 1, 1/2)
    np.testing.assert_allclose(barycentric((1, -1), TRI), [-0.5, 1.0, 0.5], atol=1e-15)


def test_degenerate_simplex_raises():
    with pytest.raises(DegenerateConfigurationError):
        barycentric((0, 0), [(0, 0), (1, 1), (2, 2)])


# -- regions ---------------------------------------------------------------

def test_example_relay_point_is_region_d():
    assert classify_region((1, -1), TRI) is Region.D


def test_centroid_is_region_g():
    assert classify_region(TRI.mean(axis=0), TRI) is Region.G


def test_edge_midpoint_is_ambiguous():
    with pytest.raises(AmbiguousRegionError):
        classify_region((TRI[0] + TRI[1]) / 2, TRI)


def test_all_negative_pattern_is_not_a_region():
    with pytest.raises(ValueError):
        Region.from_signs((-1, -1, -1))


def test_region_sign_table():
    assert {r.name: r.signs for r in Region} == {
        "A": (1, -1, -1), "B": (1, 1, -1), "C": (-1, 1, -1), "D": (-1, 1, 1),
        "E": (-1, -1, 1), "F": (1, -1, 1), "G": (1, 1, 1),
    }


def test_region_labels_match_barycentric_signs_on_random_points():
    rng = np.random.default_rng(7)
    q = rng.uniform(-6, 6, size=(10_000, 2))
    for p in q:
        lam = barycentric(p, TRI)
        if np.min(np.abs(lam)) < 1e-9:
            continue
        assert classify_region(p, TRI).signs == tuple(int(s) for s in np.sign(lam))


@given(st.sampled_from(list(Region)), st.floats(0.05, 3), st.floats(0.05, 3), st.floats(0.05, 3))
def test_attached_weights_have_region_signs(region, a, b, c):
    lam = np.array(region.signs) * np.array([a, b, c])
    lam = lam / lam.sum()
    if abs(lam.sum() - 1) > 1e-9 or not np.all(np.sign(lam) == region.signs):
        return
    q = lam @ TRI
    phi = compute_phi(np.vstack([TRI, q]))
    weights = -phi[:3] * phi[3]
    assert tuple(int(s) for s in np.sign(weights)) == region.signs


# -- phi -------------------------------------------------------------------

def test_phi_of_example_points():
    phi = compute_phi([(0, 1), (1, 0), (0, -1), (1, -1)])
    np.testing.assert_allclose(phi, np.array([1, -2, -1, 2]) / np.sqrt(10), atol=1e-12)


def test_phi_of_square():
    # exact oracle: null vector (-2, 2, -2, 2); unit norm, last entry positive
    np.testing.assert_allclose(compute_phi([(0, 1), (1, 0), (0, -1), (-1, 0)]), [-0.5, 0.5, -0.5, 0.5], atol=1e-12)


def test_phi_rejects_collinear_triple():
    with pytest.raises(NoUniquePhiError):
        compute_phi([(0, 0), (1, 0), (2, 0), (0, 1)])


def test_phi_needs_d_plus_two_points():
    with pytest.raises(DimensionError):
        compute_phi([(0, 0), (1, 0), (0, 1)])


@given(arrays(np.float64, (4, 2), elements=coord))
def test_phi_properties_2d(pts):
    if not is_general_position(pts):
        return
    phi = compute_phi(pts)
    scale = max(1.0, np.abs(pts).max())
    assert abs(phi.sum()) < 1e-10
    assert np.linalg.norm(phi @ pts) < 1e-10 * scale
    assert abs(np.linalg.norm(phi) - 1) < 1e-12
    assert phi[-1] > 0


@given(arrays(np.float64, (5, 3), elements=coord))
def test_phi_properties_3d(pts):
    if not is_general_position(pts):
        return
    phi = compute_phi(pts)
    scale = max(1.0, np.abs(pts).max())
    assert abs(phi.sum()) < 1e-10
    assert np.linalg.norm(phi @ pts) < 1e-10 * scale
    assert abs(np.linalg.norm(phi) - 1) < 1e-12
