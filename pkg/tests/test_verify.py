import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from affineframe.catalog import layered_framework, square_with_outer_vertex, tetrahedron_seed
from affineframe.construction import AdditionRequest, add_vertex
from affineframe.errors import DegenerateConfigurationError
from affineframe.framework import Framework, apply_block
from affineframe.verify import (
    Tolerances,
    check_affine_localizability,
    check_null_space,
    check_universal_rigidity,
    full_audit,
    spectral_audit,
)


def test_constructor_output_is_rigid(square_plus):
    rep = check_universal_rigidity(square_plus)
    assert rep.passed and rep.zero_count == 3 and rep.general_position_ok


def test_isolated_follower_adds_a_kernel_direction(square_plus):
    # take vertex 5's addition block back out: its edges vanish, the rest is the square
    edges = dict(square_plus.edges)
    apply_block(edges, *square_plus.hierarchy[5].block(), sign=-1.0)
    assert not any(5 in e for e in edges)
    rep = check_universal_rigidity(square_plus._derive(edges=edges))
    assert rep.zero_count == 4 and rep.psd_ok and not rep.passed


def test_dropping_edges_without_rebalancing_breaks_psd(square_plus):
    edges = {e: w for e, w in square_plus.edges.items() if 5 not in e}
    rep = check_universal_rigidity(square_plus._derive(edges=edges))
    assert not rep.psd_ok and not rep.passed


def test_collinear_neighborhood_fails_general_position(square):
    fw = add_vertex(square, AdditionRequest((0.5, -0.5), parents=(1, 2, 4)))  # 2, 3 and 5 collinear, 3 not a parent
    assert not check_universal_rigidity(fw).passed
    assert fw.hierarchy[5].parents == (1, 2, 4)
    assert check_universal_rigidity(fw, neighborhoods=False).passed


def test_layered_example_has_collinear_closed_neighborhoods(layered):
    # vertices 2, 4 and 6 all lie on x = 0 and share the closed neighborhood of 4
    rep = check_universal_rigidity(layered)
    assert 4 in rep.degenerate_vertices
    assert rep.psd_ok and rep.rank_ok
    assert not check_universal_rigidity(layered, Tolerances(general_position=False)).require_general_position


def test_localizability_of_constructor_output(square_plus):
    rep = check_affine_localizability(square_plus)
    assert rep.passed and rep.reconstruction_residual < 1e-12


def test_collinear_leaders_cannot_be_declared():
    pts = [(0, 0), (1, 0), (2, 0), (0, 1)]
    with pytest.raises(DegenerateConfigurationError):
        Framework.build(2, [1, 2, 3, 4], pts, [1, 2, 3], {(1, 4): 1.0})


def test_layered_follower_block_is_definite(layered):
    assert check_affine_localizability(layered).min_eigenvalue_ff > 0


def test_singular_follower_block_fails_localizability(square_plus):
    edges = {e: w for e, w in square_plus.edges.items() if 5 not in e}
    rep = check_affine_localizability(square_plus._derive(edges=edges))
    assert not rep.pd_ok and not rep.passed


def test_null_space_of_constructor_output(layered):
    assert check_null_space(layered).passed


def test_path_laplacian_has_the_wrong_kernel():
    pts = [(0, 1), (1, 0), (0, -1), (-1, 0)]
    fw = Framework.build(2, [1, 2, 3, 4], pts, [1, 2, 3], {(1, 2): 1.0, (2, 3): 1.0, (3, 4): 1.0})
    rep = check_null_space(fw)
    assert not rep.passed and rep.distance > 0.5


def test_seed_passes_full_audit(square):
    assert full_audit(square).passed


def test_corrupted_weight_fails_equilibrium(square_plus):
    edges = dict(square_plus.edges)
    edges[(1, 5)] *= 1.01
    rep = full_audit(square_plus._derive(edges=edges))
    assert not rep.equilibrium_ok and not rep.passed
    assert any("equilibrium" in f for f in rep.failures())


def test_3d_addition_audit_reports_four_zeros():
    fw = add_vertex(tetrahedron_seed(), AdditionRequest((0.4, 0.3, 1.1)))
    rep = full_audit(fw)
    assert rep.passed and rep.rigidity.zero_count == 4


def test_report_serializes(layered):
    rep = spectral_audit(layered)
    data = json.loads(json.dumps(rep.to_dict(), default=float))
    assert data["passed"] and data["rigidity"]["zero_count"] == 3
    assert "audit: PASS" in rep.summary()


@given(st.floats(0, 2 * np.pi), st.floats(-50, 50), st.floats(-50, 50))
def test_audit_is_invariant_under_rigid_motion(angle, tx, ty):
    fw = layered_framework()
    c, s = np.cos(angle), np.sin(angle)
    R = np.array([[c, -s], [s, c]])
    moved = Framework.build(2, fw.ids, fw.positions @ R.T + (tx, ty), fw.leaders, dict(fw.edges), dict(fw.hierarchy))
    a, b = spectral_audit(fw), spectral_audit(moved)
    assert a.passed == b.passed
    np.testing.assert_allclose(a.rigidity.eigenvalues, b.rigidity.eigenvalues, atol=1e-12)
    assert b.null_space.distance < 1e-6


def test_audit_is_invariant_under_relabeling():
    fw = square_with_outer_vertex()
    perm = {1: 7, 2: 3, 3: 9, 4: 1, 5: 2}
    edges = {tuple(sorted((perm[i], perm[j]))): w for (i, j), w in fw.edges.items()}
    relabeled = Framework.build(2, [perm[v] for v in fw.ids], fw.positions, [7, 3, 9], edges)
    a, b = full_audit(fw), full_audit(relabeled)
    assert a.passed and b.passed
    np.testing.assert_allclose(a.rigidity.eigenvalues, b.rigidity.eigenvalues, atol=1e-12)
