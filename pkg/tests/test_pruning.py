import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from affineframe.catalog import layered_framework, square_framework, square_with_outer_vertex
from affineframe.construction import AdditionRequest, add_vertex
from affineframe.errors import (
    AuditError,
    DegenerateConfigurationError,
    InadmissibleRegionError,
    NoUniquePhiError,
    StaleHierarchyError,
    TopologyError,
)
from affineframe.framework import edge_key
from affineframe.geometry import Region, barycentric, classify_region, compute_phi
from affineframe.pruning import (
    DeletionSupport,
    admissible_relay_regions,
    common_perceived,
    delete_edge,
    delete_edge_direct,
    delete_edge_two_relays,
    delete_edge_with_relay,
    delete_inner_vertex,
    delete_outer_vertex,
    delete_vertex,
    deletion_scaling,
    edge_deletion_scaling,
    find_deletion_support,
)
from affineframe.verify import spectral_audit

# Weights after removing edge (2, 3) from the five-vertex example; exact oracle.
EDGE_FREE_WEIGHTS = {(1, 2): 2.0, (1, 3): -0.5, (1, 4): 1.0, (1, 5): -1.0, (2, 4): -1.0, (2, 5): 2.0, (3, 4): 1.0, (3, 5): 1.0}


def zero_count(fw, rel=1e-6):
    ev = np.linalg.eigvalsh(fw.stress)
    return int(np.sum(np.abs(ev) < rel * ev[-1]))


# -- scaling ---------------------------------------------------------------

def test_scaling_on_five_vertex_example(square_plus):
    phi, s_ed = edge_deletion_scaling(square_plus, 1, 2, 3, 5)
    np.testing.assert_allclose(phi, np.array([1, -2, -1, 2]) / np.sqrt(10), atol=1e-12)
    assert s_ed == pytest.approx(4.0, abs=1e-9)


def test_zero_stress_entry_needs_no_scaling():
    assert deletion_scaling(0.0, 0.3, -0.2) == 0.0


def test_scaling_on_square_is_negative(square):
    _, s_ed = edge_deletion_scaling(square, 1, 2, 3, 4)
    assert s_ed == pytest.approx(-4.0, abs=1e-9)


def test_scaling_needs_the_edge(square_plus):
    with pytest.raises(TopologyError):
        edge_deletion_scaling(square_plus, 2, 4, 5, 1)  # (4, 5) is not an edge


def test_scaling_needs_general_position():
    fw = add_vertex(square_framework(), AdditionRequest((0.0, 0.5), parents=(2, 4, 1)))
    with pytest.raises(NoUniquePhiError):
        edge_deletion_scaling(fw, 2, 1, 3, 5)  # 1, 3 and 5 all lie on x = 0


@given(st.floats(0.1, 10))
def test_scaled_phi_gives_the_same_block(c):
    fw = square_with_outer_vertex()
    phi, s_ed = edge_deletion_scaling(fw, 1, 2, 3, 5)
    s_c = deletion_scaling(-fw.weight(2, 3), c * phi[1], c * phi[2])
    np.testing.assert_allclose(s_c * np.outer(c * phi, c * phi), s_ed * np.outer(phi, phi), atol=1e-12)


# -- support search --------------------------------------------------------

def test_support_found_on_five_vertex_example(square_plus):
    sup = find_deletion_support(square_plus, 2, 3)
    assert (sup.anchors, sup.q) == ((1,), 5)
    assert sup.s_ed == pytest.approx(4.0, abs=1e-9)


def test_support_margin_skips_thin_phi(square_plus):
    # phi of (1, 2, 3, 5) has smallest magnitude 1/sqrt(10) ~ 0.316
    assert find_deletion_support(square_plus, 2, 3, min_phi=0.3).q == 5
    assert find_deletion_support(square_plus, 2, 3, min_phi=0.4) is None


@given(st.floats(0.0, 0.5))
def test_support_respects_margin(margin):
    fw = layered_framework()
    for j, k in sorted(fw.edges):
        sup = find_deletion_support(fw, j, k, min_phi=margin)
        if sup is not None:
            assert np.min(np.abs(sup.phi)) >= margin and sup.s_ed > 0


def test_no_support_on_square(square):
    assert find_deletion_support(square, 2, 3) is None


def test_no_support_without_common_neighbors(square):
    assert common_perceived(square, 2, 4, 1.41) == []
    assert find_deletion_support(square, 2, 4, d_per=1.41) is None


# -- direct deletion -------------------------------------------------------

def test_direct_deletion_matches_oracle(square_plus):
    fw = delete_edge_direct(square_plus, find_deletion_support(square_plus, 2, 3))
    assert not fw.has_edge(2, 3)
    assert set(fw.edges) == set(EDGE_FREE_WEIGHTS)
    for e, w in EDGE_FREE_WEIGHTS.items():
        assert fw.edges[e] == pytest.approx(w, abs=1e-12)
    assert zero_count(fw) == 3


def test_direct_deletion_needs_positive_scaling(square):
    phi = compute_phi(square.points((1, 2, 3, 4)))
    with pytest.raises(ValueError):
        delete_edge_direct(square, DeletionSupport((2, 3), (1,), 4, phi, -4.0))


DELETABLE = [e for e in sorted(layered_framework().edges) if find_deletion_support(layered_framework(), *e)]


@pytest.mark.parametrize("edge", DELETABLE)
def test_direct_deletion_only_touches_support(layered, edge):
    sup = find_deletion_support(layered, *edge)
    fw = delete_edge_direct(layered, sup)
    inside = set(sup.vertices)
    idx = [layered.index[v] for v in layered.ids]
    a, b = layered.stress, fw.stress[np.ix_(idx, idx)]
    for x, u in enumerate(layered.ids):
        for y, v in enumerate(layered.ids):
            if not (u in inside and v in inside):
                assert a[x, y] == b[x, y]


# -- relays ----------------------------------------------------------------

def test_admissible_regions_follow_weight_sign(square):
    assert square.weight(2, 3) > 0 and admissible_relay_regions(square, 2, 3) == {Region.A, Region.D, Region.G}
    assert square.weight(1, 3) < 0 and admissible_relay_regions(square, 1, 3) == {Region.B, Region.C, Region.E, Region.F}


def _points_in_region(region, tri, rng, count):
    out = []
    while len(out) < count:
        mags = rng.uniform(0.05, 2.0, size=3)
        lam = np.array(region.signs) * mags
        if lam.sum() <= 0.05:
            continue
        lam = lam / lam.sum()
        if np.all(np.sign(lam) == region.signs):
            out.append(lam @ tri)
    return out


@pytest.mark.parametrize("edge", [(2, 3), (1, 3)])
def test_admissible_set_agrees_with_sign_condition(square, edge):
    j, k = edge
    i = next(v for v in (1, 2, 3, 4) if v not in edge)
    tri = square.points((i, j, k))
    omega_jk = -square.weight(j, k)
    admissible = admissible_relay_regions(square, j, k)
    rng = np.random.default_rng(11)
    for region in Region:
        for q in _points_in_region(region, tri, rng, 100):
            phi = compute_phi(np.vstack([tri, q]))
            w_jq, w_kq = -phi[1] * phi[3], -phi[2] * phi[3]
            assert (omega_jk * w_jq * w_kq < 0) == (region in admissible)


def test_relay_deletion_on_square(square):
    assert classify_region((1, -1), square.points((1, 2, 3))) is Region.D
    fw = delete_edge_with_relay(square, 2, 3, 1, (1.0, -1.0))
    assert not fw.has_edge(2, 3)
    assert fw.hierarchy[5].parents == (1, 2, 3)
    # exact oracle: relay scaling 5; the result equals the direct-deletion result
    assert fw.hierarchy[5].s == pytest.approx(5.0, abs=1e-9)
    for e, w in EDGE_FREE_WEIGHTS.items():
        assert fw.edges[e] == pytest.approx(w, abs=1e-12)
    assert zero_count(fw) == 3


def test_relay_in_wrong_region_is_refused(square):
    tri = square.points((2, 1, 3))
    with pytest.raises(InadmissibleRegionError) as info:
        delete_edge_with_relay(square, 1, 3, 2, tri.mean(axis=0))
    assert info.value.region is Region.G
    assert "{B, C, E, F}" in str(info.value)


def test_relay_must_be_in_general_position(square):
    with pytest.raises(DegenerateConfigurationError):
        delete_edge_with_relay(square, 2, 3, 1, (0.5, 0.5))


def test_case_dispatch_prefers_direct_deletion(square_plus):
    fw = delete_edge(square_plus, 2, 3, relay=(5.0, 5.0))
    assert fw.n == 5


def test_case_dispatch_falls_back_to_relay(square):
    fw = delete_edge(square, 2, 3, relay=(1.0, -1.0))
    assert fw.n == 5 and not fw.has_edge(2, 3)


def test_case_dispatch_without_relay_raises(square):
    with pytest.raises(TopologyError):
        delete_edge(square, 2, 3)


def test_two_relay_deletion(square):
    fw = delete_edge_two_relays(square, 2, 4, ((0.0, 0.3), 1), (-0.2, 0.3), d_per=1.41)
    assert fw.n == 6 and not fw.has_edge(2, 4)
    assert fw.hierarchy[5].parents == (2, 4, 1) and fw.hierarchy[6].parents == (5, 2, 4)
    assert zero_count(fw) == 3 and spectral_audit(fw).passed


def test_two_relays_refuse_admissibility_violation(square):
    # after the first relay the weight on (2, 4) is negative; a point inside the triangle is region G
    with pytest.raises(InadmissibleRegionError) as info:
        delete_edge_two_relays(square, 2, 4, ((0.0, 0.3), 1), (0.0, 0.1), d_per=1.41)
    assert info.value.stage == "relay 2"


def test_two_relays_refuse_collinear_first_relay(square):
    with pytest.raises(DegenerateConfigurationError) as info:
        delete_edge_two_relays(square, 2, 4, ((0.0, 0.0), 1), (-0.2, 0.3))
    assert info.value.stage == "relay 1"


def test_two_relays_need_disjoint_neighborhoods(square):
    with pytest.raises(TopologyError):
        delete_edge_two_relays(square, 2, 4, ((0.0, 0.3), 1), (-0.2, 0.3), d_per=3.0)


# -- outer vertex deletion -------------------------------------------------

def test_outer_deletion_on_layered(layered):
    fw = delete_outer_vertex(layered, 9)
    assert fw.n == 8 and 9 not in fw.index
    assert zero_count(fw) == 3 and spectral_audit(fw).passed
    assert 9 not in fw.hierarchy[6].children


def test_outer_deletion_only_touches_footprint(layered):
    fw = delete_outer_vertex(layered, 9)
    inside = {3, 4, 6, 9}
    for (i, j), w in layered.edges.items():
        if not (i in inside and j in inside):
            assert fw.edges[(i, j)] == w


def test_leaders_are_never_deleted(layered):
    with pytest.raises(TopologyError):
        delete_outer_vertex(layered, 1)
    with pytest.raises(TopologyError):
        delete_vertex(layered, 2)


def test_outer_deletion_refuses_inner_nodes(layered):
    with pytest.raises(TopologyError):
        delete_outer_vertex(layered, 5)


def test_outer_deletion_needs_d_plus_one_neighbors(layered):
    with pytest.raises(TopologyError):
        delete_outer_vertex(layered, 4)  # seed vertex with many neighbors


def test_last_follower_is_kept(square):
    with pytest.raises(TopologyError):
        delete_vertex(square, 4)


# -- inner vertex deletion -------------------------------------------------

def _structure(fw):
    return {v: (set(r.parents), r.level, set(r.children)) for v, r in fw.hierarchy.items()}


def test_inner_deletion_reparents_children(layered):
    fw = delete_inner_vertex(layered, 5)
    s = _structure(fw)
    assert s[6] == ({1, 3, 4}, 1, {7, 8, 9})
    assert s[7] == ({1, 2, 6}, 2, set())
    assert s[8] == ({1, 3, 6}, 2, set())
    assert s[9] == ({3, 4, 6}, 2, set())
    assert spectral_audit(fw).passed and zero_count(fw) == 3


def test_inner_deletion_keeps_child_scalings():
    fw = layered_framework()
    fw = add_vertex(fw, AdditionRequest((3.0, -4.0), parents=(1, 4, 5), s=2.5))
    out = delete_inner_vertex(fw, 5)
    assert out.hierarchy[10].s == 2.5


def test_inner_node_with_single_child():
    fw = add_vertex(square_framework(1.0), AdditionRequest((1.0, -1.0), parents=(1, 2, 3)))
    fw = add_vertex(fw, AdditionRequest((1.5, -2.0), parents=(2, 3, 5)))
    out = delete_inner_vertex(fw, 5)
    # the child swaps 5 for the first of 5's parents it lacks
    assert out.hierarchy[6].parents == (2, 3, 1)
    assert out.hierarchy[6].level == 1
    assert zero_count(out) == 3 and spectral_audit(out).passed


def test_inner_deletion_needs_children(layered):
    with pytest.raises(TopologyError):
        delete_inner_vertex(layered, 9)


def test_seed_vertices_have_no_record_to_remove(layered):
    with pytest.raises(TopologyError):
        delete_inner_vertex(layered, 4)


def test_inner_deletion_detects_foreign_edits_on_its_row(layered):
    sup = find_deletion_support(layered, 5, 7)
    edited = delete_edge_direct(layered, sup)
    with pytest.raises(StaleHierarchyError):
        delete_inner_vertex(edited, 5)


def test_dispatch_picks_inner_or_outer(layered):
    assert delete_vertex(layered, 5).n == 8
    assert delete_vertex(layered, 9).n == 8
