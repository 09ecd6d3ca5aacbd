from fractions import Fraction as F
import itertools

import pytest
from hypothesis import given, strategies as st

from eqsmooth import corpus
from eqsmooth.complex import SimplicialComplex, barycentric_subdivision, check_subdivision, total_volume
from eqsmooth.errors import ActionError, GroupTooLarge
from eqsmooth.group import (GroupAction, PLHomeoSpec, action_is_simplicial_exact, apply_simplex, automorphism_group,
                            close_group, compose, equivariant_triangulate, induced_action, inverse,
                            normalize_pointwise_fixed, orbits, pl_compose, pl_equal, validate_plhomeo,
                            verify_simplicial_action, volumes_match)

from conftest import boundary, cycle, simplex


def test_full_symmetric_group_on_tetrahedron_boundary():
    perms = list(itertools.permutations(range(4)))
    rep = verify_simplicial_action(boundary(3), perms)
    assert rep.ok and len(perms) == 24


def test_adjacent_swap_is_not_an_automorphism():
    rep = verify_simplicial_action(cycle(4), [(0, 1, 2, 3), (1, 0, 2, 3)])
    assert "not-an-automorphism" in rep.kinds()


def test_rotation_generates_order_four():
    rot = (1, 2, 3, 0)
    assert verify_simplicial_action(cycle(4), [rot], generators=True).ok
    assert GroupAction.generated_by([rot], 4).order == 4
    # as a bare set it is not a group
    kinds = verify_simplicial_action(cycle(4), [rot]).kinds()
    assert {"missing-identity", "not-closed"} <= kinds


def test_automorphism_orders():
    assert automorphism_group(boundary(3)).order == 24
    assert automorphism_group(cycle(4)).order == 8
    assert automorphism_group(cycle(6)).order == 12
    assert automorphism_group(corpus.seven_vertex_torus()).order == 42
    assert automorphism_group(corpus.six_vertex_rp2()).order == 60


def brute_force_automorphisms(K):
    n = len(K.points)
    return {p for p in itertools.permutations(range(n)) if all(apply_simplex(p, s) in K.simplices for s in K.facets)}


@given(st.sets(st.sampled_from(list(itertools.combinations(range(5), 2))), min_size=1, max_size=7))
def test_automorphisms_match_brute_force(edges):
    K = SimplicialComplex.from_abstract(list(edges) + [(v,) for v in range(5)])
    assert set(automorphism_group(K).elements) == brute_force_automorphisms(K)


def test_orbit_examples():
    B = boundary(3)
    assert orbits(automorphism_group(B), B.vertices) == [[0, 1, 2, 3]]
    half = GroupAction.generated_by([(2, 3, 0, 1)], 4)
    assert orbits(half, range(4)) == [[0, 2], [1, 3]]
    assert orbits(GroupAction.trivial(4), range(4)) == [[0], [1], [2], [3]]
    edges = orbits(automorphism_group(B), B.faces(1))
    assert len(edges) == 1 and len(edges[0]) == 6


def test_group_closure_limit():
    gens = [(1, 0) + tuple(range(2, 7)), tuple(range(1, 7)) + (0,)]
    assert len(close_group(gens, 7)) == 5040
    with pytest.raises(GroupTooLarge):
        close_group(gens, 7, max_order=100)


def invariant_not_fixed(K, G):
    """Simplices mapped to themselves by g but not pointwise fixed (independent check)."""
    bad = []
    for g in G:
        for s in K.simplices:
            img = tuple(sorted(g[v] for v in s))
            if img == s and any(g[v] != v for v in s):
                bad.append((g, s))
    return bad


def test_normalize_pointwise_fixed():
    edge = SimplicialComplex([(0,), (1,)], [(0, 1)])
    G = GroupAction.generated_by([(1, 0)], 2)
    assert invariant_not_fixed(edge, G)
    K1, G1 = normalize_pointwise_fixed(edge, G)
    assert len(K1.vertices) == 3 and (F(1, 2),) in K1.points
    m = K1.points.index((F(1, 2),))
    assert all(g[m] == m for g in G1)
    assert not invariant_not_fixed(K1, G1)

    B = boundary(3)
    K1, G1 = normalize_pointwise_fixed(B, automorphism_group(B))
    assert G1.order == 24 and not invariant_not_fixed(K1, G1)

    K1, G1 = normalize_pointwise_fixed(B, GroupAction.trivial(4))
    assert G1.order == 1 and not invariant_not_fixed(K1, G1)


def test_induced_action_is_simplicial():
    B = boundary(3)
    G = automorphism_group(B)
    B1 = barycentric_subdivision(B)
    assert verify_simplicial_action(B1, induced_action(G, B1).elements).ok


def test_plhomeo_validation():
    K, g = corpus.segment_involution()
    assert validate_plhomeo(g, K).ok
    # 0 and 1/3 both go to 1, so the first piece collapses
    bad = PLHomeoSpec(g.domain, [(1,), (1,), (0,)])
    assert not validate_plhomeo(bad, K).ok


def test_pl_composition_of_involution_is_identity():
    K, g = corpus.segment_involution()
    gg = pl_compose(g, g)
    assert pl_equal(gg, PLHomeoSpec.identity(K))
    assert not pl_equal(g, PLHomeoSpec.identity(K))
    for x in (0, F(1, 5), F(1, 3), F(1, 2), 1):
        assert gg((F(x),)) == (F(x),)


def check_pipeline(K, maps, order):
    res = equivariant_triangulate(K, maps)
    assert res.group_order == order
    assert action_is_simplicial_exact(res.complex, maps)
    assert volumes_match(res.complex, K)
    assert check_subdivision(res.complex, K).ok
    assert verify_simplicial_action(res.complex, res.action.elements).ok
    return res


def test_pipeline_square_rotation_keeps_complex():
    K = corpus.square_boundary()
    res = check_pipeline(K, [PLHomeoSpec.from_permutation(K, (1, 2, 3, 0))], 4)
    assert res.complex.same_as(K)
    out = res.complex.points
    rot = tuple(out.index(K.points[(K.points.index(p) + 1) % 4]) for p in out)
    assert rot in res.action.elements


def test_pipeline_segment_involution():
    K, g = corpus.segment_involution()
    res = check_pipeline(K, [g], 2)
    xs = sorted(p[0] for p in res.complex.points)
    assert xs == [0, F(1, 3), F(2, 3), 1]
    # the fixed point 1/2 appears once invariant simplices are made pointwise fixed
    K1, _ = normalize_pointwise_fixed(res.complex, res.action)
    assert (F(1, 2),) in K1.points


def test_pipeline_triangle_s3_keeps_complex():
    K = simplex(2)
    maps = [PLHomeoSpec.from_permutation(K, p) for p in itertools.permutations(range(3))]
    res = check_pipeline(K, maps, 6)
    assert res.complex.same_as(K)


def test_pipeline_rectangle_involution_needs_new_vertices():
    K, g = corpus.rectangle_involution()
    assert not g.domain.same_as(K)
    res = check_pipeline(K, [g], 2)
    assert len(res.complex.points) > len(K.points)
    assert total_volume(res.complex) == total_volume(K)


def test_pipeline_rejects_non_homeomorphism():
    K, g = corpus.segment_involution()
    bad = PLHomeoSpec(g.domain, [(1,), (F(1, 2),), (F(1, 2),)])
    with pytest.raises(ActionError):
        equivariant_triangulate(K, [bad])


@given(st.permutations(range(4)), st.permutations(range(4)))
def test_compose_and_inverse(a, b):
    a, b = tuple(a), tuple(b)
    ab = compose(a, b)
    for i in range(4):
        assert ab[i] == a[b[i]]
    assert compose(a, inverse(a)) == tuple(range(4))
