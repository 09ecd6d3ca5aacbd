import random

import pytest
from hypothesis import given, strategies as st

from eqsmooth import corpus
from eqsmooth.complex import SimplicialComplex, barycentric_subdivision, closed_cone
from eqsmooth.errors import NonPureComplex, UnsupportedDimension
from eqsmooth.manifold import (LinkVerdict, Verdict, check_pl_manifold, classify_closed_surface, homology,
                               invariant_factors, is_pl_sphere_link, smith_normal_form)

from conftest import boundary, cycle, simplex
from oracles import bareiss_det, minor_gcd_factors


def test_snf_example():
    D, U, V = smith_normal_form([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    assert [D[i][i] for i in range(3)] == [2, 6, 12]


def test_snf_against_minor_gcd_oracle():
    rng = random.Random(20240501)
    for _ in range(50):
        m, n = rng.randint(1, 4), rng.randint(1, 4)
        A = [[rng.randint(-6, 6) for _ in range(n)] for _ in range(m)]
        assert invariant_factors(A) == minor_gcd_factors(A), A


small = st.integers(-5, 5)


@given(st.integers(1, 4).flatmap(lambda m: st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=m, max_size=m))))
def test_snf_transform_and_divisibility(A):
    D, U, V = smith_normal_form(A)
    m, n = len(A), len(A[0])
    UAV = [[sum(U[i][k] * A[k][l] * V[l][j] for k in range(m) for l in range(n)) for j in range(n)]
           for i in range(m)]
    assert UAV == D
    diag = [D[i][i] for i in range(min(m, n)) if D[i][i]]
    for a, b in zip(diag, diag[1:]):
        assert b % a == 0
    assert all(D[i][j] == 0 for i in range(m) for j in range(n) if i != j)
    assert abs(bareiss_det(U)) == 1 and abs(bareiss_det(V)) == 1


def groups(K):
    return homology(K).to_dict()["groups"]


def test_homology_examples():
    assert groups(boundary(3)) == ["Z", "0", "Z"]
    assert groups(corpus.seven_vertex_torus()) == ["Z", "Z^2", "Z"]
    assert groups(corpus.six_vertex_rp2()) == ["Z", "Z/2", "0"]
    assert groups(boundary(4)) == ["Z", "0", "0", "Z"]
    assert groups(simplex(3)) == ["Z", "0", "0", "0"]
    two = SimplicialComplex.from_abstract([(0, 1), (2, 3)])
    assert groups(two) == ["Z^2", "0"]


@given(st.integers(3, 8))
def test_cycle_homology_and_euler(m):
    H = homology(cycle(m))
    assert H.betti == (1, 1) and H.euler_characteristic() == 0


def test_euler_characteristic_matches_homology():
    for K in (boundary(3), boundary(4), corpus.seven_vertex_torus(), corpus.six_vertex_rp2(),
              barycentric_subdivision(corpus.six_vertex_rp2())):
        assert homology(K).euler_characteristic() == K.euler_characteristic()


def test_surface_classification():
    assert classify_closed_surface(boundary(3)).kind == "sphere"
    t = classify_closed_surface(corpus.seven_vertex_torus())
    assert (t.kind, t.genus, t.orientable) == ("orientable", 1, True)
    p = classify_closed_surface(corpus.six_vertex_rp2())
    assert (p.kind, p.orientable) == ("non-orientable", False)
    bow = SimplicialComplex.from_abstract([(0, 1, 2), (0, 3, 4)])
    assert classify_closed_surface(bow).kind == "non-manifold"
    assert classify_closed_surface(simplex(2)).kind == "not-closed"


def test_link_verdicts():
    assert is_pl_sphere_link(boundary(3), 2) == LinkVerdict.SPHERE
    assert is_pl_sphere_link(boundary(4), 3) == LinkVerdict.SPHERE_NECESSARY
    assert is_pl_sphere_link(corpus.seven_vertex_torus(), 2) == LinkVerdict.NEITHER
    assert is_pl_sphere_link(cycle(5), 1) == LinkVerdict.SPHERE
    assert is_pl_sphere_link(simplex(2), 2) == LinkVerdict.BALL
    assert is_pl_sphere_link(closed_cone(boundary(3)), 3) == LinkVerdict.BALL_NECESSARY
    with pytest.raises(UnsupportedDimension):
        is_pl_sphere_link(boundary(5), 4)


def test_manifold_examples():
    assert check_pl_manifold(boundary(4), 3).verdict == Verdict.VERIFIED_MANIFOLD
    rep = check_pl_manifold(corpus.two_tetrahedra_at_vertex(), 3)
    assert rep.verdict == Verdict.VERIFIED_NOT_MANIFOLD
    assert rep.to_dict()["failing_vertices"] == [0]
    rep = check_pl_manifold(boundary(5), 4)
    assert rep.verdict == Verdict.NECESSARY_CONDITIONS_PASSED and rep.partial
    rep = check_pl_manifold(simplex(3), 3)
    assert rep.verdict == Verdict.VERIFIED_MANIFOLD and rep.boundary
    with pytest.raises(NonPureComplex):
        check_pl_manifold(boundary(3), 3)


def test_verdicts_stable_under_subdivision():
    for K, n in ((boundary(4), 3), (corpus.two_tetrahedra_at_vertex(), 3), (corpus.seven_vertex_torus(), 2),
                 (SimplicialComplex.from_abstract([(0, 1, 2), (0, 3, 4)]), 2)):
        before = check_pl_manifold(K, n).verdict
        after = check_pl_manifold(barycentric_subdivision(K), n, threads=4).verdict
        assert before == after


def test_threads_give_same_report():
    K = barycentric_subdivision(boundary(4))
    assert check_pl_manifold(K, 3).to_dict() == check_pl_manifold(K, 3, threads=4).to_dict()
