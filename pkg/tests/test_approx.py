from fractions import Fraction as F
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from eqsmooth import corpus
from eqsmooth.approx import (PDFunction, c1_distance_estimate, diameter, edgewise_subdivision, face_agreement,
                             quality, refine_until_close, relabel_to_points, secant_map, thickness)
from eqsmooth.complex import barycentric_subdivision, check_subdivision, validate_complex
from eqsmooth.errors import ConvergenceError, DegenerateSimplex, EdgewiseCanonicalizationError
from eqsmooth.group import automorphism_group, induced_action, verify_simplicial_action
from eqsmooth.smoothing import unit_sphere_map

from conftest import boundary, simplex

def seg_dist(p, a, b):
    p, a, b = (np.array([float(c) for c in x]) for x in (p, a, b))
    t = np.clip(np.dot(p - a, b - a) / np.dot(b - a, b - a), 0, 1)
    return float(np.linalg.norm(p - (a + t * (b - a))))


def triangle_thickness_oracle(pts):
    c = [sum(F(p[i]) for p in pts) / 3 for i in range(len(pts[0]))]
    d = min(seg_dist(c, pts[i], pts[j]) for i, j in ((0, 1), (1, 2), (0, 2)))
    diam = max(math.dist([float(x) for x in pts[i]], [float(x) for x in pts[j]]) for i in range(3) for j in range(3))
    return d / diam


def unit_triangle():
    return corpus.unit_simplex(2)


def test_thickness_examples():
    tri = unit_triangle()
    pts = tri.simplex_points(tri.facets[0])
    assert abs(thickness(pts) - math.sqrt(3) / 6) < 1e-9
    assert abs(thickness(pts) - triangle_thickness_oracle(pts)) < 1e-12
    assert thickness([(0,), (3,)]) == 0.5
    right = [(0, 0), (1, 0), (0, 1)]
    assert abs(thickness(right) - 1 / 6) < 1e-12
    assert abs(triangle_thickness_oracle(right) - 1 / 6) < 1e-12
    with pytest.raises(DegenerateSimplex):
        thickness([(0, 0), (1, 1), (2, 2)])


coords = st.fractions(min_value=-3, max_value=3, max_denominator=5)


@given(st.lists(st.tuples(coords, coords), min_size=3, max_size=3))
def test_thickness_matches_oracle_on_triangles(pts):
    a, b, c = pts
    if (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) == 0:
        return
    assert abs(thickness(pts) - triangle_thickness_oracle(pts)) < 1e-9


@given(st.lists(st.tuples(coords, coords, coords), min_size=4, max_size=4),
       st.fractions(min_value=F(1, 4), max_value=4), st.tuples(coords, coords, coords))
def test_thickness_is_similarity_invariant(pts, scale, shift):
    from eqsmooth.exact import affinely_independent
    if not affinely_independent([tuple(F(x) for x in p) for p in pts]):
        return
    moved = [tuple(scale * x + s for x, s in zip(p, shift)) for p in pts]
    t = thickness(pts)
    assert 0 < t <= 0.5
    assert abs(thickness(moved) - t) < 1e-9
    assert abs(diameter(moved) - float(scale) * diameter(pts)) < 1e-9


def test_edgewise_counts():
    assert len(edgewise_subdivision(simplex(2), 2).facets) == 4
    assert len(edgewise_subdivision(simplex(3), 2).facets) == 8
    assert len(edgewise_subdivision(simplex(2), 3).facets) == 9
    assert len(edgewise_subdivision(simplex(3), 3).facets) == 27
    assert len(edgewise_subdivision(simplex(1), 3).facets) == 3


def test_edgewise_is_a_subdivision():
    for K, k in ((simplex(2), 2), (simplex(3), 2), (simplex(3), 3), (boundary(3), 2)):
        out = edgewise_subdivision(K, k)
        assert validate_complex(out).ok
        assert check_subdivision(out, K).ok
        for lab in out.labels:
            assert sum(m for _, m in lab) == k


def test_edgewise_quality():
    tri = unit_triangle()
    q0 = quality(tri)
    assert abs(q0.max_diameter - 1) < 1e-12 and abs(q0.min_thickness - math.sqrt(3) / 6) < 1e-9
    q1 = quality(edgewise_subdivision(tri, 2))
    assert abs(q1.max_diameter - 0.5) < 1e-12 and abs(q1.min_thickness - math.sqrt(3) / 6) < 1e-9
    qb = quality(corpus.unit_tetrahedron_boundary())
    assert abs(qb.max_diameter - 1) < 1e-12 and abs(qb.min_thickness - math.sqrt(3) / 6) < 1e-9


def test_edgewise_respects_group():
    B = boundary(3)
    G = automorphism_group(B)
    out = edgewise_subdivision(B, 2, G)
    assert len(out.facets) == 16
    assert verify_simplicial_action(out, induced_action(G, out).elements).ok
    T = simplex(2)
    G3 = automorphism_group(T)
    out = edgewise_subdivision(T, 3, G3)
    assert verify_simplicial_action(out, induced_action(G3, out).elements).ok


def test_edgewise_full_group_on_tetrahedron_cannot_be_canonical():
    T = simplex(3)
    with pytest.raises(EdgewiseCanonicalizationError):
        edgewise_subdivision(T, 2, automorphism_group(T))


def quadratic(K):
    return corpus.builtin_function("quadratic", K)


def test_secant_examples():
    K = corpus.interval([0, 1])
    Kt = corpus.interval([0, F(1, 2), 1])
    g = secant_map(Kt, quadratic(K))
    s = Kt.facets[0]
    assert abs(g.value(s, np.array([0.5, 0.5]))[0] - 1 / 8) < 1e-15


def test_secant_reproduces_affine_maps():
    K = corpus.unit_tetrahedron_boundary()
    A = np.array([[1.0, -2.0, 0.5, 3.0], [0.0, 1.0, 1.0, -1.0]])
    f = PDFunction.from_ambient(K, lambda x: x @ A.T + 1.0, lambda x, u: u @ A.T, 2)
    Kt = relabel_to_points(edgewise_subdivision(K, 2))
    gap = c1_distance_estimate(f, secant_map(Kt, f))
    assert gap.value < 1e-12 and gap.derivative < 1e-12


def test_secant_of_radial_square():
    K = corpus.square_boundary()
    Kt = relabel_to_points(barycentric_subdivision(K))
    g = secant_map(Kt, unit_sphere_map(K))
    assert np.allclose(np.linalg.norm(g.vertex_values, axis=1), 1.0, atol=1e-15)
    for s in Kt.facets:
        mid = g.value(s, np.array([0.5, 0.5]))
        assert np.linalg.norm(mid) < 1 - 1e-3
    assert face_agreement(g) < 1e-12


def quadratic_gaps_oracle(m):
    """Dense sampling of x^2 against its piecewise-linear interpolant on m pieces."""
    nodes = np.linspace(0, 1, m + 1)
    x = np.linspace(0, 1, 200 * m + 1)
    value = np.max(np.abs(x ** 2 - np.interp(x, nodes, nodes ** 2)))
    slopes = (nodes[1:] + nodes[:-1])  # slope of the chord on each piece
    deriv = 0.0
    for i in range(m):
        xi = np.linspace(nodes[i], nodes[i + 1], 201)
        deriv = max(deriv, np.max(np.abs(2 * xi - slopes[i])))
    return value, deriv


def test_c1_gap_examples():
    K = corpus.interval([0, 1])
    f = quadratic(K)
    assert tuple(c1_distance_estimate(f, f)) == (0.0, 0.0)
    for m in (2, 4, 8):
        h = 1 / m
        Kt = corpus.interval([F(i, m) for i in range(m + 1)])
        vgap, dgap = c1_distance_estimate(f, secant_map(Kt, f))
        ov, od = quadratic_gaps_oracle(m)
        assert abs(vgap - ov) <= 1e-12 and abs(dgap - od) <= 1e-12
        # closed forms: max|f''| h^2 / 8 with f'' = 2, and h |f''| / 2
        assert abs(vgap - h * h / 4) < 1e-12
        assert abs(dgap - h) < 1e-12


def test_refine_until_close():
    K = corpus.interval([0, 1])
    lin = PDFunction.from_ambient(K, lambda x: 3 * x + 1, lambda x, u: 3 * u, 1)
    r = refine_until_close(K, lin, 1e-9)
    assert r.rounds == 0 and r.complex is K
    r = refine_until_close(K, quadratic(K), 0.3)
    assert r.rounds == 2 and len(r.complex.facets) == 4
    assert r.history[-1]["derivative_gap"] == pytest.approx(0.25)
    assert refine_until_close(K, quadratic(K), 5.0).rounds == 0
    with pytest.raises(ConvergenceError):
        refine_until_close(K, quadratic(K), 1e-3, max_rounds=2)


def test_refine_two_dimensional_function_monotone():
    K = corpus.unit_simplex(2)
    f = corpus.builtin_function("sine", K)
    hist = []
    Kt = K
    for _ in range(4):
        hist.append(tuple(c1_distance_estimate(f, secant_map(Kt, f, check=Kt is not K))))
        Kt = relabel_to_points(edgewise_subdivision(Kt, 2))
    for a, b in zip(hist, hist[1:]):
        assert b[0] < a[0] and b[1] < a[1]


def test_refine_keeps_group_action():
    K = corpus.square_boundary()
    G = automorphism_group(K)
    r = refine_until_close(K, unit_sphere_map(K), 0.05, G=G)
    assert r.rounds >= 1
    out = r.complex
    index = out.point_index
    # every symmetry of the square is linear; it must permute the refined complex
    for g in G:
        M = np.array([[float(c) for c in K.points[g[0]]], [float(c) for c in K.points[g[1]]]]).T
        perm = []
        for p in out.points:
            q = M @ np.array([float(c) for c in p])
            perm.append(index[tuple(F(c).limit_denominator(10 ** 6) for c in q)])
        for f in out.facets:
            assert tuple(sorted(perm[v] for v in f)) in out.simplices
