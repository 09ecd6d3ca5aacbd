from fractions import Fraction as F
import itertools
import math

import pytest
from hypothesis import given, strategies as st

from eqsmooth.complex import (CellComplex, SimplicialComplex, barycentric_subdivision, check_subdivision,
                              closed_cone, extend_subdivision, link, star, star_subdivide, support, total_volume,
                              validate_cell_complex, validate_complex)
from eqsmooth.corpus import cube_cell, hexagon_cone
from eqsmooth.errors import NotASubdivision, PointOutsideComplex, SimplexNotInComplex

from conftest import boundary, cycle, simplex

TRI = SimplicialComplex([(0, 0), (1, 0), (0, 1)], [(0, 1, 2)])


def test_validate_examples():
    assert validate_complex(boundary(2)).ok
    bad = SimplicialComplex([(0, 0), (1, 0), (0, 1), (F(1, 2), 0), (F(3, 2), 0), (1, -1)],
                            [(0, 1, 2), (3, 4, 5)])
    assert "improper-intersection" in validate_complex(bad).kinds()
    open_ = SimplicialComplex([(0, 0), (1, 0), (0, 1)], [(0, 1, 2), (0, 1), (1, 2)], close=False)
    assert "missing-face" in validate_complex(open_).kinds()


def test_degenerate_and_duplicate_reported():
    K = SimplicialComplex([(0, 0), (1, 1), (2, 2)], [(0, 1, 2)])
    assert "degenerate-simplex" in validate_complex(K).kinds()
    K = SimplicialComplex([(0, 0), (1, 0), (0, 0)], [(0, 1), (1, 2)])
    assert "duplicate-vertex" in validate_complex(K).kinds()


def test_support_examples():
    assert support(TRI, (0, 0)) == (0,)
    assert support(TRI, (F(1, 2), 0)) == (0, 1)
    assert support(TRI, (F(1, 3), F(1, 3))) == (0, 1, 2)
    with pytest.raises(PointOutsideComplex):
        support(TRI, (1, 1))


def test_star_and_link_examples():
    B = boundary(3)
    lk = link(B, (0,))
    assert len(lk.vertices) == 3 and len(lk.faces(1)) == 3 and lk.dim == 1
    lk = link(B, (0, 1))
    assert lk.dim == 0 and len(lk.vertices) == 2
    assert len(star(B, (0,)).facets) == 3
    C = hexagon_cone()
    apex = len(C.points) - 1
    lk = link(C, (apex,))
    assert lk.dim == 1 and len(lk.vertices) == 6 and all(
        sum(1 for e in lk.faces(1) if v in e) == 2 for v in lk.vertices)
    with pytest.raises(SimplexNotInComplex):
        link(B, (0, 1, 2, 3))


def test_barycentric_counts():
    assert len(barycentric_subdivision(simplex(2)).facets) == 6
    assert len(barycentric_subdivision(simplex(3)).facets) == 24
    assert len(barycentric_subdivision(boundary(3)).facets) == 24


def test_barycentric_is_a_subdivision():
    for K in (simplex(2), simplex(3), boundary(3), hexagon_cone()):
        K1 = barycentric_subdivision(K)
        assert validate_complex(K1).ok
        assert check_subdivision(K1, K).ok
        assert total_volume(K1) == total_volume(K)


def test_star_subdivide_examples():
    sq = CellComplex.from_vertex_lists([[(0, 0), (1, 0), (0, 1), (1, 1)]])
    K = star_subdivide(sq)
    assert len(K.facets) == 4 and (F(1, 2), F(1, 2)) in K.points
    assert len(star_subdivide(CellComplex.from_simplicial(TRI)).facets) == 1
    cube = star_subdivide(cube_cell())
    assert len(cube.facets) == 24
    assert len(cube.faces(2)) >= 24
    assert validate_complex(cube).ok
    assert sum(1 for f in cube.faces(2) if (F(1, 2),) * 3 not in cube.simplex_points(f)) == 24


def test_extend_subdivision_examples():
    L = CellComplex.from_simplicial(TRI)
    half = SimplicialComplex([(0, 0), (F(1, 2), 0), (1, 0)], [(0, 1), (1, 2)])
    K = extend_subdivision(L, half)
    assert len(K.facets) == 4 and validate_complex(K).ok
    empty = SimplicialComplex([], [])
    assert extend_subdivision(L, empty).same_as(star_subdivide(L))
    bd = SimplicialComplex([(0, 0), (1, 0), (0, 1)], [(0, 1), (1, 2), (0, 2)])
    assert len(extend_subdivision(L, bd).facets) == 1
    bad = SimplicialComplex([(0, 0), (F(1, 2), 0)], [(0, 1)])
    with pytest.raises(NotASubdivision):
        extend_subdivision(L, bad)


def test_closed_cone_examples():
    two = SimplicialComplex([(0,), (1,)], [(0,), (1,)])
    assert len(closed_cone(two).facets) == 2
    assert len(closed_cone(boundary(2)).facets) == 3
    C = closed_cone(boundary(3))
    assert len(C.facets) == 4 and C.dim == 3 and validate_complex(C).ok


def test_cell_complex_validation():
    good = CellComplex.from_vertex_lists([[(0, 0), (1, 0), (0, 1), (1, 1)], [(1, 0), (2, 0), (1, 1), (2, 1)]])
    assert validate_cell_complex(good).ok
    bad = CellComplex.from_vertex_lists([[(0, 0), (2, 0), (0, 1), (2, 1)], [(1, 0), (3, 0), (1, 1), (3, 1)]])
    assert "improper-intersection" in validate_cell_complex(bad).kinds()


facet_sets = st.integers(3, 4).flatmap(
    lambda n: st.tuples(st.just(n), st.sets(st.sampled_from(list(itertools.combinations(range(n + 1), n))),
                                            min_size=1)))


@given(facet_sets)
def test_barycentric_properties(data):
    n, facets = data
    K = boundary(n).subcomplex(facets)
    K1 = barycentric_subdivision(K)
    assert len(K1.facets) == len(K.facets) * math.factorial(K.dim + 1)
    assert K1.euler_characteristic() == K.euler_characteristic()
    assert check_subdivision(K1, K).ok
    # every vertex of K1 has a label naming the simplex of K it is the barycenter of
    for v, lab in enumerate(K1.labels):
        assert tuple(sorted(u for u, _ in lab)) in K.simplices


@given(st.integers(3, 9))
def test_cycle_links_are_point_pairs(m):
    K = cycle(m)
    for v in K.vertices:
        assert len(link(K, (v,)).vertices) == 2
