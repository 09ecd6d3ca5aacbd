"""
Standard complexes, group actions and test functions.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Callable

import numpy as np

from .approx import PDFunction
from .complex import CellComplex, SimplicialComplex, closed_cone, simplex_cell, star_subdivide
from .errors import EqSmoothError
from .exact import affine_combination, affinely_independent, barycentric, cell_from_vertices, intersect_cells
from .group import PLHomeoSpec

H = Fraction(1, 2)

# four rational points in R^4 at mutual distance 1
UNIT_SIMPLEX_POINTS = ((0, 0, 0, 0), (1, 0, 0, 0), (H, H, H, H), (H, H, -H, H))


def boundary_of_simplex(n: int) -> SimplicialComplex:
    """Boundary of the standard n-simplex, vertices on the standard basis of R^(n+1)."""
    faces = list(itertools.combinations(range(n + 1), n))
    pts = [[int(i == j) for j in range(n + 1)] for i in range(n + 1)]
    return SimplicialComplex(pts, faces)


def standard_simplex(n: int) -> SimplicialComplex:
    return SimplicialComplex.from_abstract([tuple(range(n + 1))])


def unit_simplex(d: int) -> SimplicialComplex:
    """Regular d-simplex (d <= 3) with unit edges and rational vertices in R^4."""
    if not 1 <= d <= 3:
        raise ValueError("unit simplices are available for d = 1, 2, 3")
    return SimplicialComplex(UNIT_SIMPLEX_POINTS[: d + 1], [tuple(range(d + 1))])


def unit_tetrahedron_boundary() -> SimplicialComplex:
    return SimplicialComplex(UNIT_SIMPLEX_POINTS, itertools.combinations(range(4), 3))


def centered_tetrahedron_boundary() -> SimplicialComplex:
    """Boundary of a regular tetrahedron centred at the origin of R^3."""
    pts = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    return SimplicialComplex(pts, itertools.combinations(range(4), 3))


def square_boundary() -> SimplicialComplex:
    """4-cycle on (1,0), (0,1), (-1,0), (0,-1)."""
    return SimplicialComplex([(1, 0), (0, 1), (-1, 0), (0, -1)], [(0, 1), (1, 2), (2, 3), (0, 3)])


def polygon(n: int) -> SimplicialComplex:
    """Boundary of a convex n-gon with rational vertices close to the unit circle."""
    pts = [(Fraction(math.cos(2 * math.pi * k / n)).limit_denominator(1000),
            Fraction(math.sin(2 * math.pi * k / n)).limit_denominator(1000)) for k in range(n)]
    return SimplicialComplex(pts, [(i, (i + 1) % n) for i in range(n)])


def hexagon() -> SimplicialComplex:
    pts = [(2, 0), (1, 2), (-1, 2), (-2, 0), (-1, -2), (1, -2)]
    return SimplicialComplex(pts, [(i, (i + 1) % 6) for i in range(6)])


def hexagon_cone() -> SimplicialComplex:
    """Closed cone over a hexagon; the apex is the last vertex."""
    return closed_cone(hexagon())


def seven_vertex_torus() -> SimplicialComplex:
    tris = []
    for i in range(7):
        tris.append((i, (i + 1) % 7, (i + 3) % 7))
        tris.append((i, (i + 2) % 7, (i + 3) % 7))
    return SimplicialComplex.from_abstract(tris)


def six_vertex_rp2() -> SimplicialComplex:
    return SimplicialComplex.from_abstract([
        (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 5, 1),
        (1, 2, 4), (2, 3, 5), (3, 4, 1), (4, 5, 2), (5, 1, 3),
    ])


def product_torus(n: int = 3) -> SimplicialComplex:
    """Product of two n-gons in R^4, each square split along the same diagonal.

    Vertex (i, j) has index n*i + j; swapping the factors is simplicial.
    """
    poly = polygon(n).points
    pts = [tuple(poly[i]) + tuple(poly[j]) for i in range(n) for j in range(n)]

    def v(i, j):
        return n * (i % n) + (j % n)

    tris = []
    for i in range(n):
        for j in range(n):
            tris.append((v(i, j), v(i + 1, j), v(i + 1, j + 1)))
            tris.append((v(i, j), v(i, j + 1), v(i + 1, j + 1)))
    return SimplicialComplex(pts, tris)


def factor_swap(n: int = 3) -> tuple:
    return tuple(n * (k % n) + k // n for k in range(n * n))


def two_tetrahedra_at_vertex() -> SimplicialComplex:
    pts = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (-1, 0, 0), (0, -1, 0), (0, 0, -1)]
    return SimplicialComplex(pts, [(0, 1, 2, 3), (0, 4, 5, 6)])


def two_triangles_at_vertex() -> SimplicialComplex:
    pts = [(0, 0), (1, 0), (0, 1), (-1, 0), (0, -1)]
    return SimplicialComplex(pts, [(0, 1, 2), (0, 3, 4)])


def cube_cell() -> CellComplex:
    return CellComplex.from_vertex_lists([list(itertools.product((0, 1), repeat=3))])


def interval(points) -> SimplicialComplex:
    pts = sorted(Fraction(p) for p in points)
    return SimplicialComplex([(p,) for p in pts], [(i, i + 1) for i in range(len(pts) - 1)])


# ---------------------------------------------------------------------------
# PL maps
# ---------------------------------------------------------------------------

def segment_involution() -> tuple[SimplicialComplex, PLHomeoSpec]:
    """[0, 1] with the involution given on the subdivision {0, 1/3, 1}."""
    K = interval([0, 1])
    Lg = interval([0, Fraction(1, 3), 1])
    return K, PLHomeoSpec(Lg, [(1,), (Fraction(2, 3),), (0,)])


def _column_map(breaks, images):
    """Piecewise affine function of one variable through (breaks[i], images[i])."""
    def h(x):
        for a, b, fa, fb in zip(breaks, breaks[1:], images, images[1:]):
            if a <= x <= b:
                return fa + (x - a) * (fb - fa) / (b - a)
        raise EqSmoothError(f"{x} outside [{breaks[0]}, {breaks[-1]}]")
    return h


def refine_for_map(K: SimplicialComplex, pieces: list, g: Callable) -> PLHomeoSpec:
    """PLHomeoSpec of g, which is affine on each convex cell of `pieces` covering |K|.

    The domain is the common refinement of K, the pieces, and the preimages of
    K's simplices, so each domain simplex lies in one piece and maps into one
    simplex of K.
    """
    tops = [simplex_cell(K, f) for f in K.facets]
    n = K.dim
    cells = set()
    for C in pieces:
        imgC = cell_from_vertices([g(p) for p in C.vertices])
        for T in tops:
            A = intersect_cells(C, T)
            if A is None or A.dim != n:
                continue
            for T2 in tops:
                B = intersect_cells(imgC, T2)
                if B is None or B.dim != n:
                    continue
                # pull B back through the affine map on C
                src = _affine_frame(C)
                dst = [g(p) for p in src]
                pre = cell_from_vertices([affine_combination(src, barycentric(dst, y)) for y in B.vertices])
                D = intersect_cells(A, pre)
                if D is not None and D.dim == n:
                    cells.add(D)
    Lg = star_subdivide(CellComplex(cells))
    return PLHomeoSpec(Lg, [g(p) for p in Lg.points])


def _affine_frame(C) -> list:
    """n+1 affinely independent vertices of a cell."""
    chosen = []
    for p in C.vertices:
        if affinely_independent(chosen + [p]):
            chosen.append(p)
        if len(chosen) == C.dim + 1:
            break
    return chosen


def rectangle_involution() -> tuple[SimplicialComplex, PLHomeoSpec]:
    """[0,2] x [0,1] with g(x, y) = (h(x), y), h: 0<->2, 1/2<->1, not affine."""
    K = SimplicialComplex([(0, 0), (2, 0), (2, 1), (0, 1)], [(0, 1, 2), (0, 2, 3)])
    breaks = [Fraction(0), H, Fraction(1), Fraction(2)]
    h = _column_map(breaks, [Fraction(2), Fraction(1), H, Fraction(0)])

    def g(p):
        return (h(p[0]), p[1])

    cols = [cell_from_vertices([(a, 0), (b, 0), (a, 1), (b, 1)]) for a, b in zip(breaks, breaks[1:])]
    return K, refine_for_map(K, cols, g)


# ---------------------------------------------------------------------------
# named test functions (versioned so that reports stay reproducible)
# ---------------------------------------------------------------------------

def _quadratic(K: SimplicialComplex) -> PDFunction:
    return PDFunction.from_ambient(
        K, lambda x: np.sum(x * x, axis=-1, keepdims=True),
        lambda x, u: 2 * np.sum(x * u, axis=-1, keepdims=True), 1, "quadratic-v1")


def _radial(K: SimplicialComplex) -> PDFunction:
    from .smoothing import unit_sphere_map
    f = unit_sphere_map(K)
    f.name = "radial-v1"
    return f


def _product(K: SimplicialComplex) -> PDFunction:
    def f(x):
        return np.prod(x, axis=-1, keepdims=True)

    def df(x, u):
        n = x.shape[-1]
        out = np.zeros(x.shape[:-1] + (1,))
        for i in range(n):
            rest = np.prod(np.delete(x, i, axis=-1), axis=-1)
            out[..., 0] += rest * u[..., i]
        return out

    return PDFunction.from_ambient(K, f, df, 1, "product-v1")


def _sine(K: SimplicialComplex) -> PDFunction:
    return PDFunction.from_ambient(
        K, lambda x: np.sin(np.sum(x, axis=-1, keepdims=True)),
        lambda x, u: np.cos(np.sum(x, axis=-1, keepdims=True)) * np.sum(u, axis=-1, keepdims=True),
        1, "sine-v1")


BUILTIN_FUNCTIONS = {
    "quadratic-v1": _quadratic,
    "radial-v1": _radial,
    "product-v1": _product,
    "sine-v1": _sine,
}
ALIASES = {name.rsplit("-", 1)[0]: name for name in BUILTIN_FUNCTIONS}


def builtin_function(name: str, K: SimplicialComplex) -> PDFunction:
    key = ALIASES.get(name, name)
    if key not in BUILTIN_FUNCTIONS:
        raise KeyError(f"unknown function {name!r}; choose from {sorted(BUILTIN_FUNCTIONS)}")
    return BUILTIN_FUNCTIONS[key](K)
