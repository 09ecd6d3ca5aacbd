"""
Exact rational linear algebra and convex cells.

Points are tuples of :class:`fractions.Fraction`.  Cells are stored by their
extreme points (V-representation); the halfspace description is derived on
demand and cached on the cell.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterable, Sequence

from sympy import factorint

from .errors import DimensionMismatch

Point = tuple  # tuple[Fraction, ...]
Halfspace = tuple  # (normal: Point, offset: Fraction), meaning normal . x <= offset


def as_point(coords: Iterable) -> Point:
    if type(coords) is tuple and all(type(c) is Fraction for c in coords):
        return coords
    return tuple(Fraction(c) for c in coords)


def sub(p: Point, q: Point) -> Point:
    return tuple(a - b for a, b in zip(p, q))


def add(p: Point, q: Point) -> Point:
    return tuple(a + b for a, b in zip(p, q))


def scale(c, p: Point) -> Point:
    return tuple(c * a for a in p)


def dot(p: Sequence, q: Sequence) -> Fraction:
    return sum((a * b for a, b in zip(p, q)), Fraction(0))


def mean(points: Sequence[Point]) -> Point:
    n = len(points)
    dim = len(points[0])
    return tuple(sum((p[i] for p in points), Fraction(0)) / n for i in range(dim))


def _check_uniform(points: Sequence[Point]) -> int:
    if not points:
        raise ValueError("empty point set")
    dim = len(points[0])
    for p in points:
        if len(p) != dim:
            raise DimensionMismatch(f"points of ambient dimension {dim} and {len(p)} mixed")
    return dim


# ---------------------------------------------------------------------------
# Gaussian elimination over Q
# ---------------------------------------------------------------------------

def rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(m)):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Basis of {x : rows . x = 0}."""
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[fcol]
        basis.append(v)
    return basis


def solve(rows: Sequence[Sequence], rhs: Sequence) -> list[Fraction] | None:
    """A solution of rows . x = rhs (free variables set to 0), or None if inconsistent."""
    ncols = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for row, pc in zip(red, pivots):
        x[pc] = row[ncols]
    return x


def det(matrix: Sequence[Sequence]) -> Fraction:
    m = [[Fraction(x) for x in r] for r in matrix]
    n = len(m)
    d = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            d = -d
        d *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return d


def gram_det(vectors: Sequence[Point]) -> Fraction:
    if not vectors:
        return Fraction(1)
    return det([[dot(u, v) for v in vectors] for u in vectors])


# ---------------------------------------------------------------------------
# affine geometry
# ---------------------------------------------------------------------------

def affine_dim(points: Sequence[Point]) -> int:
    """Dimension of the affine hull of a nonempty point set."""
    _check_uniform(points)
    p0 = points[0]
    return rank([sub(p, p0) for p in points[1:]]) if len(points) > 1 else 0


def affinely_independent(points: Sequence[Point]) -> bool:
    return affine_dim(points) == len(points) - 1


def barycentric(simplex: Sequence[Point], x: Point) -> list[Fraction] | None:
    """Barycentric coordinates of x with respect to affinely independent points.

    Returns None when x is not in the affine hull.
    """
    p0 = simplex[0]
    if len(simplex) == 1:
        return [Fraction(1)] if tuple(x) == tuple(p0) else None
    cols = [sub(p, p0) for p in simplex[1:]]
    rows = [[c[i] for c in cols] for i in range(len(p0))]
    sol = solve(rows, sub(x, p0))
    if sol is None:
        return None
    return [1 - sum(sol, Fraction(0))] + sol


def affine_combination(points: Sequence[Point], weights: Sequence) -> Point:
    dim = len(points[0])
    return tuple(sum((w * p[i] for w, p in zip(weights, points)), Fraction(0)) for i in range(dim))


def squared_distance_to_hull_plane(x: Point, points: Sequence[Point]) -> Fraction:
    """Squared distance from x to the affine hull of `points` (exact)."""
    p0 = points[0]
    vecs = [sub(p, p0) for p in points[1:]]
    w = sub(x, p0)
    if vecs:
        basis, _ = rref(vecs)
        gram = [[dot(u, v) for v in basis] for u in basis]
        coeff = solve(gram, [dot(u, w) for u in basis])
        proj = affine_combination([tuple(b) for b in basis], coeff) if basis else tuple(0 for _ in w)
        w = sub(w, proj)
    return dot(w, w)


@dataclass(frozen=True)
class AffineFrame:
    """Rational coordinates on the affine hull of a point set."""

    origin: Point
    basis: tuple  # rows spanning the direction space

    @classmethod
    def of(cls, points: Sequence[Point]) -> "AffineFrame":
        p0 = points[0]
        red, _ = rref([sub(p, p0) for p in points[1:]]) if len(points) > 1 else ([], [])
        return cls(tuple(p0), tuple(tuple(r) for r in red))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coords(self, x: Point) -> tuple:
        if not self.basis:
            return ()
        rows = [[b[i] for b in self.basis] for i in range(len(self.origin))]
        sol = solve(rows, sub(x, self.origin))
        if sol is None:
            raise ValueError("point is not in the affine hull")
        return tuple(sol)


# ---------------------------------------------------------------------------
# convex cells
# ---------------------------------------------------------------------------

def _normalize_halfspace(n: Sequence[Fraction], b: Fraction) -> Halfspace:
    lead = next(abs(x) for x in n if x != 0)
    return tuple(x / lead for x in n), b / lead


def _hull_halfspaces(points: Sequence[Point]) -> tuple[list[Halfspace], list[Halfspace]]:
    """Equalities and facet inequalities (n.x <= b) of conv(points), in ambient space."""
    dim_amb = len(points[0])
    p0 = points[0]
    D, _ = rref([sub(p, p0) for p in points[1:]]) if len(points) > 1 else ([], [])
    d = len(D)
    eqs = []
    for nvec in nullspace(D, dim_amb):
        eqs.append(_normalize_halfspace(nvec, dot(nvec, p0)))
    ineqs: set[Halfspace] = set()
    if d == 0:
        return eqs, []
    for combo in combinations(points, d):
        q0 = combo[0]
        F = [sub(q, q0) for q in combo[1:]]
        if F and rank(F) != d - 1:
            continue
        # normal inside span(D), orthogonal to the facet directions
        M = [[dot(f, Dj) for Dj in D] for f in F]
        cs = nullspace(M, d)
        if len(cs) != 1:
            continue
        c = cs[0]
        nvec = tuple(sum((c[j] * D[j][i] for j in range(d)), Fraction(0)) for i in range(dim_amb))
        b = dot(nvec, q0)
        vals = [dot(nvec, p) - b for p in points]
        if all(v <= 0 for v in vals):
            pass
        elif all(v >= 0 for v in vals):
            nvec = tuple(-x for x in nvec)
            b = -b
        else:
            continue
        ineqs.add(_normalize_halfspace(nvec, b))
    return eqs, sorted(ineqs)


def _extreme_points(points: Sequence[Point]) -> list[Point]:
    pts = sorted(set(tuple(p) for p in points))
    if len(pts) <= 2:
        return pts
    d = affine_dim(pts)
    if d == 0:
        return pts[:1]
    if d == 1:
        p0 = pts[0]
        direction = next(sub(p, p0) for p in pts if p != p0)
        proj = sorted(pts, key=lambda p: dot(sub(p, p0), direction))
        return sorted([proj[0], proj[-1]])
    _, ineqs = _hull_halfspaces(pts)
    out = []
    for p in pts:
        active = [n for n, b in ineqs if dot(n, p) == b]
        if len(active) >= d and rank(active) == d:
            out.append(p)
    return out


@dataclass(frozen=True)
class ConvexCell:
    vertices: tuple  # extreme points, sorted lexicographically
    dim: int = field(compare=False)

    @cached_property
    def halfspaces(self) -> tuple[list[Halfspace], list[Halfspace]]:
        return _hull_halfspaces(self.vertices)

    @property
    def ambient_dim(self) -> int:
        return len(self.vertices[0])

    @cached_property
    def bbox(self) -> tuple[Point, Point]:
        n = self.ambient_dim
        return (tuple(min(v[i] for v in self.vertices) for i in range(n)),
                tuple(max(v[i] for v in self.vertices) for i in range(n)))

    def contains(self, x: Point) -> bool:
        eqs, ineqs = self.halfspaces
        return all(dot(n, x) == b for n, b in eqs) and all(dot(n, x) <= b for n, b in ineqs)

    def is_simplex(self) -> bool:
        return len(self.vertices) == self.dim + 1

    @cached_property
    def facets(self) -> tuple["ConvexCell", ...]:
        if self.dim == 0:
            return ()
        if self.dim == 1:
            return tuple(ConvexCell((v,), 0) for v in self.vertices)
        _, ineqs = self.halfspaces
        out = []
        for n, b in ineqs:
            on = [v for v in self.vertices if dot(n, v) == b]
            out.append(ConvexCell(tuple(sorted(on)), self.dim - 1))
        return tuple(sorted(set(out), key=lambda c: c.vertices))

    def faces(self) -> set["ConvexCell"]:
        """All faces, including the cell itself."""
        out = {self}
        stack = [self]
        while stack:
            c = stack.pop()
            for f in c.facets:
                if f not in out:
                    out.add(f)
                    stack.append(f)
        return out

    def __repr__(self) -> str:
        vs = ", ".join("(" + ",".join(str(x) for x in v) + ")" for v in self.vertices)
        return f"ConvexCell(dim={self.dim}, [{vs}])"


def cell_from_vertices(points: Sequence) -> ConvexCell:
    pts = [as_point(p) for p in points]
    _check_uniform(pts)
    ext = _extreme_points(pts)
    return ConvexCell(tuple(sorted(ext)), affine_dim(ext))


def _bbox_overlap(a: ConvexCell, b: ConvexCell) -> bool:
    (alo, ahi), (blo, bhi) = a.bbox, b.bbox
    return all(x <= y2 and y <= x2 for x, x2, y, y2 in zip(alo, ahi, blo, bhi))


def intersect_cells(a: ConvexCell, b: ConvexCell) -> ConvexCell | None:
    """Exact intersection of two cells; None when empty."""
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatch("cells live in different ambient spaces")
    if a == b:
        return a
    if not _bbox_overlap(a, b):
        return None
    N = a.ambient_dim
    eqs = a.halfspaces[0] + b.halfspaces[0]
    ineqs = a.halfspaces[1] + b.halfspaces[1]
    if eqs:
        red, piv = rref([list(n) + [c] for n, c in eqs])
        if N in piv:
            return None
        E = [(tuple(r[:N]), r[N]) for r in red]
    else:
        E = []
    k = N - len(E)
    found: set[Point] = set()
    for combo in combinations(ineqs, k):
        rows = [n for n, _ in E] + [n for n, _ in combo]
        if rank(rows) < N:
            continue
        x = solve(rows, [c for _, c in E] + [c for _, c in combo])
        if x is None:
            continue
        x = tuple(x)
        if all(dot(n, x) <= c for n, c in ineqs):
            found.add(x)
    if not found:
        return None
    return cell_from_vertices(sorted(found))


def barycenter(cell: ConvexCell) -> Point:
    return mean(cell.vertices)


def triangulate_cell(cell: ConvexCell) -> list[tuple]:
    """Pulling triangulation of a cell; simplices as tuples of points."""
    if cell.dim == 0:
        return [cell.vertices]
    v0 = cell.vertices[0]
    out = []
    for f in cell.facets:
        if v0 in f.vertices:
            continue
        for s in triangulate_cell(f):
            out.append((v0,) + tuple(s))
    return out


def local_volume(points: Sequence[Point], frame: AffineFrame) -> Fraction:
    """Volume of a simplex measured in the rational coordinates of `frame` (times d!)."""
    cs = [frame.coords(p) for p in points]
    c0 = cs[0]
    return abs(det([sub(c, c0) for c in cs[1:]])) if len(cs) > 1 else Fraction(1)


def cell_local_volume(cell: ConvexCell, frame: AffineFrame | None = None) -> Fraction:
    frame = frame or AffineFrame.of(cell.vertices)
    return sum((local_volume(s, frame) for s in triangulate_cell(cell)), Fraction(0))


# ---------------------------------------------------------------------------
# exact sums of square roots
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _squarefree_split(n: int) -> tuple[int, int]:
    """n = core * root**2 with core squarefree."""
    core, root = 1, 1
    for p, e in factorint(n).items():
        root *= p ** (e // 2)
        if e % 2:
            core *= p
    return core, root


class RootSum:
    """Exact element of Q(sqrt 2, sqrt 3, ...): a finite sum of rational multiples
    of square roots of squarefree integers.  Distinct squarefree roots are
    linearly independent over Q, so equality is coefficient equality."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = {k: v for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def sqrt(cls, q) -> "RootSum":
        q = Fraction(q)
        if q < 0:
            raise ValueError("square root of a negative rational")
        if q == 0:
            return cls()
        num = q.numerator * q.denominator
        core, root = _squarefree_split(num)
        return cls({core: Fraction(root, q.denominator)})

    def __add__(self, other: "RootSum") -> "RootSum":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return RootSum(out)

    def __mul__(self, c) -> "RootSum":
        c = Fraction(c)
        return RootSum({k: v * c for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, RootSum):
            other = RootSum({1: Fraction(other)})
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __float__(self) -> float:
        return float(sum(float(v) * math.sqrt(k) for k, v in self.terms.items()))

    def __repr__(self) -> str:
        if not self.terms:
            return "RootSum(0)"
        parts = [f"{v}*sqrt({k})" if k != 1 else f"{v}" for k, v in sorted(self.terms.items())]
        return "RootSum(" + " + ".join(parts) + ")"


def simplex_volume(points: Sequence[Point]) -> RootSum:
    """k-volume of a k-simplex in any ambient dimension, exactly."""
    p0 = points[0]
    k = len(points) - 1
    g = gram_det([sub(p, p0) for p in points[1:]])
    return RootSum.sqrt(g) * Fraction(1, math.factorial(k))
