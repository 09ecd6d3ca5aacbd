"""
Geometric simplicial complexes and cell complexes.

A :class:`SimplicialComplex` keeps an indexed list of exact points and a set
of simplices, each a sorted tuple of point indices.  Constructors close the
simplex set under faces unless asked not to (so that ``validate_complex`` can
report a missing face).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations, permutations
from typing import Iterable, Sequence

from .errors import (
    ComplexError,
    NotASubdivision,
    PointOutsideComplex,
    SimplexNotInComplex,
)
from .exact import (
    AffineFrame,
    ConvexCell,
    Point,
    RootSum,
    affine_dim,
    as_point,
    barycenter,
    cell_from_vertices,
    cell_local_volume,
    intersect_cells,
    local_volume,
    mean,
    rref,
    simplex_volume,
    sub,
)

Simplex = tuple  # sorted tuple of vertex indices
Label = tuple  # sorted tuple of (vertex, multiplicity) pairs


def closure(simplices: Iterable[Sequence[int]]) -> set:
    out = set()
    for s in simplices:
        s = tuple(sorted(s))
        if s in out:
            continue
        for k in range(1, len(s) + 1):
            out.update(combinations(s, k))
    return out


class SimplicialComplex:
    def __init__(self, points: Sequence, simplices: Iterable[Sequence[int]], *,
                 close: bool = True, labels: Sequence | None = None):
        self.points = tuple(as_point(p) for p in points)
        simps = {tuple(sorted(s)) for s in simplices if len(s)}
        self.simplices = frozenset(closure(simps) if close else simps)
        self.labels = tuple(labels) if labels is not None else None

    @classmethod
    def from_abstract(cls, facets: Iterable[Sequence[int]]) -> "SimplicialComplex":
        """Realise an abstract complex on the standard basis of R^V."""
        facets = [tuple(f) for f in facets]
        nv = max(max(f) for f in facets) + 1
        pts = [[int(i == j) for j in range(nv)] for i in range(nv)]
        return cls(pts, facets)

    # -- basic queries --------------------------------------------------------

    @property
    def ambient_dim(self) -> int:
        return len(self.points[0]) if self.points else 0

    @cached_property
    def dim(self) -> int:
        return max((len(s) for s in self.simplices), default=0) - 1

    @cached_property
    def facets(self) -> list:
        """Maximal simplices, sorted."""
        simps = self.simplices
        out = []
        for s in simps:
            maximal = True
            for v in self.vertices:
                if v in s:
                    continue
                if tuple(sorted(s + (v,))) in simps:
                    maximal = False
                    break
            if maximal:
                out.append(s)
        return sorted(out, key=lambda s: (len(s), s))

    @cached_property
    def vertices(self) -> list:
        return sorted(s[0] for s in self.simplices if len(s) == 1)

    def faces(self, k: int) -> list:
        return sorted(s for s in self.simplices if len(s) == k + 1)

    def f_vector(self) -> list:
        return [len(self.faces(k)) for k in range(self.dim + 1)]

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * n for k, n in enumerate(self.f_vector()))

    def is_pure(self) -> bool:
        return all(len(f) == self.dim + 1 for f in self.facets)

    def simplex_points(self, s: Sequence[int]) -> list:
        return [self.points[i] for i in s]

    @cached_property
    def point_index(self) -> dict:
        return {p: i for i, p in enumerate(self.points)}

    def __contains__(self, s) -> bool:
        return tuple(sorted(s)) in self.simplices

    def __len__(self) -> int:
        return len(self.simplices)

    def __repr__(self) -> str:
        return (f"SimplicialComplex(dim={self.dim}, vertices={len(self.vertices)}, "
                f"facets={len(self.facets)}, ambient={self.ambient_dim})")

    def same_as(self, other: "SimplicialComplex") -> bool:
        """Equal as sets of geometric simplices (indices may differ)."""
        def geo(K):
            return {frozenset(K.points[i] for i in s) for s in K.simplices}
        return geo(self) == geo(other)

    def subcomplex(self, simplices: Iterable[Sequence[int]], close: bool = True) -> "SimplicialComplex":
        return SimplicialComplex(self.points, simplices, close=close, labels=self.labels)

    def compact(self) -> tuple["SimplicialComplex", dict]:
        """Drop points not used by any simplex; returns (complex, old->new index map)."""
        used = self.vertices
        remap = {old: new for new, old in enumerate(used)}
        labels = [self.labels[i] for i in used] if self.labels is not None else None
        K = SimplicialComplex([self.points[i] for i in used],
                              [tuple(remap[v] for v in s) for s in self.simplices],
                              labels=labels)
        return K, remap

    # -- exact point location --------------------------------------------------

    @cached_property
    def _charts(self) -> dict:
        return {}

    def chart(self, s: Simplex) -> "_SimplexChart":
        ch = self._charts.get(s)
        if ch is None:
            ch = self._charts[s] = _SimplexChart(self.simplex_points(s))
        return ch

    def locate(self, x: Point) -> tuple:
        """(facet, barycentric coords) for some facet containing x."""
        x = as_point(x)
        for f in self.facets:
            lam = self.chart(f).barycentric(x)
            if lam is not None and all(c >= 0 for c in lam):
                return f, lam
        raise PointOutsideComplex(f"point {tuple(map(str, x))} not in |K|")


class _SimplexChart:
    """Cached exact barycentric coordinate solver for one simplex."""

    def __init__(self, pts: Sequence[Point]):
        self.pts = pts
        self.p0 = pts[0]
        n = len(self.p0)
        self.lo = tuple(min(p[i] for p in pts) for i in range(n))
        self.hi = tuple(max(p[i] for p in pts) for i in range(n))
        self.E = [sub(p, self.p0) for p in pts[1:]]
        d = len(self.E)
        # rows of the N x d edge matrix that form an invertible d x d block
        rows = [[e[i] for e in self.E] for i in range(n)]
        sel, basis = [], []
        for i, r in enumerate(rows):
            if len(sel) == d:
                break
            if len(rref(basis + [r])[1]) > len(basis):
                basis.append(r)
                sel.append(i)
        if len(sel) < d:
            raise ComplexError("degenerate simplex")
        self.sel = sel
        self.inv = _invert([rows[i] for i in sel]) if d else []

    def barycentric(self, x: Point):
        if any(a < l or a > h for a, l, h in zip(x, self.lo, self.hi)):
            return None
        w = sub(x, self.p0)
        c = [sum((self.inv[j][k] * w[self.sel[k]] for k in range(len(self.sel))), Fraction(0))
             for j in range(len(self.E))]
        # consistency on all coordinates
        for i in range(len(x)):
            if sum((c[j] * self.E[j][i] for j in range(len(c))), Fraction(0)) != w[i]:
                return None
        return [1 - sum(c, Fraction(0))] + c


def _invert(m: list) -> list:
    n = len(m)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(m)]
    red, _ = rref(aug)
    return [r[n:] for r in red]


def label_point(points: Sequence[Point], label: Label) -> Point:
    total = sum(m for _, m in label)
    dim = len(points[0])
    return tuple(sum((m * points[v][i] for v, m in label), Fraction(0)) / total for i in range(dim))


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass
class Violation:
    kind: str
    simplices: tuple
    detail: str = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind, "simplices": [list(s) for s in self.simplices], "detail": self.detail}


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set:
        return {v.kind for v in self.violations}

    def to_dict(self) -> dict:
        return {"valid": self.ok, "violations": [v.to_dict() for v in self.violations]}


def simplex_cell(K: SimplicialComplex, s: Simplex) -> ConvexCell:
    pts = tuple(sorted(K.points[i] for i in s))
    return ConvexCell(pts, len(s) - 1)


def validate_complex(K: SimplicialComplex) -> ValidationReport:
    """Every violated invariant of a geometric simplicial complex; empty iff valid."""
    report = ValidationReport()
    npts = len(K.points)
    for s in sorted(K.simplices):
        if any(v < 0 or v >= npts for v in s):
            report.violations.append(Violation("index-out-of-range", (s,)))
    if not report.ok:
        return report
    seen = {}
    for v in K.vertices:
        p = K.points[v]
        if p in seen:
            report.violations.append(Violation("duplicate-vertex", ((seen[p],), (v,))))
        seen[p] = v
    for s in sorted(K.simplices, key=lambda s: (len(s), s)):
        if len(s) > 1 and affine_dim(K.simplex_points(s)) != len(s) - 1:
            report.violations.append(Violation("degenerate-simplex", (s,)))
        for k in range(1, len(s)):
            for f in combinations(s, k):
                if f not in K.simplices:
                    report.violations.append(Violation("missing-face", (s, f)))
    if "degenerate-simplex" in report.kinds():
        return report
    # proper intersection: enough to check maximal simplices pairwise
    maximal = [s for s in K.simplices
               if not any(len(t) > len(s) and set(s) <= set(t) for t in K.simplices)]
    maximal.sort(key=lambda s: (len(s), s))
    cells = {s: simplex_cell(K, s) for s in maximal}
    for a, b in combinations(maximal, 2):
        got = intersect_cells(cells[a], cells[b])
        common = sorted(set(a) & set(b))
        want = simplex_cell(K, tuple(common)) if common else None
        if got != want:
            report.violations.append(Violation(
                "improper-intersection", (a, b),
                f"hulls meet in {got!r}, common face is {want!r}"))
    return report


# ---------------------------------------------------------------------------
# combinatorial queries
# ---------------------------------------------------------------------------

def _require(K: SimplicialComplex, s: Sequence[int]) -> Simplex:
    s = tuple(sorted(s))
    if s not in K.simplices:
        raise SimplexNotInComplex(s)
    return s


def support(K: SimplicialComplex, x) -> Simplex:
    """The simplex containing x in its relative interior."""
    x = as_point(x)
    f, lam = K.locate(x)
    return tuple(v for v, c in zip(f, lam) if c > 0)


def star(K: SimplicialComplex, s: Sequence[int]) -> SimplicialComplex:
    s = _require(K, s)
    ss = set(s)
    return K.subcomplex(t for t in K.simplices if ss <= set(t))


def link(K: SimplicialComplex, s: Sequence[int]) -> SimplicialComplex:
    s = _require(K, s)
    ss = set(s)
    out = []
    for t in K.simplices:
        if len(t) > len(s) and ss <= set(t):
            out.append(tuple(v for v in t if v not in ss))
    return K.subcomplex(out)


def barycentric_subdivision(K: SimplicialComplex) -> SimplicialComplex:
    """First barycentric subdivision; vertex i carries the label of its simplex in K."""
    order = sorted(K.simplices, key=lambda s: (len(s), s))
    index = {s: i for i, s in enumerate(order)}
    points = [mean(K.simplex_points(s)) for s in order]
    tops = set()
    for f in K.facets:
        for perm in permutations(f):
            chain = tuple(index[tuple(sorted(perm[:k]))] for k in range(1, len(perm) + 1))
            tops.add(tuple(sorted(chain)))
    labels = [tuple((v, 1) for v in s) for s in order]
    return SimplicialComplex(points, tops, labels=labels)


def closed_cone(K: SimplicialComplex) -> SimplicialComplex:
    """K placed at height 1 in R^{N+1}, joined to an apex at the origin (last index)."""
    apex = len(K.points)
    pts = [p + (Fraction(1),) for p in K.points] + [tuple(Fraction(0) for _ in range(K.ambient_dim + 1))]
    tops = [f + (apex,) for f in K.facets]
    return SimplicialComplex(pts, tops)


def total_volume(K: SimplicialComplex) -> RootSum:
    """Exact sum of the volumes of the top-dimensional simplices."""
    tot = RootSum()
    for f in K.facets:
        if len(f) == K.dim + 1:
            tot = tot + simplex_volume(K.simplex_points(f))
    return tot


def check_subdivision(fine: SimplicialComplex, coarse: SimplicialComplex) -> ValidationReport:
    """Containment of every simplex of `fine` in a simplex of `coarse`, plus exact
    volume equality per coarse facet."""
    report = ValidationReport()
    owner: dict = {}
    for f in fine.facets:
        home = None
        for c in coarse.facets:
            ch = coarse.chart(c)
            if all((lam := ch.barycentric(p)) is not None and min(lam) >= 0 for p in fine.simplex_points(f)):
                home = c
                break
        if home is None:
            report.violations.append(Violation("not-contained", (f,)))
            continue
        if len(f) == len(home):
            owner.setdefault(home, []).append(f)
    if not report.ok:
        return report
    for c in coarse.facets:
        frame = AffineFrame.of(coarse.simplex_points(c))
        want = local_volume(coarse.simplex_points(c), frame)
        got = sum((local_volume(fine.simplex_points(f), frame) for f in owner.get(c, [])), Fraction(0))
        if got != want:
            report.violations.append(Violation("volume-mismatch", (c,), f"{got} != {want}"))
    return report


# ---------------------------------------------------------------------------
# cell complexes
# ---------------------------------------------------------------------------

class CellComplex:
    def __init__(self, cells: Iterable[ConvexCell], close: bool = True):
        cells = set(cells)
        if close:
            full = set()
            for c in cells:
                if c not in full:
                    full |= c.faces()
            cells = full
        self.cells = frozenset(cells)

    @classmethod
    def from_simplicial(cls, K: SimplicialComplex) -> "CellComplex":
        return cls((simplex_cell(K, s) for s in K.simplices), close=False)

    @classmethod
    def from_vertex_lists(cls, cells: Iterable[Sequence]) -> "CellComplex":
        return cls(cell_from_vertices(c) for c in cells)

    @cached_property
    def dim(self) -> int:
        return max((c.dim for c in self.cells), default=-1)

    def by_dim(self, d: int) -> list:
        return sorted((c for c in self.cells if c.dim == d), key=lambda c: c.vertices)

    @cached_property
    def maximal(self) -> list:
        faces_of_others = set()
        for c in self.cells:
            faces_of_others |= c.faces() - {c}
        return sorted((c for c in self.cells if c not in faces_of_others),
                      key=lambda c: (c.dim, c.vertices))

    def __len__(self) -> int:
        return len(self.cells)


def validate_cell_complex(L: CellComplex) -> ValidationReport:
    report = ValidationReport()
    for c in L.cells:
        for f in c.facets:
            if f not in L.cells:
                report.violations.append(Violation("missing-face", ((c.vertices, f.vertices),)))
    cells = L.maximal
    for a, b in combinations(cells, 2):
        got = intersect_cells(a, b)
        if got is not None and not (got in a.faces() and got in b.faces()):
            report.violations.append(Violation("improper-intersection", ((a.vertices, b.vertices),), repr(got)))
    return report


# ---------------------------------------------------------------------------
# starring
# ---------------------------------------------------------------------------

def _star_ascending(L: CellComplex, preset: dict | None = None) -> dict:
    """Triangulation of every cell, built skeleton by skeleton.

    Cells that are simplices with unsubdivided boundary are kept; other cells of
    dimension >= 2 are replaced by the join of their triangulated boundary with
    their barycenter."""
    preset = preset or {}
    tri: dict = {}
    for d in range(L.dim + 1):
        for C in L.by_dim(d):
            if C in preset:
                tri[C] = preset[C]
                continue
            if d <= 1:
                tri[C] = [C.vertices]
                continue
            facets = C.facets
            if C.is_simplex() and all(tri[F] == [F.vertices] for F in facets):
                tri[C] = [C.vertices]
                continue
            b = barycenter(C)
            tri[C] = [tuple(sorted(s + (b,))) for F in facets for s in tri[F]]
    return tri


def _assemble(L: CellComplex, tri: dict) -> SimplicialComplex:
    simplices = set()
    for C in L.maximal:
        simplices.update(tri[C])
    pts = sorted({p for s in simplices for p in s})
    index = {p: i for i, p in enumerate(pts)}
    return SimplicialComplex(pts, [tuple(index[p] for p in s) for s in simplices])


def star_subdivide(L: CellComplex) -> SimplicialComplex:
    """Canonical simplicial subdivision of a cell complex by starring at barycenters."""
    return _assemble(L, _star_ascending(L))


def extend_subdivision(L: CellComplex, sub1: SimplicialComplex) -> SimplicialComplex:
    """Extend a simplicial subdivision of a subcomplex of L to all of L."""
    if not sub1.simplices:
        return star_subdivide(L)
    cells_sorted = sorted(L.cells, key=lambda c: (c.dim, c.vertices))

    def home(pts):
        for C in cells_sorted:
            if all(C.contains(p) for p in pts):
                return C
        return None

    L1 = set()
    for f in sub1.facets:
        C = home(sub1.simplex_points(f))
        if C is None or C.dim != len(f) - 1:
            raise NotASubdivision(f"simplex {f} of the given subdivision is not spanning a cell of L")
        L1 |= C.faces()
    preset = {}
    for C in L1:
        inside = [tuple(sorted(sub1.simplex_points(s))) for s in sub1.simplices
                  if len(s) == C.dim + 1 and all(C.contains(p) for p in sub1.simplex_points(s))]
        frame = AffineFrame.of(C.vertices)
        vol = sum((local_volume(s, frame) for s in inside), Fraction(0))
        if vol != cell_local_volume(C, frame):
            raise NotASubdivision(f"cell {C!r} is not covered by the given subdivision")
        preset[C] = sorted(inside)
    return _assemble(L, _star_ascending(L, preset))
