"""
Finite group actions on simplicial complexes.

Simplicial actions are stored as vertex permutations (tuples indexed by point
index).  PL homeomorphisms are stored as :class:`PLHomeoSpec`: a subdivision
of the complex together with exact images of its vertices.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .complex import (
    CellComplex,
    SimplicialComplex,
    ValidationReport,
    Violation,
    barycentric_subdivision,
    check_subdivision,
    label_point,
    simplex_cell,
    star_subdivide,
    total_volume,
)
from .errors import ActionError, GroupTooLarge, PointOutsideComplex
from .exact import ConvexCell, Point, affine_combination, barycentric, cell_from_vertices, intersect_cells, mean

log = logging.getLogger(__name__)

Perm = tuple


def compose(a: Perm, b: Perm) -> Perm:
    """a after b."""
    return tuple(a[i] for i in b)


def inverse(a: Perm) -> Perm:
    out = [0] * len(a)
    for i, j in enumerate(a):
        out[j] = i
    return tuple(out)


def identity(n: int) -> Perm:
    return tuple(range(n))


def apply_simplex(g: Perm, s: Sequence[int]) -> tuple:
    return tuple(sorted(g[v] for v in s))


def apply_label(g: Perm, label: tuple) -> tuple:
    return tuple(sorted((g[v], m) for v, m in label))


def close_group(gens: Iterable[Perm], n: int, max_order: int | None = None) -> list:
    ident = identity(n)
    gens = [tuple(g) for g in gens]
    seen = {ident}
    order = [ident]
    queue = deque([ident])
    while queue:
        h = queue.popleft()
        for g in gens:
            x = compose(g, h)
            if x not in seen:
                seen.add(x)
                order.append(x)
                queue.append(x)
                if max_order is not None and len(seen) > max_order:
                    raise GroupTooLarge(f"group exceeds {max_order} elements")
    return sorted(order)


@dataclass(frozen=True)
class GroupAction:
    """A finite group of vertex permutations of a complex."""

    elements: tuple
    n: int

    @classmethod
    def generated_by(cls, gens: Iterable[Sequence[int]], n: int, max_order: int | None = None) -> "GroupAction":
        return cls(tuple(close_group(gens, n, max_order)), n)

    @classmethod
    def trivial(cls, n: int) -> "GroupAction":
        return cls((identity(n),), n)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def stabilizer(self, v: int) -> "GroupAction":
        return GroupAction(tuple(g for g in self.elements if g[v] == v), self.n)


# ---------------------------------------------------------------------------
# simplicial actions
# ---------------------------------------------------------------------------

def verify_simplicial_action(K: SimplicialComplex, perms: Iterable[Sequence[int]],
                             generators: bool = False) -> ValidationReport:
    """Report closure/identity/inverse failures and non-automorphisms.

    With ``generators=True`` the candidates are closed into a group first and only
    the automorphism property is checked.
    """
    n = len(K.points)
    report = ValidationReport()
    cands = [tuple(p) for p in perms]
    for p in cands:
        if len(p) != n or sorted(p) != list(range(n)):
            report.violations.append(Violation("not-a-permutation", (p,)))
    if not report.ok:
        return report
    if generators:
        try:
            cands = close_group(cands, n, max_order=100_000)
        except GroupTooLarge as exc:
            report.violations.append(Violation("group-too-large", (), str(exc)))
            return report
    elems = set(cands)
    if not generators:
        if identity(n) not in elems:
            report.violations.append(Violation("missing-identity", ()))
        for g in cands:
            if inverse(g) not in elems:
                report.violations.append(Violation("missing-inverse", (g,)))
            for h in cands:
                if compose(g, h) not in elems:
                    report.violations.append(Violation("not-closed", (g, h)))
    for g in cands:
        for s in K.facets:
            if apply_simplex(g, s) not in K.simplices:
                report.violations.append(Violation("not-an-automorphism", (g, s)))
                break
    return report


def _vertex_signature(K: SimplicialComplex, v: int) -> tuple:
    counts = [0] * (K.dim + 1)
    for s in K.simplices:
        if v in s:
            counts[len(s) - 1] += 1
    return tuple(counts)


def automorphism_group(K: SimplicialComplex) -> GroupAction:
    """All vertex permutations preserving the simplex set, by backtracking."""
    verts = K.vertices
    n = len(K.points)
    if not verts:
        return GroupAction.trivial(n)
    sig = {v: _vertex_signature(K, v) for v in verts}
    adj = {v: set() for v in verts}
    for s in K.faces(1):
        adj[s[0]].add(s[1])
        adj[s[1]].add(s[0])
    # breadth-first assignment order keeps constraints local
    order: list = []
    seen: set = set()
    for root in verts:
        if root in seen:
            continue
        seen.add(root)
        q = deque([root])
        while q:
            v = q.popleft()
            order.append(v)
            for w in sorted(adj[v]):
                if w not in seen:
                    seen.add(w)
                    q.append(w)
    pos = {v: i for i, v in enumerate(order)}
    # simplices checked once their last vertex (in assignment order) is placed
    checks: dict = {v: [] for v in verts}
    for s in K.simplices:
        if len(s) > 1:
            checks[max(s, key=lambda v: pos[v])].append(s)
    simps = K.simplices
    results = []
    img: dict = {}
    used: set = set()

    def extend(i: int):
        if i == len(order):
            g = list(range(n))
            for a, b in img.items():
                g[a] = b
            results.append(tuple(g))
            return
        v = order[i]
        for w in verts:
            if w in used or sig[w] != sig[v]:
                continue
            img[v] = w
            ok = all(tuple(sorted(img[u] for u in s)) in simps for s in checks[v])
            if ok:
                used.add(w)
                extend(i + 1)
                used.discard(w)
            del img[v]

    extend(0)
    return GroupAction(tuple(sorted(results)), n)


def orbits(G: GroupAction | Iterable[Perm], items: Iterable) -> list:
    """Partition items (vertex indices or simplices) into orbits, each sorted,
    listed by their least element."""
    elems = list(G)
    items = list(items)
    if not items:
        return []
    is_simplex = isinstance(items[0], tuple)

    def act(g, x):
        return apply_simplex(g, x) if is_simplex else g[x]

    remaining = set(items)
    out = []
    for x in sorted(items):
        if x not in remaining:
            continue
        orb = {act(g, x) for g in elems}
        remaining -= orb
        out.append(sorted(orb))
    return out


def induced_action(G: GroupAction, K_new: SimplicialComplex) -> GroupAction:
    """Action on a complex whose vertices carry labels over the old vertex set
    (barycentric or edgewise subdivision)."""
    if K_new.labels is None:
        raise ActionError("complex carries no vertex labels")
    where = {lab: i for i, lab in enumerate(K_new.labels)}
    perms = []
    for g in G:
        try:
            perms.append(tuple(where[apply_label(g, lab)] for lab in K_new.labels))
        except KeyError as exc:
            raise ActionError("labels are not closed under the action") from exc
    return GroupAction(tuple(sorted(set(perms))), len(K_new.points))


def normalize_pointwise_fixed(K: SimplicialComplex, G: GroupAction) -> tuple:
    """Pass to the first barycentric subdivision, where every simplex that is
    invariant under some element is fixed pointwise by it."""
    K1 = barycentric_subdivision(K)
    G1 = induced_action(G, K1)
    for g in G1:
        for s in K1.simplices:
            if apply_simplex(g, s) == s and any(g[v] != v for v in s):
                raise ActionError(f"simplex {s} invariant but not fixed pointwise")
    return K1, G1


# ---------------------------------------------------------------------------
# PL homeomorphisms
# ---------------------------------------------------------------------------

@dataclass
class PLHomeoSpec:
    """A PL map given by a subdivision and the images of its vertices.

    The map is affine on every simplex of ``domain``.
    """

    domain: SimplicialComplex
    images: tuple

    def __post_init__(self):
        self.images = tuple(tuple(Fraction(c) for c in p) for p in self.images)
        if len(self.images) != len(self.domain.points):
            raise ActionError("one image per subdivision vertex is required")

    @classmethod
    def identity(cls, K: SimplicialComplex) -> "PLHomeoSpec":
        return cls(K, K.points)

    @classmethod
    def from_permutation(cls, K: SimplicialComplex, perm: Sequence[int]) -> "PLHomeoSpec":
        return cls(K, tuple(K.points[perm[i]] for i in range(len(K.points))))

    def piece(self, x: Point) -> tuple:
        return self.domain.locate(x)

    def __call__(self, x: Point) -> Point:
        f, lam = self.domain.locate(x)
        return affine_combination([self.images[v] for v in f], lam)

    def image_cell(self, cell: ConvexCell) -> ConvexCell:
        """Image of a cell lying inside a single simplex of the domain."""
        f, _ = self.domain.locate(mean(cell.vertices))
        pts = self.domain.simplex_points(f)
        imgs = [self.images[v] for v in f]
        out = []
        for p in cell.vertices:
            lam = barycentric(pts, p)
            if lam is None or min(lam) < 0:
                raise ActionError("cell is not contained in one piece of the map")
            out.append(affine_combination(imgs, lam))
        return cell_from_vertices(out)

    def fingerprint(self, K: SimplicialComplex) -> tuple:
        probes = list(K.points) + [mean(K.simplex_points(f)) for f in K.facets]
        return tuple(self(p) for p in probes)


def validate_plhomeo(spec: PLHomeoSpec, K: SimplicialComplex) -> ValidationReport:
    """Domain subdivides K; each domain simplex is mapped affinely into a simplex of K."""
    report = check_subdivision(spec.domain, K)
    for f in spec.domain.facets:
        imgs = [spec.images[v] for v in f]
        hit = False
        for c in K.facets:
            ch = K.chart(c)
            if all((lam := ch.barycentric(p)) is not None and min(lam) >= 0 for p in imgs):
                hit = True
                break
        if not hit:
            report.violations.append(Violation("image-not-in-simplex", (f,)))
        elif len(set(imgs)) != len(imgs):
            report.violations.append(Violation("collapsed-simplex", (f,)))
    return report


def _top_cells(K: SimplicialComplex) -> set:
    return {simplex_cell(K, f) for f in K.facets if len(f) == K.dim + 1}


def intersect_cell_sets(a: set, b: set, dim: int) -> set:
    """Full-dimensional pieces A & B for A in a, B in b."""
    if a == b:
        return set(a)
    out = set()
    for A in a:
        for B in b:
            C = intersect_cells(A, B)
            if C is not None and C.dim == dim:
                out.add(C)
    return out


def _complex_from_cells(cells: set) -> SimplicialComplex:
    return star_subdivide(CellComplex(cells))


def pl_compose(h: PLHomeoSpec, g: PLHomeoSpec) -> PLHomeoSpec:
    """h after g, on the common refinement of g's pieces and g^-1 of h's pieces."""
    n = g.domain.dim
    # g already carries simplices of its domain onto simplices of h's domain
    h_index = h.domain.point_index
    h_facets = {frozenset(f) for f in h.domain.facets}
    if all(p in h_index for p in g.images) and all(
            frozenset(h_index[g.images[v]] for v in s) in h_facets for s in g.domain.facets):
        return PLHomeoSpec(g.domain, tuple(h.images[h_index[p]] for p in g.images))
    cells = set()
    for s in g.domain.facets:
        src = g.domain.simplex_points(s)
        dst = [g.images[v] for v in s]
        gs = cell_from_vertices(dst)
        for t in h.domain.facets:
            D = intersect_cells(gs, simplex_cell(h.domain, t))
            if D is None or D.dim != n:
                continue
            pre = [affine_combination(src, barycentric(dst, y)) for y in D.vertices]
            cells.add(cell_from_vertices(pre))
    dom = _complex_from_cells(cells)
    return PLHomeoSpec(dom, tuple(h(g(p)) for p in dom.points))


def pl_equal(a: PLHomeoSpec, b: PLHomeoSpec) -> bool:
    n = a.domain.dim
    cells = intersect_cell_sets(_top_cells(a.domain), _top_cells(b.domain), n)
    pts = {v for C in cells for v in C.vertices}
    return all(a(p) == b(p) for p in pts)


def close_pl_group(K: SimplicialComplex, maps: Sequence[PLHomeoSpec], max_order: int = 256) -> list:
    """The finite group generated by the given PL maps (identity first)."""
    ident = PLHomeoSpec.identity(K)
    elems = [ident]
    buckets: dict = {ident.fingerprint(K): [ident]}

    def add(m: PLHomeoSpec) -> bool:
        fp = m.fingerprint(K)
        for other in buckets.get(fp, []):
            if pl_equal(m, other):
                return False
        buckets.setdefault(fp, []).append(m)
        elems.append(m)
        if len(elems) > max_order:
            raise GroupTooLarge(f"maps generate more than {max_order} elements")
        return True

    gens = list(maps)
    for m in gens:
        add(m)
    queue = deque(elems[1:])
    while queue:
        x = queue.popleft()
        for s in gens:
            y = pl_compose(s, x)
            if add(y):
                queue.append(y)
    return elems


@dataclass
class EquivariantResult:
    complex: SimplicialComplex
    action: GroupAction
    group_order: int
    stats: dict = field(default_factory=dict)


def equivariant_triangulate(K: SimplicialComplex, maps: Sequence[PLHomeoSpec],
                            max_order: int = 256) -> EquivariantResult:
    """Triangulate |K| so that the group generated by `maps` acts simplicially.

    Intersect the domain subdivisions, intersect the translates of the result,
    then star the resulting cell complex.
    """
    if not K.is_pure():
        raise ActionError("equivariant triangulation needs a pure complex")
    for i, m in enumerate(maps):
        rep = validate_plhomeo(m, K)
        if not rep.ok:
            raise ActionError(f"map {i} is not a PL homeomorphism of |K|: {rep.to_dict()['violations'][:3]}")
    group = close_pl_group(K, maps, max_order)
    n = K.dim
    L = _top_cells(K)
    for g in group:
        L = intersect_cell_sets(L, _top_cells(g.domain), n)
    M = set(L)
    for g in group:
        gL = {g.image_cell(C) for C in L}
        M = intersect_cell_sets(M, gL, n)
    K_out = _complex_from_cells(M)
    perms = []
    index = K_out.point_index
    for g in group:
        try:
            perm = tuple(index[g(p)] for p in K_out.points)
        except (KeyError, PointOutsideComplex) as exc:
            raise ActionError("a group element does not permute the vertices of the output") from exc
        for f in K_out.facets:
            # affine on f: f must sit inside a single piece of g
            piece, _ = g.domain.locate(mean(K_out.simplex_points(f)))
            pts = g.domain.simplex_points(piece)
            if any((lam := barycentric(pts, p)) is None or min(lam) < 0 for p in K_out.simplex_points(f)):
                raise ActionError(f"simplex {f} straddles two pieces of a group element")
            if apply_simplex(perm, f) not in K_out.simplices:
                raise ActionError(f"simplex {f} is not mapped onto a simplex")
        perms.append(perm)
    action = GroupAction(tuple(sorted(set(perms))), len(K_out.points))
    stats = {"pieces_L": len(L), "pieces_M": len(M), "vertices": len(K_out.vertices),
             "facets": len(K_out.facets)}
    log.debug("equivariant triangulation: %s", stats)
    return EquivariantResult(K_out, action, len(group), stats)


def action_is_simplicial_exact(K_out: SimplicialComplex, maps: Sequence[PLHomeoSpec]) -> bool:
    """Independent check: every map sends every facet affinely onto a facet."""
    facet_sets = {frozenset(K_out.simplex_points(f)) for f in K_out.facets}
    for g in maps:
        for f in K_out.facets:
            pts = K_out.simplex_points(f)
            piece, _ = g.domain.locate(mean(pts))
            src = g.domain.simplex_points(piece)
            dst = [g.images[v] for v in piece]
            img = []
            for p in pts:
                lam = barycentric(src, p)
                if lam is None or min(lam) < 0:
                    return False
                img.append(affine_combination(dst, lam))
            if frozenset(img) not in facet_sets:
                return False
    return True


def volumes_match(a: SimplicialComplex, b: SimplicialComplex) -> bool:
    return total_volume(a) == total_volume(b)


def barycenter_of_label(K: SimplicialComplex, label: tuple) -> Point:
    return label_point(K.points, label)
