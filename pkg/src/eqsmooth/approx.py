"""
Metric control of subdivisions and secant approximation of piecewise smooth maps.

The combinatorial side (edgewise subdivision, containment) is exact; evaluation
of maps is binary64.
"""
from __future__ import annotations

import itertools
import logging
import math
import weakref
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from .complex import SimplicialComplex, check_subdivision, label_point
from .errors import ConvergenceError, DegenerateSimplex, EdgewiseCanonicalizationError, EvaluationError, NotASubdivision
from .exact import Point, affinely_independent, barycentric, dot, solve, squared_distance_to_hull_plane, sub
from .group import GroupAction, apply_simplex, induced_action, orbits

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# thickness and diameter
# ---------------------------------------------------------------------------

def _sq_dist_to_simplex(x: Point, pts: Sequence[Point]) -> Fraction:
    """Exact squared distance from x to the convex hull of an affinely independent set."""
    if len(pts) == 1:
        d = sub(x, pts[0])
        return dot(d, d)
    d2 = squared_distance_to_hull_plane(x, pts)
    # foot of the perpendicular: x minus its normal component
    foot = _project(x, pts)
    lam = barycentric(pts, foot)
    if lam is not None and min(lam) >= 0:
        return d2
    return min(_sq_dist_to_simplex(x, f) for f in itertools.combinations(pts, len(pts) - 1))


def _project(x: Point, pts: Sequence[Point]) -> Point:
    p0 = pts[0]
    E = [sub(p, p0) for p in pts[1:]]
    w = sub(x, p0)
    gram = [[dot(a, b) for b in E] for a in E]
    rhs = [dot(a, w) for a in E]
    c = solve(gram, rhs)
    return tuple(p0[i] + sum((c[j] * E[j][i] for j in range(len(E))), Fraction(0)) for i in range(len(p0)))


def diameter(pts: Sequence[Point]) -> float:
    return math.sqrt(max((dot(sub(a, b), sub(a, b)) for a, b in itertools.combinations(pts, 2)), default=0))


def thickness(pts: Sequence[Point]) -> float:
    """Distance from the barycenter to the boundary, divided by the diameter."""
    pts = [tuple(Fraction(c) for c in p) for p in pts]
    if len(pts) < 2 or not affinely_independent(pts):
        raise DegenerateSimplex("thickness needs a nondegenerate simplex of dimension >= 1")
    n = len(pts)
    b = tuple(sum(c) / n for c in zip(*pts))
    d2 = min(_sq_dist_to_simplex(b, f) for f in itertools.combinations(pts, n - 1))
    return math.sqrt(d2) / diameter(pts)


@dataclass(frozen=True)
class SubdivisionQuality:
    max_diameter: float
    min_thickness: float


def quality(K: SimplicialComplex) -> SubdivisionQuality:
    tops = [f for f in K.facets if len(f) == K.dim + 1]
    pts = [K.simplex_points(f) for f in tops]
    return SubdivisionQuality(max(diameter(p) for p in pts), min(thickness(p) for p in pts))


# ---------------------------------------------------------------------------
# edgewise subdivision
# ---------------------------------------------------------------------------

def _staircase_simplices(n: int, k: int) -> list:
    """Kuhn simplices of the region k >= x_1 >= ... >= x_n >= 0, as lists of lattice points."""
    out = []
    for base in itertools.product(range(k), repeat=n):
        for perm in itertools.permutations(range(n)):
            verts = [list(base)]
            for i in perm:
                nxt = list(verts[-1])
                nxt[i] += 1
                verts.append(nxt)
            if all(k >= x[0] and all(x[i] >= x[i + 1] for i in range(n - 1)) and x[-1] >= 0
                   for x in verts):
                out.append([tuple(x) for x in verts])
    return out


def _multiplicities(x: tuple, k: int) -> list:
    """Staircase coordinates back to barycentric multiplicities a_0..a_n."""
    n = len(x)
    if n == 0:
        return [k]
    a = [k - x[0]]
    a += [x[i] - x[i + 1] for i in range(n - 1)]
    a.append(x[-1])
    return a


def vertex_order_key(G: GroupAction | None, K: SimplicialComplex) -> dict:
    """Orbit-stable ordering of the vertices: orbit number first, then index."""
    if G is None:
        return {v: (0, v) for v in K.vertices}
    key = {}
    for i, orb in enumerate(orbits(G, K.vertices)):
        for v in orb:
            key[v] = (i, v)
    return key


def edgewise_subdivision(K: SimplicialComplex, k: int, G: GroupAction | None = None) -> SimplicialComplex:
    """Degree-k lattice subdivision of every maximal simplex.

    Vertices of the output carry labels ((v, m), ...) with multiplicities
    summing to k.  When G is given the output is checked to be G-invariant.
    """
    if k < 1:
        raise ValueError("degree must be positive")
    key = vertex_order_key(G, K)
    tables: dict = {}
    labels: set = set()
    tops: list = []
    for f in K.facets:
        order = sorted(f, key=key.__getitem__)
        n = len(order) - 1
        if n not in tables:
            tables[n] = _staircase_simplices(n, k) if n else [[()]]
        for simp in tables[n]:
            cell = []
            for x in simp:
                lab = tuple(sorted((order[i], m) for i, m in enumerate(_multiplicities(x, k)) if m))
                cell.append(lab)
            labels.update(cell)
            tops.append(cell)
    ordered = sorted(labels)
    index = {lab: i for i, lab in enumerate(ordered)}
    pts = [label_point(K.points, lab) for lab in ordered]
    out = SimplicialComplex(pts, [[index[lab] for lab in c] for c in tops], labels=ordered)
    if G is not None and G.order > 1:
        G1 = induced_action(G, out)
        for g in G1:
            for f in out.facets:
                if apply_simplex(g, f) not in out.simplices:
                    raise EdgewiseCanonicalizationError(
                        f"simplex {f} is not mapped to a simplex; vertex order cannot be made canonical")
    return out


def relabel_to_points(K: SimplicialComplex) -> SimplicialComplex:
    """Drop labels (for the next round, where labels refer to this complex)."""
    return SimplicialComplex(K.points, K.simplices, close=False)


# ---------------------------------------------------------------------------
# piecewise differentiable maps
# ---------------------------------------------------------------------------

ValueFn = Callable[[tuple, np.ndarray], np.ndarray]
DerivFn = Callable[[tuple, np.ndarray, np.ndarray], np.ndarray]


@dataclass
class PDFunction:
    """A map smooth on each simplex of ``domain``.

    ``value(simplex, bary)`` takes barycentric coordinates of shape (..., d+1)
    and returns (..., m).  ``derivative(simplex, bary, u)`` is the directional
    derivative along the ambient vector u, which must be tangent to the simplex.
    Evaluators must be pure so they can be called from several threads.
    """

    domain: SimplicialComplex
    value: ValueFn
    derivative: DerivFn
    out_dim: int
    name: str = ""

    @classmethod
    def from_ambient(cls, K: SimplicialComplex, f: Callable, df: Callable, out_dim: int,
                     name: str = "") -> "PDFunction":
        """Restriction of a smooth map on the ambient space.

        f maps points (..., N) to (..., m); df(x, u) is its directional derivative.
        """
        P = _float_points(K)

        def value(s, bary):
            return f(np.asarray(bary) @ P[list(s)])

        def derivative(s, bary, u):
            x = np.asarray(bary) @ P[list(s)]
            return df(x, np.broadcast_to(np.asarray(u, float), x.shape))

        return cls(K, value, derivative, out_dim, name)

    def positions(self, s: tuple, bary: np.ndarray) -> np.ndarray:
        return np.asarray(bary) @ _float_points(self.domain)[list(s)]

    def at_point(self, x: Point) -> np.ndarray:
        s, lam = self.domain.locate(x)
        return self.value(s, np.array([float(c) for c in lam]))


_FLOAT_POINTS: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _float_points(K: SimplicialComplex) -> np.ndarray:
    P = _FLOAT_POINTS.get(K)
    if P is None:
        P = _FLOAT_POINTS[K] = np.array([[float(c) for c in p] for p in K.points])
    return P


def face_agreement(f: PDFunction, resolution: int = 4) -> float:
    """Largest disagreement of neighbouring evaluators on shared faces."""
    owners: dict = {}
    for s in f.domain.facets:
        for r in range(1, len(s)):
            for face in itertools.combinations(s, r):
                owners.setdefault(face, []).append(s)
    worst = 0.0
    for face, ss in owners.items():
        if len(ss) < 2:
            continue
        lat = barycentric_lattice(len(face) - 1, resolution)
        vals = []
        for s in ss:
            full = np.zeros((len(lat), len(s)))
            for j, v in enumerate(face):
                full[:, s.index(v)] = lat[:, j]
            vals.append(f.value(s, full))
        for v in vals[1:]:
            worst = max(worst, float(np.max(np.abs(v - vals[0]))))
    return worst


def secant_map(Kt: SimplicialComplex, f: PDFunction, check: bool = True) -> PDFunction:
    """Piecewise affine map on Kt agreeing with f at the vertices of Kt."""
    if check:
        rep = check_subdivision(Kt, f.domain)
        if not rep.ok:
            raise NotASubdivision(f"not a subdivision of the map's domain: {sorted(rep.kinds())}")
    V = np.zeros((len(Kt.points), f.out_dim))
    for v in Kt.vertices:
        V[v] = f.at_point(Kt.points[v])
    P = _float_points(Kt)

    def value(s, bary):
        return np.asarray(bary) @ V[list(s)]

    def derivative(s, bary, u):
        s = list(s)
        E = P[s[1:]] - P[s[0]]
        c, *_ = np.linalg.lstsq(E.T, np.asarray(u, float), rcond=None)
        d = c @ (V[s[1:]] - V[s[0]])
        return np.broadcast_to(d, np.shape(bary)[:-1] + (f.out_dim,))

    out = PDFunction(Kt, value, derivative, f.out_dim, f"secant({f.name})")
    out.vertex_values = V  # type: ignore[attr-defined]
    return out


# ---------------------------------------------------------------------------
# C1 distance
# ---------------------------------------------------------------------------

def barycentric_lattice(d: int, resolution: int) -> np.ndarray:
    pts = [c for c in itertools.product(range(resolution + 1), repeat=d + 1) if sum(c) == resolution]
    return np.array(pts, float) / resolution


def barycentric_samples(d: int, n: int, resolution: int = 4, seed: int = 0) -> np.ndarray:
    """Lattice points (vertices and edge midpoints included) plus n Halton points."""
    lat = barycentric_lattice(d, resolution)
    if n <= 0 or d == 0:
        return lat
    u = qmc.Halton(d, scramble=True, seed=seed).random(n)
    u = np.sort(u, axis=1)
    bary = np.diff(np.concatenate([np.zeros((n, 1)), u, np.ones((n, 1))], axis=1), axis=1)
    return np.concatenate([lat, bary])


@dataclass(frozen=True)
class C1Gap:
    """Sampled (lower bound) estimate of the C1 distance between two maps."""

    value: float
    derivative: float
    frame_condition: float
    samples: int

    def __iter__(self):
        return iter((self.value, self.derivative))


def _containing_facet(K: SimplicialComplex, pts: Sequence[Point]):
    for c in K.facets:
        ch = K.chart(c)
        lams = [ch.barycentric(p) for p in pts]
        if all(l is not None and min(l) >= 0 for l in lams):
            return c, lams
    return None, None


def c1_distance_estimate(f: PDFunction, g: PDFunction, samples_per_simplex: int = 64,
                         seed: int = 0) -> C1Gap:
    """Max over samples of |f - g| and of |Df u - Dg u| over unit edge directions u.

    g's domain must refine f's domain.  The result bounds the true sup from below.
    """
    P = _float_points(g.domain)
    vgap = dgap = 0.0
    cond = 1.0
    count = 0
    cache: dict = {}
    for s in g.domain.facets:
        d = len(s) - 1
        if d not in cache:
            cache[d] = barycentric_samples(d, samples_per_simplex, seed=seed)
        bary = cache[d]
        home, lams = _containing_facet(f.domain, g.domain.simplex_points(s))
        if home is None:
            raise EvaluationError(f"simplex {s} does not lie in one simplex of the first map's domain")
        T = np.array([[float(c) for c in lam] for lam in lams])  # rows: g-vertices in f-coords
        bf = bary @ T
        vgap = max(vgap, float(np.max(np.linalg.norm(f.value(home, bf) - g.value(s, bary), axis=-1))))
        dirs = []
        for i, j in itertools.combinations(range(len(s)), 2):
            u = P[s[j]] - P[s[i]]
            u = u / np.linalg.norm(u)
            dirs.append(u)
            diff = f.derivative(home, bf, u) - g.derivative(s, bary, u)
            dgap = max(dgap, float(np.max(np.linalg.norm(diff, axis=-1))))
        if d >= 1:
            cond = max(cond, float(np.linalg.cond(np.array(dirs[:d]))))
        count += len(bary)
    return C1Gap(vgap, dgap, cond, count)


# ---------------------------------------------------------------------------
# refinement driver
# ---------------------------------------------------------------------------

@dataclass
class RefinementResult:
    complex: SimplicialComplex
    rounds: int
    secant: PDFunction
    history: list = field(default_factory=list)


def refine_until_close(K: SimplicialComplex, f: PDFunction, delta: float, G: GroupAction | None = None,
                       max_rounds: int = 12, samples_per_simplex: int = 64, seed: int = 0) -> RefinementResult:
    """Edgewise (k=2) refinement until the secant map is C1 delta-close to f."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    Kt = K
    history: list = []
    for r in range(max_rounds + 1):
        g = secant_map(Kt, f, check=r > 0)
        gap = c1_distance_estimate(f, g, samples_per_simplex, seed)
        q = quality(Kt) if Kt.dim >= 1 else None
        entry = {"round": r, "value_gap": gap.value, "derivative_gap": gap.derivative,
                 "frame_condition": gap.frame_condition, "facets": len(Kt.facets)}
        if q is not None:
            entry.update(max_diameter=q.max_diameter, min_thickness=q.min_thickness)
        history.append(entry)
        log.info("refinement round %d: %s", r, entry)
        if gap.value < delta and gap.derivative < delta:
            return RefinementResult(Kt, r, g, history)
        if r == max_rounds:
            break
        nxt = edgewise_subdivision(Kt, 2, G)
        if G is not None:
            G = induced_action(G, nxt)
        Kt = relabel_to_points(nxt)
    raise ConvergenceError(f"gap still >= {delta} after {max_rounds} rounds: {history[-1]}")
