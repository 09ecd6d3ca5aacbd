"""
Evaluation and numerical verification of explicit smoothing maps.

Cone coordinates: a point of the closed cone over K is written t*(x, 1) with
x in |K|.  Around a vertex x of a complex, t*v with v on the link of x in the
first barycentric subdivision (the boundary of the Voronoi cell of x when all
edges have unit length).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import qmc

from .approx import PDFunction, _containing_facet, _float_points, _sq_dist_to_simplex, secant_map
from .complex import SimplicialComplex, ValidationReport, Violation, barycentric_subdivision, link, star
from .errors import ComplexError, CoverError, EvaluationError
from .group import GroupAction, apply_simplex, automorphism_group, induced_action, orbits

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# cut-offs and radial projection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CutoffSpec:
    """Smooth step from 1 to 0 on [a, b] (decreasing) or from 0 to 1 (increasing)."""

    a: float
    b: float
    decreasing: bool = True

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"cut-off needs a < b (got {self.a}, {self.b})")


# the cut-off used for the radial extension: 1 below 1/3, 0 above 2/3
RADIAL_CUTOFF = CutoffSpec(1 / 3, 2 / 3, decreasing=True)


def _e(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def cutoff(spec: CutoffSpec, t) -> np.ndarray | float:
    """exp(-1/s) smooth step, exactly 0 and 1 outside [a, b]."""
    scalar = not isinstance(t, np.ndarray) and np.ndim(t) == 0
    s = (np.asarray(t, dtype=float) - spec.a) / (spec.b - spec.a)
    s = np.atleast_1d(s)
    e0, e1 = _e(s), _e(1.0 - s)
    step = e0 / (e0 + e1)
    out = 1.0 - step if spec.decreasing else step
    return float(out[0]) if scalar else out.reshape(np.shape(t))


def radial_project(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    n = np.linalg.norm(p, axis=-1, keepdims=True)
    if np.any(n == 0):
        raise EvaluationError("radial projection of the zero vector")
    return p / n


# ---------------------------------------------------------------------------
# radial extension over the cone
# ---------------------------------------------------------------------------

class ConeExtension:
    """Extension of a map f: |K| -> S^n to the closed cone over K.

    With Lf the secant map on the subdivision Kt and f~ = p o Lf:

    * t > 1/2:  F = t * normalize(th1 f~ + (1 - th1) f),  th1 = theta(2t - 1)
    * t <= 1/2: F = t * nu * f~,  nu = th2 |Lf| + (1 - th2),  th2 = theta(2t)

    For t below 1/6 this is t * Lf, affine on each cone simplex.
    """

    def __init__(self, f: PDFunction, Kt: SimplicialComplex, spec: CutoffSpec = RADIAL_CUTOFF,
                 unit_tol: float = 1e-9, check: bool = True):
        self.f = f
        self.Kt = Kt
        self.spec = spec
        self.unit_tol = unit_tol
        self.Lf = secant_map(Kt, f, check=check)
        self.min_denominator = math.inf
        self._homes: dict = {}

    def _home(self, s: tuple):
        h = self._homes.get(s)
        if h is None:
            home, lams = _containing_facet(self.f.domain, self.Kt.simplex_points(s))
            if home is None:
                raise EvaluationError(f"simplex {s} of the subdivision is not inside the map's domain")
            h = self._homes[s] = (home, np.array([[float(c) for c in lam] for lam in lams]))
        return h

    def parts(self, s: tuple, bary: np.ndarray) -> tuple:
        """(f, Lf, f~) at barycentric points of the subdivision simplex s."""
        bary = np.asarray(bary, dtype=float)
        home, T = self._home(s)
        fx = self.f.value(home, bary @ T)
        dev = np.max(np.abs(np.linalg.norm(fx, axis=-1) - 1.0))
        if dev > self.unit_tol:
            raise EvaluationError(f"map is not unit-norm (deviation {dev:.3g})")
        lf = self.Lf.value(s, bary)
        return fx, lf, radial_project(lf)

    def branches(self, s: tuple, bary: np.ndarray, t) -> tuple:
        """(outer, inner) formulas at the same t; F uses outer for t > 1/2."""
        fx, lf, ft = self.parts(s, bary)
        t = np.broadcast_to(np.asarray(t, dtype=float), fx.shape[:-1])
        if np.any((t < 0) | (t > 1)):
            raise EvaluationError("cone parameter outside [0, 1]")
        tt = t[..., None]
        th1 = np.asarray(cutoff(self.spec, 2 * t - 1))[..., None]
        w = th1 * ft + (1 - th1) * fx
        den = np.linalg.norm(w, axis=-1, keepdims=True)
        th2 = np.asarray(cutoff(self.spec, 2 * t))[..., None]
        nu = th2 * np.linalg.norm(lf, axis=-1, keepdims=True) + (1 - th2)
        with np.errstate(invalid="ignore", divide="ignore"):
            outer = tt * (w / den)
        return outer, tt * nu * ft, den

    def evaluate(self, s: tuple, bary: np.ndarray, t) -> np.ndarray:
        outer, inner, den = self.branches(s, bary, t)
        upper = np.broadcast_to(np.asarray(t, dtype=float), den.shape[:-1]) > 0.5
        if np.any(upper):
            dmin = float(np.min(den[upper]))
            self.min_denominator = min(self.min_denominator, dmin)
            if dmin < 0.5:
                raise EvaluationError(f"normalization denominator {dmin:.3g} < 1/2; subdivision too coarse")
        return np.where(upper[..., None], outer, inner)

    def __call__(self, x, t) -> np.ndarray:
        s, lam = self.Kt.locate(x)
        return self.evaluate(s, np.array([float(c) for c in lam]), t)


def eval_F(x, t: float, f: PDFunction, Kt: SimplicialComplex) -> np.ndarray:
    """One-off evaluation; build a ConeExtension for repeated use."""
    return ConeExtension(f, Kt)(x, t)


def unit_sphere_map(K: SimplicialComplex, center=None) -> PDFunction:
    """Radial projection of |K| (not containing the center) onto the unit sphere."""
    c = np.zeros(K.ambient_dim) if center is None else np.asarray(center, float)

    def f(x):
        return radial_project(x - c)

    def df(x, u):
        y = x - c
        r = np.linalg.norm(y, axis=-1, keepdims=True)
        n = y / r
        return (u - np.sum(n * u, axis=-1, keepdims=True) * n) / r

    return PDFunction.from_ambient(K, f, df, K.ambient_dim, "radial")


# ---------------------------------------------------------------------------
# unit-edge metric, product covers
# ---------------------------------------------------------------------------

def unit_edge_sq_distance(a: Sequence, b: Sequence):
    """Squared distance between barycentric points of one simplex whose edges all have length 1."""
    return sum((x - y) ** 2 for x, y in zip(a, b)) / 2


def _label_bary(label: tuple, top: tuple) -> tuple:
    total = sum(m for _, m in label)
    w = dict(label)
    return tuple(Fraction(w.get(v, 0), total) for v in top)


def star_radius(K: SimplicialComplex, K1: SimplicialComplex, x: int) -> float:
    """Unit-edge distance from the K1-vertex x to the boundary of its star in K1."""
    best = None
    for f in K1.facets:
        if x not in f:
            continue
        top = tuple(sorted({v for y in f for v, _ in K1.labels[y]}))
        opp = [_label_bary(K1.labels[y], top) for y in f if y != x]
        d2 = _sq_dist_to_simplex(_label_bary(K1.labels[x], top), opp) / 2
        best = d2 if best is None or d2 < best else best
    return math.sqrt(best)


@dataclass
class SymmetricProductCover:
    """Product neighbourhoods V_x x S_x around the vertices of K1.

    ``radii[x] = (v_radius, s_radius)`` for each vertex x of the barycentric
    subdivision; ``stratum[x]`` is the dimension of its supporting simplex in K.
    """

    K: SimplicialComplex
    K1: SimplicialComplex
    radii: dict
    stratum: dict

    @classmethod
    def uniform(cls, K: SimplicialComplex, s_radius: float, v_radius: float | None = None) -> "SymmetricProductCover":
        """Same radii on each stratum: S-radius s_radius, V-radius v_radius (default s_radius)."""
        K1 = barycentric_subdivision(K)
        v_radius = s_radius if v_radius is None else v_radius
        top = K.dim
        radii, stratum = {}, {}
        for x in K1.vertices:
            i = len(K1.labels[x]) - 1
            stratum[x] = i
            radii[x] = (0.0 if i == 0 else v_radius, 0.0 if i == top else s_radius)
        return cls(K, K1, radii, stratum)

    @classmethod
    def trivial(cls, K: SimplicialComplex) -> "SymmetricProductCover":
        return cls.uniform(K, 0.0, 0.0)

    def validate(self, G: GroupAction | None = None) -> ValidationReport:
        rep = ValidationReport()
        top = self.K.dim
        for x, (vr, sr) in sorted(self.radii.items()):
            i = self.stratum[x]
            if vr < 0 or sr < 0:
                rep.violations.append(Violation("negative-radius", (x,)))
            if i == 0 and vr != 0:
                rep.violations.append(Violation("not-a-product", (x,), "V-factor of a vertex is a point"))
            if i == top and sr != 0:
                rep.violations.append(Violation("not-a-product", (x,), "S-factor of a top barycenter is a point"))
            bound = star_radius(self.K, self.K1, x)
            if math.hypot(vr, sr) >= bound:
                rep.violations.append(Violation("outside-star", (x,), f"{math.hypot(vr, sr):.4g} >= {bound:.4g}"))
        G = automorphism_group(self.K) if G is None else G
        G1 = induced_action(G, self.K1)
        for orb in orbits(G1, self.K1.vertices):
            if len({self.radii[x] for x in orb}) > 1:
                rep.violations.append(Violation("not-symmetric", tuple(orb)))
        return rep


def cover_metrics(cover: SymmetricProductCover) -> tuple[float, float]:
    """(fineness, cofineness): largest S-radius and largest V-radius."""
    fin = max((sr for _, sr in cover.radii.values()), default=0.0)
    cofin = max((vr for vr, _ in cover.radii.values()), default=0.0)
    return fin, cofin


# ---------------------------------------------------------------------------
# vertex neighbourhoods and the bump function phi0
# ---------------------------------------------------------------------------

def voronoi_ball(K: SimplicialComplex, x: int) -> tuple[SimplicialComplex, SimplicialComplex]:
    """(B_x, P_x): star and link of x in the first barycentric subdivision."""
    if (x,) not in K.simplices:
        raise ComplexError(f"{x} is not a vertex of the complex")
    K1 = barycentric_subdivision(K)
    v = K1.labels.index(((x, 1),))
    return star(K1, (v,)), link(K1, (v,))


@dataclass(frozen=True)
class SmoothingParams:
    eps1: float = 1 / 100
    eps2: float = 1 / 200
    lam: float = 1 / 25

    def __post_init__(self):
        if self.eps1 <= 0 or self.eps2 <= 0:
            raise ValueError("eps1 and eps2 must be positive")
        if not 5 * self.eps2 < self.lam < 1:
            raise ValueError(f"need 5*eps2 < lambda < 1 (eps2={self.eps2}, lambda={self.lam})")
        if not 2 * self.lam < 1 / 10:
            raise ValueError(f"need 2*lambda < 1/10 for the radial cut-off (lambda={self.lam})")

    @property
    def cutoff(self) -> CutoffSpec:
        return CutoffSpec(2 * self.lam, 1 / 10, decreasing=False)


def _psi(s: np.ndarray) -> np.ndarray:
    """exp(1 - 1/(1-s)) on s < 1, zero beyond; equals 1 at s = 0."""
    out = np.zeros_like(s)
    inside = s < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside]))
    return out


def _dpsi(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    inside = s < 1
    si = s[inside]
    out[inside] = -np.exp(1.0 - 1.0 / (1.0 - si)) / (1.0 - si) ** 2
    return out


def _bary_direction(P: np.ndarray, s: tuple, u: np.ndarray) -> np.ndarray:
    """Barycentric velocity of the ambient tangent direction u in simplex s."""
    s = list(s)
    E = P[s[1:]] - P[s[0]]
    c, *_ = np.linalg.lstsq(E.T, np.asarray(u, float).reshape(-1), rcond=None)
    return np.concatenate([[-c.sum()], c])


@dataclass
class Phi0:
    """phi0 = 1 - c * (group average of a bump inside each top simplex)."""

    base: SimplicialComplex
    coefficient: float
    center: np.ndarray
    radius: float
    perms: dict = field(repr=False)  # top simplex -> (index arrays, weights)
    function: PDFunction = field(repr=False, default=None)

    def __call__(self, s: tuple, bary: np.ndarray) -> np.ndarray:
        return self.function.value(s, bary)[..., 0]


def build_phi0(base: SimplicialComplex, cover: SymmetricProductCover, coefficient: float = 1 / 10,
               G: GroupAction | None = None) -> Phi0:
    """A PD function base -> [1 - c, 1], symmetric under Aut(base), equal to 1 near
    the codimension >= 1 skeleton and on every lower-stratum cover member."""
    if not 0 <= coefficient < 1:
        raise CoverError("bump coefficient must lie in [0, 1)")
    G = automorphism_group(base) if G is None else G
    rep = cover.validate(G)
    if not rep.ok:
        raise CoverError(f"cover is not a valid symmetric product cover: {sorted(rep.kinds())}")
    m = base.dim
    if m < 1:
        raise CoverError("base must have dimension >= 1")
    w = np.arange(2, m + 3, dtype=float)
    w /= w.sum()
    height = math.sqrt((m + 1) / (2 * m))  # unit-edge m-simplex
    fin, _ = cover_metrics(cover)
    r = 0.9 * (w.min() - fin / height)
    if r <= 0:
        raise CoverError(f"cover fineness {fin} leaves no room for the bump")
    tops = [f for f in base.facets if len(f) == m + 1]
    perms = {}
    for s in tops:
        rows = []
        for g in G:
            tau = apply_simplex(g, s)
            pos = {v: k for k, v in enumerate(tau)}
            idx = np.empty(m + 1, dtype=int)
            for j, v in enumerate(s):
                idx[pos[g[v]]] = j
            rows.append(tuple(idx))
        uniq, counts = np.unique(np.array(rows), axis=0, return_counts=True)
        perms[s] = (uniq, counts / counts.sum())
    P = _float_points(base)
    c = coefficient

    def bumps(s, bary):
        bary = np.asarray(bary, float)
        if len(s) != m + 1 or c == 0:
            return np.zeros(bary.shape[:-1]), None
        idx, wts = perms[s]
        nu = bary[..., idx]  # (..., k, m+1)
        q = np.sum((nu - w) ** 2, axis=-1) / r ** 2
        return np.sum(_psi(q) * wts, axis=-1), (nu, q, idx, wts)

    def value(s, bary):
        b, _ = bumps(s, bary)
        return (1.0 - c * b)[..., None]

    def derivative(s, bary, u):
        bary = np.asarray(bary, float)
        b, extra = bumps(s, bary)
        if extra is None:
            return np.zeros(bary.shape[:-1] + (1,))
        nu, q, idx, wts = extra
        db = _bary_direction(P, s, u)[idx]  # (k, m+1)
        dq = 2 * np.sum((nu - w) * db, axis=-1) / r ** 2
        return (-c * np.sum(_dpsi(q) * dq * wts, axis=-1))[..., None]

    fn = PDFunction(base, value, derivative, 1, "phi0")
    return Phi0(base, coefficient, w, r, perms, fn)


# ---------------------------------------------------------------------------
# the maps h and H
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConePoint:
    t: float | np.ndarray
    simplex: tuple
    bary: np.ndarray


def eval_h(t, v: tuple, phi0: Phi0 | Callable, params: SmoothingParams) -> ConePoint:
    """h(t, v) = (theta(t) t + (1 - theta(t)) t phi0(v), v) for t >= 2 eps2."""
    s, bary = v
    bary = np.asarray(bary, float)
    t = np.asarray(t, float)
    if np.any(t < 2 * params.eps2):
        raise EvaluationError(f"t below the domain bound 2*eps2 = {2 * params.eps2}")
    p = np.asarray(phi0(s, bary), float)
    if np.any(p <= 0) or np.any(p > 1):
        raise EvaluationError("phi0 must take values in (0, 1]")
    th = cutoff(params.cutoff, t)
    phi = th * t + (1 - th) * t * p
    return ConePoint(phi, s, bary)


class StarCone:
    """Cone coordinates on star_K(x) over the link of x."""

    def __init__(self, K: SimplicialComplex, x: int):
        if (x,) not in K.simplices:
            raise ComplexError(f"{x} is not a vertex")
        self.K, self.x = K, x
        lk = link(K, (x,))
        self.base, remap = lk.compact()
        self.to_base = remap
        self.from_base = {v: k for k, v in remap.items()}
        self.P = _float_points(K)

    def coords(self, s: tuple, y: np.ndarray) -> tuple:
        """Split points y of the cone simplex x*s into (t, bary on s); t = 1 on P_x."""
        q0 = self.P[self.x]
        A = (self.P[list(s)] - q0).T
        c, *_ = np.linalg.lstsq(A, (np.asarray(y, float) - q0).T, rcond=None)
        c = c.T
        srad = c.sum(axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            mu = c / srad[..., None]
        t = srad * (1 + mu.max(axis=-1))
        return t, mu

    def point(self, s: tuple, t: np.ndarray, mu: np.ndarray) -> np.ndarray:
        q0 = self.P[self.x]
        srad = t / (1 + mu.max(axis=-1))
        return q0 + srad[..., None] * (mu @ (self.P[list(s)] - q0))


def eval_H(cone: StarCone, s: tuple, y: np.ndarray, phi0: Phi0, params: SmoothingParams) -> np.ndarray:
    """H(t, v) = (phi(t, v), v) on the cone over the link simplex s (vertex indices of K).

    Points with theta(t) = 1 are returned unchanged (bit for bit).
    """
    y = np.asarray(y, float)
    t, mu = cone.coords(s, y)
    bs = tuple(sorted(cone.to_base[v] for v in s))
    order = [bs.index(cone.to_base[v]) for v in s]
    mu_base = np.empty_like(mu)
    mu_base[..., order] = mu
    hp = eval_h(t, (bs, mu_base), phi0, params)
    out = cone.point(s, hp.t, mu)
    th = np.asarray(cutoff(params.cutoff, t))
    return np.where((th == 1.0)[..., None], y, out)


# ---------------------------------------------------------------------------
# surfaces of revolution and embedding checks
# ---------------------------------------------------------------------------

def regular_cone_vertices(m: int) -> np.ndarray:
    """Apex (row 0) and m+1 further vertices of a unit-edge (m+1)-simplex, apex at the origin."""
    E = np.eye(m + 2) / math.sqrt(2)
    return E - E[0]


def phi0_surface(phi0: Phi0) -> tuple[Callable, list]:
    """The map q -> phi0(q) rho(q) q realising P' = {phi0(p) p : p in P}.

    The base must be a single simplex (with its faces).  Returns the map in the
    form expected by check_embedding together with its smooth pieces (the
    simplices of the base's barycentric subdivision).
    """
    base = phi0.base
    m = base.dim
    if len(base.facets) != 1:
        raise ComplexError("phi0 surface needs a single-simplex base")
    top = base.facets[0]
    Z = regular_cone_vertices(m)[1:]
    base1 = barycentric_subdivision(base)
    pieces = []
    for f in base1.facets:
        bar = np.array([[float(c) for c in _label_bary(base1.labels[y], top)] for y in f])
        pieces.append(bar @ Z)

    def fn(_i, Y):
        mu, *_ = np.linalg.lstsq(Z.T, np.asarray(Y, float).T, rcond=None)
        mu = mu.T
        rho = 1.0 / (1.0 + mu.max(axis=-1))
        return (phi0(top, mu) * rho)[..., None] * Y

    return fn, pieces


@dataclass(frozen=True)
class EmbeddingReport:
    samples: int
    min_singular_value: float
    worst_contraction: float
    worst_singular_at: tuple
    worst_pair: tuple
    step: float
    sv_threshold: float
    contraction_threshold: float

    @property
    def ok(self) -> bool:
        return self.min_singular_value > self.sv_threshold and self.worst_contraction > self.contraction_threshold

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "min_singular_value": self.min_singular_value,
            "worst_contraction": self.worst_contraction,
            "worst_singular_at": list(self.worst_singular_at),
            "worst_pair": [list(p) for p in self.worst_pair],
            "step": self.step,
            "sv_threshold": self.sv_threshold,
            "contraction_threshold": self.contraction_threshold,
            "ok": self.ok,
        }


def _tangent_basis(piece: np.ndarray) -> np.ndarray:
    E = piece[1:] - piece[0]
    q, _ = np.linalg.qr(E.T)
    return q.T[: len(E)]


def check_embedding(fn: Callable, pieces: Sequence[np.ndarray], samples: int = 10_000, step: float = 1e-5,
                    seed: int = 0, sv_threshold: float = 1e-8, contraction_threshold: float = 1e-8,
                    chunk: int = 1024) -> EmbeddingReport:
    """Sampled injectivity and immersion check of a piecewise smooth map.

    ``fn(i, Y)`` evaluates the map on points Y (k, N) of piece i (a simplex given by
    its vertex rows).  Jacobians use central differences in an orthonormal basis of
    each piece's tangent space.  Values are estimates from samples only.
    """
    pieces = [np.asarray(p, float) for p in pieces]
    per = max(1, -(-samples // len(pieces)))  # at least `samples` points in total
    X, Y = [], []
    min_sv, sv_at = math.inf, ()
    for i, piece in enumerate(pieces):
        d = len(piece) - 1
        u = qmc.Halton(d, scramble=True, seed=seed + i).random(per)
        u = np.sort(u, axis=1)
        bary = np.diff(np.concatenate([np.zeros((per, 1)), u, np.ones((per, 1))], axis=1), axis=1)
        bary = 0.98 * bary + 0.02 / (d + 1)  # stay off the boundary
        pts = bary @ piece
        img = np.asarray(fn(i, pts), float)
        X.append(pts)
        Y.append(img)
        B = _tangent_basis(piece)
        J = np.stack([(np.asarray(fn(i, pts + step * b), float) - np.asarray(fn(i, pts - step * b), float))
                      / (2 * step) for b in B], axis=-1)  # (k, m, d)
        sv = np.linalg.svd(J, compute_uv=False)[..., -1]
        k = int(np.argmin(sv))
        if sv[k] < min_sv:
            min_sv, sv_at = float(sv[k]), tuple(pts[k])
    X = np.concatenate(X)
    Y = np.concatenate(Y)
    worst, pair = math.inf, ((), ())
    n = len(X)
    for a in range(0, n, chunk):
        dx = cdist(X[a:a + chunk], X)
        dy = cdist(Y[a:a + chunk], Y)
        rows = np.arange(a, min(a + chunk, n))
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = dy / dx
        ratio[rows - a, rows] = np.inf  # skip self pairs
        k = np.unravel_index(np.argmin(ratio), ratio.shape)
        if ratio[k] < worst:
            worst = float(ratio[k])
            pair = (tuple(X[a + k[0]]), tuple(X[k[1]]))
    return EmbeddingReport(n, min_sv, worst, sv_at, pair, step, sv_threshold, contraction_threshold)


def cone_pieces(Kt: SimplicialComplex, t_lo: float, t_hi: float = 1.0) -> tuple[list, list]:
    """Frusta sigma x [t_lo, t_hi] in cone coordinates y = t (x, 1), triangulated.

    Returns (pieces, owners) where owners[i] is the simplex of Kt under piece i.
    """
    P = _float_points(Kt)
    pieces, owners = [], []
    for s in Kt.facets:
        lift = np.hstack([P[list(s)], np.ones((len(s), 1))])
        bot, top = t_lo * lift, t_hi * lift
        for i in range(len(s)):
            pieces.append(np.vstack([bot[: i + 1], top[i:]]))
            owners.append(s)
    return pieces, owners


def cone_map(ext: ConeExtension, owners: list) -> Callable:
    """fn(i, Y) for check_embedding: F on the cone over the subdivision simplex owners[i]."""
    P = _float_points(ext.Kt)

    def fn(i, Y):
        s = owners[i]
        Y = np.asarray(Y, float)
        t = Y[..., -1]
        x = Y[..., :-1] / t[..., None]
        A = np.vstack([P[list(s)].T, np.ones(len(s))])
        bary, *_ = np.linalg.lstsq(A, np.vstack([x.T, np.ones(len(x))]), rcond=None)
        return ext.evaluate(s, bary.T, t)

    return fn


# ---------------------------------------------------------------------------
# 2-dimensional vertex stars
# ---------------------------------------------------------------------------

def _cyclic_link(K: SimplicialComplex, x: int) -> list:
    if K.dim != 2:
        raise ComplexError("cone angle needs a 2-complex")
    lk = link(K, (x,))
    edges = lk.faces(1)
    nbr: dict = {}
    for a, b in edges:
        nbr.setdefault(a, []).append(b)
        nbr.setdefault(b, []).append(a)
    if not nbr or any(len(v) != 2 for v in nbr.values()):
        raise ComplexError(f"vertex {x} is not an interior vertex")
    start = min(nbr)
    cyc, prev, cur = [start], None, start
    while len(cyc) <= len(nbr):
        nxt = next(w for w in sorted(nbr[cur]) if w != prev)
        if nxt == start:
            break
        cyc.append(nxt)
        prev, cur = cur, nxt
    if len(cyc) != len(nbr):
        raise ComplexError(f"link of vertex {x} is not a single cycle")
    return cyc


def cone_angle(K: SimplicialComplex, x: int) -> float:
    """Total angle at x in the unit-edge flat metric."""
    cyc = _cyclic_link(K, x)
    # the angle between two unit edges of an equilateral triangle, from its Gram matrix
    gram = np.array([[1.0, 0.5], [0.5, 1.0]])
    per = math.acos(gram[0, 1] / math.sqrt(gram[0, 0] * gram[1, 1]))
    return len(cyc) * per


@dataclass
class PolygonChart:
    """Affine map of each triangle (x, v_i, v_{i+1}) onto the i-th sector of a regular m-gon."""

    K: SimplicialComplex
    x: int
    cycle: list

    @property
    def m(self) -> int:
        return len(self.cycle)

    def corner(self, k: int) -> np.ndarray:
        a = 2 * math.pi * (k % self.m) / self.m
        return np.array([math.cos(a), math.sin(a)])

    def sector(self, s: tuple) -> dict:
        """Images of the vertices of the triangle s (which contains x)."""
        others = [v for v in s if v != self.x]
        i, j = (self.cycle.index(v) for v in others)
        if (j - i) % self.m == 1:
            k = i
        elif (i - j) % self.m == 1:
            k = j
        else:
            raise ComplexError(f"{s} is not a triangle of the star")
        return {self.x: np.zeros(2), self.cycle[k]: self.corner(k), self.cycle[(k + 1) % self.m]: self.corner(k + 1)}

    def __call__(self, s: tuple, bary: np.ndarray) -> np.ndarray:
        img = self.sector(s)
        return np.asarray(bary, float) @ np.array([img[v] for v in s])


def regular_polygon_chart(K: SimplicialComplex, x: int) -> PolygonChart:
    return PolygonChart(K, x, _cyclic_link(K, x))
