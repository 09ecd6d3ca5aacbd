"""
Integral homology and PL manifold checks through vertex links.
"""
from __future__ import annotations

import enum
import logging
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from .complex import SimplicialComplex, link
from .errors import NonPureComplex, UnsupportedDimension

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------

def _identity(n: int) -> list:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(A: Sequence[Sequence[int]]) -> tuple[list, list, list]:
    """Return (D, U, V) with U A V = D diagonal, d_1 | d_2 | ..., all d_i >= 0.

    U and V are unimodular.  D is returned as a full matrix.
    """
    A = [[int(x) for x in row] for row in A]
    m = len(A)
    n = len(A[0]) if m else 0
    U, V = _identity(m), _identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (A, V):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        A[dst] = [a + q * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        for M in (A, V):
            for row in M:
                row[dst] += q * row[src]

    for t in range(min(m, n)):
        while True:
            nz = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, n) if A[i][j]]
            if not nz:
                break
            _, i, j = min(nz)
            swap_rows(t, i)
            swap_cols(t, j)
            done = True
            p = A[t][t]
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
                    done = done and A[i][t] == 0
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
                    done = done and A[t][j] == 0
            if not done:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if t < m and t < n and A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
    return A, U, V


def invariant_factors(A: Sequence[Sequence[int]]) -> list:
    """Nonzero diagonal of the Smith normal form."""
    D, _, _ = smith_normal_form(A)
    return [D[i][i] for i in range(min(len(D), len(D[0]) if D else 0)) if D[i][i]]


def _sparse_invariant_factors(cols: list) -> list:
    """Invariant factors of a sparse integer matrix given as column dicts {row: entry}.

    Unit pivots are eliminated sparsely; whatever remains goes through the dense
    Smith normal form.
    """
    cols = [dict(c) for c in cols if c]
    units = 0
    row_index: dict = defaultdict(set)
    for j, c in enumerate(cols):
        for i in c:
            row_index[i].add(j)
    alive = set(range(len(cols)))
    progress = True
    while progress:
        progress = False
        for j in sorted(alive):
            if j not in alive:
                continue
            c = cols[j]
            piv = next((i for i, x in sorted(c.items(), key=lambda it: len(row_index[it[0]])) if abs(x) == 1), None)
            if piv is None:
                continue
            a = c[piv]
            # clear row `piv` in the other columns using column j
            for k in list(row_index[piv]):
                if k == j:
                    continue
                ck = cols[k]
                q = ck[piv] * a  # a = +-1 so a^-1 = a
                for i, x in c.items():
                    y = ck.get(i, 0) - q * x
                    if y:
                        if i not in ck:
                            row_index[i].add(k)
                        ck[i] = y
                    elif i in ck:
                        del ck[i]
                        row_index[i].discard(k)
                if not ck:
                    alive.discard(k)
            for i in c:
                row_index[i].discard(j)
            alive.discard(j)
            units += 1
            progress = True
    rest = [cols[j] for j in sorted(alive) if cols[j]]
    if not rest:
        return [1] * units
    rows = sorted({i for c in rest for i in c})
    where = {r: i for i, r in enumerate(rows)}
    dense = [[0] * len(rest) for _ in rows]
    for j, c in enumerate(rest):
        for i, x in c.items():
            dense[where[i]][j] = x
    return [1] * units + invariant_factors(dense)


# ---------------------------------------------------------------------------
# homology
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HomologyProfile:
    betti: tuple
    torsion: tuple  # per dimension, tuple of invariant factors >= 2

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * b for k, b in enumerate(self.betti))

    def to_dict(self) -> dict:
        return {"betti": list(self.betti), "torsion": [list(t) for t in self.torsion],
                "groups": [self.describe(k) for k in range(len(self.betti))]}

    def describe(self, k: int) -> str:
        parts = []
        if self.betti[k]:
            parts.append("Z" if self.betti[k] == 1 else f"Z^{self.betti[k]}")
        parts += [f"Z/{t}" for t in self.torsion[k]]
        return " + ".join(parts) or "0"


def boundary_columns(K: SimplicialComplex, k: int) -> list:
    """Columns of the k-th boundary map C_k -> C_{k-1}, orientation by sorted vertex order."""
    rows = {s: i for i, s in enumerate(K.faces(k - 1))}
    cols = []
    for s in K.faces(k):
        c = {}
        for i in range(len(s)):
            c[rows[s[:i] + s[i + 1:]]] = (-1) ** i
        cols.append(c)
    return cols


def homology(K: SimplicialComplex) -> HomologyProfile:
    n = K.dim
    if n < 0:
        return HomologyProfile((), ())
    counts = [len(K.faces(k)) for k in range(n + 1)]
    factors = [[]] + [_sparse_invariant_factors(boundary_columns(K, k)) for k in range(1, n + 1)] + [[]]
    betti, torsion = [], []
    for k in range(n + 1):
        betti.append(counts[k] - len(factors[k]) - len(factors[k + 1]))
        torsion.append(tuple(sorted(d for d in factors[k + 1] if d > 1)))
    return HomologyProfile(tuple(betti), tuple(torsion))


# ---------------------------------------------------------------------------
# surfaces and links
# ---------------------------------------------------------------------------

def _components(vertices, edges) -> int:
    parent = {v: v for v in vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a)] = find(b)
    return len({find(v) for v in vertices})


def _graph_shape(K: SimplicialComplex) -> str:
    """'cycle', 'path', or 'other' for a 1-complex."""
    if K.dim != 1 or not K.is_pure():
        return "other"
    deg: dict = defaultdict(int)
    for a, b in K.faces(1):
        deg[a] += 1
        deg[b] += 1
    if _components(K.vertices, K.faces(1)) != 1:
        return "other"
    ds = sorted(deg[v] for v in K.vertices)
    if all(d == 2 for d in ds):
        return "cycle"
    if ds.count(1) == 2 and all(d in (1, 2) for d in ds):
        return "path"
    return "other"


@dataclass(frozen=True)
class SurfaceClass:
    kind: str  # sphere | orientable | non-orientable | non-manifold | not-closed | disconnected
    euler: int | None = None
    genus: int | None = None
    orientable: bool | None = None


def _orientable(K: SimplicialComplex) -> bool:
    """Propagate triangle orientations across edges; False on a contradiction."""
    tris = K.faces(2)
    by_edge: dict = defaultdict(list)
    for t in tris:
        for e in combinations(t, 2):
            by_edge[e].append(t)
    sign = {}

    def edge_sign(t, e):
        # +1 when e appears in t's boundary with the sorted orientation
        i = next(i for i in range(3) if t[i] not in e)
        return (-1) ** i

    for start in tris:
        if start in sign:
            continue
        sign[start] = 1
        stack = [start]
        while stack:
            t = stack.pop()
            for e in combinations(t, 2):
                for u in by_edge[e]:
                    if u == t:
                        continue
                    want = -sign[t] * edge_sign(t, e) * edge_sign(u, e)
                    if u not in sign:
                        sign[u] = want
                        stack.append(u)
                    elif sign[u] != want:
                        return False
    return True


def classify_closed_surface(K: SimplicialComplex) -> SurfaceClass:
    if K.dim != 2 or not K.is_pure():
        return SurfaceClass("non-manifold")
    edge_deg: dict = defaultdict(int)
    for t in K.faces(2):
        for e in combinations(t, 2):
            edge_deg[e] += 1
    if any(d > 2 for d in edge_deg.values()):
        return SurfaceClass("non-manifold")
    shapes = {_graph_shape(link(K, (v,))) for v in K.vertices}
    if "other" in shapes:
        return SurfaceClass("non-manifold")
    chi = K.euler_characteristic()
    if any(d == 1 for d in edge_deg.values()) or "path" in shapes:
        return SurfaceClass("not-closed", chi)
    if _components(K.vertices, K.faces(1)) != 1:
        return SurfaceClass("disconnected", chi)
    ori = _orientable(K)
    if ori:
        genus = (2 - chi) // 2
        return SurfaceClass("sphere" if chi == 2 else "orientable", chi, genus, True)
    return SurfaceClass("non-orientable", chi, 2 - chi, False)


def _is_disk(K: SimplicialComplex) -> bool:
    if K.dim != 2 or not K.is_pure():
        return False
    edge_deg: dict = defaultdict(int)
    for t in K.faces(2):
        for e in combinations(t, 2):
            edge_deg[e] += 1
    if any(d > 2 for d in edge_deg.values()):
        return False
    bd = [e for e, d in edge_deg.items() if d == 1]
    if not bd or _graph_shape(K.subcomplex(bd)) != "cycle":
        return False
    if any(_graph_shape(link(K, (v,))) == "other" for v in K.vertices):
        return False
    return _components(K.vertices, K.faces(1)) == 1 and K.euler_characteristic() == 1


class LinkVerdict(str, enum.Enum):
    SPHERE = "sphere"
    BALL = "ball"
    SPHERE_NECESSARY = "sphere_necessary_conditions_passed"
    BALL_NECESSARY = "ball_necessary_conditions_passed"
    NEITHER = "neither"

    @property
    def definite(self) -> bool:
        return self in (LinkVerdict.SPHERE, LinkVerdict.BALL, LinkVerdict.NEITHER)


def _three_manifold_shape(L: SimplicialComplex) -> str | None:
    """'closed' or 'boundary' if L passes the local 3-manifold checks, else None."""
    if L.dim != 3 or not L.is_pure():
        return None
    tri_deg: dict = defaultdict(int)
    for t in L.faces(3):
        for f in combinations(t, 3):
            tri_deg[f] += 1
    if any(d > 2 for d in tri_deg.values()):
        return None
    has_boundary = any(d == 1 for d in tri_deg.values())
    for v in L.vertices:
        lk = link(L, (v,))
        if is_pl_sphere_link(lk, 2) == LinkVerdict.SPHERE:
            continue
        if has_boundary and _is_disk(lk):
            continue
        return None
    if _components(L.vertices, L.faces(1)) != 1:
        return None
    return "boundary" if has_boundary else "closed"


def is_pl_sphere_link(L: SimplicialComplex, d: int) -> LinkVerdict:
    """Decide whether L is a PL d-sphere (d <= 2) or a PL d-ball.

    For d = 3 only necessary conditions are checked and the verdict says so.
    """
    if d < 0 or d > 3:
        raise UnsupportedDimension(f"link dimension {d} not supported (0..3)")
    if d == 0:
        n = len(L.vertices)
        if L.dim == 0 and n == 2:
            return LinkVerdict.SPHERE
        if L.dim == 0 and n == 1:
            return LinkVerdict.BALL
        return LinkVerdict.NEITHER
    if d == 1:
        shape = _graph_shape(L)
        return {"cycle": LinkVerdict.SPHERE, "path": LinkVerdict.BALL}.get(shape, LinkVerdict.NEITHER)
    if d == 2:
        if classify_closed_surface(L).kind == "sphere":
            return LinkVerdict.SPHERE
        return LinkVerdict.BALL if _is_disk(L) else LinkVerdict.NEITHER
    shape = _three_manifold_shape(L)
    if shape is None:
        return LinkVerdict.NEITHER
    H = homology(L)
    if shape == "closed":
        ok = L.euler_characteristic() == 0 and H.betti == (1, 0, 0, 1) and not any(H.torsion)
        return LinkVerdict.SPHERE_NECESSARY if ok else LinkVerdict.NEITHER
    bd = L.subcomplex(f for f in L.faces(2) if sum(1 for t in L.faces(3) if set(f) <= set(t)) == 1)
    ok = (H.betti == (1, 0, 0, 0) and not any(H.torsion)
          and classify_closed_surface(bd).kind == "sphere")
    return LinkVerdict.BALL_NECESSARY if ok else LinkVerdict.NEITHER


class Verdict(str, enum.Enum):
    VERIFIED_MANIFOLD = "verified_manifold"
    VERIFIED_NOT_MANIFOLD = "verified_not_manifold"
    NECESSARY_CONDITIONS_PASSED = "necessary_conditions_passed"
    FAILED = "failed"


@dataclass
class ManifoldReport:
    verdict: Verdict
    n: int
    links: dict = field(default_factory=dict)  # vertex -> LinkVerdict
    boundary: bool = False
    partial: bool = False
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "dimension": self.n,
            "boundary": self.boundary,
            "partial": self.partial,
            "links": {str(v): lv.value for v, lv in sorted(self.links.items())},
            "failing_vertices": [v for v, lv in sorted(self.links.items()) if lv == LinkVerdict.NEITHER],
            "notes": list(self.notes),
        }


def check_pl_manifold(K: SimplicialComplex, n: int, threads: int = 1) -> ManifoldReport:
    """Check that every vertex link is a PL (n-1)-sphere (or ball, at the boundary)."""
    if not 1 <= n <= 4:
        raise UnsupportedDimension(f"manifold dimension {n} not supported (1..4)")
    if K.dim != n or not K.is_pure():
        raise NonPureComplex(f"complex must be pure of dimension {n} (got dim {K.dim})")

    def one(v):
        return v, is_pl_sphere_link(link(K, (v,)), n - 1)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            links = dict(pool.map(one, K.vertices))
    else:
        links = dict(map(one, K.vertices))
    values = set(links.values())
    report = ManifoldReport(Verdict.FAILED, n, links)
    if LinkVerdict.NEITHER in values:
        report.verdict = Verdict.VERIFIED_NOT_MANIFOLD
        return report
    report.boundary = bool(values & {LinkVerdict.BALL, LinkVerdict.BALL_NECESSARY})
    if all(v.definite for v in values):
        report.verdict = Verdict.VERIFIED_MANIFOLD
    else:
        report.verdict = Verdict.NECESSARY_CONDITIONS_PASSED
        report.partial = True
        if values & {LinkVerdict.SPHERE_NECESSARY, LinkVerdict.BALL_NECESSARY}:
            report.notes.append("3-dimensional links: only necessary sphere conditions are checked")
    return report
