"""
ComplexFile JSON format and OFF export.

A ComplexFile looks like::

    {
      "schema_version": 1,
      "ambient_dim": 2,
      "vertices": [["0", "0"], ["1", "0"], ["0", "1"]],
      "top_simplices": [[0, 1, 2]],
      "group": [[1, 2, 0]],
      "plmaps": [{"vertices": [...], "simplices": [...], "images": [...]}]
    }

Coordinates are exact rationals written "p/q" or "p".  ``group`` lists
generating vertex permutations; ``plmaps`` lists PL homeomorphisms as a
subdivision with vertex images.  Both are optional.
"""
from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .complex import SimplicialComplex
from .errors import ParseError, UnsupportedDimension
from .group import PLHomeoSpec

SCHEMA_VERSION = 1
_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")


class CanonicalizationWarning(UserWarning):
    """A rational was not in lowest terms (or had a sign or zero-padding quirk)."""


def format_rational(q: Fraction) -> str:
    return str(q)


def parse_rational(s, where: str) -> Fraction:
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise ParseError(f"{where}: expected a rational string, got {s!r}")
    text = str(s).strip()
    if not _RATIONAL.match(text):
        raise ParseError(f"{where}: {s!r} is not a rational of the form p/q")
    num, _, den = text.partition("/")
    if den and int(den) == 0:
        raise ParseError(f"{where}: zero denominator in {s!r}")
    q = Fraction(int(num), int(den) if den else 1)
    if isinstance(s, str) and format_rational(q) != text:
        warnings.warn(f"{where}: {s!r} canonicalized to {format_rational(q)!r}", CanonicalizationWarning,
                      stacklevel=3)
    return q


@dataclass
class PLMapBlock:
    vertices: list
    simplices: list
    images: list


@dataclass
class ComplexFile:
    ambient_dim: int
    vertices: list  # list of tuples of Fraction
    top_simplices: list
    group: list | None = None
    plmaps: list | None = None
    schema_version: int = SCHEMA_VERSION
    extra: dict = field(default_factory=dict)

    def complex(self) -> SimplicialComplex:
        return SimplicialComplex(self.vertices, self.top_simplices)

    def maps(self) -> list:
        return [PLHomeoSpec(SimplicialComplex(b.vertices, b.simplices), b.images) for b in self.plmaps or []]

    @classmethod
    def from_complex(cls, K: SimplicialComplex, group=None, plmaps=None) -> "ComplexFile":
        return cls(K.ambient_dim, list(K.points), [list(f) for f in K.facets],
                   [list(g) for g in group] if group is not None else None, plmaps)


def _points(rows, dim: int, where: str) -> list:
    if not isinstance(rows, list):
        raise ParseError(f"{where}: expected a list of coordinate lists")
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise ParseError(f"{where}[{i}]: expected a coordinate list")
        if len(row) != dim:
            raise ParseError(f"{where}[{i}]: has {len(row)} coordinates, ambient_dim is {dim}")
        out.append(tuple(parse_rational(c, f"{where}[{i}][{j}]") for j, c in enumerate(row)))
    return out


def _simplices(rows, n: int, where: str) -> list:
    if not isinstance(rows, list):
        raise ParseError(f"{where}: expected a list of index lists")
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or not row:
            raise ParseError(f"{where}[{i}]: expected a nonempty list of vertex indices")
        for j, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, int):
                raise ParseError(f"{where}[{i}][{j}]: index {v!r} is not an integer")
            if not 0 <= v < n:
                raise ParseError(f"{where}[{i}][{j}]: index {v} out of range ({n} vertices)")
        if len(set(row)) != len(row):
            raise ParseError(f"{where}[{i}]: repeated vertex index")
        out.append(list(row))
    return out


def parse_complex(data: bytes | str) -> ComplexFile:
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError("top level must be a JSON object")
    version = obj.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version!r}")
    for key in ("ambient_dim", "vertices", "top_simplices"):
        if key not in obj:
            raise ParseError(f"missing field {key!r}")
    dim = obj["ambient_dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise ParseError(f"ambient_dim: expected a positive integer, got {dim!r}")
    verts = _points(obj["vertices"], dim, "vertices")
    tops = _simplices(obj["top_simplices"], len(verts), "top_simplices")
    group = None
    if obj.get("group") is not None:
        group = []
        for i, g in enumerate(obj["group"]):
            where = f"group[{i}]"
            if not isinstance(g, list) or sorted(g) != list(range(len(verts))):
                raise ParseError(f"{where}: not a permutation of the {len(verts)} vertex indices")
            group.append(list(g))
    plmaps = None
    if obj.get("plmaps") is not None:
        plmaps = []
        for i, b in enumerate(obj["plmaps"]):
            where = f"plmaps[{i}]"
            if not isinstance(b, dict) or not {"vertices", "simplices", "images"} <= set(b):
                raise ParseError(f"{where}: needs vertices, simplices and images")
            pv = _points(b["vertices"], dim, f"{where}.vertices")
            ps = _simplices(b["simplices"], len(pv), f"{where}.simplices")
            pi = _points(b["images"], dim, f"{where}.images")
            if len(pi) != len(pv):
                raise ParseError(f"{where}: {len(pi)} images for {len(pv)} vertices")
            plmaps.append(PLMapBlock(pv, ps, pi))
    extra = {k: v for k, v in obj.items()
             if k not in {"schema_version", "ambient_dim", "vertices", "top_simplices", "group", "plmaps"}}
    return ComplexFile(dim, verts, tops, group, plmaps, version, extra)


def _rows(points) -> list:
    return [[format_rational(Fraction(c)) for c in p] for p in points]


def complex_to_dict(cf: ComplexFile) -> dict:
    out = {
        "schema_version": cf.schema_version,
        "ambient_dim": cf.ambient_dim,
        "vertices": _rows(cf.vertices),
        "top_simplices": [list(s) for s in cf.top_simplices],
    }
    if cf.group is not None:
        out["group"] = [list(g) for g in cf.group]
    if cf.plmaps is not None:
        out["plmaps"] = [{"vertices": _rows(b.vertices), "simplices": [list(s) for s in b.simplices],
                          "images": _rows(b.images)} for b in cf.plmaps]
    out.update(cf.extra)
    return out


def format_json(obj, depth: int = 0) -> str:
    """JSON with one line per row: lists of scalars stay on a single line."""
    pad, inner = "  " * depth, "  " * (depth + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {format_json(v, depth + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list) and any(isinstance(x, (list, dict)) for x in obj):
        return "[\n" + ",\n".join(inner + format_json(x, depth + 1) for x in obj) + "\n" + pad + "]"
    return json.dumps(obj, separators=(", ", ": "))


def serialize_complex(cf: ComplexFile) -> bytes:
    return (format_json(complex_to_dict(cf)) + "\n").encode("utf-8")


def plmap_block(spec: PLHomeoSpec) -> PLMapBlock:
    return PLMapBlock(list(spec.domain.points), [list(f) for f in spec.domain.facets], list(spec.images))


def export_off(K: SimplicialComplex, precision: int = 6, project: bool = False) -> bytes:
    """OFF text of the triangles of K (edges and tetrahedra are not exported)."""
    N = K.ambient_dim
    if N > 3 and not project:
        raise UnsupportedDimension(f"ambient dimension {N} > 3; enable projection (--project) "
                                   "to keep the first 3 coordinates")
    used = K.vertices
    index = {v: i for i, v in enumerate(used)}
    faces = K.faces(2)
    lines = ["OFF", f"{len(used)} {len(faces)} 0"]
    for v in used:
        coords = [float(c) for c in K.points[v][:3]] + [0.0] * max(0, 3 - N)
        lines.append(" ".join(f"{c:.{precision}f}" for c in coords))
    for f in faces:
        lines.append("3 " + " ".join(str(index[v]) for v in f))
    return ("\n".join(lines) + "\n").encode("ascii")
