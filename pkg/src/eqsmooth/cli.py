"""
Command-line driver: ``eqsmooth <command> <file> [options]``.

Every command reads a ComplexFile (path or ``-`` for stdin) and writes JSON to
stdout.  Exit codes: 0 success, 1 the check ran and failed, 2 bad usage or
unreadable input.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
import warnings
from fractions import Fraction

import numpy as np

from . import __version__
from .approx import (PDFunction, barycentric_samples, edgewise_subdivision, quality, refine_until_close,
                     relabel_to_points)
from .complex import SimplicialComplex, barycentric_subdivision, link, validate_complex
from .corpus import BUILTIN_FUNCTIONS, builtin_function
from .errors import EqSmoothError, ParseError, PointOutsideComplex, UnsupportedDimension
from .group import (GroupAction, PLHomeoSpec, action_is_simplicial_exact, equivariant_triangulate,
                    induced_action, validate_plhomeo, verify_simplicial_action, volumes_match)
from .io import SCHEMA_VERSION, ComplexFile, export_off, format_json, parse_complex, plmap_block, serialize_complex
from .manifold import Verdict, check_pl_manifold, homology
from .smoothing import (ConeExtension, SmoothingParams, StarCone, SymmetricProductCover, build_phi0,
                        check_embedding, cone_map, cone_pieces, eval_H, unit_sphere_map)

log = logging.getLogger("eqsmooth")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path: str) -> ComplexFile:
    try:
        data = sys.stdin.buffer.read() if path == "-" else open(path, "rb").read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        cf = parse_complex(data)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return cf


def _complex(cf: ComplexFile) -> SimplicialComplex:
    K = cf.complex()
    rep = validate_complex(K)
    if not rep.ok:
        raise UsageError(f"input is not a valid complex: {sorted(rep.kinds())}")
    return K


def _group(cf: ComplexFile, K: SimplicialComplex) -> GroupAction | None:
    if not cf.group:
        return None
    return GroupAction.generated_by(cf.group, len(K.points), max_order=256)


def _emit(report: dict, args) -> None:
    out = {"schema_version": SCHEMA_VERSION, "command": args.command, "eqsmooth_version": __version__}
    out.update(report)
    if args.tolerance_report:
        out["tolerances"] = _tolerances(args)
    sys.stdout.write(format_json(json.loads(json.dumps(out, default=_jsonable))) + "\n")


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (set, frozenset, tuple)):
        return list(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _tolerances(args) -> dict:
    tol = {"combinatorics": "exact (rational)", "seed": args.seed}
    if args.command == "secant":
        tol.update(face_agreement=1e-12, delta=args.delta, samples_per_simplex=args.samples_per_simplex)
    if args.command == "smooth-eval":
        tol.update(unit_norm=1e-9, finite_difference_step=1e-5, singular_value_threshold=1e-8,
                   contraction_threshold=1e-8)
    return tol


def _write_complex(cf: ComplexFile, path: str | None) -> None:
    data = serialize_complex(cf)
    if path in (None, "-"):
        sys.stdout.buffer.write(data)
    else:
        with open(path, "wb") as fh:
            fh.write(data)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    cf = _read(args.file)
    K = cf.complex()
    rep = validate_complex(K)
    out = {"complex": rep.to_dict(), "dim": K.dim, "f_vector": K.f_vector()}
    ok = rep.ok
    if cf.group is not None and ok:
        g = verify_simplicial_action(K, cf.group, generators=True)
        out["group"] = g.to_dict()
        ok = ok and g.ok
        if g.ok:
            out["group_order"] = _group(cf, K).order
    if cf.plmaps is not None and ok:
        maps = []
        for spec in cf.maps():
            r = validate_plhomeo(spec, K)
            maps.append(r.to_dict())
            ok = ok and r.ok
        out["plmaps"] = maps
    out["ok"] = ok
    _emit(out, args)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_subdivide(args) -> int:
    cf = _read(args.file)
    K = _complex(cf)
    G = _group(cf, K)
    if args.scheme == "edgewise" and args.degree < 2:
        raise UsageError("--degree must be at least 2 for the edgewise scheme")
    for _ in range(args.rounds):
        if args.scheme == "barycentric":
            nxt = barycentric_subdivision(K)
        else:
            nxt = edgewise_subdivision(K, args.degree, G)
        if G is not None:
            G = induced_action(G, nxt)
        K = relabel_to_points(nxt)
    q = quality(K) if K.dim >= 1 else None
    out = ComplexFile.from_complex(K, G.elements if G is not None else None)
    _write_complex(out, args.output)
    if args.output not in (None, "-"):
        rep = {"output": args.output, "facets": len(K.facets), "f_vector": K.f_vector()}
        if q is not None:
            rep.update(max_diameter=q.max_diameter, min_thickness=q.min_thickness)
        _emit(rep, args)
    return EXIT_OK


def cmd_triangulate(args) -> int:
    cf = _read(args.file)
    K = _complex(cf)
    maps = cf.maps()
    if not maps and cf.group:
        maps = [PLHomeoSpec.from_permutation(K, g) for g in cf.group]
    if not maps:
        raise UsageError("triangulate-equivariant needs plmaps (or a group) in the input file")
    t0 = time.perf_counter()
    res = equivariant_triangulate(K, maps)
    exact = action_is_simplicial_exact(res.complex, maps)
    vol = volumes_match(res.complex, K)
    elapsed = time.perf_counter() - t0
    out = ComplexFile.from_complex(res.complex, res.action.elements,
                                   [plmap_block(m) for m in maps] if cf.plmaps else None)
    _write_complex(out, args.output)
    ok = exact and vol
    if args.output not in (None, "-") or not ok:
        rep = {"output": args.output, "group_order": res.group_order, "action_exact": exact,
               "volume_match": vol, "seconds": round(elapsed, 3), **res.stats}
        _emit(rep, args)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_check_manifold(args) -> int:
    K = _complex(_read(args.file))
    rep = check_pl_manifold(K, args.dim, threads=args.threads)
    _emit(rep.to_dict(), args)
    return EXIT_OK if rep.verdict in (Verdict.VERIFIED_MANIFOLD, Verdict.NECESSARY_CONDITIONS_PASSED) else EXIT_FAIL


def cmd_homology(args) -> int:
    K = _complex(_read(args.file))
    _emit(homology(K).to_dict(), args)
    return EXIT_OK


def _table_function(K: SimplicialComplex, path: str) -> PDFunction:
    try:
        with open(path) as fh:
            rows = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read table {path}: {exc}") from exc
    if not isinstance(rows, list) or len(rows) != len(K.points):
        raise UsageError(f"table must list one value per vertex ({len(K.points)} entries)")
    V = np.array([[float(v)] if np.isscalar(v) else [float(c) for c in v] for v in rows])
    P = np.array([[float(c) for c in p] for p in K.points])

    def value(s, bary):
        return np.asarray(bary) @ V[list(s)]

    def derivative(s, bary, u):
        s = list(s)
        E = P[s[1:]] - P[s[0]]
        c, *_ = np.linalg.lstsq(E.T, np.asarray(u, float), rcond=None)
        grad = np.concatenate([[-c.sum()], c]) @ V[s]
        return np.broadcast_to(grad, np.shape(bary)[:-1] + grad.shape)

    return PDFunction(K, value, derivative, V.shape[1], f"table:{path}")


def cmd_secant(args) -> int:
    cf = _read(args.file)
    K = _complex(cf)
    if args.function:
        try:
            f = builtin_function(args.function, K)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from exc
    else:
        f = _table_function(K, args.table)
    G = _group(cf, K)
    try:
        res = refine_until_close(K, f, args.delta, G, max_rounds=args.max_rounds,
                                 samples_per_simplex=args.samples_per_simplex, seed=args.seed)
    except EqSmoothError as exc:
        _emit({"function": f.name, "delta": args.delta, "converged": False, "error": str(exc)}, args)
        return EXIT_FAIL
    rep = {"function": f.name, "delta": args.delta, "converged": True, "rounds": res.rounds,
           "history": res.history, "measured_min_thickness": min(h.get("min_thickness", 1.0) for h in res.history)}
    if args.output:
        _write_complex(ComplexFile.from_complex(res.complex), args.output)
        rep["output"] = args.output
    else:
        rep["complex"] = json.loads(serialize_complex(ComplexFile.from_complex(res.complex)))
    _emit(rep, args)
    return EXIT_OK


def _params(text: str | None) -> SmoothingParams:
    if not text:
        return SmoothingParams()
    try:
        eps2, lam = (float(Fraction(x)) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--params expects 'eps2,lambda', got {text!r}") from exc
    try:
        return SmoothingParams(eps1=2 * eps2, eps2=eps2, lam=lam)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _smooth_F(K: SimplicialComplex, args) -> dict:
    exact_center = tuple(sum(K.points[v][i] for v in K.vertices) / len(K.vertices) for i in range(K.ambient_dim))
    try:
        K.locate(exact_center)
    except PointOutsideComplex:
        pass
    else:
        raise UsageError("--map F projects radially from the vertex centroid, which lies in |K|; "
                         "use a complex that surrounds its centroid, such as a sphere")
    center = np.array([float(c) for c in exact_center])
    f = unit_sphere_map(K, center)
    Kt = relabel_to_points(barycentric_subdivision(K))
    ext = ConeExtension(f, Kt)
    worst_top = worst_zero = worst_cont = 0.0
    for s in Kt.facets:
        b = barycentric_samples(len(s) - 1, 32, seed=args.seed)
        fx, _, _ = ext.parts(s, b)
        worst_top = max(worst_top, float(np.abs(ext.evaluate(s, b, 1.0) - fx).max()))
        worst_zero = max(worst_zero, float(np.abs(ext.evaluate(s, b, 0.0)).max()))
        gap = ext.evaluate(s, b, 0.5 + 1e-12) - ext.evaluate(s, b, 0.5)
        worst_cont = max(worst_cont, float(np.abs(gap).max()))
    pieces, owners = cone_pieces(Kt, args.t_min)
    emb = check_embedding(cone_map(ext, owners), pieces, samples=args.samples, seed=args.seed)
    return {"map": "F", "subdivision_facets": len(Kt.facets), "top_deviation": worst_top,
            "apex_value": worst_zero, "half_jump": worst_cont, "min_denominator": ext.min_denominator,
            "t_min": args.t_min, "embedding": emb.to_dict(), "ok": emb.ok}


def _smooth_H(K: SimplicialComplex, args) -> dict:
    if args.vertex is None:
        raise UsageError("--map H needs --vertex")
    if (args.vertex,) not in K.simplices:
        raise UsageError(f"--vertex {args.vertex} is not a vertex of the complex")
    if K.dim < 2:
        raise UnsupportedDimension(f"--map H needs a complex of dimension >= 2, got {K.dim}")
    params = _params(args.params)
    cone = StarCone(K, args.vertex)
    cover = SymmetricProductCover.uniform(cone.base, args.cover_radius)
    phi0 = build_phi0(cone.base, cover)
    lk = link(K, (args.vertex,))
    tops = [s for s in lk.facets if len(s) == lk.dim + 1]
    rng = np.random.default_rng(args.seed)
    moved_outer = 0.0
    moved_any = 0.0
    per = max(1, args.samples // len(tops))
    pieces = []
    for s in tops:
        mu = rng.dirichlet(np.ones(len(s)), per)
        t = rng.uniform(1.0 / 10, 1.0, per)
        y = cone.point(s, t, mu)
        moved_outer = max(moved_outer, float(np.abs(eval_H(cone, s, y, phi0, params) - y).max()))
        t = rng.uniform(2 * params.eps2, 1.0 / 10, per)
        y = cone.point(s, t, mu)
        moved_any = max(moved_any, float(np.abs(eval_H(cone, s, y, phi0, params) - y).max()))
        # the frustum between t = 2 eps2 and t = 1/10 over s, as cone simplices
        lo, hi = 3 * params.eps2, 1.0 / 10
        ends = [(cone.point(s, np.array([lo]), np.eye(len(s))[k:k + 1])[0],
                 cone.point(s, np.array([hi]), np.eye(len(s))[k:k + 1])[0]) for k in range(len(s))]
        for i in range(len(s)):
            pieces.append((s, np.vstack([[e[0] for e in ends[: i + 1]], [e[1] for e in ends[i:]]])))
    emb = check_embedding(lambda i, Y: eval_H(cone, pieces[i][0], Y, phi0, params),
                          [p for _, p in pieces], samples=args.samples, seed=args.seed)
    return {"map": "H", "vertex": args.vertex, "params": {"eps1": params.eps1, "eps2": params.eps2,
                                                          "lambda": params.lam},
            "phi0_radius": phi0.radius, "moved_beyond_cutoff": moved_outer, "max_displacement": moved_any,
            "identity_outside_cutoff": moved_outer == 0.0, "embedding": emb.to_dict(),
            "ok": emb.ok and moved_outer == 0.0}


def cmd_smooth_eval(args) -> int:
    K = _complex(_read(args.file))
    rep = _smooth_F(K, args) if args.map == "F" else _smooth_H(K, args)
    _emit(rep, args)
    return EXIT_OK if rep["ok"] else EXIT_FAIL


def cmd_export_off(args) -> int:
    K = _complex(_read(args.file))
    data = export_off(K, args.precision, args.project)
    if args.output in (None, "-"):
        sys.stdout.buffer.write(data)
    else:
        with open(args.output, "wb") as fh:
            fh.write(data)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all sampling (default 0)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for parallel checks")
    common.add_argument("--tolerance-report", action="store_true", help="list the tolerances used in the report")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="eqsmooth", description="Exact simplicial complexes, group actions and smoothing maps.",
                parents=[common])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.add_argument("file", help="ComplexFile JSON, or - for stdin")
        sp.set_defaults(func=fn)
        return sp

    add("validate", cmd_validate, "validate a complex and its optional group / PL maps")
    sp = add("subdivide", cmd_subdivide, "barycentric or edgewise subdivision")
    sp.add_argument("--scheme", choices=["barycentric", "edgewise"], default="barycentric")
    sp.add_argument("--degree", type=int, default=2)
    sp.add_argument("--rounds", type=int, default=1)
    sp.add_argument("-o", "--output")
    sp = add("triangulate-equivariant", cmd_triangulate, "triangulation on which the PL maps act simplicially")
    sp.add_argument("-o", "--output")
    sp = add("check-manifold", cmd_check_manifold, "vertex-link manifold check")
    sp.add_argument("--dim", type=int, required=True)
    add("homology", cmd_homology, "integral simplicial homology")
    sp = add("secant", cmd_secant, "refine until the secant map is C1 delta-close")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--function", help=f"builtin: {', '.join(sorted(BUILTIN_FUNCTIONS))}")
    src.add_argument("--table", help="JSON list of per-vertex values")
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--max-rounds", type=int, default=8)
    sp.add_argument("--samples-per-simplex", type=int, default=64)
    sp.add_argument("-o", "--output")
    sp = add("smooth-eval", cmd_smooth_eval, "evaluate F or H and check that it embeds")
    sp.add_argument("--map", choices=["F", "H"], required=True)
    sp.add_argument("--vertex", type=int)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--params", help="eps2,lambda for H (default 1/200,1/25)")
    sp.add_argument("--t-min", type=float, default=0.05, help="lower cone parameter for F's embedding check")
    sp.add_argument("--cover-radius", type=float, default=0.05, help="S-radius of the cover used for phi0")
    sp = add("export-off", cmd_export_off, "write triangles as OFF")
    sp.add_argument("--precision", type=int, default=6)
    sp.add_argument("--project", action="store_true", help="keep the first 3 coordinates of higher-dim input")
    sp.add_argument("-o", "--output")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("eqsmooth: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ParseError, UnsupportedDimension) as exc:
        print(f"eqsmooth: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EqSmoothError as exc:
        print(f"eqsmooth: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
