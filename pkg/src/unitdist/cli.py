"""Command-line entry point.

Every subcommand reads JSON inputs, calls into the library and writes a
deterministic JSON (or CSV / SVG) report to ``--out`` or stdout.  Exit
status is 0 on success, 1 on a domain error (error JSON on stderr) and 2
on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .constructions import bipartite_construction, compose_base3, hypercube_embedding, run_trials, triangle_power
from .deplab import (
    entropy_check,
    forest_bound_certify,
    matroid_partition,
    odd_distance_coloring,
    span_audit,
    ungar_directions,
)
from .distgraph import EXACT, PointSet, build_udg, check_ceilings, distance_spectrum, render_svg
from .errors import DomainError, ModeMismatch
from .genericity import (
    DependencyScheme,
    family_for_schemes,
    height_bounded_schemes,
    sample_generic_polytope,
)
from .norms import (
    DEFAULT_TOL,
    PolytopeNorm,
    approximate_polytope,
    epsilon_net_indices,
    facet_diameters,
    hausdorff_distance,
    norm_from_json,
    norm_to_json,
)
from .qlinalg import to_rational

SCHEMA_VERSION = "1"


class UsageError(Exception):
    pass


def _read_json(path):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise DomainError(f"malformed JSON in {path}: {exc}") from exc


def _check_paths(args):
    for name in ("norm", "points", "vectors", "input", "schemes", "other", "parts"):
        path = getattr(args, name, None)
        if isinstance(path, str) and not Path(path).is_file():
            raise UsageError(f"no such file: {path}")
    out = getattr(args, "out", None)
    if out and not Path(out).resolve().parent.is_dir():
        raise UsageError(f"output directory does not exist: {out}")


def _emit(args, payload):
    if isinstance(payload, (dict, list)):
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        text = payload
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _exact_flag(args):
    if getattr(args, "exact", False):
        return True
    if getattr(args, "float", False):
        return False
    return None


def _load_points(args, norm=None) -> PointSet:
    ps = PointSet.from_json(_read_json(args.points))
    exact = _exact_flag(args)
    if exact and ps.mode != EXACT:
        raise ModeMismatch("--exact given but the point set holds floating-point coordinates")
    if exact and norm is not None and not isinstance(norm, PolytopeNorm):
        raise ModeMismatch("--exact needs a polytope norm")
    if exact is False or (norm is not None and not isinstance(norm, PolytopeNorm)):
        ps = ps.as_float()
    return ps


def _vectors(path):
    data = _read_json(path)
    return data["vectors"] if isinstance(data, dict) else data


# ----------------------------------------------------------------------
# subcommands


def cmd_construct(args):
    norm = norm_from_json(_read_json(args.norm))
    exact = _exact_flag(args)
    if args.kind == "hypercube":
        builder, kw = hypercube_embedding, {"norm": norm, "k": args.k, "exact": exact, "tol": args.tol}
    elif args.kind == "trianglepower":
        builder, kw = triangle_power, {"norm": norm, "k": args.k, "tol": args.tol}
    elif args.kind == "base3":
        builder, kw = compose_base3, {"norm": norm, "n": args.n, "tol": args.tol}
    else:
        builder, kw = bipartite_construction, {"norm": norm, "d": norm.d, "k": args.k, "m": args.m,
                                               "exact": exact, "tol": args.tol}
    if args.trials > 1:
        results = run_trials(builder, range(args.seed, args.seed + args.trials), jobs=args.jobs, **kw)
        return {"trials": [r.to_json() for r in results]}
    return builder(seed=args.seed, **kw).to_json()


def cmd_count(args):
    norm = norm_from_json(_read_json(args.norm))
    ps = _load_points(args, norm)
    if args.what == "unit":
        g = build_udg(norm, ps, args.tol)
        out = g.to_json()
        out["direction_classes"] = len(g.classes)
        out["ceiling"] = check_ceilings(ps.d, len(ps), len(g)).to_json()
        return out
    spectrum = distance_spectrum(norm, ps, args.tol)
    if args.format == "csv":
        return spectrum.to_csv()
    out = spectrum.to_json()
    out["ceiling"] = check_ceilings(ps.d, len(ps), 0, spectrum.distinct).to_json()
    return out


def cmd_audit(args):
    if args.what == "entropy":
        parts = _read_json(args.parts)
        parts = parts["parts"] if isinstance(parts, dict) else parts
        return entropy_check([int(x) for x in parts]).to_json()
    if args.what == "ungar":
        ps = PointSet.from_json(_read_json(args.points))
        return ungar_directions(ps.points).to_json()
    if args.what == "forest":
        data = _read_json(args.input)
        return forest_bound_certify(data["points"], data["vectors"], [tuple(e) for e in data["edges"]]).to_json()
    vectors = _vectors(args.vectors)
    return span_audit(vectors, args.d, args.m).to_json()


def cmd_partition(args):
    return matroid_partition(_vectors(args.vectors), args.d, args.m).to_json()


def cmd_color(args):
    norm = norm_from_json(_read_json(args.norm))
    if not isinstance(norm, PolytopeNorm):
        raise ModeMismatch("odd-distance colouring needs a polytope norm")
    ps = PointSet.from_json(_read_json(args.points))
    if ps.mode != EXACT:
        raise ModeMismatch("odd-distance colouring needs exact points")
    return odd_distance_coloring(norm, ps).to_json()


def cmd_approx(args):
    norm = norm_from_json(_read_json(args.norm))
    approx = approximate_polytope(norm, args.mu)
    return {
        "norm": norm_to_json(approx),
        "mu": args.mu,
        "facets": approx.h,
        "max_facet_diameter": max(facet_diameters(approx)),
        "hausdorff": hausdorff_distance(norm, approx),
    }


def cmd_generic(args):
    base = norm_from_json(_read_json(args.norm))
    if not isinstance(base, PolytopeNorm):
        raise ModeMismatch("genericity needs a polytope base norm")
    if args.schemes:
        data = _read_json(args.schemes)
        data = data["schemes"] if isinstance(data, dict) else data
        schemes = [DependencyScheme.from_json(s) for s in data]
    else:
        schemes = height_bounded_schemes(base.d, max_height=args.max_height, max_l=args.max_l)
    family = family_for_schemes(schemes, base.normals)
    if args.action == "family":
        out = family.to_json(limit=args.limit)
        out["schemes"] = len(schemes)
        return out
    return sample_generic_polytope(base, family, to_rational(args.eps), seed=args.seed).to_json()


def cmd_hausdorff(args):
    a = norm_from_json(_read_json(args.norm))
    b = norm_from_json(_read_json(args.other))
    return {"hausdorff": hausdorff_distance(a, b)}


def cmd_net(args):
    ps = PointSet.from_json(_read_json(args.points)).as_float()
    idx = epsilon_net_indices(ps.array(), args.eps)
    return {"eps": args.eps, "indices": idx}


def cmd_plot(args):
    norm = norm_from_json(_read_json(args.norm))
    ps = _load_points(args, norm)
    if ps.d != 2:
        raise DomainError("plot draws planar point sets only")
    return render_svg(ps, build_udg(norm, ps, args.tol))


# ----------------------------------------------------------------------
# parser


def _common(p, exact=True):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--out")
    if exact:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--exact", action="store_true", help="rational arithmetic throughout")
        g.add_argument("--float", action="store_true", help="floating point with tolerance --tol")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="unitdist", description="Unit and distinct distances under general norms.")
    ap.add_argument("--version", action="version", version=f"unitdist {__version__} (schema {SCHEMA_VERSION})")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build a point set with many unit distances")
    p.add_argument("kind", choices=["hypercube", "trianglepower", "base3", "bipartite"])
    p.add_argument("--norm", required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--n", type=int, default=9)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    _common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("count", help="unit-distance graph or distance spectrum")
    p.add_argument("what", choices=["unit", "distinct"])
    p.add_argument("--norm", required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    _common(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("audit", help="span, forest, Ungar and entropy checks")
    p.add_argument("what", choices=["span", "forest", "ungar", "entropy"])
    p.add_argument("--vectors")
    p.add_argument("--points")
    p.add_argument("--input", help="forest instance: points, vectors, edges")
    p.add_argument("--parts", help="class sizes for the entropy check")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--m", type=int, default=0)
    _common(p, exact=False)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("partition", help="split vectors into independent classes")
    p.add_argument("--vectors", required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--m", type=int, default=0)
    _common(p, exact=False)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("color", help="colour the odd-distance graph")
    p.add_argument("what", choices=["odd"])
    p.add_argument("--norm", required=True)
    p.add_argument("--points", required=True)
    _common(p, exact=False)
    p.set_defaults(func=cmd_color)

    p = sub.add_parser("approx", help="polytope approximation of a norm")
    p.add_argument("--norm", required=True)
    p.add_argument("--mu", type=float, default=0.1)
    _common(p, exact=False)
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("generic", help="hyperplane families and generic offsets")
    p.add_argument("action", choices=["family", "sample"])
    p.add_argument("--norm", required=True)
    p.add_argument("--schemes")
    p.add_argument("--max-height", type=int, default=2)
    p.add_argument("--max-l", type=int, default=2)
    p.add_argument("--eps", default="1/100")
    p.add_argument("--limit", type=int, default=100)
    _common(p, exact=False)
    p.set_defaults(func=cmd_generic)

    p = sub.add_parser("hausdorff", help="Hausdorff distance between two unit balls")
    p.add_argument("--norm", required=True)
    p.add_argument("--other", required=True)
    _common(p, exact=False)
    p.set_defaults(func=cmd_hausdorff)

    p = sub.add_parser("net", help="greedy epsilon-net of a point set")
    p.add_argument("--points", required=True)
    p.add_argument("--eps", type=float, required=True)
    _common(p, exact=False)
    p.set_defaults(func=cmd_net)

    p = sub.add_parser("plot", help="SVG of a planar point set and its unit distances")
    p.add_argument("--norm", required=True)
    p.add_argument("--points", required=True)
    _common(p)
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _check_paths(args)
        _emit(args, args.func(args))
    except BrokenPipeError:
        return 0
    except UsageError as exc:
        print(f"unitdist: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(json.dumps(exc.to_json(), sort_keys=True), file=sys.stderr)
        return 1
    except (KeyError, TypeError, ValueError) as exc:
        print(json.dumps({"error": "invalid_input", "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return 1
    return 0


__all__ = ["build_parser", "main"]
