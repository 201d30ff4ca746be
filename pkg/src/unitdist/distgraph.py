"""Unit-distance graphs, distance spectra and the ceiling report.

Two counting modes:

* exact -- rational points under a polytope norm; a pair is a unit
  pair exactly when ``max_i |o_i . (p - q)| / t_i == 1``;
* float -- any norm; a pair is a unit pair when the norm of the
  difference is within ``tol`` of 1.
"""

from __future__ import annotations

import csv
import io
import math
from math import lcm
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, DomainError, ModeMismatch
from .norms import DEFAULT_TOL, Norm, PolytopeNorm
from .qlinalg import format_rational, sign_canonical, to_rational

EXACT = "exact"
FLOAT = "float"


@dataclass(frozen=True)
class PointSet:
    """Distinct points of R^d, either all rational or all floating point."""

    d: int
    mode: str
    points: tuple

    def __post_init__(self):
        if self.mode not in (EXACT, FLOAT):
            raise DomainError(f"unknown mode {self.mode!r}")
        pts = []
        for p in self.points:
            if len(p) != self.d:
                raise DimensionMismatch(f"point {list(p)} is not {self.d}-dimensional")
            if self.mode == EXACT:
                pts.append(tuple(to_rational(x) for x in p))
            else:
                pts.append(tuple(float(x) for x in p))
        if self.mode == EXACT and len(set(pts)) != len(pts):
            raise DomainError("point set contains repeated points")
        object.__setattr__(self, "points", tuple(pts))

    @classmethod
    def exact(cls, points) -> "PointSet":
        points = list(points)
        return cls(len(points[0]), EXACT, tuple(points))

    @classmethod
    def floating(cls, points) -> "PointSet":
        points = np.asarray(points, dtype=float)
        return cls(points.shape[1], FLOAT, tuple(map(tuple, points)))

    def __len__(self) -> int:
        return len(self.points)

    def array(self) -> np.ndarray:
        return np.array([[float(x) for x in p] for p in self.points], dtype=float).reshape(-1, self.d)

    def as_float(self) -> "PointSet":
        return self if self.mode == FLOAT else PointSet(self.d, FLOAT, tuple(map(tuple, self.array())))

    def to_json(self) -> dict:
        if self.mode == EXACT:
            pts = [[format_rational(x) for x in p] for p in self.points]
        else:
            pts = [list(p) for p in self.points]
        return {"d": self.d, "mode": self.mode, "points": pts}

    @classmethod
    def from_json(cls, data: dict) -> "PointSet":
        try:
            pts = data["points"] if "points" in data else data["vectors"]
            mode = data.get("mode", EXACT)
            d = data.get("d", len(pts[0]) if pts else 0)
            return cls(int(d), mode, tuple(tuple(p) for p in pts))
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed point set: {exc}") from exc


def _check_dims(norm: Norm, ps: PointSet):
    if norm.d != ps.d:
        raise DimensionMismatch(f"{ps.d}-dimensional points under a {norm.d}-dimensional norm")


@dataclass
class UnitDistanceGraph:
    """Edges ``(i, j)`` with ``i < j`` at unit distance.

    ``directions[k]`` is the canonical direction of edge ``k`` (the
    difference vector, sign-normalised); ``classes`` maps each direction to
    the edges along it.  In float mode ``residuals[k]`` is
    ``| |p_j - p_i| - 1 |``.
    """

    n: int
    edges: list
    directions: list
    mode: str
    residuals: list = field(default_factory=list)

    @property
    def classes(self) -> dict:
        out: dict = defaultdict(list)
        for k, key in enumerate(self.directions):
            out[key].append(k)
        return dict(out)

    def __len__(self) -> int:
        return len(self.edges)

    def to_json(self) -> dict:
        dirs = []
        index = {}
        for key in self.directions:
            if key not in index:
                index[key] = len(dirs)
                dirs.append(key)
        if self.mode == EXACT:
            dirs_out = [[format_rational(x) for x in v] for v in dirs]
        else:
            dirs_out = [list(v) for v in dirs]
        out = {
            "n": self.n,
            "mode": self.mode,
            "edge_count": len(self.edges),
            "edges": [list(e) for e in self.edges],
            "edge_direction": [index[k] for k in self.directions],
            "directions": dirs_out,
        }
        if self.residuals:
            out["max_residual"] = max(self.residuals)
        return out


def _float_direction_key(v: np.ndarray) -> tuple:
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if len(nz) and v[nz[0]] < 0:
        v = -v
    return tuple(float(x) for x in np.round(v, 8) + 0.0)


def build_udg(norm: Norm, ps: PointSet, tol: float = DEFAULT_TOL) -> UnitDistanceGraph:
    """Unit-distance graph of ``ps`` under ``norm``.

    Exact point sets need a polytope norm.  In exact mode pairs are found
    by matching facet functionals: ``p, q`` can only be a unit pair if
    ``o_i . q == o_i . p + t_i`` for some facet ``i``, so each point needs
    one dictionary lookup per facet and the candidates are then checked
    against every facet.
    """
    _check_dims(norm, ps)
    if ps.mode == EXACT:
        if not isinstance(norm, PolytopeNorm):
            raise ModeMismatch("exact counting needs a polytope norm")
        return _exact_udg(norm, ps)
    return _float_udg(norm, ps, tol)


def _integer_facets(norm: PolytopeNorm, points) -> tuple[list[list[int]], list[int]]:
    """Facet functionals on a common integer scale.

    With ``L`` the common denominator of all coordinates and ``t_i = a/b``,
    ``F_i(p) = b * (o_i . L p)`` and ``T_i = L * a`` are integers, and
    ``|o_i . (q - p)| / t_i == |F_i(q) - F_i(p)| / T_i``.
    """
    L = lcm(*(x.denominator for p in points for x in p)) if points else 1
    P = [[x.numerator * (L // x.denominator) for x in p] for p in points]
    F, T = [], []
    for o, t in zip(norm.normals, norm.offsets):
        o = [int(c) for c in o]
        F.append([t.denominator * sum(a * b for a, b in zip(o, p)) for p in P])
        T.append(L * t.numerator)
    return F, T


# a float facet ratio this far below 1 is certainly below 1 exactly
_SCREEN = 1e-7


def exact_distances(norm: PolytopeNorm, ps: PointSet) -> dict:
    """``{(i, j): |p_j - p_i|}`` for all ``i < j``, as Fractions."""
    if ps.mode != EXACT:
        raise ModeMismatch("exact distances need an exact point set")
    F, T = _integer_facets(norm, ps.points)
    n = len(ps)
    out = {}
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = max(Fraction(abs(f[j] - f[i]), t) for f, t in zip(F, T))
    return out


def _exact_udg(norm: PolytopeNorm, ps: PointSet) -> UnitDistanceGraph:
    F, T = _integer_facets(norm, ps.points)
    candidates = set()
    for f, t in zip(F, T):
        where: dict[int, list[int]] = defaultdict(list)
        for i, v in enumerate(f):
            where[v].append(i)
        for i, v in enumerate(f):
            for j in where.get(v + t, ()):
                candidates.add((min(i, j), max(i, j)))
    if not candidates:
        return UnitDistanceGraph(len(ps), [], [], EXACT)
    cand = np.array(sorted(candidates), dtype=int)
    X = ps.array()
    ratios = np.abs((X[cand[:, 1]] - X[cand[:, 0]]) @ norm._O.T) / norm._t
    edges, dirs = [], []
    for (i, j), row in zip(cand.tolist(), ratios):
        if row.max() > 1 + _SCREEN:
            continue
        tight = np.flatnonzero(row > 1 - _SCREEN)
        if all(abs(F[k][j] - F[k][i]) <= T[k] for k in tight):
            edges.append((i, j))
            p, q = ps.points[i], ps.points[j]
            dirs.append(sign_canonical(tuple(b - a for a, b in zip(p, q))))
    return UnitDistanceGraph(len(ps), edges, dirs, EXACT)


def _float_udg(norm: Norm, ps: PointSet, tol: float) -> UnitDistanceGraph:
    P = ps.array()
    n = len(P)
    edges, dirs, res = [], [], []
    for i in range(n - 1):
        D = P[i + 1:] - P[i]
        r = np.abs(norm.many(D) - 1.0)
        for k in np.flatnonzero(r <= tol):
            j = i + 1 + int(k)
            edges.append((i, j))
            dirs.append(_float_direction_key(D[k]))
            res.append(float(r[k]))
    return UnitDistanceGraph(n, edges, dirs, FLOAT, res)


def count_unit_distances(norm: Norm, ps: PointSet, tol: float = DEFAULT_TOL) -> int:
    return len(build_udg(norm, ps, tol))


@dataclass
class DistanceSpectrum:
    """Sorted distinct distances with their multiplicities."""

    values: list
    multiplicities: list
    mode: str

    @property
    def distinct(self) -> int:
        return len(self.values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["distance", "multiplicity"])
        for v, m in zip(self.values, self.multiplicities):
            w.writerow([format_rational(v) if isinstance(v, Fraction) else repr(v), m])
        return buf.getvalue()

    def to_json(self) -> dict:
        vals = [format_rational(v) if isinstance(v, Fraction) else v for v in self.values]
        return {"mode": self.mode, "distinct": self.distinct, "values": vals, "multiplicities": self.multiplicities}


def distance_spectrum(norm: Norm, ps: PointSet, tol: float = DEFAULT_TOL) -> DistanceSpectrum:
    """All pairwise distances, grouped.

    Exact mode groups equal rationals.  Float mode sorts the distances and
    starts a new group wherever two neighbours differ by more than ``tol``;
    each group is reported by its mean.
    """
    _check_dims(norm, ps)
    n = len(ps)
    if ps.mode == EXACT:
        if not isinstance(norm, PolytopeNorm):
            raise ModeMismatch("exact distances need a polytope norm")
        counts = Counter(exact_distances(norm, ps).values())
        keys = sorted(counts)
        return DistanceSpectrum(keys, [counts[k] for k in keys], EXACT)
    P = ps.array()
    dist = np.concatenate([norm.many(P[i + 1:] - P[i]) for i in range(n - 1)]) if n > 1 else np.empty(0)
    dist.sort()
    values, mults = [], []
    if len(dist):
        cuts = np.flatnonzero(np.diff(dist) > tol) + 1
        for group in np.split(dist, cuts):
            values.append(float(group.mean()))
            mults.append(int(len(group)))
    return DistanceSpectrum(values, mults, FLOAT)


def n_log2_n(n: int) -> float:
    return n * math.log2(n) if n > 1 else 0.0


def within_half_nlogn(edges: int, n: int, factor: int = 1) -> bool:
    """Exact test of ``edges <= factor/2 * n log2 n`` via ``4^edges <= n^(factor n)``."""
    if n <= 1:
        return edges == 0
    return 4**edges <= n ** (factor * n)


@dataclass
class CeilingReport:
    n: int
    d: int
    unit_edges: int
    unit_ceiling: float
    unit_ok: bool
    distinct: int | None = None
    distinct_floor: int | None = None
    distinct_reference: float | None = None
    distinct_ok: bool | None = None

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def check_ceilings(d: int, n: int, unit_edges: int, distinct: int | None = None) -> CeilingReport:
    """Compare counts with ``(d/2) n log2 n`` and the ``n - 1`` floor.

    The unit test is exact: ``e <= (d/2) n log2 n`` is checked as
    ``4^e <= n^(d n)``.  The distinct-distance line ``n - d n^(3/4)`` is
    reported for reference only.
    """
    report = CeilingReport(
        n=n,
        d=d,
        unit_edges=unit_edges,
        unit_ceiling=d / 2 * n_log2_n(n),
        unit_ok=within_half_nlogn(unit_edges, n, d),
    )
    if distinct is not None:
        report.distinct = distinct
        report.distinct_floor = n - 1
        report.distinct_reference = n - d * n**0.75
        report.distinct_ok = distinct >= n - 1
    return report


def render_svg(ps: PointSet, graph: UnitDistanceGraph | None = None, size: int = 400) -> str:
    """Standalone SVG of a planar point set and its unit edges."""
    if ps.d != 2:
        raise DimensionMismatch("plots are 2-dimensional")
    P = ps.array()
    lo = P.min(axis=0) if len(P) else np.zeros(2)
    hi = P.max(axis=0) if len(P) else np.ones(2)
    span = float(max(hi - lo)) or 1.0
    pad = 20
    s = (size - 2 * pad) / span

    def xy(p):
        return pad + (p[0] - lo[0]) * s, size - pad - (p[1] - lo[1]) * s

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size} {size}" width="{size}" height="{size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    if graph is not None:
        for i, j in graph.edges:
            (x1, y1), (x2, y2) = xy(P[i]), xy(P[j])
            lines.append(f'<line x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" y2="{y2:.3f}" stroke="#1f77b4" stroke-width="1"/>')
    for p in P:
        x, y = xy(p)
        lines.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="2.5" fill="black"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def edge_directions(graph: UnitDistanceGraph) -> list:
    """Distinct edge directions of an exact graph, in first-seen order."""
    return list(dict.fromkeys(graph.directions))


def point_set(points: Sequence) -> PointSet:
    """Exact point set when every coordinate is rational, float otherwise."""
    pts = [tuple(p) for p in points]
    if all(isinstance(x, (int, Fraction, str)) and not isinstance(x, bool) for p in pts for x in p):
        return PointSet.exact(pts)
    return PointSet.floating(pts)
