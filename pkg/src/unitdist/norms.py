"""Norms on R^d and the geometry of their unit balls.

Four kinds of norm are supported:

* :class:`PolytopeNorm` -- ``max_i |o_i . x| / t_i`` with rational data,
  evaluated exactly on rational input;
* :class:`EuclideanNorm` and :class:`LpNorm`;
* :class:`StrictifiedNorm` -- ``base(x) + epsilon * |x|_2``.

Smooth norms are evaluated in floating point.  The polytope helpers
(vertices, facets, distances) also work in floating point except where
noted.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence, Union

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.spatial import ConvexHull

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    DomainError,
    NotStrictlyConvex,
    PreconditionFailed,
    UnboundedNorm,
)
from .qlinalg import (
    format_rational,
    line_key,
    rank,
    to_rational,
)

DEFAULT_TOL = 1e-9
BOUNDARY_SAMPLES_2D = 4096
BOUNDARY_SAMPLES_3D = 8192
RATIONALIZE_DENOMINATOR = 10**8


@dataclass(frozen=True)
class PolytopeNorm:
    """Symmetric polytope norm ``max_i |o_i . x| / t_i``.

    Normals are stored as primitive integer vectors whose first nonzero
    coordinate is positive; each offset is rescaled with its normal, so
    the norm itself is unchanged.  Parallel facets collapse to the tighter
    one.
    """

    normals: tuple
    offsets: tuple

    def __post_init__(self):
        if len(self.normals) != len(self.offsets):
            raise ValueError("normals and offsets differ in length")
        if not self.normals:
            raise UnboundedNorm("a polytope norm needs at least one facet")
        d = len(self.normals[0])
        seen: dict[tuple, Fraction] = {}
        for o, t in zip(self.normals, self.offsets):
            o = tuple(to_rational(x) for x in o)
            t = to_rational(t)
            if len(o) != d:
                raise DimensionMismatch("facet normals have different dimensions")
            if t <= 0:
                raise DomainError(f"facet offset must be positive, got {t}")
            if all(x == 0 for x in o):
                raise DomainError("zero facet normal")
            key = line_key(o)
            # key = lam * o for some nonzero rational lam
            lam = next(Fraction(k) / x for k, x in zip(key, o) if x != 0)
            t = t * abs(lam)
            if key not in seen or t < seen[key]:
                seen[key] = t
        normals = tuple(seen)
        if rank(normals) < d:
            raise UnboundedNorm("facet normals do not span the space")
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", tuple(seen.values()))

    @property
    def d(self) -> int:
        return len(self.normals[0])

    @property
    def h(self) -> int:
        return len(self.normals)

    @cached_property
    def _O(self) -> np.ndarray:
        return np.array(self.normals, dtype=float)

    @cached_property
    def _t(self) -> np.ndarray:
        return np.array([float(t) for t in self.offsets])

    def exact(self, x: Sequence) -> Fraction:
        x = tuple(to_rational(v) for v in x)
        if len(x) != self.d:
            raise DimensionMismatch(f"point of dimension {len(x)} for a {self.d}-norm")
        return max(
            abs(sum((a * b for a, b in zip(o, x)), Fraction(0))) / t
            for o, t in zip(self.normals, self.offsets)
        )

    def many(self, X: np.ndarray) -> np.ndarray:
        return np.max(np.abs(X @ self._O.T) / self._t, axis=-1)


@dataclass(frozen=True)
class EuclideanNorm:
    d: int

    def many(self, X: np.ndarray) -> np.ndarray:
        return np.linalg.norm(X, axis=-1)


@dataclass(frozen=True)
class LpNorm:
    d: int
    p: float

    def __post_init__(self):
        if not self.p > 1:
            raise DomainError(f"lp norm needs p > 1, got {self.p}")

    def many(self, X: np.ndarray) -> np.ndarray:
        return np.sum(np.abs(X) ** self.p, axis=-1) ** (1.0 / self.p)


@dataclass(frozen=True)
class StrictifiedNorm:
    """``base(x) + epsilon * |x|_2``; strictly convex for any epsilon > 0."""

    base: "Norm"
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError("strictification needs epsilon > 0")

    @property
    def d(self) -> int:
        return self.base.d

    def many(self, X: np.ndarray) -> np.ndarray:
        return self.base.many(X) + self.epsilon * np.linalg.norm(X, axis=-1)


Norm = Union[PolytopeNorm, EuclideanNorm, LpNorm, StrictifiedNorm]


def is_strictly_convex(norm: Norm) -> bool:
    return not isinstance(norm, PolytopeNorm)


def _is_exact(x) -> bool:
    return not isinstance(x, np.ndarray) and all(
        isinstance(v, (Fraction, int)) and not isinstance(v, bool) for v in x
    )


def eval_norm(norm: Norm, x):
    """Norm of ``x``.

    Exact (a Fraction) when ``norm`` is a polytope norm and ``x`` is a
    sequence of ints or Fractions; a float otherwise.
    """
    if len(x) != norm.d:
        raise DimensionMismatch(f"point of dimension {len(x)} for a {norm.d}-norm")
    if isinstance(norm, PolytopeNorm) and _is_exact(x):
        return norm.exact(x)
    return float(norm.many(np.asarray(x, dtype=float)[None, :])[0])


def boundary_point(norm: Norm, x):
    """Radial projection ``x / |x|`` onto the unit sphere of ``norm``."""
    v = eval_norm(norm, x)
    if v == 0:
        raise DomainError("the zero vector has no boundary point")
    if isinstance(v, Fraction):
        return tuple(to_rational(c) / v for c in x)
    return np.asarray(x, dtype=float) / v


# ----------------------------------------------------------------------
# construction helpers


def cube_norm(d: int) -> PolytopeNorm:
    """The max norm on R^d."""
    eye = [tuple(int(i == j) for j in range(d)) for i in range(d)]
    return PolytopeNorm(tuple(eye), (1,) * d)


def scaled(norm: PolytopeNorm, factor) -> PolytopeNorm:
    """Polytope whose unit ball is ``factor`` times that of ``norm``."""
    factor = to_rational(factor)
    return PolytopeNorm(norm.normals, tuple(t * factor for t in norm.offsets))


def random_polytope_norm(d: int, h: int, rng: random.Random, entry_bound: int = 4) -> PolytopeNorm:
    """Polytope norm with ``h`` random small integer facet normals."""
    if h < d:
        raise UnboundedNorm("fewer facets than dimensions")
    while True:
        keys: dict[tuple, None] = {}
        while len(keys) < h:
            o = tuple(rng.randint(-entry_bound, entry_bound) for _ in range(d))
            if any(o):
                keys.setdefault(line_key(o))
        normals = tuple(keys)
        if rank(normals) < d:
            continue
        offsets = []
        for _ in range(h):
            den = rng.randint(2, 12)
            offsets.append(Fraction(rng.randint(den, 2 * den), den))
        return PolytopeNorm(normals, tuple(offsets))


def random_round_polytope_norm(d: int, rng: random.Random, entry_bound: int | None = None,
                               spread: float = 0.05) -> PolytopeNorm:
    """Near-round polytope: one facet for every primitive integer direction
    with entries up to ``entry_bound``, at a random distance in
    ``[1, 1 + spread]`` from the origin.

    Facets are small, so random unit vectors rarely share one.
    """
    if entry_bound is None:
        entry_bound = 5 if d == 2 else 2
    box = range(-entry_bound, entry_bound + 1)
    keys = sorted({line_key(o) for o in itertools.product(box, repeat=d) if any(o)})
    offsets = []
    for o in keys:
        r = 1 + spread * rng.random()
        offsets.append(Fraction(math.sqrt(sum(c * c for c in o)) * r).limit_denominator(1000))
    return PolytopeNorm(tuple(keys), tuple(offsets))


def random_direction(d: int, rng: random.Random) -> np.ndarray:
    while True:
        v = np.array([rng.gauss(0.0, 1.0) for _ in range(d)])
        n = np.linalg.norm(v)
        if n > 1e-6:
            return v / n


def random_unit_vector(norm: Norm, rng: random.Random, exact: bool = False, bound: int = 1000):
    """Random point on the unit sphere of ``norm``.

    In exact mode (polytope norms only) the result is rational: a random
    integer vector with entries in ``[-bound, bound]`` divided by its norm.
    """
    if exact:
        if not isinstance(norm, PolytopeNorm):
            raise DomainError("exact unit vectors need a polytope norm")
        while True:
            v = tuple(rng.randint(-bound, bound) for _ in range(norm.d))
            if any(v):
                return boundary_point(norm, v)
    return boundary_point(norm, random_direction(norm.d, rng))


# ----------------------------------------------------------------------
# boundary samples and nets


@dataclass(frozen=True)
class BoundarySample:
    points: np.ndarray
    tolerance: float = DEFAULT_TOL


def sphere_directions(d: int, count: int | None = None) -> np.ndarray:
    """Deterministic, evenly spread unit directions in R^2 or R^3."""
    if d == 2:
        count = count or BOUNDARY_SAMPLES_2D
        theta = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if d == 3:
        # Fibonacci lattice on the sphere
        count = count or BOUNDARY_SAMPLES_3D
        i = np.arange(count) + 0.5
        z = 1 - 2 * i / count
        r = np.sqrt(1 - z * z)
        phi = np.pi * (1 + 5**0.5) * i
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    raise DimensionMismatch(f"boundary sampling is implemented for d in (2, 3), not {d}")


def sample_boundary(norm: Norm, count: int | None = None, tol: float = DEFAULT_TOL) -> BoundarySample:
    dirs = sphere_directions(norm.d, count)
    pts = dirs / norm.many(dirs)[:, None]
    if np.max(np.abs(norm.many(pts) - 1)) > tol:
        raise ConvergenceFailure("boundary sample drifted off the unit sphere")
    return BoundarySample(pts, tol)


def epsilon_net_indices(points, eps: float) -> list[int]:
    """Greedy net in input order: keep a point unless it is within ``eps``
    of one already kept."""
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    chosen: list[int] = []
    kept = np.empty((0, P.shape[1]))
    for i, p in enumerate(P):
        if kept.shape[0] == 0 or np.min(np.linalg.norm(kept - p, axis=1)) > eps:
            chosen.append(i)
            kept = np.vstack([kept, p])
    radius = float(np.max(np.linalg.norm(P, axis=1))) if len(P) else 0.0
    bound = (2 * radius / eps + 1) ** P.shape[1]
    if len(chosen) > bound:
        raise ConvergenceFailure("net exceeds the packing bound")
    return chosen


def epsilon_net(points, eps: float) -> np.ndarray:
    """``eps``-separated subset that is ``eps``-covering.

    >>> epsilon_net([[0.0], [1.0], [2.0]], 1.0).ravel().tolist()
    [0.0, 2.0]
    """
    if eps <= 0:
        raise DomainError("net radius must be positive")
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    return P[epsilon_net_indices(P, eps)]


# ----------------------------------------------------------------------
# convex hulls


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points) -> list:
    """Counter-clockwise hull vertices, collinear points dropped.

    Exact when the coordinates are Fractions.
    """
    pts = sorted(set(map(tuple, points)))
    if len(pts) <= 2:
        return pts
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


# ----------------------------------------------------------------------
# polytope geometry


@dataclass
class PolytopeGeometry:
    """Vertices and facets of a polytope unit ball, in floating point.

    ``facets`` holds ``(unit_normal, offset, vertex_indices)``; in 3D the
    vertex indices go around the facet.
    """

    vertices: np.ndarray
    facets: list = field(default_factory=list)
    exact_vertices: list | None = None

    @cached_property
    def edges(self) -> np.ndarray:
        pairs = set()
        for _, _, idx in self.facets:
            if len(idx) == 2:
                pairs.add(tuple(sorted(idx)))
            else:
                for a, b in zip(idx, idx[1:] + idx[:1]):
                    pairs.add((min(a, b), max(a, b)))
        return np.array(sorted(pairs), dtype=int).reshape(-1, 2)


_GEOMETRY_CACHE: dict = {}


def polytope_geometry(norm: PolytopeNorm) -> PolytopeGeometry:
    """Vertices and facets of the unit ball, via the hull of the polar.

    The polar body is the hull of ``+-o_i / t_i``: its vertices are the
    irredundant facets and its facets are the vertices of the ball.
    """
    geom = _GEOMETRY_CACHE.get(norm)
    if geom is None:
        geom = _geometry_2d(norm) if norm.d == 2 else _geometry_nd(norm)
        if len(_GEOMETRY_CACHE) > 256:
            _GEOMETRY_CACHE.clear()
        _GEOMETRY_CACHE[norm] = geom
    return geom


def _geometry_2d(norm: PolytopeNorm) -> PolytopeGeometry:
    dual = []
    for o, t in zip(norm.normals, norm.offsets):
        p = (Fraction(o[0]) / t, Fraction(o[1]) / t)
        dual += [p, (-p[0], -p[1])]
    hull = convex_hull_2d(dual)
    k = len(hull)
    exact = []
    for i in range(k):
        (a1, a2), (b1, b2) = hull[i], hull[(i + 1) % k]
        det = a1 * b2 - a2 * b1
        exact.append(((b2 - a2) / det, (a1 - b1) / det))
    vertices = np.array([[float(x), float(y)] for x, y in exact])
    facets = []
    for i in range(k):
        a = np.array([float(c) for c in hull[i]])
        n = np.linalg.norm(a)
        facets.append((a / n, 1.0 / n, [(i - 1) % k, i]))
    return PolytopeGeometry(vertices, facets, exact)


def _geometry_nd(norm: PolytopeNorm) -> PolytopeGeometry:
    d = norm.d
    D = norm._O / norm._t[:, None]
    D = np.vstack([D, -D])
    hull = ConvexHull(D)
    verts: list[np.ndarray] = []
    keymap: dict[tuple, int] = {}
    per_dual: dict[int, set] = {}
    for simplex, eq in zip(hull.simplices, hull.equations):
        v = eq[:d] / -eq[d]
        key = tuple(np.round(v, 9))
        if key not in keymap:
            keymap[key] = len(verts)
            verts.append(v)
        for s in simplex:
            per_dual.setdefault(int(s), set()).add(keymap[key])
    vertices = np.array(verts)
    facets = []
    for s in sorted(per_dual):
        a = D[s]
        n = np.linalg.norm(a)
        idx = sorted(per_dual[s])
        if d == 3 and len(idx) > 2:
            idx = _cyclic_order(vertices[idx], a / n, idx)
        facets.append((a / n, 1.0 / n, idx))
    return PolytopeGeometry(vertices, facets)


def _cyclic_order(pts: np.ndarray, normal: np.ndarray, idx: list[int]) -> list[int]:
    c = pts.mean(axis=0)
    e1 = pts[0] - c
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    ang = np.arctan2((pts - c) @ e2, (pts - c) @ e1)
    return [idx[i] for i in np.argsort(ang)]


def unit_ball_vertices(norm: PolytopeNorm) -> np.ndarray:
    return polytope_geometry(norm).vertices


def euclidean_radius(norm: Norm) -> float:
    """Largest Euclidean length of a vector in the unit ball."""
    if isinstance(norm, PolytopeNorm):
        geom = polytope_geometry(norm)
        if geom.exact_vertices is not None:
            return math.sqrt(max(x * x + y * y for x, y in geom.exact_vertices))
        return float(np.max(np.linalg.norm(geom.vertices, axis=1)))
    if isinstance(norm, EuclideanNorm):
        return 1.0
    return float(np.max(np.linalg.norm(sample_boundary(norm).points, axis=1)))


def facet_diameters(norm: PolytopeNorm) -> list[float]:
    geom = polytope_geometry(norm)
    out = []
    for _, _, idx in geom.facets:
        P = geom.vertices[idx]
        diffs = P[:, None, :] - P[None, :, :]
        out.append(float(np.max(np.linalg.norm(diffs, axis=-1))))
    return out


def strictify(base: PolytopeNorm, mu: float) -> StrictifiedNorm:
    """Strictly convex norm whose unit ball is within ``mu`` of ``base``'s.

    With ``c`` the Euclidean radius of the base ball, ``epsilon = mu / c^2``.
    """
    if not mu > 0:
        raise DomainError("mu must be positive")
    c = euclidean_radius(base)
    return StrictifiedNorm(base, mu / c**2)


# ----------------------------------------------------------------------
# distances to convex bodies


def _segment_distances(X: np.ndarray, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Distances from each row of X to each segment [A_j, B_j]; shape (N, E)."""
    AB = B - A
    L2 = np.einsum("ij,ij->i", AB, AB)
    L2 = np.where(L2 == 0, 1.0, L2)
    AX = X[:, None, :] - A[None, :, :]
    t = np.clip(np.einsum("nej,ej->ne", AX, AB) / L2, 0.0, 1.0)
    closest = A[None, :, :] + t[..., None] * AB[None, :, :]
    return np.linalg.norm(X[:, None, :] - closest, axis=-1)


def distances_to_polytope(norm: PolytopeNorm, X) -> np.ndarray:
    """Euclidean distance from each row of ``X`` to the unit ball."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    geom = polytope_geometry(norm)
    V = geom.vertices
    E = geom.edges
    best = np.min(_segment_distances(X, V[E[:, 0]], V[E[:, 1]]), axis=1)
    if norm.d == 3:
        for n, b, idx in geom.facets:
            gap = X @ n - b
            Y = X - gap[:, None] * n
            P = V[idx]
            inside = np.ones(len(X), dtype=bool)
            for a, c in zip(P, np.roll(P, -1, axis=0)):
                inside &= np.cross(c - a, Y - a) @ n >= -1e-12
            best = np.where(inside, np.minimum(best, np.abs(gap)), best)
    elif norm.d != 2:
        raise DimensionMismatch("polytope distances are implemented for d in (2, 3)")
    return np.where(norm.many(X) <= 1.0, 0.0, best)


def closest_point_on_polytope(norm: PolytopeNorm, x) -> np.ndarray:
    """Nearest point of the unit ball to ``x`` (``x`` itself if inside)."""
    x = np.asarray(x, dtype=float)
    if norm.many(x[None, :])[0] <= 1.0:
        return x
    geom = polytope_geometry(norm)
    V = geom.vertices
    best, best_d = None, math.inf
    for i, j in geom.edges:
        a, ab = V[i], V[j] - V[i]
        t = min(1.0, max(0.0, float((x - a) @ ab / (ab @ ab))))
        y = a + t * ab
        dist = np.linalg.norm(x - y)
        if dist < best_d:
            best, best_d = y, dist
    if norm.d == 3:
        for n, b, idx in geom.facets:
            y = x - (x @ n - b) * n
            P = V[idx]
            if all(np.cross(c - a, y - a) @ n >= -1e-12 for a, c in zip(P, np.roll(P, -1, axis=0))):
                dist = abs(x @ n - b)
                if dist < best_d:
                    best, best_d = y, dist
    return best


def _boundary_map(norm: Norm):
    """Parametrisation of the unit sphere by angles (1 in 2D, 2 in 3D)."""
    if norm.d == 2:
        def f(a):
            u = np.array([math.cos(a[0]), math.sin(a[0])])
            return u / norm.many(u[None, :])[0]
    else:
        def f(a):
            u = np.array([math.sin(a[0]) * math.cos(a[1]), math.sin(a[0]) * math.sin(a[1]), math.cos(a[0])])
            return u / norm.many(u[None, :])[0]
    return f


def _angles_of(P: np.ndarray) -> np.ndarray:
    if P.shape[1] == 2:
        return np.arctan2(P[:, 1], P[:, 0])[:, None]
    r = np.linalg.norm(P, axis=1)
    return np.column_stack([np.arccos(np.clip(P[:, 2] / r, -1, 1)), np.arctan2(P[:, 1], P[:, 0])])


def _refine(fun, start, d: int):
    """Local minimisation of ``fun`` over boundary angles near ``start``."""
    if d == 2:
        step = 2 * np.pi / BOUNDARY_SAMPLES_2D
        res = minimize_scalar(
            lambda a: fun(np.array([a])),
            bounds=(start[0] - 2 * step, start[0] + 2 * step),
            method="bounded",
            options={"xatol": 1e-13},
        )
        return float(res.fun)
    res = minimize(fun, start, method="Nelder-Mead", options={"xatol": 1e-11, "fatol": 1e-14})
    return float(res.fun)


def _distance_to_body(norm: Norm, X: np.ndarray) -> np.ndarray:
    if isinstance(norm, PolytopeNorm):
        return distances_to_polytope(norm, X)
    if isinstance(norm, EuclideanNorm):
        return np.maximum(np.linalg.norm(X, axis=1) - 1.0, 0.0)
    bpts = sample_boundary(norm).points
    f = _boundary_map(norm)
    angles = _angles_of(bpts)
    out = np.zeros(len(X))
    inside = norm.many(X) <= 1.0
    for i, x in enumerate(X):
        if inside[i]:
            continue
        j = int(np.argmin(np.linalg.norm(bpts - x, axis=1)))
        out[i] = _refine(lambda a: float(np.linalg.norm(f(a) - x)), angles[j], norm.d)
    return out


def _directed_hausdorff(A: Norm, B: Norm) -> float:
    """``sup_{a in ball(A)} dist(a, ball(B))``."""
    if isinstance(A, PolytopeNorm):
        return float(np.max(_distance_to_body(B, polytope_geometry(A).vertices)))
    bpts = sample_boundary(A).points
    dist = _distance_to_body(B, bpts)
    if np.max(dist) == 0.0:
        return 0.0
    f = _boundary_map(A)
    angles = _angles_of(bpts)
    best = float(np.max(dist))
    for j in np.argsort(dist)[-4:]:
        val = -_refine(lambda a: -float(_distance_to_body(B, f(a)[None, :])[0]), angles[j], A.d)
        best = max(best, val)
    return best


def hausdorff_distance(A: Norm, B: Norm) -> float:
    """Euclidean Hausdorff distance between two unit balls.

    Exact up to rounding when both are polytopes (the supremum sits at a
    vertex); sampled and locally refined when a smooth ball is involved.
    """
    if A.d != B.d:
        raise DimensionMismatch("unit balls live in different dimensions")
    if A.d not in (2, 3):
        raise DimensionMismatch("Hausdorff distance is implemented for d in (2, 3)")
    return max(_directed_hausdorff(A, B), _directed_hausdorff(B, A))


def boundary_witness(P: PolytopeNorm, Q: PolytopeNorm, x, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Point of the sphere of ``Q`` within ``hausdorff_distance(P, Q)`` of ``x``.

    ``x`` must lie on the sphere of ``P``.  Three cases: ``x`` already on
    the sphere of ``Q``; ``x`` outside ``Q`` (take the nearest point of
    ``Q``); ``x`` inside ``Q`` (walk along the outer normal of a facet of
    ``P`` through ``x`` until leaving ``Q``).  The radial projection is
    also tried and the closer of the two candidates is returned.
    """
    x = np.asarray(x, dtype=float)
    if abs(P.many(x[None, :])[0] - 1) > tol:
        raise PreconditionFailed("x is not on the unit sphere of P")
    qx = Q.many(x[None, :])[0]
    if abs(qx - 1) <= tol:
        return x
    if qx > 1:
        y = closest_point_on_polytope(Q, x)
    else:
        vals = P._O @ x / P._t
        i = int(np.argmax(np.abs(vals)))
        n = np.sign(vals[i]) * P._O[i]
        n /= np.linalg.norm(n)
        a = Q._O @ n
        b = Q._O @ x
        with np.errstate(divide="ignore", invalid="ignore"):
            steps = np.where(a > 0, (Q._t - b) / a, np.where(a < 0, (Q._t + b) / -a, np.inf))
        y = x + float(np.min(steps)) * n
    radial = x / qx
    if np.linalg.norm(radial - x) < np.linalg.norm(y - x):
        return radial
    return y


# ----------------------------------------------------------------------
# polytope approximation of smooth balls


def _rationalize(v) -> tuple:
    return tuple(Fraction(float(c)).limit_denominator(RATIONALIZE_DENOMINATOR) for c in v)


def hull_norm(points) -> PolytopeNorm:
    """Polytope norm whose unit ball is the hull of ``+-points``.

    Points are first rounded to rationals; the hull and the facet planes
    are then computed exactly in 2D and from exact triangle planes in 3D.
    """
    pts = {_rationalize(p) for p in np.asarray(points, dtype=float)}
    pts |= {tuple(-c for c in p) for p in pts}
    pts = sorted(pts)
    d = len(pts[0])
    normals, offsets = [], []
    if d == 2:
        hull = convex_hull_2d(pts)
        for a, b in zip(hull, hull[1:] + hull[:1]):
            n = (b[1] - a[1], a[0] - b[0])
            normals.append(n)
            offsets.append(n[0] * a[0] + n[1] * a[1])
    elif d == 3:
        F = np.array([[float(c) for c in p] for p in pts])
        for simplex in ConvexHull(F).simplices:
            a, b, c = (pts[i] for i in simplex)
            u = [b[i] - a[i] for i in range(3)]
            w = [c[i] - a[i] for i in range(3)]
            n = (u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0])
            if not any(n):
                continue
            off = sum(p * q for p, q in zip(n, a))
            if off < 0:
                n, off = tuple(-z for z in n), -off
            normals.append(n)
            offsets.append(off)
    else:
        raise DimensionMismatch("hull norms are implemented for d in (2, 3)")
    return PolytopeNorm(tuple(normals), tuple(offsets))


def approximate_polytope(norm: Norm, mu: float, max_halvings: int = 12) -> PolytopeNorm:
    """Polytope norm with facets of diameter < mu, within mu of ``norm``.

    The boundary is sampled densely, thinned to an ``eps``-net (starting
    at ``eps = mu / 4``), symmetrised, and hulled.  ``eps`` is halved until
    both checks pass.
    """
    if not is_strictly_convex(norm):
        raise NotStrictlyConvex("polytope approximation needs a strictly convex norm")
    if not mu > 0:
        raise DomainError("mu must be positive")
    samples = sample_boundary(norm).points
    eps = mu / 4
    for _ in range(max_halvings):
        net = epsilon_net(samples, eps)
        poly = hull_norm(net)
        if max(facet_diameters(poly)) < mu and hausdorff_distance(norm, poly) < mu:
            return poly
        eps /= 2
    raise ConvergenceFailure(f"no approximation within mu={mu} after {max_halvings} halvings")


# ----------------------------------------------------------------------
# JSON


def norm_to_json(norm: Norm) -> dict:
    if isinstance(norm, PolytopeNorm):
        return {
            "kind": "polytope",
            "d": norm.d,
            "facets": [
                {"normal": [format_rational(Fraction(c)) for c in o], "offset": format_rational(t)}
                for o, t in zip(norm.normals, norm.offsets)
            ],
        }
    if isinstance(norm, EuclideanNorm):
        return {"kind": "euclidean", "d": norm.d}
    if isinstance(norm, LpNorm):
        return {"kind": "lp", "d": norm.d, "p": norm.p}
    return {"kind": "strictified", "base": norm_to_json(norm.base), "epsilon": norm.epsilon}


def norm_from_json(data: dict) -> Norm:
    try:
        kind = data["kind"]
        if kind == "polytope":
            facets = data["facets"]
            norm = PolytopeNorm(
                tuple(tuple(to_rational(c) for c in f["normal"]) for f in facets),
                tuple(to_rational(f["offset"]) for f in facets),
            )
            if "d" in data and data["d"] != norm.d:
                raise DimensionMismatch(f"declared d={data['d']} but normals have d={norm.d}")
            return norm
        if kind == "euclidean":
            return EuclideanNorm(int(data["d"]))
        if kind == "lp":
            return LpNorm(int(data["d"]), float(data["p"]))
        if kind == "strictified":
            return StrictifiedNorm(norm_from_json(data["base"]), float(data["epsilon"]))
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed norm description: {exc}") from exc
    raise DomainError(f"unknown norm kind {data.get('kind')!r}")


__all__ = [
    "BoundarySample",
    "EuclideanNorm",
    "LpNorm",
    "Norm",
    "PolytopeGeometry",
    "PolytopeNorm",
    "StrictifiedNorm",
    "approximate_polytope",
    "boundary_point",
    "boundary_witness",
    "closest_point_on_polytope",
    "cube_norm",
    "epsilon_net",
    "epsilon_net_indices",
    "euclidean_radius",
    "eval_norm",
    "facet_diameters",
    "hausdorff_distance",
    "hull_norm",
    "is_strictly_convex",
    "norm_from_json",
    "norm_to_json",
    "polytope_geometry",
    "random_polytope_norm",
    "random_round_polytope_norm",
    "random_unit_vector",
    "sample_boundary",
    "scaled",
    "strictify",
]
