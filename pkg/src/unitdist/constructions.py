"""Point sets with many unit distances, built as Minkowski sums.

Every builder is seeded and retries (up to ``retries`` times) until all
the sums are distinct.  The promised edge count is a lower bound that the
caller can confirm with :func:`unitdist.distgraph.count_unit_distances`.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.spatial import cKDTree

from .distgraph import EXACT, FLOAT, PointSet
from .errors import DimensionMismatch, DomainError, NotStrictlyConvex, RetryBudgetExhausted
from .norms import (
    DEFAULT_TOL,
    EuclideanNorm,
    Norm,
    PolytopeNorm,
    boundary_point,
    eval_norm,
    is_strictly_convex,
    random_direction,
    random_unit_vector,
)
from .qlinalg import format_rational

DEFAULT_RETRIES = 64


@dataclass(frozen=True)
class MinkowskiFactor:
    points: tuple


@dataclass
class ConstructionResult:
    construction: str
    points: PointSet
    promised_edges: int
    factors: list
    seed: int
    params: dict

    def to_json(self) -> dict:
        def fmt(p):
            if self.points.mode == EXACT:
                return [format_rational(x) for x in p]
            return [float(x) for x in p]

        out = self.points.to_json()
        out["metadata"] = {
            "construction": self.construction,
            "params": self.params,
            "seed": self.seed,
            "promised_edges": self.promised_edges,
            "factors": [[fmt(p) for p in f.points] for f in self.factors],
        }
        return out


def minkowski_sum(factors, exact: bool) -> list:
    """All sums ``s_1 + ... + s_k`` with ``s_i`` from factor ``i``, in
    lexicographic order of the choices."""
    d = len(factors[0].points[0])
    zero = tuple(Fraction(0) for _ in range(d)) if exact else (0.0,) * d
    sums = [zero]
    for f in factors:
        sums = [tuple(a + b for a, b in zip(s, p)) for s in sums for p in f.points]
    return sums


def _distinct(points: list, exact: bool, tol: float) -> bool:
    if exact:
        return len(set(points)) == len(points)
    if len(points) < 2:
        return True
    tree = cKDTree(np.asarray(points, dtype=float))
    return not tree.query_pairs(r=max(tol, 1e-12))


def _result(name, norm, factors, exact, promised, seed, params, tol):
    pts = minkowski_sum(factors, exact)
    if not _distinct(pts, exact, tol):
        return None
    mode = EXACT if exact else FLOAT
    return ConstructionResult(name, PointSet(norm.d, mode, tuple(pts)), promised, factors, seed, params)


def _exact_default(norm: Norm, exact: bool | None) -> bool:
    if exact is None:
        return isinstance(norm, PolytopeNorm)
    if exact and not isinstance(norm, PolytopeNorm):
        raise DomainError("exact constructions need a polytope norm")
    return exact


def _unit(norm, rng, exact):
    v = random_unit_vector(norm, rng, exact=exact)
    return tuple(v) if exact else tuple(float(c) for c in v)


def _zero(d, exact):
    return tuple(Fraction(0) for _ in range(d)) if exact else (0.0,) * d


def hypercube_embedding(norm: Norm, k: int, seed: int = 0, exact: bool | None = None,
                        retries: int = DEFAULT_RETRIES, tol: float = DEFAULT_TOL) -> ConstructionResult:
    """``{0, u_1} + ... + {0, u_k}`` for random unit vectors ``u_i``.

    The ``2^k`` sums carry at least ``k 2^(k-1)`` unit pairs: flipping one
    summand moves a point by exactly ``u_i``.
    """
    if k < 0:
        raise DomainError("k must be non-negative")
    exact = _exact_default(norm, exact)
    rng = random.Random(seed)
    for _ in range(retries):
        factors = [MinkowskiFactor((_zero(norm.d, exact), _unit(norm, rng, exact))) for _ in range(k)]
        if k == 0:
            factors = [MinkowskiFactor((_zero(norm.d, exact),))]
        res = _result("hypercube", norm, factors, exact, k * 2 ** (k - 1) if k else 0, seed, {"k": k}, tol)
        if res is not None:
            return res
    raise RetryBudgetExhausted(f"no distinct hypercube embedding in {retries} attempts")


def unit_circle_partner(norm: Norm, x, iterations: int = 200) -> np.ndarray:
    """Unit vector ``y`` with ``|y - x| = 1``, for ``x`` on the unit circle.

    Bisection on the angle ``theta`` between ``x`` and ``y``: the map
    ``theta -> |y(theta) - x| - 1`` is -1 at 0 and +1 at pi.
    """
    if norm.d != 2:
        raise DimensionMismatch("unit circle partners live in the plane")
    if not is_strictly_convex(norm):
        raise NotStrictlyConvex("bisection bracket needs a strictly convex norm")
    x = np.asarray(x, dtype=float)
    alpha = math.atan2(x[1], x[0])

    def g(theta):
        y = boundary_point(norm, np.array([math.cos(alpha + theta), math.sin(alpha + theta)]))
        return eval_norm(norm, y - x) - 1.0, y

    lo, hi = 0.0, math.pi
    if not (g(lo)[0] < 0 < g(hi)[0]):
        raise NotStrictlyConvex("bisection bracket is invalid")
    for _ in range(iterations):
        mid = (lo + hi) / 2
        if mid in (lo, hi):
            break
        if g(mid)[0] < 0:
            lo = mid
        else:
            hi = mid
    gl, yl = g(lo)
    gh, yh = g(hi)
    return yl if abs(gl) <= abs(gh) else yh


def triangle_power(norm: Norm, k: int, seed: int = 0, retries: int = DEFAULT_RETRIES,
                   tol: float = DEFAULT_TOL) -> ConstructionResult:
    """``S_1 + ... + S_k`` with each ``S_i = {0, x_i, y_i}`` a unit triangle.

    ``3^k`` points and at least ``k 3^k`` unit pairs.
    """
    if norm.d != 2:
        raise DimensionMismatch("triangle powers are planar")
    if not is_strictly_convex(norm):
        raise NotStrictlyConvex("triangle powers need a strictly convex norm")
    rng = random.Random(seed)
    for _ in range(retries):
        factors = []
        for _ in range(k):
            x = random_unit_vector(norm, rng)
            y = unit_circle_partner(norm, x)
            factors.append(MinkowskiFactor(((0.0, 0.0), tuple(map(float, x)), tuple(map(float, y)))))
        if k == 0:
            factors = [MinkowskiFactor(((0.0, 0.0),))]
        res = _result("trianglepower", norm, factors, False, k * 3**k, seed, {"k": k}, tol)
        if res is not None:
            return res
    raise RetryBudgetExhausted(f"no distinct triangle power in {retries} attempts")


def base3_digits(n: int) -> list[int]:
    """Little-endian base-3 digits of ``n``."""
    digits = []
    while n:
        n, r = divmod(n, 3)
        digits.append(r)
    return digits


def compose_base3(norm: Norm, n: int, seed: int = 0, retries: int = DEFAULT_RETRIES,
                  tol: float = DEFAULT_TOL) -> ConstructionResult:
    """``n`` points: ``a_i`` translated triangle powers of size ``3^i`` for
    each base-3 digit ``a_i`` of ``n``.  Promises ``sum a_i i 3^i`` edges."""
    if n < 1:
        raise DomainError("n must be positive")
    if not is_strictly_convex(norm) or norm.d != 2:
        raise NotStrictlyConvex("base-3 composition needs a strictly convex planar norm")
    digits = base3_digits(n)
    rng = random.Random(seed)
    for _ in range(retries):
        blocks, promised, factors = [], 0, []
        for i, a in enumerate(digits):
            for _ in range(a):
                blk = triangle_power(norm, i, seed=rng.randrange(2**31), retries=retries, tol=tol)
                blocks.append(blk)
                promised += i * 3**i
        # blocks sit far apart along the first axis, with a random jitter
        spacing = 4.0 * (len(digits) + 1) * max(1.0, _radius_bound(norm))
        pts = []
        for j, blk in enumerate(blocks):
            shift = np.array([j * spacing, 0.0]) + np.array([rng.random(), rng.random()])
            pts.extend(tuple(map(float, np.asarray(p) + shift)) for p in blk.points.points)
            factors.extend(blk.factors)
        if _distinct(pts, False, tol):
            return ConstructionResult("base3", PointSet(2, FLOAT, tuple(pts)), promised, factors, seed,
                                      {"n": n, "digits": digits})
    raise RetryBudgetExhausted(f"no distinct base-3 composition in {retries} attempts")


def _radius_bound(norm: Norm) -> float:
    dirs = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]])
    return float(np.max(np.linalg.norm(dirs, axis=1) / norm.many(dirs))) * 2


def sphere_intersection_samples(centers, m: int, seed: int = 0) -> list[np.ndarray]:
    """``m`` random points at Euclidean distance 1 from every center.

    With ``d - 1`` unit-length centers in R^d the common points form a
    circle: it lies in the 2-plane orthogonal to all ``c_i - c_1``, around
    the projection of ``c_1`` onto that plane.
    """
    C = np.asarray(centers, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1] - 1:
        raise DimensionMismatch("need d - 1 centers in R^d")
    d = C.shape[1]
    sq = np.sum(C * C, axis=1)
    # |z - c_i|^2 = 1 for all i  <=>  2 z.(c_i - c_1) = |c_i|^2 - |c_1|^2 and |z - c_1| = 1
    A = C[1:] - C[0]
    b = (sq[1:] - sq[0]) / 2
    if len(A):
        z0 = np.linalg.lstsq(A, b, rcond=None)[0]
        _, s, vt = np.linalg.svd(A)
        if np.sum(s > 1e-12) != d - 2:
            raise DomainError("centers are degenerate")
        basis = vt[d - 2:]
    else:
        z0 = np.zeros(d)
        basis = np.eye(d)
    # z = z0 + basis^T w, and |z - c_1| = 1
    w0 = basis @ (C[0] - z0)
    center = z0 + basis.T @ w0
    r2 = 1.0 - float(np.sum((C[0] - center) ** 2))
    if r2 <= 1e-12:
        raise DomainError("the unit spheres around the centers meet in at most one point")
    r = math.sqrt(r2)
    rng = random.Random(seed)
    out = []
    for _ in range(m):
        a = rng.uniform(0, 2 * math.pi)
        out.append(center + r * (math.cos(a) * basis[0] + math.sin(a) * basis[1]))
    return out


def bipartite_promised(d: int, k: int, m: int) -> int:
    return (d - 1) * m * (k - 1) * k ** (d - 2) * 2 ** (m - 1) if m else 0


def bipartite_construction(norm: Norm, d: int, k: int, m: int, seed: int = 0, exact: bool | None = None,
                           retries: int = DEFAULT_RETRIES, tol: float = DEFAULT_TOL) -> ConstructionResult:
    """``{x_1,...,k x_1} + ... + {x_{d-1},...,k x_{d-1}} + {0,z_1} + ... + {0,z_m}``.

    Each ``z_j`` is at unit distance from every ``x_i``, so each of the
    ``(d-1) m`` differences ``z_j - x_i`` is a unit vector realised by
    ``(k-1) k^(d-2) 2^(m-1)`` pairs.  For d = 2 any norm works; for d >= 3
    the ``z_j`` come from intersecting Euclidean spheres.
    """
    if norm.d != d:
        raise DimensionMismatch(f"{d}-dimensional construction under a {norm.d}-dimensional norm")
    if d < 2 or k < 1 or m < 0:
        raise DomainError("need d >= 2, k >= 1, m >= 0")
    if d >= 3 and not isinstance(norm, EuclideanNorm):
        raise DomainError("for d >= 3 the construction is implemented for the Euclidean norm")
    exact = _exact_default(norm, exact)
    rng = random.Random(seed)
    promised = bipartite_promised(d, k, m)
    params = {"d": d, "k": k, "m": m}
    for _ in range(retries):
        if d == 2:
            x = _unit(norm, rng, exact)
            zs = [tuple(a + b for a, b in zip(x, _unit(norm, rng, exact))) for _ in range(m)]
            xs = [x]
        else:
            while True:
                xs = [tuple(random_direction(d, rng)) for _ in range(d - 1)]
                try:
                    zs = [tuple(z) for z in sphere_intersection_samples(xs, m, rng.randrange(2**31))]
                    break
                except DomainError:
                    continue
        factors = [MinkowskiFactor(tuple(tuple(j * c for c in x) for j in range(1, k + 1))) for x in xs]
        factors += [MinkowskiFactor((_zero(d, exact), z)) for z in zs]
        res = _result("bipartite", norm, factors, exact, promised, seed, params, tol)
        if res is not None:
            return res
    raise RetryBudgetExhausted(f"no distinct bipartite construction in {retries} attempts")


def run_trials(builder, seeds, jobs: int = 1, **kwargs) -> list:
    """Run ``builder(seed=s, **kwargs)`` for each seed, in seed order."""
    seeds = list(seeds)
    if jobs <= 1 or len(seeds) <= 1:
        return [builder(seed=s, **kwargs) for s in seeds]
    from concurrent.futures import ProcessPoolExecutor
    from functools import partial

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(partial(_call, builder, kwargs), seeds))


def _call(builder, kwargs, seed):
    return builder(seed=seed, **kwargs)


__all__ = [
    "ConstructionResult",
    "MinkowskiFactor",
    "base3_digits",
    "bipartite_construction",
    "bipartite_promised",
    "compose_base3",
    "hypercube_embedding",
    "minkowski_sum",
    "run_trials",
    "sphere_intersection_samples",
    "triangle_power",
    "unit_circle_partner",
]
