"""Hyperplanes that carry every achievable offset tuple of a dependency.

A dependency scheme is a rational ``(d l + 1) x l`` matrix ``A``: unit
vectors ``u_1..u_l`` and further unit vectors ``u_j = sum_i A[j][i] u_i``.
If each ``u_j`` sits on the facet ``phi(j)`` of a polytope norm with sign
``s_j``, then ``t_phi(j) = s_j o_phi(j) . u_j``.  These are ``d l + 1``
linear forms in the ``d l`` coordinates of ``u_1..u_l``, so some nonzero
``c`` has ``sum_j c_j t_phi(j) = 0``: the offsets lie on a hyperplane.
Offsets chosen off every such hyperplane avoid the dependency altogether.

Two routes compute the hyperplanes.  :func:`full_family` works one scheme
at a time in exact rationals.  :func:`family_for_schemes` handles a whole
scheme list with batched integer cofactors, each one re-verified exactly.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import lcm
from typing import Iterable, Sequence

import numpy as np
from sympy import sieve

from .errors import DimensionMismatch, DomainError, RetryBudgetExhausted
from .norms import PolytopeNorm, euclidean_radius, format_rational
from .qlinalg import nullspace, primitive_integer, qmat, qvec, sign_canonical, to_rational, transpose

PRIME_RANGE = (10**6, 10**7)
DEFAULT_RETRIES = 64


@dataclass(frozen=True)
class DependencyScheme:
    d: int
    l: int
    A: tuple
    eta_deg: Fraction | None = None

    def __post_init__(self):
        A = qmat(self.A)
        if len(A) != self.d * self.l + 1 or any(len(r) != self.l for r in A):
            raise DimensionMismatch(f"A must be {self.d * self.l + 1} x {self.l}")
        object.__setattr__(self, "A", A)

    @property
    def rows(self) -> int:
        return self.d * self.l + 1

    def to_json(self) -> dict:
        out = {"d": self.d, "l": self.l, "A": [[format_rational(x) for x in r] for r in self.A]}
        if self.eta_deg is not None:
            out["eta_deg"] = format_rational(self.eta_deg)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "DependencyScheme":
        try:
            eta = data.get("eta_deg")
            return cls(int(data["d"]), int(data["l"]), qmat(data["A"]), None if eta is None else to_rational(eta))
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed scheme: {exc}") from exc


def _check(scheme: DependencyScheme, normals, phi, signs=None):
    if any(len(o) != scheme.d for o in normals):
        raise DimensionMismatch("normals and scheme disagree on the dimension")
    if len(phi) != scheme.rows or len(set(phi)) != len(phi) or not all(0 <= f < len(normals) for f in phi):
        raise DomainError("phi must be an injection from the scheme rows into the facets")
    if signs is not None and (len(signs) != scheme.rows or any(s not in (1, -1) for s in signs)):
        raise DomainError("signs must be a +-1 vector, one entry per row")


def scheme_forms(scheme: DependencyScheme, normals, phi, signs) -> tuple:
    """Row ``j`` holds the coefficients of ``s_j o_phi(j) . u_j`` in the
    variables ``u_1[0..d-1], u_2[0..d-1], ...``."""
    normals = [qvec(o) for o in normals]
    _check(scheme, normals, phi, signs)
    return tuple(
        tuple(s * a * c for a in row for c in normals[f])
        for row, f, s in zip(scheme.A, phi, signs)
    )


def achievability_hyperplane(scheme: DependencyScheme, normals, phi, signs) -> tuple:
    """Coefficients in Q^h of a hyperplane holding every achievable offset
    tuple for this placement: the first nullspace vector of the transposed
    form matrix, spread out to the facets ``phi``."""
    forms = scheme_forms(scheme, normals, phi, signs)
    c = nullspace(transpose(forms))[0]
    plane = [Fraction(0)] * len(normals)
    for f, x in zip(phi, c):
        plane[f] = x
    return tuple(plane)


def achieved_offsets(scheme: DependencyScheme, normals, phi, signs, us) -> dict:
    """``{phi(j): s_j o_phi(j) . u_j}`` for concrete vectors ``u_1..u_l``."""
    normals = [qvec(o) for o in normals]
    us = [qvec(u) for u in us]
    out = {}
    for row, f, s in zip(scheme.A, phi, signs):
        uj = [sum((a * u[k] for a, u in zip(row, us)), Fraction(0)) for k in range(scheme.d)]
        out[f] = s * sum((o * x for o, x in zip(normals[f], uj)), Fraction(0))
    return out


# ----------------------------------------------------------------------
# families


def _canonical_weights(c: Sequence, phi: Sequence, h: int) -> tuple:
    ints = primitive_integer(c)
    w = [0] * h
    for f, x in zip(phi, ints):
        w[f] = abs(x)
    return tuple(w)


@dataclass
class HyperplaneFamily:
    """Planes ``sum_k +-w_k t_k = 0``, one relation per row of ``weights``.

    Flipping the sign of one form flips one coefficient of its plane, so
    each nonnegative weight vector stands for every sign pattern on its
    support.  ``provenance[r]`` is ``(scheme_index, phi)`` for the first
    placement that produced relation ``r``.
    """

    h: int
    weights: np.ndarray
    provenance: list = field(default_factory=list)
    schemes: list = field(default_factory=list)
    placements: int = 0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.int64).reshape(-1, self.h)

    def __len__(self) -> int:
        """Number of distinct planes, counted up to scaling."""
        supp = np.count_nonzero(self.weights, axis=1)
        return int(np.sum(2 ** (supp - 1)))

    @property
    def relations(self) -> int:
        return len(self.weights)

    def planes(self) -> list[tuple]:
        """Every plane as a coefficient vector whose first nonzero entry is
        positive."""
        out = []
        for w in self.weights.tolist():
            supp = [k for k, x in enumerate(w) if x]
            for signs in itertools.product((1, -1), repeat=len(supp) - 1):
                plane = [0] * self.h
                plane[supp[0]] = w[supp[0]]
                for k, s in zip(supp[1:], signs):
                    plane[k] = s * w[k]
                out.append(tuple(plane))
        return out

    def hit(self, t: Sequence) -> tuple | None:
        """A plane of the family through ``t``, or None.

        Floating point rules out almost every relation; the few whose best
        signed sum is tiny are settled with exact rationals.
        """
        t = [to_rational(x) for x in t]
        if len(t) != self.h:
            raise DimensionMismatch(f"offset tuple has {len(t)} entries, family lives in Q^{self.h}")
        if not len(self.weights):
            return None
        tf = np.array([float(x) for x in t])
        order, packed = self._packed
        signs = np.array([(1.0,) + s for s in itertools.product((1.0, -1.0), repeat=packed.shape[1] - 1)])
        step = 1 << 16
        for start in range(0, len(packed), step):
            V = packed[start:start + step] * tf[order[start:start + step]]
            sums = np.abs(V @ signs.T).min(axis=1)
            for r in np.flatnonzero(sums <= 1e-9 * V.sum(axis=1)):
                plane = _exact_hit(self.weights[start + r].tolist(), t)
                if plane is not None:
                    return plane
        return None

    @cached_property
    def _packed(self) -> tuple[np.ndarray, np.ndarray]:
        """Each relation's support packed to the left: facet indices and
        weights, zero-padded to the widest support."""
        width = int(np.count_nonzero(self.weights, axis=1).max())
        order = np.argsort(self.weights == 0, axis=1, kind="stable")[:, :width]
        return order, np.take_along_axis(self.weights, order, axis=1).astype(float)

    def to_json(self, limit: int | None = None) -> dict:
        planes = self.planes()
        if limit is not None:
            planes = planes[:limit]
        return {
            "h": self.h,
            "relations": self.relations,
            "planes_total": len(self),
            "placements": self.placements,
            "planes": [[str(x) for x in p] for p in planes],
            "provenance": [{"scheme": s, "phi": list(phi)} for s, phi in self.provenance[: limit or None]],
        }


def _exact_hit(w: list[int], t: list[Fraction]) -> tuple | None:
    supp = [k for k, x in enumerate(w) if x]
    for signs in itertools.product((1, -1), repeat=len(supp) - 1):
        s = (1,) + signs
        if sum(si * w[k] * t[k] for si, k in zip(s, supp)) == 0:
            plane = [0] * len(w)
            for si, k in zip(s, supp):
                plane[k] = si * w[k]
            return tuple(plane)
    return None


def full_family(scheme: DependencyScheme, normals) -> HyperplaneFamily:
    """All hyperplanes of one scheme over every injection ``phi``, in exact
    arithmetic.  Signs are folded in by the sign-flip symmetry (see
    :class:`HyperplaneFamily`); empty when there are fewer facets than
    rows."""
    normals = [qvec(o) for o in normals]
    h = len(normals)
    ones = (1,) * scheme.rows
    seen: dict[tuple, tuple] = {}
    count = 0
    for phi in itertools.permutations(range(h), scheme.rows):
        count += 1
        c = nullspace(transpose(scheme_forms(scheme, normals, phi, ones)))[0]
        key = _canonical_weights([c[j] for j in range(scheme.rows)], phi, h)
        seen.setdefault(key, (0, phi))
    keys = sorted(seen)
    return HyperplaneFamily(h, np.array(keys, dtype=np.int64).reshape(-1, h),
                            [seen[k] for k in keys], [scheme], count)


# ----------------------------------------------------------------------
# the height-bounded scheme list


def height(q: Fraction) -> int:
    return max(abs(q.numerator), q.denominator)


def _line(v):
    lead = next(x for x in v if x != 0)
    return tuple(x / lead for x in v)


def _column_images(rows: Sequence[tuple], l: int) -> Iterable[tuple]:
    """The extra rows after every relabelling ``u_i -> +-u_sigma(i)``."""
    for perm in itertools.permutations(range(l)):
        for flips in itertools.product((1, -1), repeat=l):
            yield tuple(sorted(sign_canonical(tuple(flips[i] * r[perm[i]] for i in range(l))) for r in rows))


def height_bounded_schemes(d: int, max_height: int = 2, max_l: int = 2, reduce_symmetry: bool = True) -> list:
    """Schemes with entries of height at most ``max_height`` and ``l <= max_l``.

    Normal form: the first ``l`` rows are the identity (they are the basis
    vectors ``u_1..u_l`` themselves); the other rows are nonzero, have
    their first nonzero entry positive (``u`` and ``-u`` give the same
    offsets up to sign), are pairwise non-proportional and not
    proportional to a basis row (the unit vectors point in distinct
    directions), and come unordered (every injection ``phi`` is tried).
    With ``l = 1`` no scheme survives.  ``reduce_symmetry`` keeps one
    scheme per orbit of ``u_i -> +-u_sigma(i)``, which permutes the family
    of a scheme onto itself.
    """
    vals = sorted({Fraction(p, q) for q in range(1, max_height + 1) for p in range(-max_height, max_height + 1)})
    out = []
    for l in range(1, max_l + 1):
        extra = d * l + 1 - l
        cands = sorted({
            sign_canonical(v)
            for v in itertools.product(vals, repeat=l)
            if sum(1 for x in v if x != 0) >= 2
        })
        ident = [tuple(Fraction(int(i == j)) for j in range(l)) for i in range(l)]
        for combo in itertools.combinations(cands, extra):
            if len({_line(r) for r in combo}) != extra:
                continue
            if reduce_symmetry and min(_column_images(combo, l)) != tuple(sorted(combo)):
                continue
            out.append(DependencyScheme(d, l, tuple(ident) + combo))
    return out


# ----------------------------------------------------------------------
# batched family over many schemes


def _integer_rows(scheme: DependencyScheme) -> np.ndarray:
    den = lcm(*(x.denominator for r in scheme.A for x in r))
    return np.array([[int(x * den) for x in r] for r in scheme.A], dtype=np.int64)


@lru_cache(maxsize=16)
def _permutations(h: int, r: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(h), r)), dtype=np.int64).reshape(-1, r)


def _batch_nullvectors(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Integer left null vectors of integer ``(B, n+1, n)`` matrices.

    With ``D = det`` of the first ``n`` rows, ``c = (D x, -D)`` where
    ``x`` solves ``M[:n]^T x = M[n]``; rounded, then checked exactly.
    Returns the vectors and a mask of the rows that passed the check.
    """
    B, r, n = M.shape
    top = M[:, :n, :].astype(float)
    D = np.round(np.linalg.det(top))
    ok = D != 0
    c = np.zeros((B, r), dtype=np.int64)
    if ok.any():
        x = np.linalg.solve(np.transpose(top[ok], (0, 2, 1)), M[ok, n, :].astype(float)[..., None])[..., 0]
        c[ok, :n] = np.round(x * D[ok, None]).astype(np.int64)
        c[ok, n] = -D[ok].astype(np.int64)
    resid = np.einsum("bj,bjn->bn", c, M)
    ok &= ~np.any(resid, axis=1) & np.any(c, axis=1)
    return c, ok


def family_for_schemes(schemes: Sequence[DependencyScheme], normals, chunk: int = 50000) -> HyperplaneFamily:
    """Union of :func:`full_family` over ``schemes``, computed in batches.

    Every null vector is verified in exact integer arithmetic; any that
    fail (or come from a singular leading block) are recomputed with
    exact rational elimination.
    """
    normals = [qvec(o) for o in normals]
    # a common scale factor leaves every relation unchanged
    den = lcm(*(x.denominator for o in normals for x in o))
    O = np.array([[int(x * den) for x in o] for o in normals], dtype=np.int64)
    h = len(normals)
    keys, prov = [], []
    placements = 0
    for si, scheme in enumerate(schemes):
        r, n = scheme.rows, scheme.rows - 1
        if r > h:
            continue
        perms = _permutations(h, r)
        A = _integer_rows(scheme)
        placements += len(perms)
        for start in range(0, len(perms), chunk):
            P = perms[start:start + chunk]
            # M[b, j, i*d + q] = A[j, i] * O[P[b, j], q]
            M = (A[None, :, :, None] * O[P][:, :, None, :]).reshape(len(P), r, n)
            c, ok = _batch_nullvectors(M)
            for b in np.flatnonzero(~ok):
                exact = nullspace(transpose(tuple(tuple(map(Fraction, row)) for row in M[b].tolist())))[0]
                c[b] = primitive_integer(exact)
            W = np.zeros((len(P), h), dtype=np.int64)
            np.put_along_axis(W, P, np.abs(c), axis=1)
            g = np.gcd.reduce(W, axis=1)
            W //= g[:, None]
            W, first = np.unique(W, axis=0, return_index=True)
            keys.append(W)
            prov.extend((si, tuple(P[i].tolist())) for i in first)
    if not keys:
        return HyperplaneFamily(h, np.zeros((0, h), dtype=np.int64), [], list(schemes), placements)
    allw = np.concatenate(keys)
    W, first = np.unique(allw, axis=0, return_index=True)
    return HyperplaneFamily(h, W, [prov[i] for i in first], list(schemes), placements)


# ----------------------------------------------------------------------
# generic offsets


@lru_cache(maxsize=1)
def _primes() -> tuple:
    return tuple(sieve.primerange(*PRIME_RANGE))


@dataclass
class GenericPolytopeNorm:
    base: PolytopeNorm
    norm: PolytopeNorm
    seed: int
    eps: Fraction
    family_relations: int
    family_planes: int
    hausdorff_bound: float

    def to_json(self) -> dict:
        from .norms import norm_to_json

        return {
            "norm": norm_to_json(self.norm),
            "base": norm_to_json(self.base),
            "seed": self.seed,
            "eps": format_rational(self.eps),
            "avoided_relations": self.family_relations,
            "avoided_planes": self.family_planes,
            "hausdorff_bound": self.hausdorff_bound,
        }


def sample_generic_polytope(base: PolytopeNorm, schemes: Sequence[DependencyScheme] | HyperplaneFamily,
                            eps, seed: int = 0, retries: int = DEFAULT_RETRIES) -> GenericPolytopeNorm:
    """Perturb the offsets of ``base`` into ``[s_i, s_i + eps]`` so that
    they avoid every hyperplane of the schemes.

    Each new offset is ``s_i + eps * a / p`` with ``p`` a random prime in
    ``[10^6, 10^7]`` and ``a`` uniform in ``[0, p]``.  The unit ball moves
    by at most ``c * eps / min s_i`` in Hausdorff distance, where ``c`` is
    the Euclidean radius of the base ball.
    """
    eps = to_rational(eps)
    if eps <= 0:
        raise DomainError("eps must be positive")
    family = schemes if isinstance(schemes, HyperplaneFamily) else family_for_schemes(schemes, base.normals)
    if family.h != base.h:
        raise DimensionMismatch("family and base polytope have different facet counts")
    rng = random.Random(seed)
    primes = _primes()
    for _ in range(retries):
        t = []
        for s in base.offsets:
            p = rng.choice(primes)
            t.append(s + eps * Fraction(rng.randint(0, p), p))
        if family.hit(t) is None:
            norm = PolytopeNorm(base.normals, tuple(t))
            bound = euclidean_radius(base) * float(eps / min(base.offsets))
            return GenericPolytopeNorm(base, norm, seed, eps, family.relations, len(family), bound)
    raise RetryBudgetExhausted(f"every one of {retries} offset draws hit the family")


def base_offsets_hit(base: PolytopeNorm, family: HyperplaneFamily) -> tuple | None:
    """A plane of the family through the unperturbed offsets, if any."""
    return family.hit(base.offsets)

