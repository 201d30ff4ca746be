"""Combinatorics of unit-vector dependencies.

Given unit vectors ``u_1, ..., u_k`` the central condition is the span
audit: no index set ``I`` may have more than ``d |I| + m`` of the vectors
in its span.  Around it sit a greedy selection lemma, a forest edge bound
with a checkable certificate, an entropy inequality, a matroid partition
into independent classes, and an odd-distance colouring.

Indices are 0-based throughout.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .distgraph import EXACT, PointSet, exact_distances
from .errors import AuditViolation, DomainError, InfeasiblePartition, ModeMismatch, PreconditionFailed
from .norms import PolytopeNorm
from .qlinalg import in_span, is_independent, line_key, qvec, rank, sign_canonical, span_coefficients, to_rational

DEFAULT_AUDIT_BUDGET = 20


def _vectors(vectors) -> list[tuple]:
    vs = [qvec(v) for v in vectors]
    if vs and len({len(v) for v in vs}) != 1:
        raise DomainError("vectors have different dimensions")
    return vs


# ----------------------------------------------------------------------
# span audit


@dataclass
class AuditReport:
    """Outcome of the span audit.

    ``witness`` is an index set ``I`` and ``spanned`` the indices of all
    vectors in its span; a violation means ``len(spanned) >= d*len(I) + m + 1``.
    ``flats`` is the number of distinct spans examined.
    """

    clean: bool
    d: int
    m: int
    witness: tuple = ()
    spanned: tuple = ()
    flats: int = 0

    def to_json(self) -> dict:
        return {
            "verdict": "clean" if self.clean else "violated",
            "clean": self.clean,
            "d": self.d,
            "m": self.m,
            "witness": list(self.witness),
            "spanned": list(self.spanned),
            "flats_examined": self.flats,
        }


def _basis_in_order(vs, idx) -> list[int]:
    basis: list[int] = []
    for i in sorted(idx):
        if not in_span([vs[j] for j in basis], vs[i]):
            basis.append(i)
    return basis


def _closure(vs, basis) -> frozenset:
    span = [vs[j] for j in basis]
    return frozenset(i for i, v in enumerate(vs) if in_span(span, v))


def flats(vectors) -> list[tuple[frozenset, tuple]]:
    """Every distinct span of a subset, as ``(members, basis)`` pairs,
    ordered by rank and then by members."""
    vs = _vectors(vectors)
    start = _closure(vs, [])
    seen = {start: ()}
    frontier = [start]
    while frontier:
        nxt = []
        for F in frontier:
            basis = seen[F]
            for i in range(len(vs)):
                if i in F:
                    continue
                G = _closure(vs, basis + (i,))
                if G not in seen:
                    seen[G] = tuple(_basis_in_order(vs, G))
                    nxt.append(G)
        frontier = nxt
    return sorted(((F, b) for F, b in seen.items()), key=lambda fb: (len(fb[1]), sorted(fb[0])))


def span_audit(vectors, d: int, m: int, budget: int = DEFAULT_AUDIT_BUDGET) -> AuditReport:
    """Look for ``I`` with at least ``d |I| + m + 1`` vectors in ``span(I)``.

    Only the span matters, so the search runs over distinct flats and
    uses a basis of each as ``I``.  Exhaustive up to ``budget`` vectors;
    beyond it only the whole span is tried, and an input it does not
    already condemn is refused.
    """
    vs = _vectors(vectors)
    if d < 1 or m < 0:
        raise DomainError("need d >= 1 and m >= 0")
    if len(vs) > budget:
        basis = _basis_in_order(vs, range(len(vs)))
        if len(vs) >= d * len(basis) + m + 1:
            return AuditReport(False, d, m, tuple(basis), tuple(range(len(vs))), 1)
        raise DomainError(f"{len(vs)} vectors exceed the exhaustive audit budget of {budget}")
    fl = flats(vs)
    for F, basis in fl:
        if len(F) >= d * len(basis) + m + 1:
            return AuditReport(False, d, m, tuple(basis), tuple(sorted(F)), len(fl))
    return AuditReport(True, d, m, flats=len(fl))


def require_clean(vectors, d: int, m: int) -> AuditReport:
    report = span_audit(vectors, d, m)
    if not report.clean:
        raise AuditViolation(
            f"{len(report.spanned)} vectors lie in the span of {len(report.witness)}", report
        )
    return report


# ----------------------------------------------------------------------
# greedy selection


@dataclass
class GreedySelection:
    chosen: tuple
    total: object
    bound: object

    @property
    def holds(self) -> bool:
        return self.total >= self.bound

    def to_json(self) -> dict:
        return {"chosen": list(self.chosen), "total": str(self.total), "bound": str(self.bound), "holds": self.holds}


def _weight(x):
    return x if isinstance(x, float) else to_rational(x)


def greedy_select(vectors, weights: Sequence, d: int, m: int, M) -> GreedySelection:
    """Independent ``J`` with ``sum(weights[J]) >= (sum(weights) - m M) / d``.

    Vectors are visited by decreasing weight (ties by index) and kept
    whenever they leave the span of those kept so far.  Needs a clean
    audit and weights in ``[0, M]``.
    """
    vs = _vectors(vectors)
    lam = [_weight(w) for w in weights]
    M = _weight(M)
    if len(lam) != len(vs):
        raise DomainError("one weight per vector is required")
    if any(w < 0 or w > M for w in lam):
        raise PreconditionFailed("weights must lie in [0, M]")
    require_clean(vs, d, m)
    order = sorted(range(len(vs)), key=lambda i: (-lam[i], i))
    chosen: list[int] = []
    for i in order:
        if not in_span([vs[j] for j in chosen], vs[i]):
            chosen.append(i)
    total = sum((lam[i] for i in chosen), Fraction(0))
    bound = (sum(lam, Fraction(0)) - m * M) / d
    result = GreedySelection(tuple(sorted(chosen)), total, bound)
    if not result.holds:
        raise AssertionError("greedy bound failed on a clean instance")
    return result


# ----------------------------------------------------------------------
# entropy inequality


@dataclass
class EntropyReport:
    parts: tuple
    lhs: float
    rhs: float
    holds: bool

    def to_json(self) -> dict:
        return dict(parts=list(self.parts), lhs=self.lhs, rhs=self.rhs, holds=self.holds)


def _xlogx(n: int) -> float:
    return n * math.log2(n) if n > 1 else 0.0


def entropy_check(parts: Sequence[int]) -> EntropyReport:
    """``n_1 - 1/2 sum n_i log2 n_i >= n - 1/2 n log2 n`` with ``n_1`` the
    largest part.

    ``holds`` is decided exactly: the inequality is equivalent to
    ``n^n >= 4^(n - n_1) * prod n_i^n_i``.
    """
    ns = tuple(sorted((int(x) for x in parts), reverse=True))
    if not ns or any(x < 1 for x in ns):
        raise DomainError("parts must be positive integers")
    n, n1 = sum(ns), ns[0]
    lhs = n1 - sum(_xlogx(x) for x in ns) / 2
    rhs = n - _xlogx(n) / 2
    prod = 1
    for x in ns:
        prod *= x**x
    return EntropyReport(ns, lhs, rhs, n**n >= 4 ** (n - n1) * prod)


# ----------------------------------------------------------------------
# forest bound certificate


@dataclass
class CertificateNode:
    """One step of the edge-bound induction.

    ``kind`` is ``"leaf"`` (no edges), ``"split"`` (disconnected; children
    are components) or ``"red"`` (connected; ``red`` is the direction with
    most edges, children are the classes of equal ``red``-coordinate).
    """

    kind: str
    vertices: tuple
    edges: int
    red: int | None = None
    red_edges: int = 0
    children: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "vertices": list(self.vertices),
            "edges": self.edges,
            "bound": _xlogx(self.n) / 2,
        }
        if self.kind == "red":
            out["red_direction"] = self.red
            out["red_edges"] = self.red_edges
        if self.children:
            out["children"] = [c.to_json() for c in self.children]
        return out


def _components(vertices, edges) -> list[list[int]]:
    adj = defaultdict(list)
    for x, y, *_ in edges:
        adj[x].append(y)
        adj[y].append(x)
    seen, comps = set(), []
    for v in vertices:
        if v in seen:
            continue
        comp, stack = [], [v]
        seen.add(v)
        while stack:
            a = stack.pop()
            comp.append(a)
            for b in adj[a]:
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        comps.append(sorted(comp))
    return comps


def _certify(vertices: list[int], edges: list[tuple]) -> CertificateNode:
    if not edges:
        return CertificateNode("leaf", tuple(vertices), 0)
    comps = _components(vertices, edges)
    if len(comps) > 1:
        where = {v: c for c, comp in enumerate(comps) for v in comp}
        groups = defaultdict(list)
        for e in edges:
            groups[where[e[0]]].append(e)
        children = [_certify(comp, groups[c]) for c, comp in enumerate(comps)]
        return CertificateNode("split", tuple(vertices), len(edges), children=children)
    per_dir = defaultdict(int)
    for _, _, i, _ in edges:
        per_dir[i] += 1
    red = min(per_dir, key=lambda i: (-per_dir[i], i))
    # red coordinate of p_w - p_z, accumulated along a spanning tree from z
    adj = defaultdict(list)
    for x, y, i, lam in edges:
        adj[x].append((y, i, lam))
        adj[y].append((x, i, -lam))
    coord = {vertices[0]: Fraction(0)}
    queue = deque([vertices[0]])
    while queue:
        a = queue.popleft()
        for b, i, lam in adj[a]:
            if b not in coord:
                coord[b] = coord[a] + (lam if i == red else 0)
                queue.append(b)
    classes = defaultdict(list)
    for v in vertices:
        classes[coord[v]].append(v)
    rest = [e for e in edges if e[2] != red]
    red_edges = len(edges) - len(rest)
    where = {v: a for a, cls in classes.items() for v in cls}
    groups = defaultdict(list)
    for e in rest:
        if where[e[0]] != where[e[1]]:
            raise AssertionError("a non-red edge joins two red classes")
        groups[where[e[0]]].append(e)
    children = [_certify(sorted(cls), groups[a]) for a, cls in sorted(classes.items())]
    return CertificateNode("red", tuple(vertices), len(edges), red, red_edges, children)


@dataclass
class ForestCertificate:
    root: CertificateNode
    n: int
    edges: int

    @property
    def holds(self) -> bool:
        return 4**self.edges <= self.n**self.n

    def to_json(self) -> dict:
        return {"n": self.n, "edges": self.edges, "bound": _xlogx(self.n) / 2, "holds": self.holds,
                "tree": self.root.to_json()}


def _edge_direction(us, diff) -> tuple[int, Fraction]:
    hits = []
    for i, u in enumerate(us):
        c = span_coefficients([u], diff)
        if c is not None:
            hits.append((i, c[0]))
    if len(hits) != 1:
        raise PreconditionFailed(f"edge difference {list(map(str, diff))} is not a multiple of exactly one vector")
    return hits[0]


def forest_bound_certify(points, vectors, edges) -> ForestCertificate:
    """Certificate that ``len(edges) <= 1/2 n log2 n``.

    Preconditions: the vectors are independent, every edge difference is
    a multiple of exactly one of them, and for each vector the edges along
    it form a forest.
    """
    pts = [qvec(p) for p in points]
    us = _vectors(vectors)
    if not is_independent(us):
        raise PreconditionFailed("the direction vectors are not independent")
    n = len(pts)
    labelled = []
    parent = {}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for x, y in edges:
        if x == y or not (0 <= x < n and 0 <= y < n):
            raise DomainError(f"bad edge ({x}, {y})")
        i, lam = _edge_direction(us, tuple(b - a for a, b in zip(pts[x], pts[y])))
        for v in (x, y):
            parent.setdefault((i, v), (i, v))
        rx, ry = find((i, x)), find((i, y))
        if rx == ry:
            raise PreconditionFailed(f"edges along direction {i} contain a cycle")
        parent[rx] = ry
        labelled.append((x, y, i, lam))
    root = _certify(list(range(n)), labelled)
    cert = ForestCertificate(root, n, len(labelled))
    replay_certificate(cert)
    return cert


def replay_certificate(cert: ForestCertificate) -> int:
    """Re-check every step of a certificate; returns the edge count.

    At a red node with classes of sizes ``n_a`` the red edges are at most
    ``n - max n_a``, and the entropy inequality turns the children's
    bounds into ``1/2 n log2 n`` for the node.
    """

    def walk(node: CertificateNode) -> int:
        if node.kind == "leaf":
            if node.edges:
                raise AssertionError("leaf with edges")
            return 0
        child_edges = sum(walk(c) for c in node.children)
        sizes = [c.n for c in node.children]
        if sum(sizes) != node.n:
            raise AssertionError("children do not partition the vertices")
        if node.edges != child_edges + node.red_edges:
            raise AssertionError("edge counts do not add up")
        if node.kind == "red":
            if node.red_edges > node.n - max(sizes):
                raise AssertionError("too many red edges for the class sizes")
            if not entropy_check(sizes).holds:
                raise AssertionError("entropy inequality failed")
        if 4**node.edges > node.n**node.n:
            raise AssertionError("node exceeds 1/2 n log2 n")
        return node.edges

    total = walk(cert.root)
    if total != cert.edges:
        raise AssertionError("certificate edge total mismatch")
    return total


# ----------------------------------------------------------------------
# directions determined by a point set


@dataclass
class UngarReport:
    n: int
    directions: int
    collinear: bool

    @property
    def holds(self) -> bool:
        return self.collinear or self.directions >= self.n - 1

    def to_json(self) -> dict:
        return {"n": self.n, "directions": self.directions, "collinear": self.collinear, "holds": self.holds}


def ungar_directions(points) -> UngarReport:
    """Number of distinct lines through the origin parallel to some
    ``p_j - p_i``.  A non-collinear set of ``n`` points gives at least
    ``n - 1``."""
    pts = [qvec(p) for p in points]
    if len(set(pts)) != len(pts):
        raise DomainError("points must be distinct")
    keys = {line_key(tuple(b - a for a, b in zip(p, q))) for i, p in enumerate(pts) for q in pts[i + 1:]}
    diffs = [tuple(b - a for a, b in zip(pts[0], q)) for q in pts[1:]]
    collinear = rank(diffs) <= 1
    return UngarReport(len(pts), len(keys), collinear)


# ----------------------------------------------------------------------
# matroid partition


@dataclass
class Partition:
    classes: list
    remainder: list

    def to_json(self) -> dict:
        return {"classes": self.classes, "remainder": self.remainder}


def matroid_partition(vectors, d: int, m: int) -> Partition:
    """Split the indices into ``d`` independent classes and at most ``m``
    leftovers.

    Matroid union of ``d`` copies of the linear matroid with the uniform
    matroid of rank ``m``, grown one element at a time along shortest
    exchange paths.  Possible exactly when the span audit is clean; if
    not, the error carries the set reachable in the exchange graph.
    """
    vs = _vectors(vectors)
    if d < 1 or m < 0:
        raise DomainError("need d >= 1 and m >= 0")
    rank_of = {}

    def independent(s: int, members) -> bool:
        if s == d:
            return len(members) <= m
        key = frozenset(members)
        if key not in rank_of:
            rank_of[key] = rank([vs[i] for i in sorted(key)]) == len(key)
        return rank_of[key]

    sets: list[set] = [set() for _ in range(d + 1)]
    home: dict[int, int] = {}
    for x in range(len(vs)):
        parent: dict[int, tuple[int, int] | None] = {x: None}
        queue = deque([x])
        sink = None
        while queue and sink is None:
            y = queue.popleft()
            for s in range(d + 1):
                if home.get(y) == s:
                    continue
                if independent(s, sets[s] | {y}):
                    sink = (y, s)
                    break
                for z in sorted(sets[s]):
                    if z not in parent and independent(s, (sets[s] - {z}) | {y}):
                        parent[z] = (y, s)
                        queue.append(z)
        if sink is None:
            raise InfeasiblePartition(
                f"element {x} cannot be placed; the span audit fails", blocking=sorted(parent)
            )
        y, s = sink
        while True:
            old = home.get(y)
            if old is not None:
                sets[old].discard(y)
            sets[s].add(y)
            home[y] = s
            if parent[y] is None:
                break
            y, s = parent[y][0], old
        for s in range(d + 1):
            if not independent(s, sets[s]):
                raise AssertionError("augmentation broke independence")
    return Partition([sorted(c) for c in sets[:d]], sorted(sets[d]))


# ----------------------------------------------------------------------
# odd-distance colouring


@dataclass
class OddColoring:
    colors: list
    edges: list
    directions: list
    partition: Partition

    @property
    def num_colors(self) -> int:
        return len(set(self.colors))

    @property
    def proper(self) -> bool:
        return all(self.colors[i] != self.colors[j] for i, j in self.edges)

    def to_json(self) -> dict:
        return {
            "colors": self.colors,
            "num_colors": self.num_colors,
            "proper": self.proper,
            "odd_edges": [list(e) for e in self.edges],
            "classes": self.partition.classes,
        }


def odd_distance_coloring(norm: PolytopeNorm, ps: PointSet, d: int | None = None) -> OddColoring:
    """Proper colouring of the odd-distance graph with at most ``2^d`` colours.

    The odd-distance directions are split into ``d`` independent classes;
    within a class every cycle has even length, so each class is
    2-coloured and a vertex's colour is the tuple of its ``d`` bits.
    Raises :class:`AuditViolation` when the directions fail the audit.
    """
    if ps.mode != EXACT or not isinstance(norm, PolytopeNorm):
        raise ModeMismatch("odd-distance colouring needs exact points and a polytope norm")
    d = ps.d if d is None else d
    dist = exact_distances(norm, ps)
    edges, edge_dir, dirs = [], [], {}
    for (i, j), r in dist.items():
        if r.denominator == 1 and r.numerator % 2 == 1:
            u = sign_canonical(tuple((b - a) / r for a, b in zip(ps.points[i], ps.points[j])))
            edge_dir.append(dirs.setdefault(u, len(dirs)))
            edges.append((i, j))
    directions = list(dirs)
    require_clean(directions, d, 0)
    part = matroid_partition(directions, d, 0)
    cls_of = {u: c for c, members in enumerate(part.classes) for u in members}
    colors = [0] * len(ps)
    for c in range(d):
        adj = defaultdict(list)
        for (i, j), k in zip(edges, edge_dir):
            if cls_of[k] == c:
                adj[i].append(j)
                adj[j].append(i)
        bit = {}
        for s in range(len(ps)):
            if s in bit:
                continue
            bit[s] = 0
            queue = deque([s])
            while queue:
                a = queue.popleft()
                for b in adj[a]:
                    if b not in bit:
                        bit[b] = 1 - bit[a]
                        queue.append(b)
                    elif bit[b] == bit[a]:
                        raise AssertionError("odd cycle inside an independent class")
        for v in range(len(ps)):
            colors[v] |= bit[v] << c
    result = OddColoring(colors, edges, directions, part)
    if not result.proper:
        raise AssertionError("colouring is not proper")
    return result
