"""Exact linear algebra over the rationals.

Vectors are tuples of :class:`fractions.Fraction`; matrices are tuples of
row vectors.  Elimination always pivots on the first nonzero entry in
column order, so every result here is reproducible bit for bit.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Iterable, Sequence

Rational = Fraction
QVector = tuple
QMatrix = tuple


def to_rational(value) -> Fraction:
    """Parse ``"p/q"``, ``"p"``, an int or a Fraction into a Fraction.

    Floats are rejected: silently turning 0.1 into 3602879701896397/2**55
    is never what a caller of the exact layer wants.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational literal")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed rational {value!r}") from exc
    raise TypeError(f"cannot read {type(value).__name__} as an exact rational")


def format_rational(q: Fraction) -> str:
    """``Fraction(3, 2)`` -> ``"3/2"``, ``Fraction(4)`` -> ``"4"``."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def qvec(entries: Iterable) -> QVector:
    return tuple(to_rational(x) for x in entries)


def qmat(rows: Iterable[Iterable]) -> QMatrix:
    m = tuple(qvec(r) for r in rows)
    if m and len({len(r) for r in m}) != 1:
        raise ValueError("ragged matrix")
    return m


def dot(u: Sequence, v: Sequence):
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def sub(u: Sequence, v: Sequence) -> QVector:
    return tuple(a - b for a, b in zip(u, v))


def add(u: Sequence, v: Sequence) -> QVector:
    return tuple(a + b for a, b in zip(u, v))


def scale(c, u: Sequence) -> QVector:
    return tuple(c * a for a in u)


def transpose(m: QMatrix) -> QMatrix:
    if not m:
        return ()
    return tuple(zip(*m))


def rref(m: QMatrix) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and the pivot columns."""
    rows = [list(map(to_rational, r)) for r in m]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        if r == len(rows):
            break
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pivot = rows[r][c]
        if pivot != 1:
            rows[r] = [x / pivot for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows, pivots


def rank(m: QMatrix) -> int:
    """Row rank of ``m``.  ``rank(((1,2,3),(4,5,6),(7,8,9))) == 2``."""
    return _rank_cached(_freeze(m))


@lru_cache(maxsize=65536)
def _rank_cached(m: QMatrix) -> int:
    if not m:
        return 0
    # forward elimination is enough for the rank
    rows = [list(r) for r in m]
    ncols = len(rows[0])
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        for i in range(r + 1, len(rows)):
            if rows[i][c] != 0:
                f = rows[i][c] / rows[r][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


def _freeze(m) -> QMatrix:
    return tuple(tuple(to_rational(x) for x in row) for row in m)


def in_span(vectors: Sequence[QVector], v: QVector) -> bool:
    """Whether ``v`` is a rational combination of ``vectors``."""
    if not vectors:
        return all(x == 0 for x in v)
    vs = _freeze(vectors)
    return rank(vs + (_freeze([v])[0],)) == rank(vs)


def span_coefficients(vectors: Sequence[QVector], v: QVector) -> QVector | None:
    """Coefficients ``a`` with ``sum(a_i * vectors[i]) == v``, or None.

    When the vectors are dependent the free coefficients are set to zero.
    """
    k = len(vectors)
    if k == 0:
        return () if all(x == 0 for x in v) else None
    # columns are the vectors, augmented with v
    aug = [list(col) + [x] for col, x in zip(transpose(_freeze(vectors)), map(to_rational, v))]
    rows, pivots = rref(aug)
    if k in pivots:
        return None
    coeffs = [Fraction(0)] * k
    for row, c in zip(rows, pivots):
        coeffs[c] = row[k]
    return tuple(coeffs)


def nullspace(m: QMatrix) -> list[QVector]:
    """Basis of ``{x : m x = 0}``, one vector per free column.

    ``nullspace(((1, 1),))`` is ``[(-1, 1)]``; the basis vector for a free
    column ``f`` has a 1 in position ``f`` and zeros in the other free
    positions.
    """
    m = _freeze(m)
    if not m:
        return []
    ncols = len(m[0])
    rows, pivots = rref(m)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(rows, pivots):
            x[p] = -row[f]
        basis.append(tuple(x))
    return basis


def is_independent(vectors: Sequence[QVector]) -> bool:
    return rank(vectors) == len(vectors)


def primitive_integer(v: Sequence) -> tuple[int, ...]:
    """Scale a nonzero rational vector to coprime integers, keeping its sign."""
    v = [to_rational(x) for x in v]
    den = lcm(*(x.denominator for x in v)) if v else 1
    ints = [int(x * den) for x in v]
    g = 0
    for a in ints:
        g = gcd(g, a)
    if g == 0:
        raise ValueError("zero vector has no primitive form")
    return tuple(a // g for a in ints)


def sign_canonical(v: Sequence) -> QVector:
    """Flip ``v`` so that its first nonzero coordinate is positive."""
    for x in v:
        if x != 0:
            return tuple(v) if x > 0 else tuple(-y for y in v)
    return tuple(v)


def line_key(v: Sequence) -> tuple[int, ...]:
    """Canonical key of the line through the origin spanned by ``v``."""
    return sign_canonical(primitive_integer(v))
