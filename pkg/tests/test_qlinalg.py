from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from unitdist.qlinalg import (
    format_rational,
    in_span,
    is_independent,
    line_key,
    nullspace,
    primitive_integer,
    rank,
    rref,
    sign_canonical,
    span_coefficients,
    to_rational,
)

small = st.integers(-4, 4)
rationals = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))


def matrices(max_rows=4, max_cols=4):
    return st.integers(1, max_cols).flatmap(
        lambda c: st.lists(st.lists(rationals, min_size=c, max_size=c), min_size=1, max_size=max_rows)
    )


def test_parse_and_format():
    assert to_rational("3/6") == Fraction(1, 2)
    assert to_rational(" -4 ") == -4
    assert format_rational(Fraction(3, 2)) == "3/2"
    assert format_rational(Fraction(-8, 2)) == "-4"
    with pytest.raises(TypeError):
        to_rational(0.1)
    with pytest.raises(ValueError):
        to_rational("1/0")
    with pytest.raises(ValueError):
        to_rational("")


def test_rank_examples():
    assert rank([[1, 0], [0, 1]]) == 2
    assert rank([[1, 0], [2, 0]]) == 1
    assert rank([[1, 2, 3], [4, 5, 6], [7, 8, 9]]) == 2
    assert rank([]) == 0


def test_span_examples():
    assert in_span([(1, 0), (0, 1)], (1, 1))
    assert not in_span([(1, 0)], (1, 1))
    assert in_span([(1, 2, 3)], (2, 4, 6))
    assert span_coefficients([(1, 2, 3)], (2, 4, 6)) == (2,)
    assert span_coefficients([(1, 0)], (1, 1)) is None


def test_nullspace_examples():
    assert nullspace([[1, 0], [0, 1]]) == []
    (v,) = nullspace([[1, 1]])
    assert v[0] == -v[1] != 0
    # forms t1 = u1, t2 = 2 u2, t3 = 3 u1 + 3 u2: the relation on (t1, t2, t3)
    (c,) = nullspace([[1, 0, 3], [0, 2, 3]])
    assert [x / c[0] for x in c] == [1, Fraction(1, 2), Fraction(-1, 3)]
    assert [x * 3 / c[0] for x in c] == [3, Fraction(3, 2), -1]


def test_rref_pivots_first_nonzero_column():
    rows, pivots = rref([[0, 2, 4], [1, 1, 1]])
    assert pivots == [0, 1]
    assert rows == [[1, 0, -1], [0, 1, 2]]


def test_primitive_and_line_key():
    assert primitive_integer((Fraction(1, 2), Fraction(-3, 4))) == (2, -3)
    assert sign_canonical((0, -1, 2)) == (0, 1, -2)
    assert line_key((Fraction(-2, 3), Fraction(4, 3))) == (1, -2)
    with pytest.raises(ValueError):
        primitive_integer((0, 0))


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_rank_matches_sympy(m):
    assert rank(m) == sympy.Matrix(m).rank()


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_nullspace_is_annihilated_and_complete(m):
    basis = nullspace(m)
    cols = len(m[0])
    assert len(basis) == cols - rank(m)
    for v in basis:
        assert all(sum(a * x for a, x in zip(row, v)) == 0 for row in m)
    if basis:
        assert is_independent(basis)


@settings(max_examples=150, deadline=None)
@given(matrices(), st.lists(rationals, min_size=4, max_size=4))
def test_span_coefficients_reconstruct(m, coeffs):
    target = tuple(sum(c * row[j] for c, row in zip(coeffs, m)) for j in range(len(m[0])))
    a = span_coefficients(m, target)
    assert a is not None
    assert tuple(sum(c * row[j] for c, row in zip(a, m)) for j in range(len(m[0]))) == target
    assert in_span(m, target)


@given(st.lists(small, min_size=1, max_size=4).filter(any), st.integers(1, 5), st.sampled_from([1, -1]))
def test_line_key_scale_invariant(v, k, s):
    assert line_key(v) == line_key([s * k * x for x in v])
