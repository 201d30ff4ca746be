import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unitdist.errors import DomainError, RetryBudgetExhausted
from unitdist.genericity import (
    DependencyScheme,
    HyperplaneFamily,
    achievability_hyperplane,
    achieved_offsets,
    family_for_schemes,
    full_family,
    height_bounded_schemes,
    sample_generic_polytope,
    scheme_forms,
)
from unitdist.norms import random_polytope_norm

EXAMPLE = DependencyScheme(2, 1, ((1,), (2,), (3,)))
EXAMPLE_NORMALS = ((1, 0), (0, 1), (1, 1))


def proportional(a, b):
    k = next(i for i, x in enumerate(b) if x)
    r = Fraction(a[k]) / b[k]
    return r != 0 and all(Fraction(x) == r * y for x, y in zip(a, b))


def random_scheme(rng, d, l):
    vals = [Fraction(p, q) for p in range(-2, 3) for q in (1, 2)]
    rows = [tuple(int(i == j) for j in range(l)) for i in range(l)]
    rows += [tuple(rng.choice(vals) for _ in range(l)) for _ in range(d * l + 1 - l)]
    return DependencyScheme(d, l, tuple(rows))


def test_worked_example():
    forms = scheme_forms(EXAMPLE, EXAMPLE_NORMALS, (0, 1, 2), (1, 1, 1))
    assert forms == ((1, 0), (0, 2), (3, 3))
    plane = achievability_hyperplane(EXAMPLE, EXAMPLE_NORMALS, (0, 1, 2), (1, 1, 1))
    assert proportional(plane, (3, Fraction(3, 2), -1))


def test_sign_flip_negates_one_coefficient():
    base = achievability_hyperplane(EXAMPLE, EXAMPLE_NORMALS, (0, 1, 2), (1, 1, 1))
    flipped = achievability_hyperplane(EXAMPLE, EXAMPLE_NORMALS, (0, 1, 2), (1, -1, 1))
    assert proportional(flipped, (base[0], -base[1], base[2]))


def test_family_sizes():
    fam = full_family(EXAMPLE, EXAMPLE_NORMALS)
    assert 0 < len(fam) <= 6 * 2**3
    assert fam.placements == 6
    assert len(full_family(EXAMPLE, EXAMPLE_NORMALS[:2])) == 0
    assert family_for_schemes([EXAMPLE], EXAMPLE_NORMALS[:2]).relations == 0


def test_hit_examples():
    single = HyperplaneFamily(3, [[6, 3, 2]])
    assert single.hit((1, 2, 6)) is not None
    assert single.hit((1, 2, 7)) is None
    assert HyperplaneFamily(3, np.zeros((0, 3))).hit((1, 2, 6)) is None
    fam = full_family(EXAMPLE, EXAMPLE_NORMALS)
    assert fam.hit((1, 2, 6)) is not None


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_hyperplane_annihilates_forms_and_achieved_offsets(seed):
    rng = random.Random(seed)
    d, l = rng.choice([(2, 1), (2, 2), (3, 1), (3, 2)])
    scheme = random_scheme(rng, d, l)
    h = scheme.rows + rng.randint(0, 2)
    normals = random_polytope_norm(d, h, rng).normals
    phi = tuple(rng.sample(range(h), scheme.rows))
    signs = tuple(rng.choice((1, -1)) for _ in range(scheme.rows))
    forms = scheme_forms(scheme, normals, phi, signs)
    plane = achievability_hyperplane(scheme, normals, phi, signs)
    assert any(plane)
    c = [plane[f] for f in phi]
    for q in range(d * l):
        assert sum(cj * row[q] for cj, row in zip(c, forms)) == 0
    # any concrete vectors give offsets on the plane
    us = [tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 7)) for _ in range(d)) for _ in range(l)]
    t = achieved_offsets(scheme, normals, phi, signs, us)
    assert sum(plane[f] * t[f] for f in phi) == 0


@pytest.mark.parametrize("seed", range(4))
def test_batched_route_matches_exact_route(seed):
    rng = random.Random(seed)
    d = 2
    schemes = [random_scheme(rng, d, rng.choice([1, 2])) for _ in range(4)]
    normals = random_polytope_norm(d, 6, rng).normals
    batched = family_for_schemes(schemes, normals)
    exact = set()
    for s in schemes:
        exact |= set(map(tuple, full_family(s, normals).weights.tolist()))
    assert set(map(tuple, batched.weights.tolist())) == exact


def test_scheme_list_normal_form():
    s2 = height_bounded_schemes(2)
    s3 = height_bounded_schemes(3)
    assert (len(s2), len(s3)) == (174, 996)
    for s in s2[:50] + s3[:50]:
        assert all(max(abs(x.numerator), x.denominator) <= 2 for r in s.A for x in r)
        extra = s.A[s.l:]
        for i, r in enumerate(extra):
            assert any(r)
            for other in list(s.A[:s.l]) + list(extra[i + 1:]):
                assert not proportional(r, other)
    assert not [s for s in s2 + s3 if s.l == 1]


def test_symmetry_reduction_keeps_the_family():
    normals = random_polytope_norm(2, 6, random.Random(7)).normals
    reduced = family_for_schemes(height_bounded_schemes(2), normals)
    full = family_for_schemes(height_bounded_schemes(2, reduce_symmetry=False), normals)
    assert np.array_equal(reduced.weights, full.weights)


def test_scheme_json_round_trip():
    s = DependencyScheme(2, 2, ((1, 0), (0, 1), (1, Fraction(1, 2)), (2, -1), (1, 1)), Fraction(1, 3))
    assert DependencyScheme.from_json(s.to_json()) == s
    with pytest.raises(DomainError):
        DependencyScheme.from_json({"d": 2})


def test_sampling_avoids_every_plane():
    rng = random.Random(3)
    base = random_polytope_norm(2, 5, rng)
    schemes = [random_scheme(rng, 2, 2) for _ in range(6)] + [EXAMPLE]
    fam = family_for_schemes(schemes, base.normals)
    g = sample_generic_polytope(base, fam, Fraction(1, 50), seed=11)
    t = g.norm.offsets
    for s, new in zip(base.offsets, t):
        assert s <= new <= s + Fraction(1, 50)
    assert all(sum(c * x for c, x in zip(p, t)) != 0 for p in fam.planes())
    assert g.hausdorff_bound > 0
    again = sample_generic_polytope(base, fam, Fraction(1, 50), seed=11)
    assert again.norm == g.norm
    with pytest.raises(RetryBudgetExhausted):
        sample_generic_polytope(base, fam, Fraction(1, 50), seed=11, retries=0)
