import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unitdist.constructions import (
    base3_digits,
    bipartite_construction,
    bipartite_promised,
    compose_base3,
    hypercube_embedding,
    run_trials,
    sphere_intersection_samples,
    triangle_power,
    unit_circle_partner,
)
from unitdist.distgraph import EXACT, FLOAT, build_udg
from unitdist.errors import DomainError, NotStrictlyConvex
from unitdist.norms import (
    EuclideanNorm,
    LpNorm,
    StrictifiedNorm,
    cube_norm,
    eval_norm,
    random_polytope_norm,
    random_round_polytope_norm,
)

EUCLID = EuclideanNorm(2)


def flip_pairs(k):
    """Index pairs of the k-cube whose 0/1 choice vectors differ in one place."""
    out = set()
    for i in range(2**k):
        for b in range(k):
            j = i ^ (1 << (k - 1 - b))
            if i < j:
                out.add((i, j))
    return out


def test_hypercube_small():
    norm = cube_norm(2)
    r1 = hypercube_embedding(norm, 1, seed=0)
    assert len(r1.points) == 2 and len(build_udg(norm, r1.points)) == 1
    r3 = hypercube_embedding(norm, 3, seed=0)
    assert len(r3.points) == 8 and r3.promised_edges == 12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 7))
def test_hypercube_contains_every_flip_edge(seed, k):
    norm = random_round_polytope_norm(2, random.Random(seed))
    res = hypercube_embedding(norm, k, seed=seed)
    assert res.points.mode == EXACT and len(res.points) == 2**k
    assert flip_pairs(k) <= set(build_udg(norm, res.points).edges)


def test_hypercube_k10_exact():
    norm = random_polytope_norm(2, 5, random.Random(11))
    res = hypercube_embedding(norm, 10, seed=7)
    assert len(res.points) == 1024
    assert len(build_udg(norm, res.points)) >= 5120


def test_unit_circle_partner():
    y = unit_circle_partner(EUCLID, (1, 0))
    assert np.allclose(y, (0.5, math.sqrt(3) / 2), atol=1e-12)
    for norm in (LpNorm(2, 3), StrictifiedNorm(cube_norm(2), 0.05)):
        x = np.array([1.0, 0.7]) / eval_norm(norm, (1.0, 0.7))
        y = unit_circle_partner(norm, x)
        assert abs(eval_norm(norm, y) - 1) < 1e-9
        assert abs(eval_norm(norm, y - x) - 1) < 1e-9
    with pytest.raises(NotStrictlyConvex):
        unit_circle_partner(cube_norm(2), (1, 0))


def test_triangle_powers():
    r1 = triangle_power(EUCLID, 1, seed=0)
    assert len(r1.points) == 3 and len(build_udg(EUCLID, r1.points)) == 3
    r2 = triangle_power(EUCLID, 2, seed=0)
    assert len(r2.points) == 9 and len(build_udg(EUCLID, r2.points)) >= 18
    r5 = triangle_power(EUCLID, 5, seed=0)
    assert r5.points.mode == FLOAT and len(r5.points) == 243
    assert len(build_udg(EUCLID, r5.points)) >= 1215


def test_base3():
    assert base3_digits(10) == [1, 0, 1]
    assert base3_digits(27) == [0, 0, 0, 1]
    for n, edges in ((3, 3), (10, 18), (27, 81)):
        res = compose_base3(EUCLID, n, seed=1)
        assert len(res.points) == n and res.promised_edges == edges
        assert len(build_udg(EUCLID, res.points)) >= edges


def test_sphere_intersections():
    samples = sphere_intersection_samples([(0, 0, 0), (1, 0, 0)], 20, seed=3)
    for z in samples:
        assert abs(np.linalg.norm(z) - 1) < 1e-12
        assert abs(np.linalg.norm(z - np.array([1, 0, 0])) - 1) < 1e-12
        assert abs(z[0] - 0.5) < 1e-12
        assert abs(math.hypot(z[1], z[2]) - math.sqrt(3) / 2) < 1e-12
    with pytest.raises(DomainError):
        sphere_intersection_samples([(0, 0, 0), (2, 0, 0)], 1)


def test_bipartite_formula():
    assert bipartite_promised(2, 2, 2) == 4
    assert bipartite_promised(2, 2, 1) == 1
    assert bipartite_promised(3, 2, 3) == 48
    assert bipartite_promised(3, 3, 2) == 2 * 2 * 2 * 3 * 2


@pytest.mark.parametrize("k,m", [(2, 1), (2, 2), (3, 3), (4, 2)])
def test_bipartite_planar_exact(k, m):
    norm = random_polytope_norm(2, 5, random.Random(k * 10 + m))
    res = bipartite_construction(norm, 2, k, m, seed=2)
    assert res.points.mode == EXACT and len(res.points) == k * 2**m
    assert len(build_udg(norm, res.points)) >= res.promised_edges


def test_bipartite_space_euclidean():
    norm = EuclideanNorm(3)
    res = bipartite_construction(norm, 3, 2, 3, seed=0)
    assert len(res.points) == 2**2 * 2**3
    assert len(build_udg(norm, res.points)) >= 48
    with pytest.raises(DomainError):
        bipartite_construction(cube_norm(3), 3, 2, 1)


def test_metadata_and_trials():
    norm = random_polytope_norm(2, 4, random.Random(0))
    out = hypercube_embedding(norm, 2, seed=5).to_json()
    meta = out["metadata"]
    assert meta["construction"] == "hypercube" and meta["seed"] == 5 and len(meta["factors"]) == 2
    serial = run_trials(hypercube_embedding, range(3), norm=norm, k=3)
    parallel = run_trials(hypercube_embedding, range(3), jobs=2, norm=norm, k=3)
    assert [r.to_json() for r in serial] == [r.to_json() for r in parallel]


def test_seeded_constructions_are_reproducible():
    a = triangle_power(EUCLID, 3, seed=9).to_json()
    b = triangle_power(EUCLID, 3, seed=9).to_json()
    assert a == b
    assert len({tuple(p) for p in a["points"]}) == 27
