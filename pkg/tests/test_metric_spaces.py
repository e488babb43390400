import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from modricci.metric_spaces import (
    FiniteMetricSpace,
    cone_distance,
    cone_space,
    correspondence_distortion,
    gh_distance,
    gh_exact,
    gh_lower_bound,
    gh_search,
)


def space(D):
    D = np.asarray(D, dtype=float)
    return FiniteMetricSpace(list(range(len(D))), D)


def random_space(rng, k, dim=2):
    P = rng.random((k, dim))
    return space(np.linalg.norm(P[:, None] - P[None], axis=-1))


def brute_gh(A, B):
    """Minimise the distortion over every correspondence (tiny spaces only)."""
    cells = list(itertools.product(range(A.size), range(B.size)))
    best = math.inf
    for mask in range(1, 1 << len(cells)):
        pairs = [cells[i] for i in range(len(cells)) if mask >> i & 1]
        if {a for a, _ in pairs} != set(range(A.size)) or {b for _, b in pairs} != set(range(B.size)):
            continue
        dis = max(abs(A.D[a, a2] - B.D[b, b2]) for a, b in pairs for a2, b2 in pairs)
        best = min(best, dis)
    return 0.5 * best


def test_identical():
    A = space([[0, 1], [1, 0]])
    assert gh_distance(A, A) == {"lower": 0.0, "upper": 0.0, "exact": True}


def test_two_point_spaces():
    A = space([[0, 1], [1, 0]])
    B = space([[0, 2], [2, 0]])
    assert brute_gh(A, B) == 0.5
    assert gh_exact(A, B) == 0.5
    assert gh_distance(A, B)["upper"] == 0.5


def test_against_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(15):
        A = random_space(rng, int(rng.integers(1, 4)))
        B = random_space(rng, int(rng.integers(1, 5)))
        assert gh_exact(A, B) == pytest.approx(brute_gh(A, B), abs=1e-12)


def test_search_matches_exact_small():
    rng = np.random.default_rng(11)
    for _ in range(10):
        A = random_space(rng, int(rng.integers(2, 7)))
        B = random_space(rng, int(rng.integers(2, 7)))
        up, pairs = gh_search(A, B, restarts=50, seed=1)
        assert up == pytest.approx(gh_exact(A, B), abs=1e-12)
        assert 0.5 * correspondence_distortion(A, B, pairs) == pytest.approx(up, abs=1e-12)


def test_cone_examples():
    assert cone_distance(1.0, 1.0, math.pi / 2) == pytest.approx(math.sqrt(2))
    assert cone_distance(0.3, 0.5, 4.0) == pytest.approx(0.8)


def test_cone_over_circle_is_disk():
    m = 24
    th = 2 * math.pi * np.arange(m) / m
    dz = np.abs(th[:, None] - th[None])
    Z = space(np.minimum(dz, 2 * math.pi - dz))
    radii = np.linspace(0.1, 1.0, 6)
    C = cone_space(Z, radii)
    P = np.array([[r * math.cos(t), r * math.sin(t)] for r in radii for t in th])
    disk = space(np.linalg.norm(P[:, None] - P[None], axis=-1))
    assert np.max(np.abs(C.D - disk.D)) < 1e-12


@st.composite
def metric_pair(draw):
    seed = draw(st.integers(0, 10_000))
    rng = np.random.default_rng(seed)
    return random_space(rng, draw(st.integers(1, 5))), random_space(rng, draw(st.integers(1, 5)))


@given(metric_pair())
def test_gh_symmetric(pair):
    A, B = pair
    assert gh_exact(A, B) == pytest.approx(gh_exact(B, A), abs=1e-12)


@given(metric_pair())
def test_lower_le_upper(pair):
    A, B = pair
    up, _ = gh_search(A, B, restarts=10, seed=0)
    assert gh_lower_bound(A, B) <= gh_exact(A, B) + 1e-12 <= up + 2e-12


@given(st.integers(0, 10_000), st.integers(2, 6))
def test_relabel_gives_zero(seed, k):
    rng = np.random.default_rng(seed)
    A = random_space(rng, k)
    perm = rng.permutation(k)
    B = space(A.D[np.ix_(perm, perm)])
    assert gh_exact(A, B) == pytest.approx(0.0, abs=1e-12)
    assert gh_search(A, B, restarts=20)[0] == pytest.approx(0.0, abs=1e-12)


@given(st.integers(0, 10_000))
def test_triangle_inequality_of_upper(seed):
    rng = np.random.default_rng(seed)
    A, B, C = (random_space(rng, int(rng.integers(2, 5))) for _ in range(3))
    ab, bc, ac = gh_exact(A, B), gh_exact(B, C), gh_exact(A, C)
    assert ac <= ab + bc + 1e-12


@given(st.floats(0.1, 2.0), st.floats(0.1, 2.0))
def test_one_point_cone_is_segment(r1, r2):
    assert cone_distance(r1, r2, 0.0) == pytest.approx(abs(r1 - r2), abs=1e-7)
