import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from atmr.core import StructuralError
from atmr.ranking import (
    Preference,
    cdp_compare,
    cdp_sort,
    crowding_distance,
    dominates,
    first_front,
    nondominated_sort,
)

import oracles
from conftest import make_solution

coord = st.integers(0, 4).map(float)


def vectors(m):
    return st.lists(coord, min_size=m, max_size=m)


@pytest.mark.parametrize(
    ("a", "b", "expected"),
    [((1, 2), (2, 3), True), ((1, 2), (2, 1), False), ((2, 1), (1, 2), False), ((1, 2), (1, 2), False)],
)
def test_dominates_examples(a, b, expected):
    assert dominates(a, b) is expected


def test_dominates_length_mismatch():
    with pytest.raises(StructuralError):
        dominates((1, 2), (1, 2, 3))


@given(vectors(3))
def test_dominates_irreflexive(a):
    assert not dominates(a, a)


steps = st.lists(st.integers(0, 3).map(float), min_size=3, max_size=3).filter(any)


@given(vectors(3), steps, steps)
def test_dominates_transitive(a, d1, d2):
    # nonnegative, nonzero steps build a chain where the premise holds
    b = [x + d for x, d in zip(a, d1)]
    c = [x + d for x, d in zip(b, d2)]
    assert dominates(a, b) and dominates(b, c)
    assert dominates(a, c)


def test_cdp_examples():
    assert cdp_compare(make_solution((5, 5), 0.1), make_solution((0, 0), 0.2)) is Preference.A_BETTER
    assert cdp_compare(make_solution((5, 5), 0.0), make_solution((0, 0), 0.3)) is Preference.A_BETTER
    assert cdp_compare(make_solution((1, 2)), make_solution((2, 1))) is Preference.TIE
    assert cdp_compare(make_solution((1, 1)), make_solution((2, 2))) is Preference.A_BETTER
    assert cdp_compare(make_solution((3, 3), 0.4), make_solution((0, 0), 0.4)) is Preference.TIE


@given(vectors(2), vectors(2), st.floats(1e-9, 1e3))
def test_cdp_never_prefers_infeasible(fa, fb, G):
    feasible, infeasible = make_solution(fa, 0.0), make_solution(fb, G)
    assert cdp_compare(feasible, infeasible) is Preference.A_BETTER
    assert cdp_compare(infeasible, feasible) is Preference.B_BETTER


@pytest.mark.parametrize(
    ("points", "fronts"),
    [([(1, 1), (2, 2), (3, 3)], [[0], [1], [2]]), ([(1, 3), (2, 2), (3, 1)], [[0, 1, 2]])],
)
def test_sort_examples(points, fronts):
    assert nondominated_sort(points) == fronts


def test_sort_64_random_3d():
    P = np.random.default_rng(64).random((64, 3))
    assert nondominated_sort(P) == oracles.brute_force_fronts(P.tolist())


@given(st.integers(1, 4).flatmap(lambda m: st.lists(vectors(m), min_size=1, max_size=30)))
def test_sort_matches_oracle_with_duplicates(points):
    assert nondominated_sort(points) == oracles.brute_force_fronts(points)


def test_sort_rejects_empty():
    with pytest.raises(StructuralError):
        nondominated_sort(np.zeros((0, 2)))


def test_first_front():
    np.testing.assert_array_equal(first_front(np.array([[1, 3], [2, 2], [2, 3], [3, 1]])), [0, 1, 3])


def test_crowding_examples():
    assert np.all(np.isinf(crowding_distance([(0, 1), (1, 0)])))
    cd = crowding_distance([(0, 2), (1, 1), (2, 0)])
    assert np.isinf(cd[0]) and np.isinf(cd[2]) and cd[1] == 2.0
    same = crowding_distance([(1, 1)] * 4)
    assert np.count_nonzero(same == 0.0) == 2


@given(st.lists(vectors(2), min_size=3, max_size=20))
def test_crowding_matches_oracle_on_interior(points):
    ours = crowding_distance(points)
    ref = oracles.crowding(points)
    finite = np.isfinite(ref)
    # boundary choice among equal values may differ; interior values must agree
    assert np.count_nonzero(np.isinf(ours)) == np.count_nonzero(~finite)
    np.testing.assert_allclose(np.sort(ours[np.isfinite(ours)]), np.sort(np.asarray(ref)[finite]))


@given(vectors(2), vectors(2), st.floats(1e-6, 10))
def test_infeasible_never_dominates_feasible_in_transformed_space(f_feas, f_inf, G):
    a = [*f_feas, 0.0]
    b = [*f_inf, G]
    assert not dominates(b, a)


def _cdp_dominates(fa, ga, fb, gb):
    if ga == 0 and gb == 0:
        return oracles.dominates(fa, fb)
    return ga < gb


def test_cdp_sort_matches_oracle():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(1, 30))
        F = rng.integers(0, 5, size=(n, 2)).astype(float)
        G = np.where(rng.random(n) < 0.5, 0.0, rng.integers(1, 4, n).astype(float))
        remaining = list(range(n))
        expected = []
        while remaining:
            front = [i for i in remaining
                     if not any(_cdp_dominates(F[j], G[j], F[i], G[i]) for j in remaining if j != i)]
            expected.append(front)
            remaining = [i for i in remaining if i not in front]
        assert cdp_sort(F, G) == expected
