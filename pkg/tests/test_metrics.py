import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from atmr.core import CapabilityError, StructuralError
from atmr.metrics import evaluate_population, hv_monte_carlo, hv_reference_point, hypervolume, igd

import oracles
from conftest import make_solution

sets2 = st.integers(1, 12).flatmap(lambda n: arrays(np.float64, (n, 2), elements=st.floats(0, 1)))
sets3 = st.integers(1, 8).flatmap(lambda n: arrays(np.float64, (n, 3), elements=st.floats(0, 1)))


def test_igd_examples():
    R = np.random.default_rng(0).random((20, 2))
    assert igd(R, R) == 0.0
    assert igd([[3, 4]], [[0, 0]]) == 5.0
    assert igd(np.zeros((0, 2)), R) is None
    with pytest.raises(StructuralError):
        igd([[0, 0, 0]], R)


def test_igd_matches_double_loop():
    rng = np.random.default_rng(1)
    for _ in range(30):
        A = rng.random((int(rng.integers(1, 50)), 3))
        R = rng.random((int(rng.integers(1, 50)), 3))
        assert igd(A, R) == pytest.approx(oracles.igd(A.tolist(), R.tolist()), rel=1e-12)


@given(sets2, sets2, arrays(np.float64, (2,), elements=st.floats(0, 1)))
def test_igd_monotone_in_approx(A, R, extra):
    assert igd(np.vstack([A, extra]), R) <= igd(A, R)


def test_hv_worked_values():
    assert hypervolume([[0.5, 0.5]], [1, 1]) == 0.25
    assert abs(hypervolume([[0.2, 0.8], [0.8, 0.2]], [1, 1]) - 0.28) <= np.spacing(0.28)


def test_hv_ignores_points_beyond_reference():
    assert hypervolume([[1.0, 0.5], [2, 0]], [1, 1]) == 0.0
    assert hypervolume(np.zeros((0, 2)), [1, 1]) == 0.0


def test_hv_rejects_many_objectives():
    with pytest.raises(CapabilityError):
        hypervolume(np.zeros((1, 4)), np.ones(4))


@given(sets2)
def test_hv2d_equals_inclusion_exclusion(P):
    assert hypervolume(P, [1.1, 1.1]) == pytest.approx(oracles.hv_inclusion_exclusion(P.tolist(), [1.1, 1.1]), abs=1e-12)


@given(sets3)
def test_hv3d_equals_inclusion_exclusion(P):
    assert hypervolume(P, [1.0, 1.2, 1.1]) == pytest.approx(
        oracles.hv_inclusion_exclusion(P.tolist(), [1.0, 1.2, 1.1]), abs=1e-12
    )


@given(sets2, arrays(np.float64, (2,), elements=st.floats(0, 1)))
def test_hv_monotone_when_adding_nondominated(P, p):
    ref = [1.1, 1.1]
    if any(np.all(q <= p) and np.any(q < p) for q in P):
        return
    assert hypervolume(np.vstack([P, p]), ref) >= hypervolume(P, ref) - 1e-15


@given(sets3)
def test_hv_unchanged_by_dominated_removal(P):
    ref = [1.0, 1.0, 1.0]
    front = oracles.brute_force_fronts(P.tolist())[0]
    assert hypervolume(P[front], ref) == pytest.approx(hypervolume(P, ref), abs=1e-15)


def test_hv3d_against_monte_carlo():
    rng = np.random.default_rng(20)
    P = rng.random((20, 3))
    exact = hypervolume(P, [1, 1, 1])
    assert hv_monte_carlo(P, [1, 1, 1], 10**6, rng) == pytest.approx(exact, rel=1e-2)


def test_monte_carlo_single_point_within_three_sigma():
    samples = 10**6
    ref = np.array([1.0, 1.0])
    p = np.array([[0.3, 0.6]])
    # the sampling box is exactly the dominated box, so every sample hits
    assert hv_monte_carlo(p, ref, samples, np.random.default_rng(0)) == pytest.approx(0.28)
    # a second point widens the box and makes the estimate genuinely random
    P = np.array([[0.3, 0.6], [0.0, 0.99]])
    exact = hypervolume(P, ref)
    box = 1.0 * 1.0
    q = exact / box
    sigma = box * math.sqrt(q * (1 - q) / samples)
    assert abs(hv_monte_carlo(P, ref, samples, np.random.default_rng(1)) - exact) <= 3 * sigma


def test_monte_carlo_empty():
    assert hv_monte_carlo(np.zeros((0, 2)), [1, 1], 1000, np.random.default_rng()) == 0.0


def test_reference_point_pushes_outward():
    np.testing.assert_allclose(hv_reference_point(np.array([[1.0, -10.0], [2.0, -20.0]])), [2.2, -9.0])


def test_evaluate_population_feasible_only():
    R = np.array([[0.0, 1.0], [1.0, 0.0]])
    pop = [make_solution((0, 1)), make_solution((1, 0)), make_solution((-5, -5), 1.0)]
    rep = evaluate_population(pop, R)
    assert rep.igd == 0.0
    assert rep.feasible_ratio == pytest.approx(2 / 3)
    assert rep.n_points == 2
    assert rep.hv == pytest.approx(hypervolume([[0, 1], [1, 0]], rep.hv_ref_point))
    none = evaluate_population([make_solution((0, 0), 1.0)], R)
    assert none.igd is None and none.hv is None and none.feasible_ratio == 0.0
