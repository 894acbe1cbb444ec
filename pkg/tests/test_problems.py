import numpy as np
import pytest

from atmr.core import CapabilityError, ProblemDefinition, evaluate_batch
from atmr.problems import (
    REGISTRY,
    UnknownProblemError,
    get_problem,
    list_problems,
    nondominated_filter_2d,
    read_front_csv,
    reference_front,
    reference_set,
    thin_front,
    write_front_csv,
)

from oracles import brute_force_fronts

SWEPT = ["BNH", "SRN", "TNK", "OSY"]


@pytest.fixture(scope="module")
def fronts():
    return {name: reference_set(name, 500) for name in SWEPT}


def test_builtins_listed():
    assert {"BNH", "SRN", "TNK", "OSY", "CORRIDOR"} <= set(list_problems())


def test_lookup_examples():
    assert get_problem("BNH").m == 2
    assert get_problem("CORRIDOR", {"D": 10}).n_g == 1
    assert get_problem("CORRIDOR", {"D": 4}).D == 4


def test_unknown_problem_lists_builtins():
    with pytest.raises(UnknownProblemError) as info:
        get_problem("CTPX")
    assert "BNH" in str(info.value) and "CORRIDOR" in str(info.value)


def test_names_are_case_sensitive():
    with pytest.raises(UnknownProblemError):
        get_problem("bnh")


def test_plugin_registration():
    def toy():
        return ProblemDefinition(
            "TOY", 2, 1, 0, 0, np.zeros(1), np.ones(1),
            evaluator=lambda X: (np.concatenate([X, 1 - X], axis=-1), X[..., :0], X[..., :0]),
        )

    REGISTRY.register("TOY", toy)
    try:
        assert "TOY" in list_problems()
        assert get_problem("TOY").D == 1
        with pytest.raises(CapabilityError):
            reference_front("TOY", 10, cache_dir=None)
        with pytest.raises(ValueError):
            REGISTRY.register("TOY", toy)
    finally:
        REGISTRY.unregister("TOY")
    assert "TOY" not in list_problems()


def test_corridor_front_is_the_line():
    F = reference_front("CORRIDOR", 100)
    assert F.shape == (100, 2)
    np.testing.assert_allclose(F[:, 1], 1 - F[:, 0], atol=1e-12)
    assert F[:, 0].min() == 0.0 and F[:, 0].max() == 1.0


def test_corridor_random_samples_are_infeasible():
    problem = get_problem("CORRIDOR", {"D": 10})
    X = np.random.default_rng(2024).uniform(problem.lower, problem.upper, size=(10_000, 10))
    assert sum(s.feasible for s in evaluate_batch(problem, X)) == 0


@pytest.mark.parametrize("name", SWEPT)
def test_front_size_and_feasibility(fronts, name):
    X, F = fronts[name]
    assert F.shape == (500, 2)
    sols = evaluate_batch(get_problem(name), X)
    assert all(s.G == 0.0 for s in sols)
    np.testing.assert_array_equal(np.array([s.F for s in sols]), F)


@pytest.mark.parametrize("name", SWEPT)
def test_front_mutually_nondominated(fronts, name):
    F = fronts[name][1]
    assert len(brute_force_fronts(F.tolist())) == 1


def test_tnk_constraints_hold(fronts):
    X, _ = fronts["TNK"]
    _, g, _ = get_problem("TNK").evaluator(X)
    assert np.all(g <= 1e-9)


def test_bnh_front_extent(fronts):
    F = fronts["BNH"][1]
    assert F[:, 0].min() == pytest.approx(0.0, abs=1e-9)
    assert F[:, 0].max() == pytest.approx(136.0, rel=1e-3)
    assert F[:, 1].min() == pytest.approx(4.0, rel=1e-3)


def test_cached_front_matches_fresh(tmp_path, fronts):
    first = reference_front("SRN", 500, cache_dir=tmp_path)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    assert files[0].read_text().splitlines()[0] == "f1,f2"
    second = reference_front("SRN", 500, cache_dir=tmp_path)
    assert first.tobytes() == second.tobytes() == fronts["SRN"][1].tobytes()


def test_csv_roundtrip_is_lossless(tmp_path):
    F = np.random.default_rng(0).normal(size=(50, 3)) * 1e3
    path = tmp_path / "front.csv"
    write_front_csv(path, F)
    assert path.read_text().startswith("f1,f2,f3\n")
    assert read_front_csv(path).tobytes() == F.tobytes()


def test_nondominated_filter_matches_oracle():
    F = np.random.default_rng(5).integers(0, 8, size=(200, 2)).astype(float)
    kept = nondominated_filter_2d(F)
    expected = {tuple(F[i]) for i in brute_force_fronts(F.tolist())[0]}
    assert {tuple(F[i]) for i in kept} == expected
    assert len(kept) == len(expected)


def test_thin_front_needs_enough_points():
    F = np.column_stack([np.linspace(0, 1, 5), np.linspace(1, 0, 5)])
    assert len(thin_front(F, 5)) == 5
    with pytest.raises(CapabilityError):
        thin_front(F, 6)
