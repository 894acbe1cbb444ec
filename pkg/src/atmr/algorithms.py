"""ATM-R and the NSGA-II-CDP baseline."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import AlgorithmConfig, EvalCounter, ProblemDefinition, Solution, evaluate_batch, objective_matrix, violation_vector
from .operators import Phase, classify_phase, mating_diversity, mating_selection, variation
from .ranking import Preference, cdp_compare, cdp_sort, crowding_distance
from .selection import (
    cdp_truncate,
    finalize_population,
    select_feasible_phase,
    select_infeasible_phase,
    select_semifeasible_phase,
)


class RunFailure(RuntimeError):
    """An evaluation failed mid-run; carries the generation it happened in."""

    def __init__(self, message: str, generation: int):
        super().__init__(message)
        self.generation = generation


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    fes: int
    phase: str
    n_feasible: int
    best_G: float
    mean_G: float
    pop_size: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunResult:
    algorithm: str
    problem: str
    seed: int
    config: AlgorithmConfig
    final_population: list[Solution]
    raw_population: list[Solution]
    trace: list[GenerationRecord] = field(default_factory=list)
    fes: int = 0

    @property
    def final_F(self) -> np.ndarray:
        return objective_matrix(self.final_population)


def _record(generation: int, fes: int, pop: Sequence[Solution]) -> GenerationRecord:
    G = violation_vector(pop)
    return GenerationRecord(
        generation=generation,
        fes=fes,
        phase=classify_phase(pop).value,
        n_feasible=int(np.count_nonzero(G == 0.0)),
        best_G=float(G.min()),
        mean_G=float(G.mean()),
        pop_size=len(pop),
    )


def _rng_for(config: AlgorithmConfig, rng: np.random.Generator | None) -> np.random.Generator:
    return rng if rng is not None else np.random.default_rng(config.seed)


def _evaluate(problem: ProblemDefinition, X: np.ndarray, config: AlgorithmConfig, counter: EvalCounter, generation: int):
    try:
        return evaluate_batch(problem, X, config.delta, counter)
    except Exception as exc:
        raise RunFailure(f"{problem.name}: evaluation failed in generation {generation}: {exc}", generation) from exc


def _initial_population(problem, config, rng, counter):
    X = rng.uniform(problem.lower, problem.upper, size=(config.N, problem.D))
    return _evaluate(problem, X, config, counter, 0)


def _evolve(
    name: str,
    problem: ProblemDefinition,
    config: AlgorithmConfig,
    rng: np.random.Generator,
    mate: Callable[[list[Solution], np.random.Generator], list[Solution]],
    survive: Callable[[list[Solution], list[Solution], int, np.random.Generator], list[Solution]],
) -> RunResult:
    counter = EvalCounter()
    bounds = (problem.lower, problem.upper)
    pm = config.mutation_probability(problem.D)
    P = _initial_population(problem, config, rng, counter)
    trace = [_record(0, counter.count, P)]
    generation = 0
    while counter.count < config.max_fes:
        generation += 1
        parents = mate(P, rng)
        X = variation(parents, bounds, config.pc, pm, config.eta_c, config.eta_m, rng)
        O = _evaluate(problem, X, config, counter, generation)
        P = survive(P, O, counter.count, rng)
        trace.append(_record(generation, counter.count, P))
    final = finalize_population(P, config.N, rng)
    return RunResult(name, problem.name, config.seed, config, final, list(P), trace, counter.count)


def run_atmr(problem: ProblemDefinition, config: AlgorithmConfig, rng: np.random.Generator | None = None) -> RunResult:
    """Run ATM-R until the evaluation budget is spent.

    Random numbers are drawn in a fixed order (initialization, then per
    generation: mating, variation, selection), so a run is a deterministic
    function of ``config.seed`` when ``rng`` is not supplied.

    Between ``N`` and ``2N`` solutions are carried in the semi-feasible
    phase; the returned ``final_population`` is cut back to ``N`` and the
    untruncated one is kept in ``raw_population``.
    """
    rng = _rng_for(config, rng)
    N = config.N

    def mate(P, rng):
        phase = classify_phase(P)
        return mating_selection(P, N, phase, mating_diversity(P, phase), rng)

    def survive(P, O, fes, rng):
        Q = [*P, *O]
        phase = classify_phase(Q)
        if phase is Phase.INFEASIBLE:
            return select_infeasible_phase(P, O, N, rng)
        if phase is Phase.SEMI_FEASIBLE:
            return select_semifeasible_phase(P, O, N, fes, config.max_fes, rng)
        return select_feasible_phase(Q, N, rng)

    return _evolve("atmr", problem, config, rng, mate, survive)


def cdp_crowding(pop: Sequence[Solution]) -> np.ndarray:
    """Crowding distance of each member within its CDP front."""
    F = objective_matrix(pop)
    cd = np.empty(len(pop))
    for front in cdp_sort(F, violation_vector(pop)):
        cd[front] = crowding_distance(F[front])
    return cd


def cdp_tournament(pop: Sequence[Solution], N: int, crowding: np.ndarray, rng: np.random.Generator) -> list[Solution]:
    """Binary tournaments decided by CDP, then crowding, then a coin."""
    n = len(pop)
    winners = []
    for _ in range(N):
        a = int(rng.integers(n))
        b = int(rng.integers(n - 1))
        if b >= a:
            b += 1
        pref = cdp_compare(pop[a], pop[b])
        if pref is Preference.A_BETTER:
            winners.append(a)
        elif pref is Preference.B_BETTER:
            winners.append(b)
        elif crowding[a] != crowding[b]:
            winners.append(a if crowding[a] > crowding[b] else b)
        else:
            winners.append(a if rng.random() < 0.5 else b)
    return [pop[w] for w in winners]


def run_nsga2_cdp(problem: ProblemDefinition, config: AlgorithmConfig, rng: np.random.Generator | None = None) -> RunResult:
    """Generational NSGA-II with the constrained dominance principle."""
    rng = _rng_for(config, rng)
    N = config.N

    def mate(P, rng):
        return cdp_tournament(P, N, cdp_crowding(P), rng)

    def survive(P, O, fes, rng):
        return cdp_truncate([*P, *O], N, rng)

    return _evolve("nsga2_cdp", problem, config, rng, mate, survive)


ALGORITHMS: dict[str, Callable[..., RunResult]] = {
    "atmr": run_atmr,
    "nsga2_cdp": run_nsga2_cdp,
}
