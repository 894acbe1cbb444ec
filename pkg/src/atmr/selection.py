"""Environmental selection for the infeasible, semi-feasible and feasible phases."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .core import (
    ContractViolation,
    Solution,
    StructuralError,
    objective_matrix,
    transformed_matrix,
    violation_vector,
)
from .ranking import cdp_sort, crowding_distance, first_front, nondominated_sort
from .refpoints import adaptive_weights, assign_many, das_dennis, make_context, normalize, smallest_lattice


def _pick(rng: np.random.Generator, candidates: np.ndarray) -> int:
    if candidates.size == 1:
        return int(candidates[0])
    return int(candidates[rng.integers(candidates.size)])


def _crowded_busiest(assigned: np.ndarray, alive: np.ndarray, n_weights: int, rng: np.random.Generator) -> np.ndarray:
    """Alive members attached to the most loaded weight (ties at random)."""
    counts = np.bincount(assigned[alive], minlength=n_weights)
    busiest = _pick(rng, np.flatnonzero(counts == counts.max()))
    return np.flatnonzero(alive & (assigned == busiest))


def regular_reference_reduce(F: np.ndarray, G: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Keep ``n`` rows of one front, deleting by crowding first, violation second.

    Rows are associated with simplex-lattice weights by minimum angle in
    min-max normalized objective space. Until ``n`` remain, the most loaded
    weight loses its member with the largest violation.

    Returns:
        Sorted indices of the kept rows.
    """
    F = np.asarray(F, dtype=float)
    G = np.asarray(G, dtype=float)
    size = F.shape[0]
    if not 0 < n <= size:
        raise StructuralError(f"cannot keep {n} of {size} solutions")
    alive = np.ones(size, dtype=bool)
    if n == size:
        return np.arange(size)
    m = F.shape[1]
    weights = das_dennis(m, smallest_lattice(m, n))
    assigned = assign_many(normalize(F, make_context(F)), weights, rng)
    for _ in range(size - n):
        members = _crowded_busiest(assigned, alive, len(weights), rng)
        worst = members[G[members] == G[members].max()]
        alive[_pick(rng, worst)] = False
    return np.flatnonzero(alive)


def adaptive_reference_reduce(
    feasible_normF: np.ndarray,
    candidate_normF: np.ndarray,
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Keep ``n`` candidates using weights generated by feasible solutions.

    Both inputs must already share one normalization. Each candidate is
    associated with the adaptive weight at minimum angle; until ``n``
    remain, the most loaded weight loses the candidate furthest (Euclidean)
    from that weight's generating feasible solution.

    Returns:
        Sorted indices of the kept candidates.
    """
    feas = np.atleast_2d(np.asarray(feasible_normF, dtype=float))
    cand = np.atleast_2d(np.asarray(candidate_normF, dtype=float))
    size = cand.shape[0]
    if not 0 < n <= size:
        raise StructuralError(f"cannot keep {n} of {size} candidates")
    alive = np.ones(size, dtype=bool)
    if n == size:
        return np.arange(size)
    weights = adaptive_weights(feas)
    assigned = assign_many(cand, weights, rng)
    anchor = feas[weights.source_index[assigned]]
    dist = np.linalg.norm(cand - anchor, axis=1)
    for _ in range(size - n):
        members = _crowded_busiest(assigned, alive, len(weights), rng)
        furthest = members[dist[members] == dist[members].max()]
        alive[_pick(rng, furthest)] = False
    return np.flatnonzero(alive)


def regular_reference_selection(Q: Sequence[Solution], N: int, rng: np.random.Generator) -> list[Solution]:
    """Reduce ``Q`` to ``N`` members by sorting with the violation as an extra objective.

    Whole fronts are admitted while they fit; the first front that does not
    fit is thinned by :func:`regular_reference_reduce`.
    """
    if len(Q) < N:
        raise StructuralError(f"need at least {N} solutions, got {len(Q)}")
    fronts = nondominated_sort(transformed_matrix(Q))
    chosen: list[int] = []
    for front in fronts:
        if len(chosen) + len(front) >= N:
            last = front
            break
        chosen.extend(front)
    n = N - len(chosen)
    sub = [Q[i] for i in last]
    kept = regular_reference_reduce(objective_matrix(sub), violation_vector(sub), n, rng)
    chosen.extend(last[k] for k in kept)
    return [Q[i] for i in chosen]


def select_infeasible_phase(
    P: Sequence[Solution], O: Sequence[Solution], N: int, rng: np.random.Generator
) -> list[Solution]:
    """Survivor selection while no solution is feasible."""
    Q = [*P, *O]
    if any(s.G == 0.0 for s in Q):
        raise ContractViolation("infeasible-phase selection received a feasible solution")
    return regular_reference_selection(Q, N, rng)


def _truncate_by_fronts(
    Q: Sequence[Solution], fronts: list[list[int]], N: int, rng: np.random.Generator | None
) -> list[Solution]:
    chosen: list[int] = []
    for front in fronts:
        if len(chosen) + len(front) <= N:
            chosen.extend(front)
            if len(chosen) == N:
                break
            continue
        cd = crowding_distance(objective_matrix([Q[i] for i in front]))
        tiebreak = rng.random(len(front)) if rng is not None else np.arange(len(front))
        order = np.lexsort((tiebreak, -cd))
        chosen.extend(front[k] for k in order[: N - len(chosen)])
        break
    return [Q[i] for i in chosen]


def nsga2_truncate(Q: Sequence[Solution], N: int, rng: np.random.Generator | None = None) -> list[Solution]:
    """NSGA-II survivor selection on objectives alone.

    With ``rng=None`` equal crowding distances keep input order.
    """
    if len(Q) < N:
        raise StructuralError(f"need at least {N} solutions, got {len(Q)}")
    return _truncate_by_fronts(Q, nondominated_sort(objective_matrix(Q)), N, rng)


def cdp_truncate(Q: Sequence[Solution], N: int, rng: np.random.Generator | None = None) -> list[Solution]:
    """NSGA-II survivor selection with constrained dominance."""
    if len(Q) < N:
        raise StructuralError(f"need at least {N} solutions, got {len(Q)}")
    return _truncate_by_fronts(Q, cdp_sort(objective_matrix(Q), violation_vector(Q)), N, rng)


def select_feasible_phase(Q: Sequence[Solution], N: int, rng: np.random.Generator | None = None) -> list[Solution]:
    """Survivor selection once every solution is feasible."""
    if any(s.G > 0.0 for s in Q):
        raise ContractViolation("feasible-phase selection received an infeasible solution")
    return nsga2_truncate(Q, N, rng)


def is_later_stage(n_feasible_kept: int, N: int, fes: int, max_fes: int) -> bool:
    """Whether enough budget is spent and enough feasible solutions are held."""
    return fes / max_fes >= 0.5 and n_feasible_kept >= N


def select_semifeasible_phase(
    P: Sequence[Solution],
    O: Sequence[Solution],
    N: int,
    fes: int,
    max_fes: int,
    rng: np.random.Generator,
) -> list[Solution]:
    """Survivor selection for a population mixing feasible and infeasible members.

    Feasible and infeasible solutions are updated separately, so the result
    holds between ``N`` and ``2N`` members. The infeasible side is thinned
    only when it exceeds ``N``: early on by the regular reference-point
    rule, later by keeping the infeasible members of the first front (with
    the violation as an extra objective) and thinning those with adaptive
    reference points taken from the kept feasible solutions.
    """
    Q = [*P, *O]
    feasible = [s for s in Q if s.G == 0.0]
    infeasible = [s for s in Q if s.G > 0.0]
    if not feasible or not infeasible:
        raise ContractViolation("semi-feasible selection needs feasible and infeasible solutions")

    if len(feasible) > N:
        feasible = nsga2_truncate(feasible, N, rng)

    if len(infeasible) > N:
        if not is_later_stage(len(feasible), N, fes, max_fes):
            infeasible = regular_reference_selection(infeasible, N, rng)
        else:
            front = first_front(transformed_matrix(Q))
            infeasible = [Q[i] for i in front if Q[i].G > 0.0]
            if len(infeasible) > N:
                feas_F = objective_matrix(feasible)
                cand_F = objective_matrix(infeasible)
                ctx = make_context(np.vstack([feas_F, cand_F]))
                kept = adaptive_reference_reduce(normalize(feas_F, ctx), normalize(cand_F, ctx), N, rng)
                infeasible = [infeasible[k] for k in kept]
    return feasible + infeasible


def finalize_population(P: Sequence[Solution], N: int, rng: np.random.Generator) -> list[Solution]:
    """Cut an oversized population back to ``N`` for reporting."""
    if len(P) <= N:
        return list(P)
    if all(s.G == 0.0 for s in P):
        return select_feasible_phase(P, N, rng)
    return regular_reference_selection(P, N, rng)
