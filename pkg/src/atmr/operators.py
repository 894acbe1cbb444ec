"""Variation operators and phase-aware mating selection."""

from __future__ import annotations

from collections.abc import Sequence
from enum import Enum

import numpy as np

from .core import Solution, StructuralError, objective_matrix, transformed_matrix, violation_vector
from .ranking import crowding_distance, dominance_matrix

Bounds = tuple[np.ndarray, np.ndarray]


class Phase(str, Enum):
    INFEASIBLE = "infeasible"
    SEMI_FEASIBLE = "semi-feasible"
    FEASIBLE = "feasible"


def classify_phase(Q: Sequence[Solution]) -> Phase:
    """Phase of a population from its feasibility census."""
    if len(Q) == 0:
        raise StructuralError("cannot classify an empty population")
    n_feasible = sum(1 for s in Q if s.G == 0.0)
    if n_feasible == 0:
        return Phase.INFEASIBLE
    if n_feasible == len(Q):
        return Phase.FEASIBLE
    return Phase.SEMI_FEASIBLE


def _sbx_children(y1, y2, gap, lo, hi, eta, u):
    """Bounded SBX for ordered parents ``y1 <= y2`` (``gap = y2 - y1 > 0``)."""
    exponent = 1.0 / (eta + 1.0)

    def betaq(beta):
        alpha = 2.0 - beta ** (-(eta + 1.0))
        ua = u * alpha
        return np.where(u <= 1.0 / alpha, ua ** exponent, (1.0 / (2.0 - ua)) ** exponent)

    c1 = 0.5 * (y1 + y2 - betaq(1.0 + 2.0 * (y1 - lo) / gap) * gap)
    c2 = 0.5 * (y1 + y2 + betaq(1.0 + 2.0 * (hi - y2) / gap) * gap)
    return c1, c2


def sbx(
    p1: np.ndarray,
    p2: np.ndarray,
    bounds: Bounds,
    pc: float,
    eta_c: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover with bounded spread.

    ``p1`` and ``p2`` may be single vectors or equally shaped stacks of
    parent pairs (one pair per row). Each pair crosses with probability
    ``pc``; within a crossing pair every variable is recombined with
    probability 0.5 and the two children swap the variable with probability
    0.5. Children are clipped to ``bounds``.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if p1.shape != p2.shape:
        raise StructuralError("parents must have the same shape")
    lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    a = np.atleast_2d(p1)
    b = np.atleast_2d(p2)
    n, D = a.shape

    crosses = rng.random(n) < pc
    use_var = rng.random((n, D)) < 0.5
    u = rng.random((n, D))
    swap = rng.random((n, D)) < 0.5

    y1 = np.minimum(a, b)
    y2 = np.maximum(a, b)
    active = crosses[:, None] & use_var & (np.abs(a - b) > 1e-14)
    lo_b = np.broadcast_to(lo, a.shape)
    hi_b = np.broadcast_to(hi, a.shape)
    gap = np.where(active, y2 - y1, 1.0)
    # inactive lanes are computed with a dummy gap and discarded below
    with np.errstate(all="ignore"):
        c1, c2 = _sbx_children(y1, y2, gap, lo_b, hi_b, eta_c, u)
    c1 = np.clip(c1, lo_b, hi_b)
    c2 = np.clip(c2, lo_b, hi_b)
    first = np.where(swap, c2, c1)
    second = np.where(swap, c1, c2)
    child1 = np.where(active, first, a)
    child2 = np.where(active, second, b)
    if p1.ndim == 1:
        return child1[0], child2[0]
    return child1, child2


def polynomial_mutation(
    x: np.ndarray,
    bounds: Bounds,
    pm: float,
    eta_m: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Bounded polynomial mutation, applied per variable with probability ``pm``.

    Accepts one vector or a stack of row vectors.
    """
    x = np.asarray(x, dtype=float)
    lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    X = np.atleast_2d(x)
    mutate = rng.random(X.shape) < pm
    u = rng.random(X.shape)
    span = hi - lo
    d1 = (X - lo) / span
    d2 = (hi - X) / span
    power = 1.0 / (eta_m + 1.0)
    down = (2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta_m + 1.0)) ** power - 1.0
    up = 1.0 - (2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta_m + 1.0)) ** power
    deltaq = np.where(u < 0.5, down, up)
    Y = np.where(mutate, np.clip(X + deltaq * span, lo, hi), X)
    return Y[0] if x.ndim == 1 else Y


def variation(
    parents: Sequence[Solution],
    bounds: Bounds,
    pc: float,
    pm: float,
    eta_c: float,
    eta_m: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Offspring decision vectors from consecutive parent pairs.

    Returns as many children as there are parents (an odd trailing parent
    is paired with the first one and only its first child kept).
    """
    X = np.array([s.x for s in parents], dtype=float)
    n = X.shape[0]
    if n % 2:
        X = np.vstack([X, X[:1]])
    c1, c2 = sbx(X[0::2], X[1::2], bounds, pc, eta_c, rng)
    children = np.empty_like(X)
    children[0::2] = c1
    children[1::2] = c2
    children = polynomial_mutation(children[:n], bounds, pm, eta_m, rng)
    return children


def mating_diversity(pop: Sequence[Solution], phase: Phase) -> np.ndarray:
    """Diversity scores used to break mating tournaments.

    Crowding distance over the whole population, measured with the
    violation appended while no member is feasible and on objectives only
    otherwise.
    """
    points = transformed_matrix(pop) if phase is Phase.INFEASIBLE else objective_matrix(pop)
    return crowding_distance(points)


def _coin(rng: np.random.Generator) -> bool:
    return bool(rng.random() < 0.5)


def mating_selection(
    pop: Sequence[Solution],
    N: int,
    phase: Phase,
    diversity: np.ndarray,
    rng: np.random.Generator,
) -> list[Solution]:
    """Pick ``N`` parents by binary tournaments whose rule depends on the phase.

    Infeasible rule: a fair coin decides whether the lower violation or the
    larger diversity wins. Feasible rule: the dominating candidate wins,
    otherwise the larger diversity. In the semi-feasible phase the first
    ``N // 2`` tournaments use the infeasible rule and the rest the
    feasible rule. Every remaining tie is a coin flip.
    """
    n = len(pop)
    if n < 2:
        raise StructuralError("mating selection needs at least two solutions")
    diversity = np.asarray(diversity, dtype=float)
    if diversity.shape != (n,):
        raise StructuralError("diversity must align with the population")
    G = violation_vector(pop)
    dom = dominance_matrix(objective_matrix(pop)) if phase is not Phase.INFEASIBLE else None

    def by_key(a: int, b: int, key: np.ndarray, larger: bool) -> int:
        ka, kb = key[a], key[b]
        if ka == kb:
            return a if _coin(rng) else b
        return a if (ka > kb) == larger else b

    def infeasible_rule(a: int, b: int) -> int:
        if _coin(rng):
            return by_key(a, b, G, larger=False)
        return by_key(a, b, diversity, larger=True)

    def feasible_rule(a: int, b: int) -> int:
        if dom[a, b]:
            return a
        if dom[b, a]:
            return b
        return by_key(a, b, diversity, larger=True)

    winners = []
    for i in range(N):
        a = int(rng.integers(n))
        b = int(rng.integers(n - 1))
        if b >= a:
            b += 1
        if phase is Phase.INFEASIBLE or (phase is Phase.SEMI_FEASIBLE and i < N // 2):
            winners.append(infeasible_rule(a, b))
        else:
            winners.append(feasible_rule(a, b))
    return [pop[w] for w in winners]
