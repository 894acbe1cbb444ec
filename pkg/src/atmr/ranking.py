"""Pareto dominance, constrained dominance, nondominated sorting and crowding."""

from __future__ import annotations

from collections.abc import Sequence
from enum import IntEnum

import numpy as np

from .core import Solution, StructuralError


class Preference(IntEnum):
    """Outcome of a pairwise comparison, cmp-style."""

    A_BETTER = -1
    TIE = 0
    B_BETTER = 1


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True iff ``a`` is no worse than ``b`` everywhere and strictly better somewhere."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise StructuralError(f"length mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def cdp_compare(a: Solution, b: Solution) -> Preference:
    """Constrained dominance principle."""
    a_feas, b_feas = a.G == 0.0, b.G == 0.0
    if a_feas and b_feas:
        if dominates(a.F, b.F):
            return Preference.A_BETTER
        if dominates(b.F, a.F):
            return Preference.B_BETTER
        return Preference.TIE
    if a_feas:
        return Preference.A_BETTER
    if b_feas:
        return Preference.B_BETTER
    if a.G < b.G:
        return Preference.A_BETTER
    if b.G < a.G:
        return Preference.B_BETTER
    return Preference.TIE


def dominance_matrix(points: np.ndarray) -> np.ndarray:
    """``M[i, j]`` is True when point ``i`` dominates point ``j``."""
    le = np.all(points[:, None, :] <= points[None, :, :], axis=2)
    lt = np.any(points[:, None, :] < points[None, :, :], axis=2)
    return le & lt


def nondominated_sort(points: Sequence[Sequence[float]] | np.ndarray) -> list[list[int]]:
    """Fast nondominated sorting.

    Returns fronts as lists of input indices. Front 0 is the nondominated
    set; indices inside a front keep their input order.

    Raises:
        StructuralError: on empty or ragged input.
    """
    try:
        pts = np.asarray(points, dtype=float)
    except ValueError as exc:
        raise StructuralError("points must share one dimension") from exc
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise StructuralError("nondominated_sort needs a nonempty 2-D array of points")
    dom = dominance_matrix(pts)
    # number of points dominating each point; peel fronts by decrementing
    remaining = dom.sum(axis=0)
    fronts: list[list[int]] = []
    current = np.flatnonzero(remaining == 0)
    assigned = np.zeros(pts.shape[0], dtype=bool)
    while current.size:
        fronts.append(current.tolist())
        assigned[current] = True
        remaining = remaining - dom[current].sum(axis=0)
        current = np.flatnonzero((remaining == 0) & ~assigned)
    return fronts


def first_front(points: np.ndarray) -> np.ndarray:
    """Indices of the nondominated points."""
    dom = dominance_matrix(np.asarray(points, dtype=float))
    return np.flatnonzero(~dom.any(axis=0))


def crowding_distance(front: Sequence[Sequence[float]] | np.ndarray) -> np.ndarray:
    """NSGA-II crowding distance within one front.

    Each objective is normalized by the front's own range; an objective with
    zero range contributes nothing. The extreme points of every objective get
    ``inf``.
    """
    pts = np.asarray(front, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise StructuralError("crowding_distance needs a nonempty front")
    n, dim = pts.shape
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for k in range(dim):
        order = np.argsort(pts[:, k], kind="stable")
        col = pts[order, k]
        span = col[-1] - col[0]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        if span > 0:
            dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def cdp_sort(F: np.ndarray, G: np.ndarray) -> list[list[int]]:
    """Front partition under CDP-induced dominance.

    Feasible points are sorted by Pareto dominance and precede every
    infeasible point; infeasible points are layered by ascending violation,
    equal violations sharing a front.
    """
    feasible = np.flatnonzero(G == 0.0)
    infeasible = np.flatnonzero(G > 0.0)
    fronts: list[list[int]] = []
    if feasible.size:
        fronts.extend([feasible[f].tolist() for f in nondominated_sort(F[feasible])])
    if infeasible.size:
        levels = np.unique(G[infeasible])
        for level in levels:
            fronts.append(infeasible[G[infeasible] == level].tolist())
    return fronts
