"""Reference points on the unit simplex and angle-based association."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Literal

import numpy as np

from .core import StructuralError


@dataclass(frozen=True)
class WeightVectorSet:
    """Simplex weight vectors.

    For adaptive weights ``source_index[j]`` is the position, in the list
    handed to :func:`adaptive_weights`, of the solution that produced weight
    ``j``.
    """

    weights: np.ndarray
    origin: Literal["regular", "adaptive"] = "regular"
    source_index: np.ndarray | None = field(default=None)

    def __len__(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class NormalizationContext:
    z_min: np.ndarray
    z_max: np.ndarray

    @property
    def degenerate(self) -> np.ndarray:
        return self.z_max == self.z_min


TIE_TOL = 1e-12


def das_dennis(m: int, H: int) -> WeightVectorSet:
    """All vectors ``k / H`` with nonnegative integer ``k`` summing to ``H``.

    Output is in lexicographic order of ``k``; there are ``C(H+m-1, m-1)``
    of them.
    """
    if m < 2 or H < 1:
        raise StructuralError(f"das_dennis needs m >= 2 and H >= 1, got m={m}, H={H}")
    # stars and bars: bar positions among H+m-1 slots
    rows = []
    for bars in combinations(range(H + m - 1), m - 1):
        cuts = (-1, *bars, H + m - 1)
        rows.append([cuts[i + 1] - cuts[i] - 1 for i in range(m)])
    k = np.array(rows, dtype=float)
    k = k[np.lexsort(k.T[::-1])]
    return WeightVectorSet(k / H, "regular")


def smallest_lattice(m: int, n: int) -> int:
    """Smallest ``H >= 1`` whose lattice has at least ``n`` points."""
    if m < 2:
        raise StructuralError("smallest_lattice needs m >= 2")
    H = 1
    while comb(H + m - 1, m - 1) < n:
        H += 1
    return H


def make_context(points: Sequence[Sequence[float]] | np.ndarray) -> NormalizationContext:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0:
        raise StructuralError("make_context needs at least one point")
    return NormalizationContext(pts.min(axis=0), pts.max(axis=0))


def normalize(F: np.ndarray, ctx: NormalizationContext) -> np.ndarray:
    """Min-max normalize objectives. Degenerate components map to 0.5.

    Works on a single vector or a stack of row vectors.
    """
    F = np.asarray(F, dtype=float)
    span = ctx.z_max - ctx.z_min
    safe = np.where(span > 0, span, 1.0)
    out = (F - ctx.z_min) / safe
    return np.where(span > 0, out, 0.5)


def _cosines(normF: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """|cos| between each row of ``normF`` and each weight; NaN for zero-norm rows."""
    pnorm = np.linalg.norm(normF, axis=1)
    wnorm = np.linalg.norm(weights, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = np.abs(normF @ weights.T) / (pnorm[:, None] * wnorm[None, :])
    return np.clip(cos, 0.0, 1.0)


def assign_many(normF: np.ndarray, weights: WeightVectorSet | np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Vectorized :func:`assign_to_weights` over the rows of ``normF``.

    Random draws are consumed only for rows with tied minima or zero norm,
    in row order.
    """
    W = weights.weights if isinstance(weights, WeightVectorSet) else np.asarray(weights, dtype=float)
    P = np.atleast_2d(np.asarray(normF, dtype=float))
    if W.shape[0] == 0:
        raise StructuralError("no weight vectors to assign to")
    cos = _cosines(P, W)
    cos = np.where(np.isnan(cos), -np.inf, cos)
    best = cos.max(axis=1)
    # smallest angle = largest cosine; rounding-level differences count as ties
    is_best = cos >= best[:, None] - TIE_TOL
    result = np.argmax(is_best, axis=1)
    for i in np.flatnonzero((is_best.sum(axis=1) > 1) | np.isinf(best)):
        if np.isinf(best[i]):
            result[i] = rng.integers(W.shape[0])
        else:
            ties = np.flatnonzero(is_best[i])
            result[i] = ties[rng.integers(ties.size)]
    return result


def assign_to_weights(normF: Sequence[float], weights: WeightVectorSet | np.ndarray, rng: np.random.Generator) -> int:
    """Index of the weight vector making the smallest angle with ``normF``.

    Ties (cosines within ``TIE_TOL``) are broken uniformly at random; a zero
    vector goes to a uniformly random weight.
    """
    return int(assign_many(np.asarray(normF, dtype=float)[None, :], weights, rng)[0])


def adaptive_weights(feasible_normF: Sequence[Sequence[float]] | np.ndarray) -> WeightVectorSet:
    """Weights pointing at each normalized feasible objective vector.

    A zero vector yields the uniform weight.
    """
    P = np.atleast_2d(np.asarray(feasible_normF, dtype=float))
    if P.shape[0] == 0:
        raise StructuralError("adaptive_weights needs at least one vector")
    m = P.shape[1]
    total = P.sum(axis=1, keepdims=True)
    safe = np.where(total > 0, total, 1.0)
    W = np.where(total > 0, P / safe, 1.0 / m)
    return WeightVectorSet(W, "adaptive", np.arange(P.shape[0]))
