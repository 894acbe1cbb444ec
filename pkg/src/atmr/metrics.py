"""IGD and hypervolume indicators (minimization)."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .core import CapabilityError, Solution, StructuralError, objective_matrix
from .ranking import first_front


@dataclass(frozen=True)
class MetricReport:
    igd: float | None
    hv: float | None
    feasible_ratio: float
    n_points: int
    hv_ref_point: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "igd": self.igd,
            "hv": self.hv,
            "feasible_ratio": self.feasible_ratio,
            "n_points": self.n_points,
            "hv_ref_point": list(self.hv_ref_point) if self.hv_ref_point is not None else None,
        }


def igd(approx: np.ndarray, reference: np.ndarray) -> float | None:
    """Mean distance from each reference point to its nearest approximation point.

    Returns ``None`` when ``approx`` is empty.
    """
    A = np.atleast_2d(np.asarray(approx, dtype=float))
    R = np.atleast_2d(np.asarray(reference, dtype=float))
    if R.size == 0:
        raise StructuralError("reference set is empty")
    if A.size == 0:
        return None
    if A.shape[1] != R.shape[1]:
        raise StructuralError("approximation and reference dimensions differ")
    dist = np.linalg.norm(R[:, None, :] - A[None, :, :], axis=2)
    return float(dist.min(axis=1).mean())


def _hv2d(P: np.ndarray, ref: np.ndarray) -> float:
    P = P[np.argsort(P[:, 0], kind="stable")]
    volume = 0.0
    best_f2 = ref[1]
    for f1, f2 in P:
        if f2 < best_f2:
            volume += (ref[0] - f1) * (best_f2 - f2)
            best_f2 = f2
    return volume


def _hv3d(P: np.ndarray, ref: np.ndarray) -> float:
    # slice along the third objective; each slab is a 2-D problem
    P = P[np.argsort(P[:, 2], kind="stable")]
    volume = 0.0
    for i in range(P.shape[0]):
        top = P[i + 1, 2] if i + 1 < P.shape[0] else ref[2]
        depth = top - P[i, 2]
        if depth > 0:
            volume += depth * _hv2d(P[: i + 1, :2], ref[:2])
    return volume


def hypervolume(points: np.ndarray, ref_point: Sequence[float]) -> float:
    """Exact hypervolume for two or three objectives.

    Points that do not strictly dominate ``ref_point`` contribute nothing.

    Raises:
        CapabilityError: for more than three objectives.
    """
    ref = np.asarray(ref_point, dtype=float)
    P = np.asarray(points, dtype=float).reshape(-1, ref.size)
    if ref.size > 3:
        raise CapabilityError("exact hypervolume is only implemented for 2 or 3 objectives")
    if ref.size < 2:
        raise StructuralError("hypervolume needs at least 2 objectives")
    P = P[np.all(P < ref, axis=1)]
    if P.shape[0] == 0:
        return 0.0
    P = P[first_front(P)]
    return _hv2d(P, ref) if ref.size == 2 else _hv3d(P, ref)


def hv_monte_carlo(
    points: np.ndarray,
    ref_point: Sequence[float],
    samples: int,
    rng: np.random.Generator,
    chunk: int = 200_000,
) -> float:
    """Monte Carlo hypervolume over the box from the points' minimum to ``ref_point``."""
    ref = np.asarray(ref_point, dtype=float)
    P = np.asarray(points, dtype=float).reshape(-1, ref.size)
    P = P[np.all(P < ref, axis=1)]
    if P.shape[0] == 0:
        return 0.0
    low = P.min(axis=0)
    box = float(np.prod(ref - low))
    hits = 0
    remaining = samples
    while remaining > 0:
        k = min(chunk, remaining)
        S = rng.uniform(low, ref, size=(k, ref.size))
        covered = np.zeros(k, dtype=bool)
        for p in P:
            covered |= np.all(S >= p, axis=1)
        hits += int(covered.sum())
        remaining -= k
    return box * hits / samples


def hv_reference_point(reference: np.ndarray) -> np.ndarray:
    """Nadir of the reference front pushed outward by 10% of its magnitude."""
    nadir = np.asarray(reference, dtype=float).max(axis=0)
    return nadir + 0.1 * np.abs(nadir)


def evaluate_population(
    pop: Sequence[Solution],
    reference: np.ndarray,
    ref_point: Sequence[float] | None = None,
) -> MetricReport:
    """IGD and HV of the feasible members of ``pop``."""
    if ref_point is None:
        ref_point = hv_reference_point(reference)
    ref_point = tuple(float(v) for v in ref_point)
    feasible = [s for s in pop if s.G == 0.0]
    ratio = len(feasible) / len(pop) if pop else 0.0
    if not feasible:
        return MetricReport(None, None, ratio, 0, ref_point)
    F = objective_matrix(feasible)
    return MetricReport(igd(F, reference), hypervolume(F, ref_point), ratio, len(feasible), ref_point)
