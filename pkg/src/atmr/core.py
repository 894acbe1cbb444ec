"""Domain types for constrained multiobjective problems.

A problem maps a box-bounded decision vector to an objective vector plus raw
inequality (``g <= 0``) and equality (``h == 0``) constraint values. The
aggregate violation ``G`` sums the positive parts, with equalities relaxed by
a tolerance ``delta``.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

DEFAULT_DELTA = 1e-4


class ATMRError(Exception):
    """Base class for library errors."""


class StructuralError(ATMRError, ValueError):
    """Inputs have the wrong shape, arity or size."""


class ContractViolation(ATMRError, ValueError):
    """A documented precondition was broken by the caller."""


class EvaluationError(ATMRError, RuntimeError):
    """A problem evaluator produced an unusable value."""


class CapabilityError(ATMRError, NotImplementedError):
    """The requested feature is not supported."""


class ConfigError(ATMRError, ValueError):
    """An algorithm or experiment configuration is invalid."""


Evaluator = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class ProblemDefinition:
    """A box-constrained CMOP.

    ``evaluator`` must accept decision arrays of shape ``(..., D)`` and return
    ``(F, g, h)`` with trailing sizes ``m``, ``n_g`` and ``n_h``. Broadcasting
    over leading axes lets populations and reference-front grids be evaluated
    in one call.
    """

    name: str
    m: int
    D: int
    n_g: int
    n_h: int
    lower: np.ndarray
    upper: np.ndarray
    evaluator: Evaluator = field(repr=False, compare=False)
    params: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).copy()
        upper = np.asarray(self.upper, dtype=float).copy()
        if self.m < 2:
            raise StructuralError(f"{self.name}: need at least 2 objectives, got {self.m}")
        if self.D < 1:
            raise StructuralError(f"{self.name}: decision dimension must be >= 1")
        if lower.shape != (self.D,) or upper.shape != (self.D,):
            raise StructuralError(f"{self.name}: bounds must have length {self.D}")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise StructuralError(f"{self.name}: bounds must be finite")
        if np.any(lower >= upper):
            raise StructuralError(f"{self.name}: lower bound must be below upper bound")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)


@dataclass(frozen=True, eq=False)
class Solution:
    """An evaluated decision vector. Arrays are read-only."""

    x: np.ndarray
    F: np.ndarray
    g_vals: np.ndarray
    h_vals: np.ndarray
    G: float

    def __post_init__(self):
        for arr in (self.x, self.F, self.g_vals, self.h_vals):
            arr.flags.writeable = False

    @property
    def feasible(self) -> bool:
        return self.G == 0.0


@dataclass(frozen=True)
class AlgorithmConfig:
    """Run parameters shared by ATM-R and the NSGA-II-CDP baseline.

    ``pm=None`` means one over the decision dimension, resolved per problem.
    """

    N: int = 100
    max_fes: int = 60_000
    delta: float = DEFAULT_DELTA
    pc: float = 1.0
    pm: float | None = None
    eta_c: float = 20.0
    eta_m: float = 20.0
    seed: int = 0

    def __post_init__(self):
        if self.N < 4 or self.N % 2:
            raise ConfigError(f"N must be even and >= 4, got {self.N}")
        if self.max_fes < self.N:
            raise ConfigError(f"max_fes ({self.max_fes}) must be >= N ({self.N})")
        if not self.delta > 0:
            raise ConfigError(f"delta must be positive, got {self.delta}")
        if not 0.0 <= self.pc <= 1.0:
            raise ConfigError(f"pc must lie in [0, 1], got {self.pc}")
        if self.pm is not None and not 0.0 <= self.pm <= 1.0:
            raise ConfigError(f"pm must lie in [0, 1], got {self.pm}")
        if self.eta_c < 0 or self.eta_m < 0:
            raise ConfigError("distribution indices must be nonnegative")
        if not -(2**63) <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")

    def mutation_probability(self, D: int) -> float:
        return 1.0 / D if self.pm is None else self.pm

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> AlgorithmConfig:
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"unknown algorithm parameters: {sorted(unknown)}")
        return cls(**known)


class EvalCounter:
    """Function-evaluation tally owned by a run loop."""

    def __init__(self) -> None:
        self.count = 0

    def add(self, n: int = 1) -> None:
        self.count += n


def _violation_terms(g_vals: np.ndarray, h_vals: np.ndarray, delta: float) -> np.ndarray:
    return np.concatenate(
        [np.maximum(0.0, g_vals), np.maximum(0.0, np.abs(h_vals) - delta)], axis=-1
    )


def _check_finite(values: np.ndarray, what: str, offset: int = 0) -> None:
    bad = ~np.isfinite(values)
    if np.any(bad):
        idx = int(np.argwhere(bad)[0][-1]) + offset
        raise EvaluationError(f"non-finite value in {what} {idx}")


def constraint_violation(g_vals: Sequence[float], h_vals: Sequence[float], delta: float = DEFAULT_DELTA) -> float:
    """Aggregate constraint violation.

    Sums ``max(0, g_j)`` over inequalities and ``max(0, |h_j| - delta)`` over
    equalities, so the result is exactly 0 for a feasible point.

    Raises:
        ContractViolation: if ``delta`` is not positive.
        EvaluationError: if any constraint value is not finite; the message
            names the constraint index (inequalities first).
    """
    if not delta > 0:
        raise ContractViolation(f"delta must be positive, got {delta}")
    g = np.asarray(g_vals, dtype=float).reshape(-1)
    h = np.asarray(h_vals, dtype=float).reshape(-1)
    _check_finite(g, "constraint")
    _check_finite(h, "constraint", offset=g.size)
    return float(np.sum(_violation_terms(g, h, delta)))


def _split_output(problem: ProblemDefinition, out: Any, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    try:
        F, g, h = out
    except (TypeError, ValueError) as exc:
        raise StructuralError(f"{problem.name}: evaluator must return (F, g, h)") from exc
    shapes = ((F, problem.m, "objectives"), (g, problem.n_g, "inequality values"), (h, problem.n_h, "equality values"))
    arrays = []
    for arr, size, what in shapes:
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (n, size):
            raise StructuralError(
                f"{problem.name}: evaluator returned {what} of shape {arr.shape}, expected {(n, size)}"
            )
        arrays.append(arr)
    return arrays[0], arrays[1], arrays[2]


def evaluate_batch(
    problem: ProblemDefinition,
    X: np.ndarray,
    delta: float = DEFAULT_DELTA,
    counter: EvalCounter | None = None,
) -> list[Solution]:
    """Evaluate each row of ``X`` and return one :class:`Solution` per row."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != problem.D:
        raise StructuralError(f"{problem.name}: expected {problem.D} decision variables, got {X.shape[1]}")
    if np.any(X < problem.lower) or np.any(X > problem.upper):
        raise ContractViolation(f"{problem.name}: decision vector outside bounds")
    if not delta > 0:
        raise ContractViolation(f"delta must be positive, got {delta}")
    F, g, h = _split_output(problem, problem.evaluator(X), X.shape[0])
    _check_finite(F, "objective")
    _check_finite(g, "constraint")
    _check_finite(h, "constraint", offset=problem.n_g)
    G = _violation_terms(g, h, delta).sum(axis=1)
    if counter is not None:
        counter.add(X.shape[0])
    return [
        Solution(X[i].copy(), F[i].copy(), g[i].copy(), h[i].copy(), float(G[i]))
        for i in range(X.shape[0])
    ]


def evaluate(
    problem: ProblemDefinition,
    x: np.ndarray,
    delta: float = DEFAULT_DELTA,
    counter: EvalCounter | None = None,
) -> Solution:
    """Evaluate a single decision vector.

    The vector must already lie within the problem bounds; no clamping is
    done here.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise StructuralError("evaluate expects a single decision vector")
    return evaluate_batch(problem, x[None, :], delta, counter)[0]


def transformed_objectives(sol: Solution) -> np.ndarray:
    """Objectives with the violation appended as an extra coordinate."""
    return np.append(sol.F, sol.G)


def objective_matrix(pop: Sequence[Solution]) -> np.ndarray:
    return np.array([s.F for s in pop], dtype=float)


def violation_vector(pop: Sequence[Solution]) -> np.ndarray:
    return np.array([s.G for s in pop], dtype=float)


def transformed_matrix(pop: Sequence[Solution]) -> np.ndarray:
    return np.column_stack([objective_matrix(pop), violation_vector(pop)])
