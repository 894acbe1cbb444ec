"""Built-in constrained test problems and their reference fronts.

Every evaluator broadcasts over leading axes, so a population or a dense
grid can be evaluated in one call. Reference fronts come from a brute-force
pipeline: dense parameter sweep, feasibility filter, nondominated filter,
then thinning to the requested count.
"""

from __future__ import annotations

import os
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .core import DEFAULT_DELTA, CapabilityError, ProblemDefinition, StructuralError

GRID = 2001


class UnknownProblemError(LookupError):
    def __str__(self) -> str:
        return self.args[0]


def _stack(*cols: np.ndarray) -> np.ndarray:
    return np.stack(cols, axis=-1)


def _no_equalities(X: np.ndarray) -> np.ndarray:
    return np.zeros(X.shape[:-1] + (0,))


# --- problem formulas -----------------------------------------------------

def _bnh(X):
    x1, x2 = X[..., 0], X[..., 1]
    F = _stack(4 * x1**2 + 4 * x2**2, (x1 - 5) ** 2 + (x2 - 5) ** 2)
    g = _stack((x1 - 5) ** 2 + x2**2 - 25, 7.7 - (x1 - 8) ** 2 - (x2 + 3) ** 2)
    return F, g, _no_equalities(X)


def _srn(X):
    x1, x2 = X[..., 0], X[..., 1]
    F = _stack(2 + (x1 - 2) ** 2 + (x2 - 1) ** 2, 9 * x1 - (x2 - 1) ** 2)
    g = _stack(x1**2 + x2**2 - 225, x1 - 3 * x2 + 10)
    return F, g, _no_equalities(X)


def _tnk(X):
    x1, x2 = X[..., 0], X[..., 1]
    F = _stack(x1, x2)
    g = _stack(
        -(x1**2 + x2**2 - 1 - 0.1 * np.cos(16 * np.arctan2(x1, x2))),
        (x1 - 0.5) ** 2 + (x2 - 0.5) ** 2 - 0.5,
    )
    return F, g, _no_equalities(X)


def _osy(X):
    x1, x2, x3, x4, x5, x6 = (X[..., i] for i in range(6))
    f1 = -(25 * (x1 - 2) ** 2 + (x2 - 2) ** 2 + (x3 - 1) ** 2 + (x4 - 4) ** 2 + (x5 - 1) ** 2)
    f2 = np.sum(X**2, axis=-1)
    g = _stack(
        2 - x1 - x2,
        x1 + x2 - 6,
        x2 - x1 - 2,
        x1 - 3 * x2 - 2,
        (x3 - 3) ** 2 + x4 - 4,
        4 - (x5 - 3) ** 2 - x6,
    )
    return _stack(f1, f2), g, _no_equalities(X)


def _corridor(D: int):
    slack = 0.01 * (D - 1)

    def evaluator(X):
        s = np.sum(X[..., 1:], axis=-1)
        F = _stack(X[..., 0], 1 - X[..., 0] + s)
        return F, (s - slack)[..., None], _no_equalities(X)

    return evaluator


def bnh() -> ProblemDefinition:
    return ProblemDefinition("BNH", 2, 2, 2, 0, np.array([0.0, 0.0]), np.array([5.0, 3.0]), _bnh)


def srn() -> ProblemDefinition:
    return ProblemDefinition("SRN", 2, 2, 2, 0, np.full(2, -20.0), np.full(2, 20.0), _srn)


def tnk() -> ProblemDefinition:
    # lower bound kept off zero so the arctan2 term stays well defined
    return ProblemDefinition("TNK", 2, 2, 2, 0, np.full(2, 1e-12), np.full(2, np.pi), _tnk)


def osy() -> ProblemDefinition:
    lower = np.array([0.0, 0.0, 1.0, 0.0, 1.0, 0.0])
    upper = np.array([10.0, 10.0, 5.0, 6.0, 5.0, 10.0])
    return ProblemDefinition("OSY", 2, 6, 6, 0, lower, upper, _osy)


def corridor(D: int = 10) -> ProblemDefinition:
    D = int(D)
    if D < 2:
        raise StructuralError("CORRIDOR needs D >= 2")
    return ProblemDefinition(
        "CORRIDOR", 2, D, 1, 0, np.zeros(D), np.ones(D), _corridor(D), params={"D": D}
    )


# --- reference-front sweeps -------------------------------------------------

def _grid(problem: ProblemDefinition, resolution: int) -> np.ndarray:
    axes = [np.linspace(lo, hi, resolution) for lo, hi in zip(problem.lower, problem.upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _tnk_sweep(problem: ProblemDefinition, resolution: int) -> np.ndarray:
    # g2 confines feasible points to x_i <= 0.5 + sqrt(0.5) < 1.21
    axis = np.linspace(problem.lower[0], 1.21, resolution)
    a, b = np.meshgrid(axis, axis, indexing="ij")
    return np.stack([a.ravel(), b.ravel()], axis=-1)


def _osy_sweep(problem: ProblemDefinition, resolution: int) -> np.ndarray:
    # known Pareto-optimal segments: x4 = x6 = 0 with (x1, x2, x5) on one of
    # five edges; x3 is swept freely and the filters keep what is optimal
    t = np.linspace(0.0, 1.0, resolution)
    x3 = np.linspace(1.0, 5.0, max(2, resolution // 10))
    edges = [
        (np.full_like(t, 5.0), np.full_like(t, 1.0), np.full_like(t, 5.0)),
        (np.full_like(t, 5.0), np.full_like(t, 1.0), np.full_like(t, 1.0)),
        (4.056 + (5 - 4.056) * t, (4.056 + (5 - 4.056) * t - 2) / 3, np.full_like(t, 1.0)),
        (np.zeros_like(t), np.full_like(t, 2.0), np.full_like(t, 1.0)),
        (t, 2 - t, np.full_like(t, 1.0)),
    ]
    rows = []
    for x1, x2, x5 in edges:
        a = np.repeat(np.stack([x1, x2, x5], axis=-1), x3.size, axis=0)
        b = np.tile(x3, x1.size)
        zeros = np.zeros_like(b)
        rows.append(np.stack([a[:, 0], a[:, 1], b, zeros, a[:, 2], zeros], axis=-1))
    return np.vstack(rows)


def _corridor_front(problem: ProblemDefinition, count: int) -> np.ndarray:
    # s = 0 puts the point on f2 = 1 - f1
    X = np.zeros((count, problem.D))
    X[:, 0] = np.linspace(0.0, 1.0, count)
    return X


def nondominated_filter_2d(F: np.ndarray) -> np.ndarray:
    """Indices of the nondominated rows of a two-objective set, sorted by ``f1``.

    Duplicate rows are kept once.
    """
    order = np.lexsort((F[:, 1], F[:, 0]))
    f2 = F[order, 1]
    best = np.minimum.accumulate(f2)
    keep = np.ones(order.size, dtype=bool)
    keep[1:] = f2[1:] < best[:-1]
    return order[keep]


def thin_front(F: np.ndarray, count: int) -> np.ndarray:
    """Indices of ``count`` rows of an ``f1``-sorted front, evenly spaced by arc length."""
    if F.shape[0] < count:
        raise CapabilityError(f"front has only {F.shape[0]} points, {count} requested")
    seg = np.linalg.norm(np.diff(F, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, arc[-1], count)
    idx = np.unique(np.clip(np.searchsorted(arc, targets), 0, F.shape[0] - 1))
    if idx.size < count:
        spare = np.setdiff1d(np.arange(F.shape[0]), idx)
        extra = spare[np.linspace(0, spare.size - 1, count - idx.size).round().astype(int)]
        idx = np.union1d(idx, extra)
    return idx


def sweep_front(
    problem: ProblemDefinition,
    count: int,
    sweep: Callable[[ProblemDefinition, int], np.ndarray],
    resolution: int = GRID,
    delta: float = DEFAULT_DELTA,
) -> tuple[np.ndarray, np.ndarray]:
    """Sweep, keep feasible, keep nondominated, thin. Returns ``(X, F)``."""
    X = sweep(problem, resolution)
    F, g, h = problem.evaluator(X)
    feasible = np.all(g <= 0, axis=1) & np.all(np.abs(h) <= delta, axis=1)
    X, F = X[feasible], F[feasible]
    nd = nondominated_filter_2d(F)
    X, F = X[nd], F[nd]
    keep = thin_front(F, count)
    return X[keep], F[keep]


@dataclass(frozen=True)
class ProblemEntry:
    factory: Callable[..., ProblemDefinition]
    sweep: Callable[[ProblemDefinition, int], np.ndarray] | None = None
    analytic_front: Callable[[ProblemDefinition, int], np.ndarray] | None = None

    @property
    def has_front(self) -> bool:
        return self.sweep is not None or self.analytic_front is not None


class ProblemRegistry:
    """Name to problem-factory mapping. Names are case-sensitive."""

    def __init__(self) -> None:
        self._entries: dict[str, ProblemEntry] = {}

    def register(
        self,
        name: str,
        factory: Callable[..., ProblemDefinition],
        *,
        sweep: Callable[[ProblemDefinition, int], np.ndarray] | None = None,
        analytic_front: Callable[[ProblemDefinition, int], np.ndarray] | None = None,
    ) -> None:
        if name in self._entries:
            raise ValueError(f"problem {name!r} already registered")
        self._entries[name] = ProblemEntry(factory, sweep, analytic_front)

    def unregister(self, name: str) -> None:
        self._entries.pop(name, None)

    def names(self) -> list[str]:
        return sorted(self._entries)

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def entry(self, name: str) -> ProblemEntry:
        try:
            return self._entries[name]
        except KeyError:
            raise UnknownProblemError(
                f"unknown problem {name!r}; registered: {', '.join(self.names())}"
            ) from None

    def get(self, name: str, params: Mapping[str, Any] | None = None) -> ProblemDefinition:
        entry = self.entry(name)
        try:
            return entry.factory(**dict(params or {}))
        except TypeError as exc:
            raise StructuralError(f"bad parameters for {name}: {exc}") from exc


REGISTRY = ProblemRegistry()
REGISTRY.register("BNH", bnh, sweep=_grid)
REGISTRY.register("SRN", srn, sweep=_grid)
REGISTRY.register("TNK", tnk, sweep=_tnk_sweep)
REGISTRY.register("OSY", osy, sweep=_osy_sweep)
REGISTRY.register("CORRIDOR", corridor, analytic_front=_corridor_front)


def get_problem(name: str, params: Mapping[str, Any] | None = None) -> ProblemDefinition:
    """Instantiate a registered problem.

    Raises:
        UnknownProblemError: the name is not registered (message lists the
            registered names).
    """
    return REGISTRY.get(name, params)


def list_problems() -> list[str]:
    return REGISTRY.names()


def default_cache_dir() -> Path | None:
    """Cache location from ``ATMR_CACHE_DIR``; empty string disables caching."""
    env = os.environ.get("ATMR_CACHE_DIR")
    if env is not None:
        return Path(env) if env else None
    return Path.home() / ".cache" / "atmr" / "fronts"


def _cache_key(problem: ProblemDefinition, count: int, resolution: int) -> str:
    suffix = "".join(f"_{k}{v}" for k, v in sorted(problem.params.items()))
    return f"{problem.name}{suffix}_n{count}_r{resolution}.csv"


def write_front_csv(path: Path | str, F: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ",".join(f"f{i + 1}" for i in range(F.shape[1]))
    lines = [header] + [",".join(f"{v:.17g}" for v in row) for row in F]
    tmp = path.with_name(path.name + f".{os.getpid()}.tmp")
    tmp.write_text("\n".join(lines) + "\n")
    tmp.replace(path)


def read_front_csv(path: Path | str) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def reference_set(
    name: str,
    count: int,
    params: Mapping[str, Any] | None = None,
    resolution: int = GRID,
) -> tuple[np.ndarray, np.ndarray]:
    """Decision vectors and objective vectors of a reference front (uncached)."""
    if count < 1:
        raise StructuralError("count must be positive")
    entry = REGISTRY.entry(name)
    if not entry.has_front:
        raise CapabilityError(f"no reference-front generator for {name}")
    problem = entry.factory(**dict(params or {}))
    if entry.analytic_front is not None:
        X = entry.analytic_front(problem, count)
        return X, problem.evaluator(X)[0]
    return sweep_front(problem, count, entry.sweep, resolution)


def reference_front(
    name: str,
    count: int,
    params: Mapping[str, Any] | None = None,
    *,
    resolution: int = GRID,
    cache_dir: Path | str | None | bool = True,
) -> np.ndarray:
    """At least ``count`` mutually nondominated feasible objective vectors on the front.

    ``cache_dir=True`` uses :func:`default_cache_dir`; ``None`` or ``False``
    disables the disk cache.

    Raises:
        CapabilityError: no front generator is registered for ``name``.
    """
    entry = REGISTRY.entry(name)
    if not entry.has_front:
        raise CapabilityError(f"no reference-front generator for {name}")
    if entry.analytic_front is not None:
        return reference_set(name, count, params, resolution)[1]
    problem = entry.factory(**dict(params or {}))
    directory = default_cache_dir() if cache_dir is True else (Path(cache_dir) if cache_dir else None)
    path = directory / _cache_key(problem, count, resolution) if directory else None
    if path is not None and path.exists():
        return read_front_csv(path)
    F = reference_set(name, count, params, resolution)[1]
    if path is not None:
        write_front_csv(path, F)
    return F
