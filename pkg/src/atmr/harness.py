"""Multi-seed experiments: execution, persistence, and summary tables.

Output layout under ``output_dir``::

    runs/<problem>/<algorithm>/<seed>.json   one record per run
    tables/<problem>.csv                     mean/std of IGD and HV per algorithm
    summary.csv                              average ranks across problems
    fronts/*.csv, fronts/plot.gp             reference and final fronts for plotting
    failures.json                            only when some runs failed
"""

from __future__ import annotations

import json
import logging
import os
import traceback
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml
from scipy.stats import rankdata

from .algorithms import ALGORITHMS, RunFailure, RunResult
from .core import DEFAULT_DELTA, AlgorithmConfig, ConfigError, StructuralError
from .metrics import MetricReport, evaluate_population, hv_reference_point
from .problems import REGISTRY, get_problem, reference_front, write_front_csv

log = logging.getLogger(__name__)

OPERATOR_KEYS = ("pc", "pm", "eta_c", "eta_m")


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    params: dict[str, Any] = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        if not self.label:
            suffix = "".join(f"-{k}{v}" for k, v in sorted(self.params.items()))
            object.__setattr__(self, "label", f"{self.name}{suffix}")

    @classmethod
    def parse(cls, item: str | Mapping[str, Any]) -> ProblemSpec:
        if isinstance(item, str):
            return cls(item)
        if not isinstance(item, Mapping) or "name" not in item:
            raise ConfigError(f"problem entry must be a name or a mapping with 'name': {item!r}")
        extra = set(item) - {"name", "params", "label"}
        if extra:
            raise ConfigError(f"unknown keys in problem entry: {sorted(extra)}")
        return cls(str(item["name"]), dict(item.get("params") or {}), str(item.get("label") or ""))

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "params": dict(self.params), "label": self.label}


def _as_int(value: Any) -> int:
    # YAML 1.1 reads 2e4 as a string; accept it when integral
    if isinstance(value, bool):
        raise ValueError(f"expected an integer, got {value!r}")
    if isinstance(value, int):
        return value
    number = float(value)
    if not number.is_integer():
        raise ValueError(f"expected an integer, got {value!r}")
    return int(number)


@dataclass(frozen=True)
class ExperimentConfig:
    """Problems x algorithms x runs. Run ``i`` uses seed ``base_seed + i``."""

    problems: tuple[ProblemSpec, ...]
    algorithms: tuple[str, ...] = ("atmr", "nsga2_cdp")
    N: int = 100
    max_fes: int = 20_000
    runs: int = 30
    base_seed: int = 0
    delta: float = DEFAULT_DELTA
    pc: float = 1.0
    pm: float | None = None
    eta_c: float = 20.0
    eta_m: float = 20.0
    reference_count: int = 500
    output_dir: str = "results"

    def validate(self) -> None:
        if not self.problems:
            raise ConfigError("no problems configured")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.reference_count < 1:
            raise ConfigError("reference_count must be >= 1")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {alg!r}; known: {', '.join(sorted(ALGORITHMS))}")
        labels = [p.label for p in self.problems]
        if len(set(labels)) != len(labels):
            raise ConfigError("problem labels must be unique")
        for spec in self.problems:
            if spec.name not in REGISTRY:
                raise ConfigError(f"unknown problem {spec.name!r}; registered: {', '.join(REGISTRY.names())}")
            try:
                get_problem(spec.name, spec.params)
            except Exception as exc:
                raise ConfigError(f"cannot build problem {spec.label}: {exc}") from exc
        self.algorithm_config(0)

    def algorithm_config(self, seed: int) -> AlgorithmConfig:
        try:
            return AlgorithmConfig(
                N=self.N, max_fes=self.max_fes, delta=self.delta, pc=self.pc, pm=self.pm,
                eta_c=self.eta_c, eta_m=self.eta_m, seed=seed,
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict[str, Any]:
        return {
            "problems": [p.to_dict() for p in self.problems],
            "algorithms": list(self.algorithms),
            "N": self.N,
            "max_fes": self.max_fes,
            "runs": self.runs,
            "base_seed": self.base_seed,
            "delta": self.delta,
            "operators": {k: getattr(self, k) for k in OPERATOR_KEYS},
            "reference_count": self.reference_count,
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> ExperimentConfig:
        if not isinstance(data, Mapping):
            raise ConfigError("configuration must be a mapping")
        data = dict(data)
        operators = data.pop("operators", None) or {}
        if not isinstance(operators, Mapping):
            raise ConfigError("'operators' must be a mapping")
        unknown_ops = set(operators) - set(OPERATOR_KEYS)
        if unknown_ops:
            raise ConfigError(f"unknown operator parameters: {sorted(unknown_ops)}")
        data.update(operators)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        if "problems" not in data:
            raise ConfigError("configuration needs a 'problems' list")
        try:
            kwargs: dict[str, Any] = {
                "problems": tuple(ProblemSpec.parse(p) for p in data.pop("problems")),
            }
            if "algorithms" in data:
                kwargs["algorithms"] = tuple(str(a) for a in data.pop("algorithms"))
            for key in ("N", "max_fes", "runs", "base_seed", "reference_count"):
                if key in data:
                    kwargs[key] = _as_int(data.pop(key))
            for key in ("delta", "pc", "eta_c", "eta_m"):
                if key in data:
                    kwargs[key] = float(data.pop(key))
            if "pm" in data:
                pm = data.pop("pm")
                kwargs["pm"] = None if pm is None else float(pm)
            if "output_dir" in data:
                kwargs["output_dir"] = str(data.pop("output_dir"))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed configuration value: {exc}") from exc
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> ExperimentConfig:
        """Read a YAML (or JSON) experiment file."""
        try:
            data = yaml.safe_load(Path(path).read_text())
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data or {})


@dataclass(frozen=True)
class RunTask:
    problem: ProblemSpec
    algorithm: str
    run_index: int
    seed: int
    config: AlgorithmConfig
    reference_count: int

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.problem.label, self.algorithm, self.run_index)

    def snapshot(self) -> dict[str, Any]:
        return {
            "problem": self.problem.to_dict(),
            "algorithm": self.algorithm,
            "algorithm_config": self.config.to_dict(),
            "reference_count": self.reference_count,
        }


def plan(config: ExperimentConfig) -> list[RunTask]:
    tasks = []
    for spec in config.problems:
        for alg in config.algorithms:
            for i in range(config.runs):
                seed = config.base_seed + i
                tasks.append(RunTask(spec, alg, i, seed, config.algorithm_config(seed), config.reference_count))
    return tasks


def _population_payload(result: RunResult) -> dict[str, Any]:
    pop = result.final_population
    return {
        "X": [s.x.tolist() for s in pop],
        "F": [s.F.tolist() for s in pop],
        "G": [s.G for s in pop],
    }


def execute(task: RunTask, reference: np.ndarray) -> tuple[RunResult, MetricReport]:
    problem = get_problem(task.problem.name, task.problem.params)
    result = ALGORITHMS[task.algorithm](problem, task.config)
    return result, evaluate_population(result.final_population, reference, hv_reference_point(reference))


def build_record(task: RunTask, result: RunResult, report: MetricReport) -> dict[str, Any]:
    return {
        "problem": task.problem.label,
        "algorithm": task.algorithm,
        "run_index": task.run_index,
        "seed": task.seed,
        "config": task.snapshot(),
        "fes": result.fes,
        "metrics": report.to_dict(),
        "raw_population_size": len(result.raw_population),
        "final_population": _population_payload(result),
        "trace": [g.to_dict() for g in result.trace],
    }


def _run_task(task: RunTask, reference: np.ndarray) -> dict[str, Any]:
    result, report = execute(task, reference)
    return build_record(task, result, report)


def record_path(output_dir: Path, record: Mapping[str, Any]) -> Path:
    return output_dir / "runs" / record["problem"] / record["algorithm"] / f"{record['seed']}.json"


def dump_record(record: Mapping[str, Any]) -> str:
    return json.dumps(record, sort_keys=True, indent=1, allow_nan=False) + "\n"


def load_records(output_dir: str | Path) -> list[dict[str, Any]]:
    runs = Path(output_dir) / "runs"
    return [json.loads(p.read_text()) for p in sorted(runs.glob("*/*/*.json"))]


def task_from_record(record: Mapping[str, Any]) -> RunTask:
    snap = record["config"]
    spec = ProblemSpec.parse(snap["problem"])
    config = AlgorithmConfig.from_dict(snap["algorithm_config"])
    return RunTask(spec, snap["algorithm"], record["run_index"], config.seed, config, snap["reference_count"])


def replay_record(record: Mapping[str, Any]) -> dict[str, Any]:
    """Re-run a persisted run from its embedded snapshot and rebuild its record."""
    task = task_from_record(record)
    reference = reference_front(task.problem.name, task.reference_count, task.problem.params)
    return _run_task(task, reference)


# --- summaries --------------------------------------------------------------

@dataclass(frozen=True)
class StatRow:
    problem: str
    algorithm: str
    runs: int
    feasible_runs: int
    igd_mean: float
    igd_std: float
    hv_mean: float
    hv_std: float


@dataclass(frozen=True)
class Summary:
    rows: list[StatRow]
    igd_rank: dict[str, float]
    hv_rank: dict[str, float]

    def rows_for(self, problem: str) -> list[StatRow]:
        return [r for r in self.rows if r.problem == problem]

    @property
    def problems(self) -> list[str]:
        return sorted({r.problem for r in self.rows})


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    if not values:
        return float("nan"), float("nan")
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if arr.size > 1 else float("nan")
    return float(arr.mean()), std


def _average_ranks(per_problem: dict[str, dict[str, float]], algorithms: list[str], larger_is_better: bool) -> dict[str, float]:
    totals = defaultdict(float)
    for scores in per_problem.values():
        vals = np.array([scores.get(a, np.nan) for a in algorithms], dtype=float)
        keyed = -vals if larger_is_better else vals
        # undefined means rank last
        keyed = np.where(np.isnan(keyed), np.inf, keyed)
        for alg, r in zip(algorithms, rankdata(keyed, method="average")):
            totals[alg] += float(r)
    n = len(per_problem)
    return {a: totals[a] / n for a in algorithms}


def summarize(records: Iterable[Mapping[str, Any]]) -> Summary:
    """Mean/std per (problem, algorithm) and average ranks across problems.

    Rank 1 is the best mean (smallest IGD, largest HV); tied means share the
    average of their ranks.
    """
    groups: dict[tuple[str, str], list[Mapping[str, Any]]] = defaultdict(list)
    for rec in records:
        groups[(rec["problem"], rec["algorithm"])].append(rec)
    if not groups:
        raise StructuralError("no run records to summarize")
    rows = []
    for (problem, alg), recs in sorted(groups.items()):
        igds = [r["metrics"]["igd"] for r in recs if r["metrics"]["igd"] is not None]
        hvs = [r["metrics"]["hv"] for r in recs if r["metrics"]["hv"] is not None]
        igd_mean, igd_std = _mean_std(igds)
        hv_mean, hv_std = _mean_std(hvs)
        rows.append(StatRow(problem, alg, len(recs), len(igds), igd_mean, igd_std, hv_mean, hv_std))
    algorithms = sorted({r.algorithm for r in rows})
    igd_scores: dict[str, dict[str, float]] = defaultdict(dict)
    hv_scores: dict[str, dict[str, float]] = defaultdict(dict)
    for r in rows:
        igd_scores[r.problem][r.algorithm] = r.igd_mean
        hv_scores[r.problem][r.algorithm] = r.hv_mean
    return Summary(
        rows,
        _average_ranks(igd_scores, algorithms, larger_is_better=False),
        _average_ranks(hv_scores, algorithms, larger_is_better=True),
    )


def _fmt(v: float | int) -> str:
    return str(v) if isinstance(v, int) else f"{v:.17g}"


def write_summary(summary: Summary, output_dir: str | Path) -> None:
    out = Path(output_dir)
    (out / "tables").mkdir(parents=True, exist_ok=True)
    cols = ["algorithm", "runs", "feasible_runs", "igd_mean", "igd_std", "hv_mean", "hv_std"]
    for problem in summary.problems:
        lines = [",".join(cols)]
        for r in summary.rows_for(problem):
            lines.append(",".join([r.algorithm] + [_fmt(getattr(r, c)) for c in cols[1:]]))
        (out / "tables" / f"{problem}.csv").write_text("\n".join(lines) + "\n")
    lines = ["algorithm,igd_avg_rank,hv_avg_rank,problems"]
    for alg in sorted(summary.igd_rank):
        lines.append(f"{alg},{_fmt(summary.igd_rank[alg])},{_fmt(summary.hv_rank[alg])},{len(summary.problems)}")
    (out / "summary.csv").write_text("\n".join(lines) + "\n")


def read_table(path: str | Path) -> list[dict[str, Any]]:
    rows = []
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    for line in lines[1:]:
        values = line.split(",")
        row: dict[str, Any] = {"algorithm": values[0]}
        for key, val in zip(header[1:], values[1:]):
            row[key] = int(val) if key.endswith("runs") else float(val)
        rows.append(row)
    return rows


# --- plotting data ----------------------------------------------------------

GNUPLOT_TEMPLATE = """\
# gnuplot -e "problem='{problem}'" fronts/plot.gp
set datafile separator ','
set key outside
set xlabel 'f1'
set ylabel 'f2'
plot {plots}
"""


def write_fronts(output_dir: Path, references: Mapping[str, np.ndarray], records: Sequence[Mapping[str, Any]]) -> None:
    fronts = output_dir / "fronts"
    fronts.mkdir(parents=True, exist_ok=True)
    plots = []
    for label, ref in references.items():
        write_front_csv(fronts / f"{label}_reference.csv", ref)
        plots.append(f"'{label}_reference.csv' skip 1 with lines title '{label} reference'")
    for rec in records:
        F = np.asarray(rec["final_population"]["F"], dtype=float)
        G = np.asarray(rec["final_population"]["G"], dtype=float)
        if not np.any(G == 0.0):
            continue
        write_front_csv(fronts / f"{rec['problem']}_{rec['algorithm']}_{rec['seed']}.csv", F[G == 0.0])
    script = GNUPLOT_TEMPLATE.format(problem=next(iter(references), ""), plots=", \\\n     ".join(plots))
    (fronts / "plot.gp").write_text(script)


# --- driver -----------------------------------------------------------------

@dataclass
class ExperimentOutcome:
    records: list[dict[str, Any]]
    failures: list[dict[str, Any]]
    output_dir: Path
    summary: Summary | None = None

    @property
    def ok(self) -> bool:
        return not self.failures


def _failure_entry(number: int, task: RunTask, exc: BaseException) -> dict[str, Any]:
    return {
        "task": number,
        "problem": task.problem.label,
        "algorithm": task.algorithm,
        "run_index": task.run_index,
        "seed": task.seed,
        "generation": exc.generation if isinstance(exc, RunFailure) else None,
        "error": f"{type(exc).__name__}: {exc}",
        "traceback": "".join(traceback.format_exception(type(exc), exc, exc.__traceback__)),
    }


def run_experiment(config: ExperimentConfig, jobs: int | None = None) -> ExperimentOutcome:
    """Execute every (problem, algorithm, run) triple and write the report files.

    Configuration problems are reported before any run starts. A failing run
    does not stop the others; completed runs are persisted and failures are
    listed in ``failures.json`` together with their 1-based position in the
    run plan (problems, then algorithms, then run indices).
    """
    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    references = {
        spec.label: reference_front(spec.name, config.reference_count, spec.params) for spec in config.problems
    }
    tasks = plan(config)
    # 1-based position in plan order, used to name failed runs
    number = {t.key: i + 1 for i, t in enumerate(tasks)}
    jobs = jobs or os.cpu_count() or 1
    records: dict[tuple, dict[str, Any]] = {}
    failures: dict[tuple, dict[str, Any]] = {}

    def finish(task: RunTask, record: dict[str, Any]) -> None:
        path = record_path(out, record)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dump_record(record))
        records[task.key] = record
        log.info("finished %s/%s seed %d", task.problem.label, task.algorithm, task.seed)

    if jobs == 1:
        for task in tasks:
            try:
                finish(task, _run_task(task, references[task.problem.label]))
            except Exception as exc:
                failures[task.key] = _failure_entry(number[task.key], task, exc)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_run_task, t, references[t.problem.label]): t for t in tasks}
            for fut in as_completed(futures):
                task = futures[fut]
                try:
                    finish(task, fut.result())
                except Exception as exc:
                    failures[task.key] = _failure_entry(number[task.key], task, exc)

    ordered = [records[t.key] for t in tasks if t.key in records]
    failed = [failures[t.key] for t in tasks if t.key in failures]
    manifest = out / "failures.json"
    if failed:
        manifest.write_text(json.dumps({"failed": failed, "completed": len(ordered)}, indent=1) + "\n")
    elif manifest.exists():
        manifest.unlink()
    summary = None
    if ordered:
        summary = summarize(ordered)
        write_summary(summary, out)
        write_fronts(out, references, ordered)
    (out / "config.json").write_text(json.dumps(config.to_dict(), indent=1, sort_keys=True) + "\n")
    return ExperimentOutcome(ordered, failed, out, summary)


def with_overrides(config: ExperimentConfig, **overrides: Any) -> ExperimentConfig:
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})
