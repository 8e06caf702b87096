"""Benchmark orchestration: seeded repeat runs per (algorithm, instance)
cell, per-run trajectory CSVs, an aggregate table, and diagnostic 2-D
landscape scans.

Run seeds are ``base_seed + run_index``. A failing cell is recorded in the
aggregate (status column) and skipped; it never aborts the plan.
"""

from __future__ import annotations

import concurrent.futures
import re
import shlex
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import metrics, optimizers, sandbox
from .problems import ProblemInstance, get_instance, instance_objective, parse_kv_file

__all__ = ["BenchPlan", "BenchCellResult", "run_bench", "landscape_scan",
           "load_plan", "AGGREGATE_COLUMNS"]

AGGREGATE_COLUMNS = ("instance,algorithm,runs,status,"
                     "aocc_mean,aocc_std,y_best_mean,y_best_std")


@dataclass(frozen=True)
class BenchPlan:
    """What to run: instances x algorithms x seeded repeats.

    ``ellipso_truth`` / ``ellipso_quadratic`` override the ellipsometry
    reference layer and cost form for every cell that uses that instance.
    """

    instances: tuple
    algorithms: tuple  # (name, OptimizerConfig | argv list) pairs
    runs: int = 15
    base_seed: int = 0
    name: str = "bench"
    ellipso_truth: tuple | None = None
    ellipso_quadratic: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not self.instances or not self.algorithms:
            raise ValueError("plan needs at least one instance and one algorithm")


@dataclass
class BenchCellResult:
    instance_id: str
    algorithm: str
    summaries: list = field(default_factory=list)
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


def _run_one(instance: ProblemInstance, algo_name: str, algo_spec, seed: int,
             timeout: float, objective):
    if isinstance(algo_spec, optimizers.OptimizerConfig):
        cfg = optimizers.with_seed(algo_spec, seed)
        bounds = (instance.lower_bounds, instance.upper_bounds)
        traj = optimizers.run_optimizer(objective, bounds, instance.budget, cfg)
        traj.instance_id = instance.id
        return traj
    result = sandbox.run_candidate(list(algo_spec), instance, timeout=timeout,
                                   seed=seed, objective=objective)
    if not result.ok:
        raise RuntimeError(
            f"candidate run failed ({result.status}): {result.stderr_capture[:500]}")
    return result.trajectory


def run_bench(plan: BenchPlan, out_dir, workers: int = 1,
              timeout: float = sandbox.DEFAULT_TIMEOUT_S, verbose: bool = False):
    """Execute every (instance, algorithm, run) cell of the plan.

    Writes one trajectory CSV per run plus ``aggregate.csv`` under
    ``out_dir``; returns the list of BenchCellResult. Deterministic for a
    fixed base_seed regardless of worker count.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cells = []

    def run_cell(instance, algo_name, algo_spec):
        cell = BenchCellResult(instance.id, algo_name)
        cfg = metrics.AoccConfig(lb=instance.aocc_lb, ub=instance.aocc_ub)
        objective = instance_objective(instance, ground_truth=plan.ellipso_truth,
                                       quadratic=plan.ellipso_quadratic)
        for run_idx in range(plan.runs):
            seed = plan.base_seed + run_idx
            try:
                traj = _run_one(instance, algo_name, algo_spec, seed, timeout,
                                objective)
            except Exception as exc:
                cell.error = f"run {run_idx}: {exc}"
                break
            meta = {"instance": instance.id, "algorithm": algo_name,
                    "run_id": run_idx, "budget": instance.budget, "seed": seed}
            fname = f"{instance.id}__{_safe_component(algo_name)}__run{run_idx}.csv"
            metrics.emit_run_csv(traj, meta, out / fname)
            cell.summaries.append(metrics.summarize_trajectory(traj, cfg, instance.budget))
        if verbose:
            state = "ok" if cell.ok else f"FAILED ({cell.error})"
            print(f"[bench] {instance.id} x {algo_name}: {state}", flush=True)
        return cell

    jobs = [(inst, name, spec) for inst in plan.instances for name, spec in plan.algorithms]
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(lambda j: run_cell(*j), jobs))
    else:
        cells = [run_cell(*j) for j in jobs]

    with open(out / "aggregate.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write(AGGREGATE_COLUMNS + "\n")
        for cell in cells:
            if cell.ok and cell.summaries:
                a_mean, a_std, y_mean, y_std = metrics.summarize_runs(cell.summaries)
                f.write(f"{cell.instance_id},{cell.algorithm},{len(cell.summaries)},ok,"
                        f"{a_mean:.17g},{a_std:.17g},{y_mean:.17g},{y_std:.17g}\n")
            else:
                f.write(f"{cell.instance_id},{cell.algorithm},{len(cell.summaries)},"
                        f"failed,,,,\n")
    return cells


def landscape_scan(instance: ProblemInstance, coords=(0, 1), grid: int = 50,
                   fixed=None):
    """Fitness over a grid x grid lattice of two coordinates (diagnostic;
    bypasses budget accounting).

    Other coordinates sit at ``fixed`` (default: box midpoint). Returns
    (xs, ys, matrix) where matrix[i, j] = f(xs[j], ys[i]).
    """
    i, j = coords
    d = instance.dimension
    if not (0 <= i < d and 0 <= j < d) or i == j:
        raise ValueError(f"coordinate pair {coords} invalid for dimension {d}")
    if grid < 2:
        raise ValueError("grid must be >= 2")
    base = np.asarray(fixed, dtype=float) if fixed is not None \
        else 0.5 * (instance.lower_bounds + instance.upper_bounds)
    if base.shape != (d,):
        raise ValueError("fixed vector must match the instance dimension")
    objective = instance_objective(instance)
    xs = np.linspace(instance.lower_bounds[i], instance.upper_bounds[i], grid)
    ys = np.linspace(instance.lower_bounds[j], instance.upper_bounds[j], grid)
    matrix = np.empty((grid, grid))
    point = base.copy()
    for row, y in enumerate(ys):
        for col, x in enumerate(xs):
            point[i] = x
            point[j] = y
            matrix[row, col] = objective(point)
    return xs, ys, matrix


def write_landscape_csv(xs, ys, matrix, meta: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for key, value in meta.items():
            f.write(f"# {key}={value}\n")
        f.write("# budget_accounting=bypassed\n")
        f.write("x\\y," + ",".join(format(x, ".17g") for x in xs) + "\n")
        for row, y in enumerate(ys):
            f.write(format(y, ".17g") + "," +
                    ",".join(format(v, ".17g") for v in matrix[row]) + "\n")


def load_plan(path, algo_resolver) -> BenchPlan:
    """Plan from a key = value file; ``algo_resolver(name) -> spec``."""
    cfg = parse_kv_file(path)
    instances = tuple(get_instance(s.strip()) for s in cfg["instances"].split(","))
    algorithms = tuple((a.strip(), algo_resolver(a.strip()))
                       for a in cfg["algorithms"].split(","))
    return BenchPlan(instances=instances, algorithms=algorithms,
                     runs=int(cfg.get("runs", 15)),
                     base_seed=int(cfg.get("base_seed", 0)),
                     name=cfg.get("name", Path(path).stem))


def resolve_algorithm(spec: str):
    """Algorithm spec from the CLI: an optimizer kind or 'candidate:<command>'."""
    if spec.startswith("candidate:"):
        return shlex.split(spec[len("candidate:"):])
    kind = {"bfgs": "bfgs-restart", "cmaes": "cma-es"}.get(spec, spec)
    return optimizers.OptimizerConfig(kind=kind)


def algorithm_display_name(spec: str) -> str:
    """Short, filesystem-safe name for an --algo value."""
    if spec.startswith("candidate:"):
        argv = shlex.split(spec[len("candidate:"):])
        script = next((t for t in argv if "." in Path(t).name), argv[0])
        return _safe_component(f"candidate-{Path(script).stem}")
    return spec


def _safe_component(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "-", name)
