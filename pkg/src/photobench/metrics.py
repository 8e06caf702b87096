"""Anytime-performance metric (area over the convergence curve), run
statistics, and trajectory CSV emission.

AOCC of a best-so-far series s_1..s_B (padded with its last value if the
run ended early) is the budget-normalized mean of 1 - (clip(s_i) - LB) /
(UB - LB). In linear mode values are clipped to [lb, ub]; in log mode
log10 is applied after clipping and the bounds become log10(lb), log10(ub).
1.0 is ideal anytime performance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problems import RunTrajectory

__all__ = [
    "AoccConfig",
    "RunSummary",
    "aocc",
    "aocc_from_best",
    "summarize_trajectory",
    "summarize_runs",
    "emit_run_csv",
    "parse_run_csv",
]

META_KEYS = ("instance", "algorithm", "run_id", "budget", "seed")
CSV_COLUMNS = "evaluation,raw_fitness,best_so_far"


@dataclass(frozen=True)
class AoccConfig:
    lb: float
    ub: float
    log_scale: bool = False

    def __post_init__(self):
        if not self.lb < self.ub:
            raise ValueError(f"AOCC bounds require lb < ub, got [{self.lb}, {self.ub}]")
        if self.log_scale and self.lb <= 0:
            raise ValueError("log-scaled AOCC requires lb > 0")


@dataclass(frozen=True)
class RunSummary:
    aocc: float
    y_best: float
    n_evals: int


def aocc_from_best(best_so_far, cfg: AoccConfig, budget: int) -> float:
    """AOCC of a best-so-far sequence, padded to the full budget."""
    s = np.asarray(best_so_far, dtype=float)
    if s.size == 0:
        raise ValueError("empty trajectory")
    if budget < s.size:
        raise ValueError(f"budget {budget} is shorter than the trajectory ({s.size})")
    v = np.clip(s, cfg.lb, cfg.ub)
    lo, hi = cfg.lb, cfg.ub
    if cfg.log_scale:
        v = np.log10(v)
        lo, hi = math.log10(cfg.lb), math.log10(cfg.ub)
    contrib = 1.0 - (v - lo) / (hi - lo)
    total = float(np.sum(contrib))
    # evaluations never performed keep the final best-so-far value
    total += float(contrib[-1]) * (budget - s.size)
    return total / budget


def aocc(trajectory: RunTrajectory, cfg: AoccConfig, budget: int) -> float:
    return aocc_from_best(trajectory.best_so_far_array(), cfg, budget)


def summarize_trajectory(trajectory: RunTrajectory, cfg: AoccConfig, budget: int) -> RunSummary:
    return RunSummary(aocc=aocc(trajectory, cfg, budget),
                      y_best=trajectory.y_best,
                      n_evals=len(trajectory))


def summarize_runs(summaries):
    """(aocc_mean, aocc_std, y_best_mean, y_best_std); population std."""
    if not summaries:
        raise ValueError("need at least one run summary")
    a = np.array([s.aocc for s in summaries], dtype=float)
    y = np.array([s.y_best for s in summaries], dtype=float)
    return float(a.mean()), float(a.std()), float(y.mean()), float(y.std())


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def emit_run_csv(trajectory: RunTrajectory, meta: dict, path) -> None:
    """Write one run to CSV: '# key=value' metadata block, then data rows.

    Emission is deterministic; re-emitting the same trajectory yields a
    byte-identical file.
    """
    missing = [k for k in META_KEYS if k not in meta]
    if missing:
        raise ValueError(f"missing metadata keys: {missing}")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for key in META_KEYS:
                f.write(f"# {key}={meta[key]}\n")
            f.write(CSV_COLUMNS + "\n")
            for i, (raw, best) in enumerate(zip(trajectory.raw, trajectory.best), start=1):
                f.write(f"{i},{_g17(raw)},{_g17(best)}\n")
    except OSError as exc:
        raise OSError(f"failed writing trajectory CSV to {path}: {exc}") from exc


def parse_run_csv(path):
    """Inverse of emit_run_csv: returns (RunTrajectory, meta dict)."""
    meta = {}
    traj = None
    with open(path, encoding="utf-8") as f:
        for lineno, raw_line in enumerate(f, start=1):
            line = raw_line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key.strip()] = val
                continue
            if line == CSV_COLUMNS:
                traj = RunTrajectory(meta.get("instance", ""))
                continue
            if traj is None:
                raise ValueError(f"{path}:{lineno}: data before column header")
            idx_s, raw_s, best_s = line.split(",")
            traj.append(float(raw_s))
            if int(idx_s) != len(traj):
                raise ValueError(f"{path}:{lineno}: non-sequential evaluation index")
            if float(best_s) != traj.best[-1]:
                raise ValueError(f"{path}:{lineno}: best_so_far column inconsistent")
    if traj is None:
        raise ValueError(f"{path}: missing column header '{CSV_COLUMNS}'")
    return traj, meta
