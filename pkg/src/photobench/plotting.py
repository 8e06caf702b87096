"""Render benchmark results to SVG figures plus re-plottable CSV tables.

Reads the per-run trajectory CSVs a bench run leaves behind and produces,
per instance, a convergence plot (mean best-so-far vs. evaluations) and a
final-fitness box plot. The numbers behind each figure are written next
to it as CSV so any external tool can re-plot them.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from . import metrics  # noqa: E402

__all__ = ["collect_runs", "plot_results_dir"]


def collect_runs(results_dir):
    """{instance: {algorithm: [trajectory, ...]}} from per-run CSVs."""
    results_dir = Path(results_dir)
    runs = defaultdict(lambda: defaultdict(list))
    for path in sorted(results_dir.glob("*__*__run*.csv")):
        traj, meta = metrics.parse_run_csv(path)
        runs[meta["instance"]][meta["algorithm"]].append((int(meta["run_id"]), traj))
    for per_algo in runs.values():
        for algo in per_algo:
            per_algo[algo] = [t for _, t in sorted(per_algo[algo], key=lambda p: p[0])]
    return {k: dict(v) for k, v in runs.items()}


def _mean_curve(trajectories):
    budget = max(len(t) for t in trajectories)
    curves = np.empty((len(trajectories), budget))
    for i, t in enumerate(trajectories):
        best = t.best_so_far_array()
        curves[i, :best.size] = best
        curves[i, best.size:] = best[-1]
    return curves.mean(axis=0)


def plot_results_dir(results_dir, out_dir=None, log_y: bool = False):
    """Write convergence and box-plot SVGs (plus CSV tables) per instance.

    Returns the list of files written. Raises FileNotFoundError when the
    directory holds no run CSVs.
    """
    results_dir = Path(results_dir)
    out = Path(out_dir) if out_dir is not None else results_dir
    out.mkdir(parents=True, exist_ok=True)
    runs = collect_runs(results_dir)
    if not runs:
        raise FileNotFoundError(f"no run CSVs found under {results_dir}")
    written = []

    for instance_id, per_algo in sorted(runs.items()):
        algos = sorted(per_algo)

        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        curve_table = {}
        for algo in algos:
            curve = _mean_curve(per_algo[algo])
            curve_table[algo] = curve
            ax.plot(np.arange(1, curve.size + 1), curve, label=algo, linewidth=1.4)
        ax.set_xlabel("evaluations")
        ax.set_ylabel("mean best-so-far fitness")
        ax.set_title(instance_id)
        if log_y:
            ax.set_yscale("log")
        ax.legend(fontsize=8)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        conv_svg = out / f"{instance_id}__convergence.svg"
        fig.savefig(conv_svg)
        plt.close(fig)
        written.append(conv_svg)

        conv_csv = out / f"{instance_id}__convergence.csv"
        with open(conv_csv, "w", encoding="utf-8", newline="\n") as f:
            f.write("evaluation," + ",".join(algos) + "\n")
            length = max(c.size for c in curve_table.values())
            for i in range(length):
                row = [str(i + 1)]
                for algo in algos:
                    c = curve_table[algo]
                    row.append(format(c[min(i, c.size - 1)], ".17g"))
                f.write(",".join(row) + "\n")
        written.append(conv_csv)

        finals = {a: [t.y_best for t in per_algo[a]] for a in algos}
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        ax.boxplot([finals[a] for a in algos], tick_labels=algos)
        ax.set_ylabel("final fitness")
        ax.set_title(instance_id)
        ax.grid(alpha=0.3, axis="y")
        fig.tight_layout()
        box_svg = out / f"{instance_id}__final_fitness.svg"
        fig.savefig(box_svg)
        plt.close(fig)
        written.append(box_svg)

        box_csv = out / f"{instance_id}__final_fitness.csv"
        with open(box_csv, "w", encoding="utf-8", newline="\n") as f:
            f.write("algorithm,run,final_fitness\n")
            for algo in algos:
                for run_idx, y in enumerate(finals[algo]):
                    f.write(f"{algo},{run_idx},{format(y, '.17g')}\n")
        written.append(box_csv)

    return written


def plot_landscape(xs, ys, matrix, title: str, path) -> None:
    """Heatmap of a 2-D landscape scan."""
    fig, ax = plt.subplots(figsize=(5.4, 4.4))
    mesh = ax.pcolormesh(xs, ys, matrix, shading="auto", cmap="viridis_r")
    fig.colorbar(mesh, ax=ax, label="fitness")
    ax.set_xlabel("coordinate i")
    ax.set_ylabel("coordinate j")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
