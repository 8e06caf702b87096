"""Command-line entry point.

Commands: validate (built-in physics/metric self-checks), bench (seeded
baseline benchmarking), discover (LLM-driven algorithm search), landscape
(2-D fitness scans), plot (render SVG figures from bench results).

Exit codes: 0 success, 1 usage error (unknown flags included), 2 runtime
failure. Every command prints its resolved configuration before running.
All randomness flows from --seed.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

__all__ = ["main", "QUARTER_WAVE_REFERENCE", "QUARTER_WAVE_THICKNESSES"]

# 10-layer quarter-wave mirror reference point (thicknesses as documented
# for the mini-bragg instance) and its frozen fitness value
QUARTER_WAVE_THICKNESSES = tuple(107.142857 if i % 2 == 0 else 83.333333
                                 for i in range(10))
QUARTER_WAVE_REFERENCE = 0.27730223831183465

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 on usage errors (argparse default is 2)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _print_config(command: str, values: dict) -> None:
    print(f"[photobench {command}] resolved configuration:")
    for key in sorted(values):
        print(f"  {key} = {values[key]}")


def _merge_config(args, parser_defaults: dict) -> dict:
    """Overlay: defaults < config file < explicit flags."""
    from .problems import parse_kv_file

    merged = dict(parser_defaults)
    if getattr(args, "config", None):
        for key, value in parse_kv_file(args.config).items():
            key = key.replace("-", "_")
            if key not in merged:
                raise ValueError(f"unknown config key '{key}'")
            merged[key] = value
    for key, value in vars(args).items():
        if key in merged and value is not None:
            merged[key] = value
    return merged


# ---------------------------------------------------------------------------
# validate

def _validation_checks():
    """Yield (name, callable) self-checks; callables raise on failure."""
    from . import materials, metrics, problems, tmm

    def fresnel_normal():
        wave = tmm.PlaneWave(600.0, 0.0, "s")
        r, _ = tmm.fresnel_interface(tmm.ComplexIndex(1.0), tmm.ComplexIndex(1.5), wave)
        if abs(abs(r) ** 2 - 0.04) > 1e-12:
            raise AssertionError(f"normal-incidence R = {abs(r) ** 2!r}, expected 0.04")

    def fresnel_brewster():
        brewster = math.degrees(math.atan(1.5))
        wave = tmm.PlaneWave(600.0, brewster, "p")
        r, _ = tmm.fresnel_interface(tmm.ComplexIndex(1.0), tmm.ComplexIndex(1.5), wave)
        if abs(r) > 1e-12:
            raise AssertionError(f"Brewster |r_p| = {abs(r)!r}")

    def energy_conservation():
        rng = np.random.default_rng(20240)
        for _ in range(100):
            n_layers = int(rng.integers(0, 11))
            layers = tuple((float(rng.uniform(0, 500)),
                            tmm.ComplexIndex(float(rng.uniform(1, 3))))
                           for _ in range(n_layers))
            stack = tmm.LayerStack(tmm.ComplexIndex(float(rng.uniform(1, 2))), layers,
                                   tmm.ComplexIndex(float(rng.uniform(1, 3))))
            for pol in ("s", "p"):
                wave = tmm.PlaneWave(float(rng.uniform(300, 1000)),
                                     float(rng.uniform(0, 89.5)), pol)
                resp = tmm.stack_response(stack, wave)
                if abs(resp.R + resp.T - 1.0) >= 1e-9:
                    raise AssertionError(f"|R+T-1| = {abs(resp.R + resp.T - 1.0)!r}")

    def quarter_wave_reference():
        f_qw = problems.bragg_fitness(np.array(QUARTER_WAVE_THICKNESSES))
        print(f"    quarter-wave reference fitness f_qw = {f_qw:.17g}")
        if abs(f_qw - QUARTER_WAVE_REFERENCE) > 1e-12:
            raise AssertionError(f"f_qw = {f_qw!r}, expected {QUARTER_WAVE_REFERENCE!r}")

    def aocc_hand_cases():
        cfg = metrics.AoccConfig(lb=0.0, ub=1.0)
        if metrics.aocc_from_best([1.0, 1.0], cfg, 2) != 0.0:
            raise AssertionError("all-ub trajectory should give AOCC 0")
        if metrics.aocc_from_best([0.0, 0.0], cfg, 2) != 1.0:
            raise AssertionError("all-lb trajectory should give AOCC 1")
        got = metrics.aocc_from_best([0.5, 0.25], cfg, 2)
        if abs(got - 0.625) > 1e-15:
            raise AssertionError(f"hand case AOCC = {got!r}, expected 0.625")

    def dispersion_data():
        au = materials.gold_table()
        row = materials.index_at(au, 600.0)
        exact = au.n[list(au.wavelengths).index(600.0)]
        if abs(row.n - exact) > 1e-12:
            raise AssertionError("Au table interpolation mismatch at 600 nm")
        si = materials.silicon_table()
        materials.index_at(si, 375.0)
        materials.index_at(si, 750.0)
        spectrum = materials.solar_spectrum()
        lo, hi = spectrum.wavelength_range
        if lo > 375.0 or hi < 750.0:
            raise AssertionError("solar spectrum does not cover [375, 750] nm")

    def ellipsometry_self_match():
        f = problems.ellipsometry_fitness(np.array(problems.DEFAULT_ELLIPSO_TRUTH))
        if abs(f) > 1e-10:
            raise AssertionError(f"ground-truth mismatch fitness {f!r}")

    return [
        ("fresnel-normal-incidence", fresnel_normal),
        ("fresnel-brewster", fresnel_brewster),
        ("energy-conservation", energy_conservation),
        ("quarter-wave-reference", quarter_wave_reference),
        ("aocc-hand-cases", aocc_hand_cases),
        ("dispersion-data", dispersion_data),
        ("ellipsometry-self-match", ellipsometry_self_match),
    ]


def cmd_validate(args) -> int:
    _print_config("validate", {"checks": "builtin physics/metric suite"})
    failures = 0
    for name, check in _validation_checks():
        try:
            check()
        except Exception as exc:
            failures += 1
            print(f"FAIL {name}: {exc}")
            continue
        print(f"PASS {name}")
    if failures:
        print(f"{failures} check(s) failed")
        return EXIT_RUNTIME
    print("all checks passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench

def cmd_bench(args) -> int:
    from . import bench
    from .problems import get_instance

    merged = _merge_config(args, {
        "instance": "mini-bragg", "algo": ["de"], "runs": 15, "seed": 0,
        "budget_override": None, "workers": 1, "out": "results/bench",
        "ellipso_truth": None, "ellipso_quadratic": False,
    })
    _print_config("bench", merged)
    instance = get_instance(str(merged["instance"]))
    if merged["budget_override"]:
        instance = instance.with_budget(int(merged["budget_override"]))
    algos = merged["algo"] if isinstance(merged["algo"], list) \
        else [a.strip() for a in str(merged["algo"]).split(",")]
    truth = None
    if merged["ellipso_truth"]:
        truth = tuple(float(v) for v in str(merged["ellipso_truth"]).split(","))
        if len(truth) != 2:
            raise ValueError("--ellipso-truth expects 'thickness,permittivity'")
    plan = bench.BenchPlan(
        instances=(instance,),
        algorithms=tuple((bench.algorithm_display_name(a), bench.resolve_algorithm(a))
                         for a in algos),
        runs=int(merged["runs"]),
        base_seed=int(merged["seed"]),
        name=Path(str(merged["out"])).name,
        ellipso_truth=truth,
        ellipso_quadratic=bool(merged["ellipso_quadratic"]),
    )
    cells = bench.run_bench(plan, merged["out"], workers=int(merged["workers"]),
                            verbose=True)
    bad = [c for c in cells if not c.ok]
    for cell in bad:
        print(f"cell failed: {cell.instance_id} x {cell.algorithm}: {cell.error}")
    print(f"results written to {merged['out']}")
    return EXIT_RUNTIME if len(bad) == len(cells) else EXIT_OK


# ---------------------------------------------------------------------------
# discover

def cmd_discover(args) -> int:
    from . import discovery, llm
    from .problems import get_instance

    merged = _merge_config(args, {
        "instance": "mini-bragg", "mu": 1, "lam": 5, "plus": True,
        "total": 100, "runs_per_candidate": 3, "seed": 0,
        "budget_override": None, "llm_endpoint": None, "llm_model": None,
        "mock_script": None, "out": "results/discovery",
        "no_description": False, "no_insight": False, "timeout": 120.0,
    })
    _print_config("discover", merged)
    instance = get_instance(str(merged["instance"]))
    if merged["budget_override"]:
        instance = instance.with_budget(int(merged["budget_override"]))
    if merged["mock_script"]:
        client = llm.MockLLMClient(merged["mock_script"])
    elif merged["llm_endpoint"] and merged["llm_model"]:
        client = llm.HttpLLMClient(str(merged["llm_endpoint"]), str(merged["llm_model"]))
    else:
        print("discover needs either --mock-script or both --llm-endpoint and --llm-model",
              file=sys.stderr)
        return EXIT_USAGE
    es = discovery.EsConfig(
        mu=int(merged["mu"]), lam=int(merged["lam"]),
        plus=bool(merged["plus"]) if not isinstance(merged["plus"], str)
        else merged["plus"].lower() in ("1", "true", "plus"),
        total_candidates=int(merged["total"]),
        runs_per_candidate=int(merged["runs_per_candidate"]))
    prompts = discovery.load_prompt_bundle(
        instance.id,
        with_description=not merged["no_description"],
        with_insight=not merged["no_insight"])
    archive = discovery.run_discovery(
        instance, es, prompts, client, seed=int(merged["seed"]),
        timeout=float(merged["timeout"]), out_dir=merged["out"], verbose=True)
    evaluated = [c for c in archive if c.status == discovery.STATUS_EVALUATED]
    best = max(evaluated, key=lambda c: c.aocc_mean) if evaluated else None
    print(f"archive of {len(archive)} candidates written to {merged['out']}")
    if best is not None:
        print(f"best candidate: {best.name} (AOCC {best.aocc_mean:.4f})")
    else:
        print("no candidate evaluated successfully")
    return EXIT_OK


# ---------------------------------------------------------------------------
# landscape

def cmd_landscape(args) -> int:
    from . import bench, plotting
    from .problems import get_instance

    merged = _merge_config(args, {
        "instance": "ellipsometry", "coords": "0,1", "grid": 50,
        "out": "results/landscape.csv", "render": False,
    })
    _print_config("landscape", merged)
    instance = get_instance(str(merged["instance"]))
    i, j = (int(v) for v in str(merged["coords"]).split(","))
    xs, ys, matrix = bench.landscape_scan(instance, coords=(i, j),
                                          grid=int(merged["grid"]))
    out = Path(str(merged["out"]))
    out.parent.mkdir(parents=True, exist_ok=True)
    bench.write_landscape_csv(
        xs, ys, matrix,
        {"instance": instance.id, "coords": f"{i},{j}", "grid": merged["grid"]}, out)
    print(f"landscape matrix written to {out}")
    if merged["render"]:
        svg = out.with_suffix(".svg")
        plotting.plot_landscape(xs, ys, matrix, f"{instance.id} ({i},{j})", svg)
        print(f"rendered {svg}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# plot

def cmd_plot(args) -> int:
    from . import plotting

    merged = _merge_config(args, {"results": "results/bench", "out": None,
                                  "log_y": False})
    _print_config("plot", merged)
    results = Path(str(merged["results"]))
    if not results.is_dir():
        print(f"results directory not found: {results}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        written = plotting.plot_results_dir(results, merged["out"],
                                            log_y=bool(merged["log_y"]))
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_RUNTIME
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="photobench",
                     description="Photonic structure optimization workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", help="run built-in physics and metric self-checks")

    p_bench = sub.add_parser("bench", help="run seeded benchmark cells")
    p_bench.add_argument("--instance")
    p_bench.add_argument("--algo", action="append",
                         help="optimizer kind or candidate:<command>; repeatable")
    p_bench.add_argument("--runs", type=int)
    p_bench.add_argument("--seed", type=int)
    p_bench.add_argument("--budget-override", type=int, dest="budget_override")
    p_bench.add_argument("--workers", type=int)
    p_bench.add_argument("--ellipso-truth", dest="ellipso_truth",
                         help="override the ellipsometry reference layer: 't,eps'")
    p_bench.add_argument("--ellipso-quadratic", dest="ellipso_quadratic",
                         action="store_true", default=None,
                         help="use the squared-difference ellipsometry cost")
    p_bench.add_argument("--out")
    p_bench.add_argument("--config")

    p_disc = sub.add_parser("discover", help="LLM-driven algorithm discovery")
    p_disc.add_argument("--instance")
    p_disc.add_argument("--mu", type=int)
    p_disc.add_argument("--lambda", type=int, dest="lam")
    strategy = p_disc.add_mutually_exclusive_group()
    strategy.add_argument("--plus", dest="plus", action="store_true", default=None)
    strategy.add_argument("--comma", dest="plus", action="store_false", default=None)
    p_disc.add_argument("--total", type=int, help="total candidates to generate")
    p_disc.add_argument("--runs-per-candidate", type=int, dest="runs_per_candidate")
    p_disc.add_argument("--seed", type=int)
    p_disc.add_argument("--budget-override", type=int, dest="budget_override")
    p_disc.add_argument("--llm-endpoint", dest="llm_endpoint")
    p_disc.add_argument("--llm-model", dest="llm_model")
    p_disc.add_argument("--mock-script", dest="mock_script")
    p_disc.add_argument("--no-description", dest="no_description", action="store_true",
                        default=None)
    p_disc.add_argument("--no-insight", dest="no_insight", action="store_true",
                        default=None)
    p_disc.add_argument("--timeout", type=float)
    p_disc.add_argument("--out")
    p_disc.add_argument("--config")

    p_land = sub.add_parser("landscape", help="2-D fitness scan")
    p_land.add_argument("--instance")
    p_land.add_argument("--coords", help="two coordinate indices, e.g. 0,1")
    p_land.add_argument("--grid", type=int)
    p_land.add_argument("--render", action="store_true", default=None)
    p_land.add_argument("--out")
    p_land.add_argument("--config")

    p_plot = sub.add_parser("plot", help="render SVG figures from bench results")
    p_plot.add_argument("--results")
    p_plot.add_argument("--log-y", dest="log_y", action="store_true", default=None)
    p_plot.add_argument("--out")
    p_plot.add_argument("--config")

    return parser


_COMMANDS = {
    "validate": cmd_validate,
    "bench": cmd_bench,
    "discover": cmd_discover,
    "landscape": cmd_landscape,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except KeyboardInterrupt:
        return EXIT_RUNTIME
    except Exception as exc:
        print(f"photobench {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
