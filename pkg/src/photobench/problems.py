"""The three photonic objectives and the six benchmark instances.

All objectives are deterministic minimization problems over box-bounded
vectors. Out-of-bounds inputs raise ``BoundsError``; no silent clamping,
so optimizer bound-handling bugs surface immediately.

Objectives:
  * Bragg mirror (10 or 20 layers): 1 - reflectance at 600 nm, normal
    incidence, alternating permittivities 1.96 / 3.24 starting with 1.96,
    air on both sides.
  * Ellipsometry inverse problem (1 layer on gold): mean absolute
    (psi, wrapped delta) mismatch in degrees against a reference layer,
    100 wavelengths in [400, 800] nm at 40 degrees incidence.
  * Photovoltaic coating (10/20/32 layers): 1 - j_sc / j_ideal where j_sc
    integrates the absorbed photon flux of an air / coating / 30 um Si /
    air stack over [375, 750] nm (trapezoid, 300 points). The coating
    alternates permittivities 2.0 / 3.0 starting with 2.0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import materials, tmm

__all__ = [
    "BoundsError",
    "BudgetExhaustedError",
    "ProblemInstance",
    "RunTrajectory",
    "BudgetedObjective",
    "INSTANCE_IDS",
    "get_instance",
    "instance_objective",
    "make_budgeted",
    "bragg_fitness",
    "ellipsometry_fitness",
    "photovoltaic_fitness",
    "load_instance_cfg",
    "default_instance_dir",
]


class BoundsError(ValueError):
    """Input outside the instance's box bounds (contract violation)."""


class BudgetExhaustedError(RuntimeError):
    """Objective called more times than the evaluation budget allows."""


BRAGG_WAVELENGTH_NM = 600.0
BRAGG_EPS = (1.96, 3.24)
PV_EPS = (2.0, 3.0)
PV_SUBSTRATE_THICKNESS_NM = 30000.0
PV_BAND_NM = (375.0, 750.0)
PV_GRID_POINTS = 300
ELLIPSO_BAND_NM = (400.0, 800.0)
ELLIPSO_GRID_POINTS = 100
ELLIPSO_ANGLE_DEG = 40.0
DEFAULT_ELLIPSO_TRUTH = (100.0, 2.25)

_AIR = 1.0 + 0.0j


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Bounded, budgeted benchmark instance (one Table row)."""

    id: str
    dimension: int
    lower_bounds: np.ndarray
    upper_bounds: np.ndarray
    budget: int
    aocc_lb: float
    aocc_ub: float

    def __post_init__(self):
        lb = np.asarray(self.lower_bounds, dtype=float)
        ub = np.asarray(self.upper_bounds, dtype=float)
        object.__setattr__(self, "lower_bounds", lb)
        object.__setattr__(self, "upper_bounds", ub)
        if lb.shape != (self.dimension,) or ub.shape != (self.dimension,):
            raise ValueError("bounds must have one entry per dimension")
        if np.any(lb >= ub):
            raise ValueError("lower bounds must be strictly below upper bounds")
        if self.budget <= 0:
            raise ValueError("budget must be positive")

    def with_budget(self, budget: int) -> "ProblemInstance":
        return replace(self, budget=int(budget))

    def check_bounds(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise BoundsError(
                f"{self.id}: expected {self.dimension} coordinates, got shape {x.shape}")
        if np.any(x < self.lower_bounds) or np.any(x > self.upper_bounds):
            raise BoundsError(f"{self.id}: input outside bounds")
        return x


def _box(dim, lo, hi):
    return np.full(dim, float(lo)), np.full(dim, float(hi))


def _make_instances():
    table = {}
    for iid, dim, budget in (("mini-bragg", 10, 10000), ("bragg", 20, 20000)):
        lb, ub = _box(dim, 0.0, 218.0)
        table[iid] = ProblemInstance(iid, dim, lb, ub, budget, 0.0, 1.0)
    table["ellipsometry"] = ProblemInstance(
        "ellipsometry", 2, np.array([50.0, 1.1]), np.array([150.0, 3.0]), 1000, 0.0, 40.0)
    for iid, dim, budget in (("photovoltaic", 10, 5000),
                             ("big-photovoltaic", 20, 10000),
                             ("huge-photovoltaic", 32, 16000)):
        lb, ub = _box(dim, 30.0, 250.0)
        table[iid] = ProblemInstance(iid, dim, lb, ub, budget, 0.0, 1.0)
    return table


_INSTANCES = _make_instances()
INSTANCE_IDS = tuple(_INSTANCES)


def get_instance(instance_id: str) -> ProblemInstance:
    try:
        return _INSTANCES[instance_id]
    except KeyError:
        raise KeyError(f"unknown instance '{instance_id}'; known: {', '.join(INSTANCE_IDS)}") from None


# ---------------------------------------------------------------------------
# Bragg mirror

_BRAGG_N = (tmm.ComplexIndex.from_permittivity(BRAGG_EPS[0]).value,
            tmm.ComplexIndex.from_permittivity(BRAGG_EPS[1]).value)


def bragg_fitness(thicknesses, superstrate: complex = _AIR, substrate: complex = _AIR) -> float:
    """1 - R at 600 nm for the alternating-permittivity mirror (minimize).

    The mirror sits in air on both sides by default; the media are
    parameters because the quarter-wave reference value depends on them.
    """
    t = np.asarray(thicknesses, dtype=float)
    if t.shape[0] not in (10, 20) or t.ndim != 1:
        raise BoundsError(f"bragg: expected 10 or 20 thicknesses, got shape {t.shape}")
    if np.any(t < 0.0) or np.any(t > 218.0):
        raise BoundsError("bragg: thickness outside [0, 218] nm")
    layers = [(t[i], _BRAGG_N[i % 2]) for i in range(t.shape[0])]
    R = tmm._scalar_response(superstrate, layers, substrate,
                             BRAGG_WAVELENGTH_NM, 0.0, "s")[2]
    return 1.0 - R


# ---------------------------------------------------------------------------
# Ellipsometry inverse problem

@lru_cache(maxsize=4)
def _ellipso_grid_and_gold(data_dir: str):
    wl = np.linspace(*ELLIPSO_BAND_NM, ELLIPSO_GRID_POINTS)
    au = materials.index_array(materials.gold_table(), wl)
    return wl, au


@lru_cache(maxsize=16)
def _ellipso_reference(truth, data_dir: str):
    wl, au = _ellipso_grid_and_gold(data_dir)
    t_ref, eps_ref = truth
    n_ref = tmm.ComplexIndex.from_permittivity(eps_ref).value
    return tmm.psi_delta_spectrum(_AIR, [t_ref], np.array([n_ref]), au, wl,
                                  ELLIPSO_ANGLE_DEG)


def _wrap_degrees(d):
    """Fold angle differences into (-180, 180]."""
    return 180.0 - np.mod(180.0 - np.asarray(d), 360.0)


def ellipsometry_fitness(params, ground_truth=DEFAULT_ELLIPSO_TRUTH,
                         quadratic: bool = False) -> float:
    """Mismatch against the reference layer in degrees (minimize).

    Default cost: mean over wavelengths of |d psi| + |wrapped d delta|.
    ``quadratic=True`` switches to the mean of squared differences instead
    (same wrap handling).
    """
    p = np.asarray(params, dtype=float)
    if p.shape != (2,):
        raise BoundsError(f"ellipsometry: expected (thickness, permittivity), got shape {p.shape}")
    t_nm, eps = float(p[0]), float(p[1])
    if not 50.0 <= t_nm <= 150.0:
        raise BoundsError("ellipsometry: thickness outside [50, 150] nm")
    if not 1.1 <= eps <= 3.0:
        raise BoundsError("ellipsometry: permittivity outside [1.1, 3.0]")
    data_dir = str(materials.default_data_dir())
    wl, au = _ellipso_grid_and_gold(data_dir)
    psi_ref, delta_ref = _ellipso_reference(tuple(ground_truth), data_dir)
    n_layer = tmm.ComplexIndex.from_permittivity(eps).value
    psi, delta = tmm.psi_delta_spectrum(_AIR, [t_nm], np.array([n_layer]), au, wl,
                                        ELLIPSO_ANGLE_DEG)
    d_psi = psi - psi_ref
    d_delta = _wrap_degrees(delta - delta_ref)
    if quadratic:
        return float(np.mean(d_psi ** 2 + d_delta ** 2))
    return float(np.mean(np.abs(d_psi) + np.abs(d_delta)))


# ---------------------------------------------------------------------------
# Photovoltaic antireflection coating

_PV_N = (tmm.ComplexIndex.from_permittivity(PV_EPS[0]).value,
         tmm.ComplexIndex.from_permittivity(PV_EPS[1]).value)


@lru_cache(maxsize=4)
def _pv_grid(data_dir: str):
    wl = np.linspace(*PV_BAND_NM, PV_GRID_POINTS)
    si = materials.index_array(materials.silicon_table(), wl)
    flux = materials.photon_flux_array(materials.solar_spectrum(), wl)
    j_ideal = float(np.trapezoid(flux, wl))
    return wl, si, flux, j_ideal


def photovoltaic_fitness(thicknesses) -> float:
    """1 - j_sc / j_ideal for the coated silicon cell (minimize)."""
    t = np.asarray(thicknesses, dtype=float)
    if t.shape[0] not in (10, 20, 32) or t.ndim != 1:
        raise BoundsError(f"photovoltaic: expected 10/20/32 thicknesses, got shape {t.shape}")
    if np.any(t < 30.0) or np.any(t > 250.0):
        raise BoundsError("photovoltaic: thickness outside [30, 250] nm")
    data_dir = str(materials.default_data_dir())
    wl, si, flux, j_ideal = _pv_grid(data_dir)
    L = t.shape[0]
    indices = np.empty((L + 1, wl.size), dtype=complex)
    for i in range(L):
        indices[i, :] = _PV_N[i % 2]
    indices[L, :] = si
    all_t = np.concatenate([t, [PV_SUBSTRATE_THICKNESS_NM]])
    A = tmm.multilayer_response(_AIR, all_t, indices, _AIR, wl, 0.0, "s")["A"]
    j_sc = float(np.trapezoid(A * flux, wl))
    return 1.0 - j_sc / j_ideal


# ---------------------------------------------------------------------------
# Budgeted evaluation and trajectories

class RunTrajectory:
    """Per-evaluation log: raw fitness and running best, 1-based indices."""

    def __init__(self, instance_id: str = ""):
        self.instance_id = instance_id
        self.raw: list[float] = []
        self.best: list[float] = []

    def append(self, raw_fitness: float) -> None:
        f = float(raw_fitness)
        self.raw.append(f)
        self.best.append(f if not self.best else min(self.best[-1], f))

    def __len__(self) -> int:
        return len(self.raw)

    @property
    def evals(self):
        """(index, raw, best_so_far) tuples, index starting at 1."""
        return [(i + 1, r, b) for i, (r, b) in enumerate(zip(self.raw, self.best))]

    @property
    def y_best(self) -> float:
        if not self.best:
            raise ValueError("empty trajectory")
        return self.best[-1]

    def best_so_far_array(self) -> np.ndarray:
        return np.asarray(self.best, dtype=float)


class BudgetedObjective:
    """Counting/logging wrapper around an instance objective.

    Call number ``budget + 1`` raises ``BudgetExhaustedError`` and leaves
    the trajectory untouched. One wrapper belongs to one run.
    """

    def __init__(self, instance: ProblemInstance, objective=None):
        self.instance = instance
        self._fn = objective if objective is not None else instance_objective(instance)
        self.budget = instance.budget
        self.used = 0
        self.trajectory = RunTrajectory(instance.id)

    @property
    def remaining(self) -> int:
        return self.budget - self.used

    def __call__(self, x) -> float:
        if self.used >= self.budget:
            raise BudgetExhaustedError(
                f"{self.instance.id}: budget of {self.budget} evaluations exhausted")
        x = self.instance.check_bounds(x)
        f = float(self._fn(x))
        self.used += 1
        self.trajectory.append(f)
        return f


def instance_objective(instance: ProblemInstance, ground_truth=None,
                       quadratic: bool = False):
    """Bare objective callable for an instance (no counting).

    ``ground_truth`` and ``quadratic`` apply to the ellipsometry family
    only and are ignored elsewhere.
    """
    iid = instance.id
    if iid in ("mini-bragg", "bragg"):
        return bragg_fitness
    if iid == "ellipsometry":
        truth = tuple(ground_truth) if ground_truth is not None else DEFAULT_ELLIPSO_TRUTH
        return lambda x: ellipsometry_fitness(x, ground_truth=truth, quadratic=quadratic)
    if iid in ("photovoltaic", "big-photovoltaic", "huge-photovoltaic"):
        return photovoltaic_fitness
    raise KeyError(f"no objective registered for instance '{iid}'")


def make_budgeted(instance: ProblemInstance, ground_truth=None,
                  quadratic: bool = False) -> BudgetedObjective:
    objective = instance_objective(instance, ground_truth=ground_truth,
                                   quadratic=quadratic) \
        if (ground_truth is not None or quadratic) else None
    return BudgetedObjective(instance, objective=objective)


# ---------------------------------------------------------------------------
# Instance config files (key = value dialect)

def default_instance_dir() -> Path:
    return Path(__file__).parent / "instances"


def parse_kv_file(path) -> dict:
    """Parse a flat ``key = value`` config file, '#' comments allowed."""
    values = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got '{line}'")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
    return values


def load_instance_cfg(path) -> ProblemInstance:
    """Build a ProblemInstance from a config file."""
    cfg = parse_kv_file(path)
    iid = cfg["id"]
    layers = int(cfg["layers"])
    budget = int(cfg["budget"])
    aocc_lb = float(cfg.get("aocc_lb", 0.0))
    aocc_ub = float(cfg["aocc_ub"])
    t_lo, t_hi = float(cfg["min_thickness_nm"]), float(cfg["max_thickness_nm"])
    if "min_permittivity" in cfg:
        lb = np.array([t_lo, float(cfg["min_permittivity"])])
        ub = np.array([t_hi, float(cfg["max_permittivity"])])
        dim = 2 * layers
    else:
        lb, ub = _box(layers, t_lo, t_hi)
        dim = layers
    return ProblemInstance(iid, dim, lb, ub, budget, aocc_lb, aocc_ub)
