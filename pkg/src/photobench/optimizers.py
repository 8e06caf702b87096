"""Five baseline black-box optimizers producing per-evaluation trajectories.

All optimizers consume exactly ``budget`` objective evaluations, evaluate
only in-bounds points, and are bitwise reproducible for a fixed seed.
Bound handling: reflection for the DE family, projection for BFGS,
resample-then-project for CMA-ES.

Kinds: ``de`` (rand/1/bin), ``qode`` (quasi-oppositional DE), ``qnde``
(DE then BFGS refinement), ``bfgs-restart`` (finite-difference BFGS with
uniform restarts), ``cma-es``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .problems import RunTrajectory

__all__ = [
    "OptimizerConfig",
    "OPTIMIZER_KINDS",
    "quasi_opposite",
    "run_de",
    "run_qode",
    "run_bfgs_restart",
    "run_qnde",
    "run_cmaes",
    "run_optimizer",
]

OPTIMIZER_KINDS = ("de", "qode", "qnde", "bfgs-restart", "cma-es")


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = "de"
    population_size: int | None = None  # None -> per-kind default
    de_f: float = 0.5
    de_cr: float = 0.9
    jumping_rate: float = 0.3
    hybrid_split: float = 0.75
    sigma0: float | None = None  # None -> 0.3 of the box width
    seed: int = 0

    def __post_init__(self):
        if self.kind not in OPTIMIZER_KINDS:
            raise ValueError(f"unknown optimizer kind '{self.kind}'")
        if not 0.0 <= self.jumping_rate <= 1.0:
            raise ValueError("jumping_rate must lie in [0, 1]")
        if not 0.0 < self.hybrid_split < 1.0:
            raise ValueError("hybrid_split must lie in (0, 1)")
        if self.population_size is not None and self.population_size < 4 \
                and self.kind in ("de", "qode", "qnde"):
            raise ValueError("DE variants need population_size >= 4")


class _BudgetDone(Exception):
    """Internal control flow: the evaluation budget has been consumed."""


class _Recorder:
    """Counts evaluations, logs the trajectory, raises when budget is spent."""

    def __init__(self, objective, budget: int, instance_id: str = ""):
        self.objective = objective
        self.budget = budget
        self.trajectory = RunTrajectory(instance_id)
        self.best_f = math.inf
        self.best_x = None

    @property
    def used(self) -> int:
        return len(self.trajectory)

    @property
    def remaining(self) -> int:
        return self.budget - self.used

    def __call__(self, x) -> float:
        if self.remaining <= 0:
            raise _BudgetDone
        f = float(self.objective(np.asarray(x, dtype=float)))
        self.trajectory.append(f)
        if f < self.best_f:
            self.best_f = f
            self.best_x = np.array(x, dtype=float, copy=True)
        return f


def _check_bounds(bounds):
    lb = np.asarray(bounds[0], dtype=float)
    ub = np.asarray(bounds[1], dtype=float)
    if lb.shape != ub.shape or lb.ndim != 1:
        raise ValueError("bounds must be two equal-length vectors")
    if np.any(lb >= ub):
        raise ValueError("lower bounds must be strictly below upper bounds")
    return lb, ub


def _reflect(x, lb, ub):
    """Fold arbitrary points back into the box by mirror reflection."""
    width = ub - lb
    y = np.mod(x - lb, 2.0 * width)
    return lb + np.where(y <= width, y, 2.0 * width - y)


def _default_pop(dim: int) -> int:
    return min(10 * dim, 50)


# ---------------------------------------------------------------------------
# differential evolution

def _de_generation(rec, rng, pop, fit, lb, ub, f_weight, cr):
    n, d = pop.shape
    for i in range(n):
        choices = rng.choice(n - 1, size=3, replace=False)
        r1, r2, r3 = [c + 1 if c >= i else c for c in choices]
        v = pop[r1] + f_weight * (pop[r2] - pop[r3])
        jrand = rng.integers(d)
        mask = rng.random(d) < cr
        mask[jrand] = True
        trial = np.where(mask, v, pop[i])
        trial = _reflect(trial, lb, ub)
        ft = rec(trial)
        if ft <= fit[i]:
            pop[i] = trial
            fit[i] = ft


def _de_loop(rec, rng, bounds, cfg, pop=None, fit=None):
    lb, ub = bounds
    d = lb.size
    n = cfg.population_size or _default_pop(d)
    if pop is None:
        pop = rng.uniform(lb, ub, size=(n, d))
        fit = np.array([rec(x) for x in pop])
    while True:
        _de_generation(rec, rng, pop, fit, lb, ub, cfg.de_f, cfg.de_cr)


def run_de(objective, bounds, budget: int, cfg: OptimizerConfig) -> RunTrajectory:
    """DE/rand/1/bin with reflection bound handling and greedy selection."""
    lb, ub = _check_bounds(bounds)
    n = cfg.population_size or _default_pop(lb.size)
    if budget < n:
        raise ValueError(f"budget {budget} below population size {n}")
    rec = _Recorder(objective, budget)
    rng = np.random.default_rng(cfg.seed)
    try:
        _de_loop(rec, rng, (lb, ub), cfg)
    except _BudgetDone:
        pass
    return rec.trajectory


# ---------------------------------------------------------------------------
# quasi-oppositional differential evolution

def quasi_opposite(x, lb, ub, rng) -> np.ndarray:
    """Point sampled uniformly between the box center and the opposite of x."""
    x = np.asarray(x, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    opposite = lb + ub - x
    center = 0.5 * (lb + ub)
    return center + rng.random(x.shape) * (opposite - center)


def _select_best_half(cand, cand_fit, n):
    order = np.argsort(cand_fit, kind="stable")[:n]
    return cand[order].copy(), cand_fit[order].copy()


def run_qode(objective, bounds, budget: int, cfg: OptimizerConfig) -> RunTrajectory:
    """DE with quasi-oppositional initialization and generation jumping.

    Initialization evaluates the uniform population plus its quasi-opposites
    and keeps the best half. Each generation jumps with probability
    ``jumping_rate``: quasi-opposites are formed against the current
    population's bounding box and the best half of the union survives.
    """
    lb, ub = _check_bounds(bounds)
    d = lb.size
    n = cfg.population_size or _default_pop(d)
    if budget < 2 * n:
        raise ValueError(f"qode needs budget >= 2*population_size ({2 * n}), got {budget}")
    rec = _Recorder(objective, budget)
    rng = np.random.default_rng(cfg.seed)
    try:
        pop0 = rng.uniform(lb, ub, size=(n, d))
        qpop = np.array([quasi_opposite(x, lb, ub, rng) for x in pop0])
        cand = np.vstack([pop0, qpop])
        cand_fit = np.array([rec(x) for x in cand])
        pop, fit = _select_best_half(cand, cand_fit, n)
        while True:
            if rng.random() < cfg.jumping_rate:
                box_lo = pop.min(axis=0)
                box_hi = pop.max(axis=0)
                jumped = np.array([quasi_opposite(x, box_lo, box_hi, rng) for x in pop])
                jumped_fit = np.array([rec(x) for x in jumped])
                pop, fit = _select_best_half(np.vstack([pop, jumped]),
                                             np.concatenate([fit, jumped_fit]), n)
            else:
                _de_generation(rec, rng, pop, fit, lb, ub, cfg.de_f, cfg.de_cr)
    except _BudgetDone:
        pass
    return rec.trajectory


# ---------------------------------------------------------------------------
# BFGS with restarts (finite-difference gradients, projection onto the box)

_FD_STEP = 1e-6  # in normalized [0,1] coordinates == 1e-6 * (ub - lb)
_GRAD_TOL = 1e-8
_ARMIJO_C = 1e-4
_MAX_BACKTRACKS = 40


def _bfgs_single(rec_norm, d, z0):
    """One BFGS descent in normalized coordinates; returns on convergence."""
    z = np.clip(z0, 0.0, 1.0)
    fz = rec_norm(z)

    def grad(zc, fc):
        g = np.empty(d)
        for i in range(d):
            step = _FD_STEP if zc[i] + _FD_STEP <= 1.0 else -_FD_STEP
            zp = zc.copy()
            zp[i] += step
            g[i] = (rec_norm(zp) - fc) / step
        return g

    g = grad(z, fz)
    h_inv = np.eye(d)
    while True:
        if np.linalg.norm(g) < _GRAD_TOL:
            return
        p = -h_inv @ g
        gp = float(g @ p)
        if gp >= 0:  # lost descent direction, reset
            h_inv = np.eye(d)
            p = -g
            gp = float(g @ p)
        alpha = 1.0
        z_new = f_new = None
        for _ in range(_MAX_BACKTRACKS):
            cand = np.clip(z + alpha * p, 0.0, 1.0)
            fc = rec_norm(cand)
            if fc <= fz + _ARMIJO_C * alpha * gp:
                z_new, f_new = cand, fc
                break
            alpha *= 0.5
        if z_new is None or np.allclose(z_new, z):
            return  # stalled; caller restarts elsewhere
        g_new = grad(z_new, f_new)
        s = z_new - z
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-12:
            rho = 1.0 / sy
            i_mat = np.eye(d)
            left = i_mat - rho * np.outer(s, y)
            h_inv = left @ h_inv @ left.T + rho * np.outer(s, s)
        z, fz, g = z_new, f_new, g_new


def _make_normalized(rec, lb, ub):
    width = ub - lb

    def rec_norm(z):
        return rec(lb + z * width)

    return rec_norm


def run_bfgs_restart(objective, bounds, budget: int, cfg: OptimizerConfig,
                     first_start=None) -> RunTrajectory:
    """BFGS with forward-difference gradients, restarted until the budget ends.

    Gradients cost one evaluation per coordinate. The search runs in
    normalized coordinates, so the forward step is 1e-6 of the box width
    per coordinate. ``first_start`` seeds the initial descent (used by QNDE).
    """
    lb, ub = _check_bounds(bounds)
    d = lb.size
    rec = _Recorder(objective, budget)
    rng = np.random.default_rng(cfg.seed)
    rec_norm = _make_normalized(rec, lb, ub)
    try:
        if first_start is not None:
            z0 = (np.asarray(first_start, dtype=float) - lb) / (ub - lb)
            _bfgs_single(rec_norm, d, z0)
        while True:
            _bfgs_single(rec_norm, d, rng.random(d))
    except _BudgetDone:
        pass
    return rec.trajectory


# ---------------------------------------------------------------------------
# quasi-Newton differential evolution: DE exploration, BFGS refinement

def run_qnde(objective, bounds, budget: int, cfg: OptimizerConfig) -> RunTrajectory:
    """DE for hybrid_split*budget evaluations, then BFGS from the DE best."""
    lb, ub = _check_bounds(bounds)
    phase1 = int(cfg.hybrid_split * budget)
    n = cfg.population_size or _default_pop(lb.size)
    if phase1 < n:
        raise ValueError(f"phase-1 budget {phase1} below population size {n}")
    rec = _Recorder(objective, budget)
    rng = np.random.default_rng(cfg.seed)
    rec.budget = phase1
    try:
        _de_loop(rec, rng, (lb, ub), cfg)
    except _BudgetDone:
        pass
    rec.budget = budget
    rec_norm = _make_normalized(rec, lb, ub)
    d = lb.size
    try:
        z0 = (rec.best_x - lb) / (ub - lb)
        _bfgs_single(rec_norm, d, z0)
        while True:
            _bfgs_single(rec_norm, d, rng.random(d))
    except _BudgetDone:
        pass
    return rec.trajectory


# ---------------------------------------------------------------------------
# CMA-ES (rank-1 + rank-mu covariance adaptation, CSA step-size control)

def run_cmaes(objective, bounds, budget: int, cfg: OptimizerConfig,
              on_generation=None) -> RunTrajectory:
    """Standard CMA-ES in normalized coordinates with box resampling.

    Mean starts at the box center, sigma0 = 0.3 of the (normalized) box.
    Out-of-box samples are redrawn up to 100 times, then projected.
    ``on_generation(cov, sigma)`` is a diagnostic hook invoked after each
    covariance update.
    """
    lb, ub = _check_bounds(bounds)
    d = lb.size
    lam = cfg.population_size or (4 + int(3 * math.log(d)))
    if budget < lam:
        raise ValueError(f"budget {budget} below population size {lam}")
    rec = _Recorder(objective, budget)
    rng = np.random.default_rng(cfg.seed)
    width = ub - lb

    mu = lam // 2
    raw_w = np.log((lam + 1) / 2.0) - np.log(np.arange(1, mu + 1))
    weights = raw_w / raw_w.sum()
    mueff = 1.0 / np.sum(weights ** 2)
    c_sigma = (mueff + 2.0) / (d + mueff + 5.0)
    d_sigma = 1.0 + 2.0 * max(0.0, math.sqrt((mueff - 1.0) / (d + 1.0)) - 1.0) + c_sigma
    cc = (4.0 + mueff / d) / (d + 4.0 + 2.0 * mueff / d)
    c1 = 2.0 / ((d + 1.3) ** 2 + mueff)
    cmu = min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((d + 2.0) ** 2 + mueff))
    chi_n = math.sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d))

    mean = np.full(d, 0.5)
    sigma = cfg.sigma0 if cfg.sigma0 is not None else 0.3
    cov = np.eye(d)
    p_sigma = np.zeros(d)
    p_c = np.zeros(d)
    gen = 0

    try:
        while True:
            cov = 0.5 * (cov + cov.T)
            evals_c, b_mat = np.linalg.eigh(cov)
            evals_c = np.maximum(evals_c, 1e-30)
            d_diag = np.sqrt(evals_c)

            zs = np.empty((lam, d))
            xs = np.empty((lam, d))
            fs = np.empty(lam)
            for i in range(lam):
                for _ in range(100):
                    z = rng.standard_normal(d)
                    x = mean + sigma * (b_mat @ (d_diag * z))
                    if np.all(x >= 0.0) and np.all(x <= 1.0):
                        break
                else:
                    x = np.clip(x, 0.0, 1.0)
                    z = (b_mat.T @ (x - mean)) / (sigma * d_diag)
                zs[i] = z
                xs[i] = x
                fs[i] = rec(lb + x * width)

            order = np.argsort(fs, kind="stable")
            z_w = np.sum(weights[:, None] * zs[order[:mu]], axis=0)
            y_w = b_mat @ (d_diag * z_w)
            mean = mean + sigma * y_w

            gen += 1
            p_sigma = (1.0 - c_sigma) * p_sigma + \
                math.sqrt(c_sigma * (2.0 - c_sigma) * mueff) * (b_mat @ z_w)
            ps_norm = float(np.linalg.norm(p_sigma))
            h_sigma = 1.0 if ps_norm / math.sqrt(1.0 - (1.0 - c_sigma) ** (2 * gen)) \
                < (1.4 + 2.0 / (d + 1.0)) * chi_n else 0.0
            p_c = (1.0 - cc) * p_c + \
                h_sigma * math.sqrt(cc * (2.0 - cc) * mueff) * y_w

            ys = (b_mat @ (d_diag[:, None] * zs[order[:mu]].T)).T
            rank_mu = sum(w * np.outer(y, y) for w, y in zip(weights, ys))
            delta_h = (1.0 - h_sigma) * cc * (2.0 - cc)
            cov = (1.0 - c1 - cmu) * cov \
                + c1 * (np.outer(p_c, p_c) + delta_h * cov) \
                + cmu * rank_mu
            sigma = sigma * math.exp((c_sigma / d_sigma) * (ps_norm / chi_n - 1.0))
            sigma = min(sigma, 10.0)  # normalized box is unit-sized
            if on_generation is not None:
                on_generation(cov.copy(), sigma)
    except _BudgetDone:
        pass
    return rec.trajectory


# ---------------------------------------------------------------------------

_RUNNERS = {
    "de": run_de,
    "qode": run_qode,
    "qnde": run_qnde,
    "bfgs-restart": run_bfgs_restart,
    "cma-es": run_cmaes,
}


def run_optimizer(objective, bounds, budget: int, cfg: OptimizerConfig) -> RunTrajectory:
    """Dispatch on cfg.kind."""
    return _RUNNERS[cfg.kind](objective, bounds, budget, cfg)


def with_seed(cfg: OptimizerConfig, seed: int) -> OptimizerConfig:
    return replace(cfg, seed=int(seed))
