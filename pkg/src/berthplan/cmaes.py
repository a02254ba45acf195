"""Box-constrained (mu/mu_w, lambda) CMA-ES with population-doubling restarts.

The search runs in a normalized genotype space mapped onto the box; each
sampled candidate is clamped coordinate-wise into the box before
evaluation while the genotype distribution itself stays unclamped. On
stagnation, or once sigma collapses against the box width, the run
restarts with a doubled population and a fresh uniform mean, keeping the
global best. Fully reproducible from the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import ControlInput, ControlSchedule


@dataclass
class DecisionVector:
    """Named view of the flat search vector: terminal time then one block
    per actuator channel, m values each."""

    t_f: float
    delta: np.ndarray
    n_p: np.ndarray
    n_s: np.ndarray
    n_bt: np.ndarray
    n_st: np.ndarray

    def __post_init__(self):
        m = len(self.delta)
        for name in ("n_p", "n_s", "n_bt", "n_st"):
            if len(getattr(self, name)) != m:
                raise ValueError("all channel blocks must share the segment count")

    @property
    def m(self) -> int:
        return len(self.delta)

    @property
    def dimension(self) -> int:
        return 5 * self.m + 1

    def as_array(self) -> np.ndarray:
        return np.concatenate([[self.t_f], self.delta, self.n_p,
                               self.n_s, self.n_bt, self.n_st])

    @staticmethod
    def from_array(x) -> "DecisionVector":
        x = np.asarray(x, dtype=np.float64)
        if (x.shape[0] - 1) % 5 != 0:
            raise ValueError("vector length must be 5m + 1")
        m = (x.shape[0] - 1) // 5
        return DecisionVector(float(x[0]), x[1:1 + m].copy(),
                              x[1 + m:1 + 2 * m].copy(), x[1 + 2 * m:1 + 3 * m].copy(),
                              x[1 + 3 * m:1 + 4 * m].copy(), x[1 + 4 * m:].copy())


def decode(X, dt_c: float) -> ControlSchedule:
    """Flat vector to schedule: t_f then channel blocks in rudder, port
    screw, starboard screw, bow thruster, stern thruster order."""
    v = DecisionVector.from_array(X)
    segments = [ControlInput(float(v.delta[k]), float(v.n_p[k]), float(v.n_s[k]),
                             float(v.n_bt[k]), float(v.n_st[k]))
                for k in range(v.m)]
    return ControlSchedule(dt_c=dt_c, segments=segments, t_f=v.t_f)


def encode(schedule: ControlSchedule) -> np.ndarray:
    """Inverse of decode."""
    a = schedule.as_array()
    return np.concatenate([[schedule.t_f], a[:, 0], a[:, 1], a[:, 2], a[:, 3], a[:, 4]])


@dataclass
class OptimizerConfig:
    sigma0: float = 0.3            # initial step as a fraction of box width
    popsize: int | None = None     # default 4 + floor(3 ln n)
    max_evals: int = 100_000
    restart_multiplier: float = 2.0
    stagnation_base: float = 50.0  # restart window = base + scale * dim / lambda
    stagnation_scale: float = 25.0
    tol_sigma: float = 1e-12       # vs box width, triggers restart
    seed: int = 0

    def __post_init__(self):
        if self.max_evals <= 0:
            raise ValueError("max_evals must be positive")
        if self.popsize is not None and self.popsize < 2:
            raise ValueError("popsize must be at least 2")
        if not (0 < self.sigma0 <= 1):
            raise ValueError("sigma0 is a fraction of the box width in (0, 1]")


@dataclass
class ProgressRecord:
    generation: int
    evaluations: int
    best_j: float
    sigma: float
    restarts: int


def optimize(objective, bounds, config: OptimizerConfig, progress=None, map_fn=None):
    """Minimize objective over the box.

    objective: X -> J, total (returns +inf on failure, never raises for
    in-box X). bounds: (n, 2) per-component [lo, hi]. progress: optional
    sink called with a ProgressRecord each generation; a truthy return
    stops the search. map_fn: optional map replacement for evaluating a
    generation (order-preserving), e.g. a thread pool's map.

    Returns (best_x, best_j, history of ProgressRecords).
    """
    bounds = np.asarray(bounds, dtype=np.float64)
    if bounds.ndim != 2 or bounds.shape[1] != 2:
        raise ValueError("bounds must be (n, 2)")
    n = bounds.shape[0]
    lo = bounds[:, 0]
    width = bounds[:, 1] - lo
    if not np.all(np.isfinite(bounds)) or np.any(width <= 0):
        raise ValueError("bounds must be finite with positive width")
    if map_fn is None:
        map_fn = map

    rng = np.random.default_rng(config.seed)
    lam0 = config.popsize if config.popsize else 4 + int(3 * math.log(n))
    lam = max(2, lam0)
    max_evals = int(config.max_evals)

    best_x = None
    best_j = math.inf
    history: list[ProgressRecord] = []
    evals = 0
    gen = 0
    restarts = 0
    stop = False

    while not stop and evals < max_evals:
        mu = lam // 2
        w = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
        w = w / np.sum(w)
        mu_eff = 1.0 / float(np.sum(w * w))
        c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0)
        d_sigma = 1.0 + 2.0 * max(0.0, math.sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + c_sigma
        c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n)
        c_1 = 2.0 / ((n + 1.3) ** 2 + mu_eff)
        c_mu = min(1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0) ** 2 + mu_eff))
        chi_n = math.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))
        window = int(config.stagnation_base + config.stagnation_scale * n / lam)

        mean = rng.uniform(0.0, 1.0, n)
        sigma = config.sigma0
        C = np.eye(n)
        p_sigma = np.zeros(n)
        p_c = np.zeros(n)
        run_best = math.inf
        last_improve = 0
        g_local = 0

        while True:
            k = min(lam, max_evals - evals)
            if k <= 0:
                break
            C = 0.5 * (C + C.T)
            eigvals, B = np.linalg.eigh(C)
            eigvals = np.maximum(eigvals, 0.0)
            top = float(eigvals[-1])
            if top <= 0.0:
                break  # fully degenerate covariance, restart
            floor = top / 1e14
            if eigvals[0] < floor:  # repair conditioning
                eigvals = np.maximum(eigvals, floor)
            D = np.sqrt(eigvals)

            Z = rng.standard_normal((k, n))
            Y = (Z * D) @ B.T
            geno = mean + sigma * Y
            pheno = np.clip(geno, 0.0, 1.0)
            cands = lo + pheno * width
            J = np.fromiter(map_fn(objective, cands), dtype=np.float64, count=k)
            J = np.where(np.isnan(J), np.inf, J)
            evals += k

            order = np.argsort(J, kind="stable")
            gen_best = float(J[order[0]])
            if gen_best < best_j:
                best_j = gen_best
                best_x = cands[order[0]].copy()
            if gen_best < run_best:
                run_best = gen_best
                last_improve = g_local

            partial = k < lam
            if not partial:
                sel = order[:mu]
                y_w = w @ Y[sel]
                z_w = w @ Z[sel]
                mean = mean + sigma * y_w
                p_sigma = (1.0 - c_sigma) * p_sigma + \
                    math.sqrt(c_sigma * (2.0 - c_sigma) * mu_eff) * (B @ z_w)
                norm_ps = float(np.linalg.norm(p_sigma))
                hsig = norm_ps / math.sqrt(1.0 - (1.0 - c_sigma) ** (2.0 * (g_local + 1))) \
                    < (1.4 + 2.0 / (n + 1.0)) * chi_n
                p_c = (1.0 - c_c) * p_c + \
                    (math.sqrt(c_c * (2.0 - c_c) * mu_eff) * y_w if hsig else 0.0)
                rank_mu = (w[:, None] * Y[sel]).T @ Y[sel]
                C = (1.0 - c_1 - c_mu) * C \
                    + c_1 * (np.outer(p_c, p_c) + (0.0 if hsig else c_c * (2.0 - c_c)) * C) \
                    + c_mu * rank_mu
                sigma *= math.exp((c_sigma / d_sigma) * (norm_ps / chi_n - 1.0))

            gen += 1
            g_local += 1
            rec = ProgressRecord(generation=gen, evaluations=evals,
                                 best_j=best_j, sigma=sigma, restarts=restarts)
            history.append(rec)
            if progress is not None and progress(rec):
                stop = True
                break
            if partial or evals >= max_evals:
                break
            if g_local - last_improve > window:
                break  # stagnated
            if sigma * float(D[-1]) < config.tol_sigma:
                break  # collapsed against the box
            if not math.isfinite(sigma) or sigma > 10.0:
                break  # step size useless against the unit box

        if stop or evals >= max_evals:
            break
        restarts += 1
        lam = max(2, int(lam * config.restart_multiplier))

    if best_x is None:
        # budget too small for a single sample; report the box center
        best_x = lo + 0.5 * width
        best_j = math.inf
    return best_x, best_j, history
