"""Penalty-augmented minimum-time objective.

J = w_c * C + t_f * terminal_penalty + sum of checkpoint penalties.
C is the domain intrusion integral; the terminal term pays a fixed floor
inside the tolerance box and w_pen-scaled quadratic outside; each
checkpoint takes the minimum over trajectory samples of four mode
penalties (position, heading, speed over ground, yaw rate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import ShipState, _simulate_raw
from .domain import _intrusion_raw

try:
    from numba import njit
    _HAVE_NUMBA = True
except ImportError:
    _HAVE_NUMBA = False

STATE_NAMES = ("x0", "u", "y0", "vm", "psi", "r")


@dataclass
class TerminalCondition:
    """Target state with per-component tolerances and nondimensional weights."""

    x_fin: ShipState
    x_tol: np.ndarray
    w_dim: np.ndarray

    def __post_init__(self):
        self.x_tol = np.asarray(self.x_tol, dtype=np.float64)
        self.w_dim = np.asarray(self.w_dim, dtype=np.float64)
        if self.x_tol.shape != (6,) or self.w_dim.shape != (6,):
            raise ValueError("x_tol and w_dim must be 6-vectors")
        if np.any(self.x_tol <= 0) or np.any(self.w_dim <= 0):
            raise ValueError("x_tol and w_dim must be positive")

    def floor(self) -> float:
        """Penalty paid when every component sits inside its tolerance."""
        return float(np.sum(self.w_dim * self.x_tol * self.x_tol))


def default_w_dim(w_l: float, w_u: float) -> np.ndarray:
    """Nondimensionalizing weights from the length and speed scales."""
    return np.array([1.0 / (w_l * w_l), 1.0 / (w_u * w_u),
                     1.0 / (w_l * w_l), 1.0 / (w_u * w_u),
                     math.pi * math.pi, (w_l * w_l) / (w_u * w_u)])


@dataclass
class PenaltyWeights:
    w_c: float = 1.0e6
    w_pen: float = 1.0e4
    w_cp_pen: float = 1.0e4

    def __post_init__(self):
        if self.w_c <= 0 or self.w_pen <= 0 or self.w_cp_pen <= 0:
            raise ValueError("penalty weights must be positive")


@dataclass
class CheckpointCondition:
    """A pose/speed gate the trajectory must pass near at SOME sample."""

    x_cp: float
    y_cp: float
    d_tol: float
    psi_cp: float
    psi_tol: float
    u_cp: float
    u_tol: float
    r_cp: float
    r_tol: float

    def __post_init__(self):
        if self.d_tol <= 0 or self.psi_tol <= 0 or self.u_tol <= 0 or self.r_tol <= 0:
            raise ValueError("checkpoint tolerances must be positive")


def _wrap_angle_py(d):
    return math.atan2(math.sin(d), math.cos(d))


# compiled and interpreted libm can disagree in the last ulp, so every
# heading comparison must go through this one primitive
if _HAVE_NUMBA:
    _wrap_angle = njit(cache=True)(_wrap_angle_py)
else:
    _wrap_angle = _wrap_angle_py


def subtended_angle(psi: float, psi_cp: float) -> float:
    """Wrap-safe absolute angular difference, in [0, pi]."""
    return abs(_wrap_angle(psi - psi_cp))


def mode_penalty(deviation_ratio_squared: float, within_tolerance: bool,
                 w_cp_pen: float) -> float:
    """Shared kernel of the four checkpoint modes: quadratic, boosted outside."""
    if deviation_ratio_squared < 0:
        raise ValueError("squared ratio cannot be negative")
    if within_tolerance:
        return deviation_ratio_squared
    return w_cp_pen * deviation_ratio_squared


def _heading_devs_py(psi, psi_cp, out):
    for i in range(psi.shape[0]):
        out[i] = abs(_wrap_angle(psi[i] - psi_cp))


if _HAVE_NUMBA:
    _heading_devs = njit(cache=True)(_heading_devs_py)
else:
    _heading_devs = _heading_devs_py


def _checkpoint_scan(states: np.ndarray, cp: CheckpointCondition, w_cp_pen: float):
    """Per-sample mode penalties; returns (totals, dev arrays) for diagnostics."""
    x = states[:, 0]
    u = states[:, 1]
    y = states[:, 2]
    vm = states[:, 3]
    psi = states[:, 4]
    r = states[:, 5]
    dx = x - cp.x_cp
    dy = y - cp.y_cp
    d2 = dx * dx + dy * dy
    tol2 = cp.d_tol * cp.d_tol
    ratio = d2 / tol2
    pen_pos = np.where(d2 <= tol2, ratio, w_cp_pen * ratio)
    dev_psi = np.empty(psi.shape[0])
    _heading_devs(psi, cp.psi_cp, dev_psi)
    ratio = (dev_psi * dev_psi) / (cp.psi_tol * cp.psi_tol)
    pen_psi = np.where(dev_psi <= cp.psi_tol, ratio, w_cp_pen * ratio)
    spd = np.sqrt(u * u + vm * vm)
    dev_u = spd - cp.u_cp
    ratio = (dev_u * dev_u) / (cp.u_tol * cp.u_tol)
    pen_u = np.where(np.abs(dev_u) <= cp.u_tol, ratio, w_cp_pen * ratio)
    dev_r = r - cp.r_cp
    ratio = (dev_r * dev_r) / (cp.r_tol * cp.r_tol)
    pen_r = np.where(np.abs(dev_r) <= cp.r_tol, ratio, w_cp_pen * ratio)
    totals = pen_pos + pen_psi + pen_u + pen_r
    return totals, d2, dev_psi, dev_u, dev_r


def checkpoint_penalty(trajectory, cp: CheckpointCondition, w_cp_pen: float):
    """Minimum over samples of the summed mode penalties.

    Returns (penalty, argmin sample index); ties resolve to the earliest
    sample. Accepts a Trajectory or a raw (n, 6) state array.
    """
    states = trajectory.states if hasattr(trajectory, "states") else np.asarray(trajectory)
    if states.shape[0] == 0:
        raise ValueError("empty trajectory")
    totals, _, _, _, _ = _checkpoint_scan(states, cp, w_cp_pen)
    i = int(np.argmin(totals))
    return float(totals[i]), i


def terminal_breakdown(final: ShipState, cond: TerminalCondition, w_pen: float):
    """Per-component terminal terms; heading deviation is the subtended angle."""
    actual = (final.x0, final.u, final.y0, final.vm, final.psi, final.r)
    target = (cond.x_fin.x0, cond.x_fin.u, cond.x_fin.y0,
              cond.x_fin.vm, cond.x_fin.psi, cond.x_fin.r)
    rows = []
    for i in range(6):
        if i == 4:
            dev = subtended_angle(actual[4], target[4])
        else:
            dev = target[i] - actual[i]
        tol = float(cond.x_tol[i])
        within = abs(dev) <= tol
        if within:
            term = float(cond.w_dim[i]) * tol * tol
        else:
            term = float(cond.w_dim[i]) * w_pen * dev * dev
        rows.append({"name": STATE_NAMES[i], "target": float(target[i]),
                     "actual": float(actual[i]), "deviation": float(dev),
                     "tolerance": tol, "within": bool(within), "term": term})
    return rows


def terminal_penalty(final: ShipState, cond: TerminalCondition, w_pen: float) -> float:
    return float(sum(row["term"] for row in terminal_breakdown(final, cond, w_pen)))


@dataclass
class EvaluationReport:
    """Everything the classification and run reports need about one candidate."""

    j: float
    t_f: float
    c: float
    terminal_value: float
    terminal_floor: float
    terminal_components: list
    checkpoints: list
    collision_free: bool
    terminal_satisfied: bool
    all_checkpoints_satisfied: bool
    fully_satisfied: bool
    diverged: bool = False
    diverged_step: int = -1

    def to_dict(self) -> dict:
        return {
            "J": self.j,
            "t_f_s": self.t_f,
            "intrusion_C": self.c,
            "terminal": {
                "value": self.terminal_value,
                "floor": self.terminal_floor,
                "satisfied": self.terminal_satisfied,
                "components": self.terminal_components,
            },
            "checkpoints": self.checkpoints,
            "collision_free": self.collision_free,
            "all_checkpoints_satisfied": self.all_checkpoints_satisfied,
            "fully_satisfied": self.fully_satisfied,
            "diverged": self.diverged,
            "diverged_step": self.diverged_step,
        }


def _checkpoint_report(states, dt_s, cp, w_cp_pen):
    totals, d2, dev_psi, dev_u, dev_r = _checkpoint_scan(states, cp, w_cp_pen)
    i = int(np.argmin(totals))
    modes = {
        "position": {"deviation_m": float(math.sqrt(d2[i])), "tolerance_m": cp.d_tol,
                     "within": bool(d2[i] <= cp.d_tol * cp.d_tol)},
        "heading": {"deviation_rad": float(dev_psi[i]), "tolerance_rad": cp.psi_tol,
                    "within": bool(dev_psi[i] <= cp.psi_tol)},
        "speed": {"deviation_ms": float(dev_u[i]), "tolerance_ms": cp.u_tol,
                  "within": bool(abs(dev_u[i]) <= cp.u_tol)},
        "yaw_rate": {"deviation_rads": float(dev_r[i]), "tolerance_rads": cp.r_tol,
                     "within": bool(abs(dev_r[i]) <= cp.r_tol)},
    }
    return {"penalty": float(totals[i]), "argmin_index": i,
            "argmin_time_s": float(i * dt_s), "modes": modes,
            "satisfied": bool(totals[i] <= 4.0)}


def score_states(states: np.ndarray, t_f: float, scenario):
    """Score an already-simulated state history against the scenario.

    Returns (J, EvaluationReport). The t_f multiplier is the raw terminal
    time, not the truncated sample grid.
    """
    prep = scenario.prepare()
    C = float(_intrusion_raw(
        states, prep.dt_s, prep.obs, prep.obs_nv, prep.half_l, prep.half_b,
        prep.ell_u_min, prep.ell_u_max, prep.ell_long, prep.ell_short,
        prep.ell_min, prep.ell_lat_max, prep.ell_lat_min, prep.rect_margin,
        prep.switch_d2, prep.switch_psi, prep.berth_x, prep.berth_y,
        prep.berth_psi, prep.berthing))
    w = scenario.weights
    final = ShipState.from_array(states[-1])
    rows = terminal_breakdown(final, scenario.terminal, w.w_pen)
    term_val = float(sum(r["term"] for r in rows))
    cp_reports = [_checkpoint_report(states, prep.dt_s, cp, w.w_cp_pen)
                  for cp in scenario.checkpoints]
    cp_sum = float(sum(r["penalty"] for r in cp_reports))
    J = w.w_c * C + t_f * term_val + cp_sum
    collision_free = C == 0.0
    terminal_ok = all(r["within"] for r in rows)
    cps_ok = all(r["satisfied"] for r in cp_reports)
    report = EvaluationReport(
        j=float(J), t_f=t_f, c=C, terminal_value=term_val,
        terminal_floor=scenario.terminal.floor(), terminal_components=rows,
        checkpoints=cp_reports, collision_free=collision_free,
        terminal_satisfied=terminal_ok, all_checkpoints_satisfied=cps_ok,
        fully_satisfied=collision_free and terminal_ok and cps_ok)
    return float(J), report


def evaluate_J(X, scenario):
    """Decode, simulate, and score one decision vector.

    Returns (J, EvaluationReport). A diverged simulation maps to J = +inf
    so the optimizer's ordering stays total. X must lie inside the
    scenario's box bounds.
    """
    prep = scenario.prepare()
    X = np.asarray(X, dtype=np.float64)
    m = scenario.m
    if X.shape != (5 * m + 1,):
        raise ValueError(f"decision vector must have dimension {5 * m + 1}, got {X.shape}")
    lo, hi = prep.bounds_lo, prep.bounds_hi
    viol = (X < lo - 1e-9) | (X > hi + 1e-9)
    if viol.any():
        i = int(np.argmax(viol))
        raise ValueError(f"component {i} = {X[i]} outside box [{lo[i]}, {hi[i]}]")
    t_f = float(X[0])
    ctrl = np.empty((m, 5))
    for c in range(5):
        ctrl[:, c] = X[1 + c * m:1 + (c + 1) * m]
    n_steps = int(math.floor(t_f / prep.dt_s))
    if n_steps > m * prep.sps:
        n_steps = m * prep.sps
    states = np.empty((n_steps + 1, 6))
    applied = np.empty((n_steps + 1, 5))
    bad = _simulate_raw(prep.initial, ctrl, n_steps, prep.sps, prep.dt_s,
                        prep.cutoff_speed, prep.wind_n, prep.wind_e,
                        prep.wind_frozen, prep.ur0, prep.gr0, prep.params,
                        states, applied)
    if bad >= 0:
        report = EvaluationReport(
            j=math.inf, t_f=t_f, c=math.inf, terminal_value=math.inf,
            terminal_floor=scenario.terminal.floor(), terminal_components=[],
            checkpoints=[], collision_free=False, terminal_satisfied=False,
            all_checkpoints_satisfied=False, fully_satisfied=False,
            diverged=True, diverged_step=int(bad))
        return math.inf, report
    return score_states(states, t_f, scenario)
