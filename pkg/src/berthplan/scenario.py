"""Scenario files, unit conversion, and trajectory/report serialization.

Scenario files are JSON with explicit unit suffixes on every field name
(psi_deg, u_tol_kn, r_tol_rads, ...); everything internal is strict SI
radians. Angles and rates convert through the single DEG constant and
speeds in knots through KNOT, in both directions, so a loaded file
rewritten once becomes a fixed point of load/write.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np

from .dynamics import (ShipState, ControlSchedule, WindCondition, ShipParticulars,
                       HullCoeffs, PropellerCoeffs, RudderCoeffs, ThrusterCoeffs,
                       WindCoeffs, Trajectory, _relative_wind_raw)
from .geometry import PolygonObstacle, Port, contains
from .domain import (EllipticalDomainParams, RectangularDomainParams,
                     DomainSwitchRule, KNOT, default_elliptical)
from .objective import (TerminalCondition, PenaltyWeights, CheckpointCondition,
                        default_w_dim)
from .cmaes import OptimizerConfig

DEG = math.pi / 180.0

TRAJECTORY_HEADER = "t,x0,u,y0,vm,psi,r,delta,n_p,n_s,n_bt,n_st"


class ScenarioError(ValueError):
    """Parse or validation failure; the message names the offending field."""


_REQ = object()


def _get(d: dict, key: str, path: str, default=_REQ):
    if key in d:
        return d[key]
    if default is _REQ:
        raise ScenarioError(f"missing field {path}.{key}")
    return default


@dataclass
class Scenario:
    """Everything one planning problem needs, in SI units."""

    mode: str
    dt_s: float
    dt_c: float
    t_f_range: tuple
    cutoff_speed: float
    wind_feedback: bool
    ship: ShipParticulars
    port: Port
    wind: WindCondition
    initial: ShipState
    terminal: TerminalCondition
    checkpoints: list
    weights: PenaltyWeights
    ell: EllipticalDomainParams
    rect: RectangularDomainParams
    rule: DomainSwitchRule
    channel_bounds: dict       # per-channel (lo, hi) in SI
    optimizer: OptimizerConfig
    w_u: float
    label: str = ""

    def __post_init__(self):
        self._prep = None

    @property
    def m(self) -> int:
        return int(math.ceil(self.t_f_range[1] / self.dt_c - 1e-9))

    def berthed_state(self) -> ShipState:
        # reference pose for the domain switch: where the ship lies berthed
        return self.terminal.x_fin if self.mode == "berthing" else self.initial

    def bounds(self) -> np.ndarray:
        """(5m+1, 2) box for the decision vector."""
        m = self.m
        rows = [list(self.t_f_range)]
        for name in ("delta", "n_p", "n_s", "n_bt", "n_st"):
            lo, hi = self.channel_bounds[name]
            rows.extend([[lo, hi]] * m)
        return np.array(rows, dtype=np.float64)

    def prepare(self) -> SimpleNamespace:
        """Cache the flat arrays the evaluation kernels consume."""
        if self._prep is not None:
            return self._prep
        from .domain import pack_obstacles
        obs, obs_nv = pack_obstacles(self.port.obstacles)
        wn, we = self.wind.velocity_components()
        ur0 = gr0 = 0.0
        if not self.wind_feedback:
            ur0, gr0 = _relative_wind_raw(self.initial.u, self.initial.vm,
                                          self.initial.psi, wn, we)
        b = self.bounds()
        ref = self.berthed_state()
        sps = int(round(self.dt_c / self.dt_s))
        self._prep = SimpleNamespace(
            initial=self.initial.as_array(),
            params=self.ship.pack(),
            dt_s=self.dt_s, sps=sps,
            cutoff_speed=self.cutoff_speed,
            wind_n=wn, wind_e=we,
            wind_frozen=not self.wind_feedback, ur0=ur0, gr0=gr0,
            obs=obs, obs_nv=obs_nv,
            half_l=0.5 * self.ship.l_pp, half_b=0.5 * self.ship.breadth,
            ell_u_min=self.ell.u_min, ell_u_max=self.ell.u_max,
            ell_long=self.ell.l_longi_max_long, ell_short=self.ell.l_longi_max_short,
            ell_min=self.ell.l_longi_min,
            ell_lat_max=self.ell.l_lat_max, ell_lat_min=self.ell.l_lat_min,
            rect_margin=self.rect.margin,
            switch_d2=self.rule.distance_threshold ** 2,
            switch_psi=self.rule.heading_threshold,
            berth_x=ref.x0, berth_y=ref.y0, berth_psi=ref.psi,
            berthing=self.rule.mode == "berthing",
            bounds_lo=b[:, 0], bounds_hi=b[:, 1],
        )
        return self._prep


def _state_from(d: dict, path: str) -> ShipState:
    return ShipState(
        x0=float(_get(d, "x0_m", path)),
        u=float(_get(d, "u_ms", path)),
        y0=float(_get(d, "y0_m", path)),
        vm=float(_get(d, "vm_ms", path)),
        psi=float(_get(d, "psi_deg", path)) * DEG,
        r=float(_get(d, "r_degs", path)) * DEG,
    )


def _state_to(s: ShipState) -> dict:
    return {"x0_m": s.x0, "u_ms": s.u, "y0_m": s.y0, "vm_ms": s.vm,
            "psi_deg": s.psi / DEG, "r_degs": s.r / DEG}


def _ship_from(d: dict) -> ShipParticulars:
    h = _get(d, "hull", "ship")
    p = _get(d, "propeller", "ship")
    rd = _get(d, "rudder", "ship")
    bt = _get(d, "bow_thruster", "ship")
    st = _get(d, "stern_thruster", "ship")
    w = _get(d, "wind_model", "ship")
    for name, blk in (("cx", w.get("cx")), ("cy", w.get("cy")), ("cn", w.get("cn"))):
        if blk is None or len(blk) != 3:
            raise ScenarioError(f"ship.wind_model.{name} must have 3 coefficients")
    return ShipParticulars(
        l_pp=float(_get(d, "l_pp_m", "ship")),
        breadth=float(_get(d, "breadth_m", "ship")),
        mass=float(_get(d, "mass_kg", "ship")),
        added_mass_x=float(_get(d, "added_mass_x_kg", "ship")),
        added_mass_y=float(_get(d, "added_mass_y_kg", "ship")),
        inertia_z=float(_get(d, "inertia_z_kgm2", "ship")),
        added_inertia_z=float(_get(d, "added_inertia_z_kgm2", "ship")),
        rho_water=float(_get(d, "rho_water_kgm3", "ship", 1025.0)),
        hull=HullCoeffs(**{k: float(_get(h, k, "ship.hull")) for k in
                           ("x_u", "x_uu", "x_vr", "y_v", "y_vv", "y_r", "y_rr",
                            "n_v", "n_vv", "n_r", "n_rr")}),
        propeller=PropellerCoeffs(
            k_t0=float(_get(p, "k_t0", "ship.propeller")),
            diameter=float(_get(p, "diameter_m", "ship.propeller")),
            thrust_deduction=float(_get(p, "thrust_deduction", "ship.propeller")),
            lateral_offset=float(_get(p, "lateral_offset_m", "ship.propeller"))),
        rudder=RudderCoeffs(
            area=float(_get(rd, "area_m2", "ship.rudder")),
            f_alpha=float(_get(rd, "f_alpha", "ship.rudder")),
            epsilon=float(_get(rd, "epsilon", "ship.rudder")),
            kappa=float(_get(rd, "kappa", "ship.rudder")),
            gamma_flow=float(_get(rd, "gamma_flow", "ship.rudder")),
            l_r=float(_get(rd, "l_r_m", "ship.rudder")),
            x_r=float(_get(rd, "x_r_m", "ship.rudder")),
            t_r=float(_get(rd, "t_r", "ship.rudder")),
            a_h=float(_get(rd, "a_h", "ship.rudder")),
            x_h=float(_get(rd, "x_h_m", "ship.rudder"))),
        bow_thruster=ThrusterCoeffs(
            k_force=float(_get(bt, "k_force", "ship.bow_thruster")),
            diameter=float(_get(bt, "diameter_m", "ship.bow_thruster")),
            x_pos=float(_get(bt, "x_pos_m", "ship.bow_thruster"))),
        stern_thruster=ThrusterCoeffs(
            k_force=float(_get(st, "k_force", "ship.stern_thruster")),
            diameter=float(_get(st, "diameter_m", "ship.stern_thruster")),
            x_pos=float(_get(st, "x_pos_m", "ship.stern_thruster"))),
        wind=WindCoeffs(
            rho_air=float(_get(w, "rho_air_kgm3", "ship.wind_model", 1.225)),
            front_area=float(_get(w, "front_area_m2", "ship.wind_model")),
            lateral_area=float(_get(w, "lateral_area_m2", "ship.wind_model")),
            cx=tuple(float(v) for v in w["cx"]),
            cy=tuple(float(v) for v in w["cy"]),
            cn=tuple(float(v) for v in w["cn"])))


def _ship_to(s: ShipParticulars) -> dict:
    h, p, rd, bt, st, w = s.hull, s.propeller, s.rudder, s.bow_thruster, s.stern_thruster, s.wind
    return {
        "l_pp_m": s.l_pp, "breadth_m": s.breadth, "mass_kg": s.mass,
        "added_mass_x_kg": s.added_mass_x, "added_mass_y_kg": s.added_mass_y,
        "inertia_z_kgm2": s.inertia_z, "added_inertia_z_kgm2": s.added_inertia_z,
        "rho_water_kgm3": s.rho_water,
        "hull": {k: getattr(h, k) for k in
                 ("x_u", "x_uu", "x_vr", "y_v", "y_vv", "y_r", "y_rr",
                  "n_v", "n_vv", "n_r", "n_rr")},
        "propeller": {"k_t0": p.k_t0, "diameter_m": p.diameter,
                      "thrust_deduction": p.thrust_deduction,
                      "lateral_offset_m": p.lateral_offset},
        "rudder": {"area_m2": rd.area, "f_alpha": rd.f_alpha, "epsilon": rd.epsilon,
                   "kappa": rd.kappa, "gamma_flow": rd.gamma_flow, "l_r_m": rd.l_r,
                   "x_r_m": rd.x_r, "t_r": rd.t_r, "a_h": rd.a_h, "x_h_m": rd.x_h},
        "bow_thruster": {"k_force": bt.k_force, "diameter_m": bt.diameter,
                         "x_pos_m": bt.x_pos},
        "stern_thruster": {"k_force": st.k_force, "diameter_m": st.diameter,
                           "x_pos_m": st.x_pos},
        "wind_model": {"rho_air_kgm3": w.rho_air, "front_area_m2": w.front_area,
                       "lateral_area_m2": w.lateral_area,
                       "cx": list(w.cx), "cy": list(w.cy), "cn": list(w.cn)},
    }


def scenario_from_dict(raw: dict) -> Scenario:
    mode = _get(raw, "mode", "scenario")
    if mode not in ("berthing", "unberthing"):
        raise ScenarioError("scenario.mode must be 'berthing' or 'unberthing'")
    dt_s = float(_get(raw, "dt_s_s", "scenario", 1.0))
    dt_c = float(_get(raw, "dt_c_s", "scenario"))
    if dt_s <= 0 or dt_c <= 0:
        raise ScenarioError("dt_s_s and dt_c_s must be positive")
    ratio = dt_c / dt_s
    if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
        raise ScenarioError("dt_c_s must be a positive multiple of dt_s_s")
    tf = _get(raw, "t_f_range_s", "scenario")
    if len(tf) != 2 or not (0 < float(tf[0]) < float(tf[1])):
        raise ScenarioError("t_f_range_s must be an ordered positive pair")
    t_f_range = (float(tf[0]), float(tf[1]))

    ship = _ship_from(_get(raw, "ship", "scenario"))
    l_pp = ship.l_pp

    pd = _get(raw, "port", "scenario")
    obstacles = []
    for i, od in enumerate(_get(pd, "obstacles", "port")):
        verts = _get(od, "vertices_m", f"port.obstacles[{i}]")
        try:
            obstacles.append(PolygonObstacle(np.asarray(verts, dtype=np.float64),
                                             label=str(od.get("label", f"obstacle{i}"))))
        except ValueError as e:
            raise ScenarioError(f"port.obstacles[{i}]: {e}") from e
    bl = np.asarray(_get(pd, "berth_line_m", "port"), dtype=np.float64)
    if bl.shape != (2, 2):
        raise ScenarioError("port.berth_line_m must be two 2-D endpoints")
    db = bl[1] - bl[0]
    berth_angle = math.atan2(db[1], db[0])
    port = Port(obstacles=obstacles, berth_line=bl, berth_angle=berth_angle)

    wd = _get(raw, "wind", "scenario", {"speed_ms": 0.0, "direction_from_deg": 0.0})
    wind = WindCondition(true_speed=float(_get(wd, "speed_ms", "wind")),
                         true_direction=float(_get(wd, "direction_from_deg", "wind")) * DEG)
    if wind.true_speed < 0:
        raise ScenarioError("wind.speed_ms must be nonnegative")

    initial = _state_from(_get(raw, "initial_state", "scenario"), "initial_state")

    td = _get(raw, "terminal", "scenario")
    t_state = _state_from(_get(td, "state", "terminal"), "terminal.state")
    w_u_default = 2.57 if mode == "berthing" else 2.42
    w_u = float(_get(td, "w_u_ms", "terminal", w_u_default))
    w_l = 0.1 * l_pp
    psi_tol_default_deg = 0.5 if mode == "berthing" else 1.0
    xt = _get(td, "x_tol", "terminal", {})
    x_tol = np.array([
        float(_get(xt, "x0_m", "terminal.x_tol", 1.0)),
        float(_get(xt, "u_ms", "terminal.x_tol", 0.1)),
        float(_get(xt, "y0_m", "terminal.x_tol", 1.0)),
        float(_get(xt, "vm_ms", "terminal.x_tol", 0.1)),
        float(_get(xt, "psi_deg", "terminal.x_tol", psi_tol_default_deg)) * DEG,
        float(_get(xt, "r_rads", "terminal.x_tol", 0.1 * 2.0 / l_pp)),
    ])
    terminal = TerminalCondition(x_fin=t_state, x_tol=x_tol,
                                 w_dim=default_w_dim(w_l, w_u))

    checkpoints = []
    for i, cd in enumerate(raw.get("checkpoints", [])):
        path = f"checkpoints[{i}]"
        checkpoints.append(CheckpointCondition(
            x_cp=float(_get(cd, "x_cp_m", path)),
            y_cp=float(_get(cd, "y_cp_m", path)),
            d_tol=float(_get(cd, "d_tol_m", path, 0.5 * l_pp)),
            psi_cp=float(_get(cd, "psi_cp_deg", path)) * DEG,
            psi_tol=float(_get(cd, "psi_tol_deg", path, 1.0)) * DEG,
            u_cp=float(_get(cd, "u_cp_ms", path)),
            u_tol=float(_get(cd, "u_tol_kn", path, 0.5)) * KNOT,
            r_cp=float(_get(cd, "r_cp_degs", path, 0.0)) * DEG,
            r_tol=float(_get(cd, "r_tol_rads", path, 9.28e-3)),
        ))

    wt = raw.get("weights", {})
    weights = PenaltyWeights(w_c=float(wt.get("w_c", 1.0e6)),
                             w_pen=float(wt.get("w_pen", 1.0e4)),
                             w_cp_pen=float(wt.get("w_cp_pen", 1.0e4)))

    dom = raw.get("domain", {})
    ed = dom.get("elliptical")
    if ed is None:
        ell = default_elliptical(l_pp)
    else:
        ell = EllipticalDomainParams(
            u_max=float(_get(ed, "u_max_kn", "domain.elliptical", 6.0)) * KNOT,
            u_min=float(_get(ed, "u_min_kn", "domain.elliptical", 2.0)) * KNOT,
            l_longi_max_long=float(_get(ed, "l_longi_max_long_m", "domain.elliptical", 0.85 * l_pp)),
            l_longi_max_short=float(_get(ed, "l_longi_max_short_m", "domain.elliptical", 0.5 * l_pp)),
            l_longi_min=float(_get(ed, "l_longi_min_m", "domain.elliptical", 0.5 * l_pp)),
            l_lat_max=float(_get(ed, "l_lat_max_m", "domain.elliptical", 0.39 * l_pp)),
            l_lat_min=float(_get(ed, "l_lat_min_m", "domain.elliptical", 0.18 * l_pp)))
    rd = dom.get("rectangular", {})
    rect = RectangularDomainParams(margin=float(rd.get("margin_m", 1.0)))
    sw = dom.get("switch", {})
    rule = DomainSwitchRule(
        distance_threshold=float(sw.get("distance_threshold_m", 110.0)),
        heading_threshold=float(sw.get("heading_threshold_deg", 20.0)) * DEG,
        mode=mode)

    bd = raw.get("bounds", {})
    prop_default = [-1.0, 1.0] if mode == "berthing" else [0.0, 1.0]
    def _pair(key, default, scale=1.0):
        v = bd.get(key, default)
        if len(v) != 2 or not float(v[0]) < float(v[1]):
            raise ScenarioError(f"bounds.{key} must be an ordered pair")
        return (float(v[0]) * scale, float(v[1]) * scale)
    channel_bounds = {
        "delta": _pair("delta_deg", [-35.0, 35.0], DEG),
        "n_p": _pair("n_p_rps", prop_default),
        "n_s": _pair("n_s_rps", prop_default),
        "n_bt": _pair("n_bt_rps", [-5.18, 5.18]),
        "n_st": _pair("n_st_rps", [-6.22, 6.22]),
    }

    od = raw.get("optimizer", {})
    optimizer = OptimizerConfig(
        sigma0=float(od.get("sigma0", 0.3)),
        popsize=od.get("popsize"),
        max_evals=int(od.get("max_evals", 100_000)),
        restart_multiplier=float(od.get("restart_multiplier", 2.0)),
        stagnation_base=float(od.get("stagnation_base", 50.0)),
        stagnation_scale=float(od.get("stagnation_scale", 25.0)),
        tol_sigma=float(od.get("tol_sigma", 1e-12)),
        seed=int(od.get("seed", 0)))

    scn = Scenario(
        mode=mode, dt_s=dt_s, dt_c=dt_c, t_f_range=t_f_range,
        cutoff_speed=float(_get(raw, "thruster_cutoff_ms", "scenario", 2.0)),
        wind_feedback=bool(_get(raw, "wind_feedback", "scenario", True)),
        ship=ship, port=port, wind=wind, initial=initial, terminal=terminal,
        checkpoints=checkpoints, weights=weights, ell=ell, rect=rect, rule=rule,
        channel_bounds=channel_bounds, optimizer=optimizer, w_u=w_u,
        label=str(raw.get("label", "")))

    # cross-field invariants
    for o in scn.port.obstacles:
        if contains(o, (initial.x0, initial.y0)):
            raise ScenarioError(f"initial state lies inside obstacle '{o.label}'")
        if contains(o, (t_state.x0, t_state.y0)):
            raise ScenarioError(f"terminal state lies inside obstacle '{o.label}'")
    if mode == "berthing":
        if not (t_state.u == 0.0 and t_state.vm == 0.0 and t_state.r == 0.0):
            raise ScenarioError("berthing requires zero terminal velocities and yaw rate")
    else:
        if not (initial.u == 0.0 and initial.vm == 0.0 and initial.r == 0.0):
            raise ScenarioError("unberthing requires zero initial velocities and yaw rate")
    if scn.m < 1:
        raise ScenarioError("t_f range and dt_c give an empty schedule")
    return scn


def scenario_to_dict(s: Scenario) -> dict:
    """Canonical form: every default materialized, file units restored."""
    return {
        "label": s.label,
        "mode": s.mode,
        "dt_s_s": s.dt_s,
        "dt_c_s": s.dt_c,
        "t_f_range_s": list(s.t_f_range),
        "thruster_cutoff_ms": s.cutoff_speed,
        "wind_feedback": s.wind_feedback,
        "ship": _ship_to(s.ship),
        "port": {
            "obstacles": [{"label": o.label, "vertices_m": o.vertices.tolist()}
                          for o in s.port.obstacles],
            "berth_line_m": s.port.berth_line.tolist(),
        },
        "wind": {"speed_ms": s.wind.true_speed,
                 "direction_from_deg": s.wind.true_direction / DEG},
        "initial_state": _state_to(s.initial),
        "terminal": {
            "state": _state_to(s.terminal.x_fin),
            "x_tol": {"x0_m": float(s.terminal.x_tol[0]),
                      "u_ms": float(s.terminal.x_tol[1]),
                      "y0_m": float(s.terminal.x_tol[2]),
                      "vm_ms": float(s.terminal.x_tol[3]),
                      "psi_deg": float(s.terminal.x_tol[4]) / DEG,
                      "r_rads": float(s.terminal.x_tol[5])},
            "w_u_ms": s.w_u,
        },
        "checkpoints": [{
            "x_cp_m": c.x_cp, "y_cp_m": c.y_cp, "d_tol_m": c.d_tol,
            "psi_cp_deg": c.psi_cp / DEG, "psi_tol_deg": c.psi_tol / DEG,
            "u_cp_ms": c.u_cp, "u_tol_kn": c.u_tol / KNOT,
            "r_cp_degs": c.r_cp / DEG, "r_tol_rads": c.r_tol,
        } for c in s.checkpoints],
        "weights": {"w_c": s.weights.w_c, "w_pen": s.weights.w_pen,
                    "w_cp_pen": s.weights.w_cp_pen},
        "domain": {
            "elliptical": {"u_max_kn": s.ell.u_max / KNOT, "u_min_kn": s.ell.u_min / KNOT,
                           "l_longi_max_long_m": s.ell.l_longi_max_long,
                           "l_longi_max_short_m": s.ell.l_longi_max_short,
                           "l_longi_min_m": s.ell.l_longi_min,
                           "l_lat_max_m": s.ell.l_lat_max,
                           "l_lat_min_m": s.ell.l_lat_min},
            "rectangular": {"margin_m": s.rect.margin},
            "switch": {"distance_threshold_m": s.rule.distance_threshold,
                       "heading_threshold_deg": s.rule.heading_threshold / DEG},
        },
        "bounds": {
            "delta_deg": [s.channel_bounds["delta"][0] / DEG,
                          s.channel_bounds["delta"][1] / DEG],
            "n_p_rps": list(s.channel_bounds["n_p"]),
            "n_s_rps": list(s.channel_bounds["n_s"]),
            "n_bt_rps": list(s.channel_bounds["n_bt"]),
            "n_st_rps": list(s.channel_bounds["n_st"]),
        },
        "optimizer": {"sigma0": s.optimizer.sigma0, "popsize": s.optimizer.popsize,
                      "max_evals": s.optimizer.max_evals,
                      "restart_multiplier": s.optimizer.restart_multiplier,
                      "stagnation_base": s.optimizer.stagnation_base,
                      "stagnation_scale": s.optimizer.stagnation_scale,
                      "tol_sigma": s.optimizer.tol_sigma,
                      "seed": s.optimizer.seed},
    }


def load_scenario(path) -> Scenario:
    """Parse, unit-convert, default-fill, and validate a scenario file."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}")
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}:{e.lineno}:{e.colno}: {e.msg}")
    return scenario_from_dict(raw)


def _atomic_write(path, text: str):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_scenario(s: Scenario, path):
    _atomic_write(path, json.dumps(scenario_to_dict(s), indent=2) + "\n")


def write_trajectory(trajectory: Trajectory, schedule: ControlSchedule, path):
    """CSV, SI units, one row per sample; controls are the applied values."""
    n = trajectory.states.shape[0]
    if trajectory.controls.shape[0] != n or trajectory.t.shape[0] != n:
        raise ValueError("trajectory arrays disagree on sample count")
    if schedule is not None:
        expect = int(math.floor(schedule.t_f / (trajectory.t[1] - trajectory.t[0]))) + 1 \
            if n > 1 else 1
        if expect != n:
            raise ValueError("schedule horizon and trajectory length disagree")
    lines = [TRAJECTORY_HEADER]
    for i in range(n):
        row = [trajectory.t[i], *trajectory.states[i], *trajectory.controls[i]]
        lines.append(",".join(repr(float(v)) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def read_trajectory(path) -> Trajectory:
    """Inverse of write_trajectory (used by the replay command)."""
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip()
        if header != TRAJECTORY_HEADER:
            raise ValueError(f"unexpected trajectory header: {header!r}")
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    if data.shape[1] != 12:
        raise ValueError("trajectory rows must have 12 columns")
    return Trajectory(t=data[:, 0], states=data[:, 1:7], controls=data[:, 7:12])


def write_report(report, path):
    """Structured JSON run report; accepts a mapping or anything with to_dict()."""
    if hasattr(report, "to_dict"):
        report = report.to_dict()
    _atomic_write(path, json.dumps(report, indent=2, sort_keys=True) + "\n")
