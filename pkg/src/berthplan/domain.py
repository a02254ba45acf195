"""Speed-dependent ship safety domain and the intrusion integral.

Away from the berth the domain is a dodecagon sampling a piecewise
quarter-ellipse whose margins grow linearly with speed; near the berthed
pose it collapses to the circumscribed ship rectangle inflated by a fixed
margin. The intrusion integral C accumulates, over every trajectory
sample, the penetration of each domain vertex into each obstacle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import penetration_length

try:
    from numba import njit
except ImportError:
    def njit(*args, **kwargs):
        def deco(f):
            return f
        if args and callable(args[0]):
            return args[0]
        return deco

KNOT = 1852.0 / 3600.0  # [m/s]

ELLIPTICAL = "elliptical"
RECTANGULAR = "rectangular"


@dataclass
class EllipticalDomainParams:
    """Speed thresholds and margin lengths for the dodecagonal domain [m, m/s]."""

    u_max: float
    u_min: float
    l_longi_max_long: float   # margin ahead of the velocity vector at full speed
    l_longi_max_short: float  # margin behind it at full speed
    l_longi_min: float
    l_lat_max: float
    l_lat_min: float

    def __post_init__(self):
        if not (self.u_max > self.u_min >= 0):
            raise ValueError("need u_max > u_min >= 0")
        margins = (self.l_longi_max_long, self.l_longi_max_short,
                   self.l_longi_min, self.l_lat_max, self.l_lat_min)
        if any(m <= 0 for m in margins):
            raise ValueError("margins must be positive")
        if self.l_longi_max_long < self.l_longi_min or \
           self.l_longi_max_short < self.l_longi_min or \
           self.l_lat_max < self.l_lat_min:
            raise ValueError("max margins must dominate min margins")


def default_elliptical(l_pp: float) -> EllipticalDomainParams:
    """Standard margins: speed range 2..6 kn, lengths as fractions of l_pp."""
    return EllipticalDomainParams(
        u_max=6.0 * KNOT,
        u_min=2.0 * KNOT,
        l_longi_max_long=0.85 * l_pp,
        l_longi_max_short=0.50 * l_pp,
        l_longi_min=0.50 * l_pp,
        l_lat_max=0.39 * l_pp,
        l_lat_min=0.18 * l_pp,
    )


@dataclass
class RectangularDomainParams:
    margin: float = 1.0

    def __post_init__(self):
        if self.margin < 0:
            raise ValueError("margin must be nonnegative")


@dataclass
class DomainSwitchRule:
    """When to trade the elliptical domain for the near-berth rectangle."""

    distance_threshold: float = 110.0
    heading_threshold: float = math.radians(20.0)
    mode: str = "berthing"

    def __post_init__(self):
        if self.distance_threshold <= 0 or self.heading_threshold <= 0:
            raise ValueError("thresholds must be positive")
        if self.mode not in ("berthing", "unberthing"):
            raise ValueError("mode must be 'berthing' or 'unberthing'")


def _margins_at_speed(U: float, p: EllipticalDomainParams):
    f = (U - p.u_min) / (p.u_max - p.u_min)
    if f < 0.0:
        f = 0.0
    elif f > 1.0:
        f = 1.0
    m_vel = p.l_longi_min + f * (p.l_longi_max_long - p.l_longi_min)
    m_opp = p.l_longi_min + f * (p.l_longi_max_short - p.l_longi_min)
    lat = p.l_lat_min + f * (p.l_lat_max - p.l_lat_min)
    return m_vel, m_opp, lat


def elliptical_vertices(state, ship, params: EllipticalDomainParams) -> np.ndarray:
    """12 earth-frame vertices of the speed-scaled domain around the ship.

    Fore/aft semi-axes are the ship half-length plus the interpolated
    longitudinal margins, the long one on the side the surge velocity
    points to; the lateral semi-axis is half-breadth plus the lateral
    margin. Vertices sit at 30 deg parameter increments.
    """
    U = math.sqrt(state.u * state.u + state.vm * state.vm)
    m_vel, m_opp, lat = _margins_at_speed(U, params)
    if state.u >= 0.0:
        a_fore = 0.5 * ship.l_pp + m_vel
        a_aft = 0.5 * ship.l_pp + m_opp
    else:
        a_fore = 0.5 * ship.l_pp + m_opp
        a_aft = 0.5 * ship.l_pp + m_vel
    b = 0.5 * ship.breadth + lat
    cp = math.cos(state.psi)
    sp = math.sin(state.psi)
    out = np.empty((12, 2))
    for k in range(12):
        th = k * (math.pi / 6.0)
        ct = math.cos(th)
        st = math.sin(th)
        a = a_fore if ct >= 0.0 else a_aft
        lx = a * ct
        ly = b * st
        out[k, 0] = state.x0 + lx * cp - ly * sp
        out[k, 1] = state.y0 + lx * sp + ly * cp
    return out


def rectangular_vertices(state, ship, params: RectangularDomainParams) -> np.ndarray:
    """Corners of the circumscribed ship rectangle inflated by the margin."""
    hl = 0.5 * ship.l_pp + params.margin
    hb = 0.5 * ship.breadth + params.margin
    cp = math.cos(state.psi)
    sp = math.sin(state.psi)
    out = np.empty((4, 2))
    local = ((hl, hb), (-hl, hb), (-hl, -hb), (hl, -hb))
    for k, (lx, ly) in enumerate(local):
        out[k, 0] = state.x0 + lx * cp - ly * sp
        out[k, 1] = state.y0 + lx * sp + ly * cp
    return out


def select_domain(state, berthed_state, rule: DomainSwitchRule) -> str:
    """Pick the active domain for one timestep (no hysteresis).

    Berthing: rectangle iff within the distance threshold of the berthed
    position AND the heading deviation from the berthed attitude is within
    the heading threshold (both inclusive). Unberthing: distance only.
    """
    dx = state.x0 - berthed_state.x0
    dy = state.y0 - berthed_state.y0
    near = dx * dx + dy * dy <= rule.distance_threshold * rule.distance_threshold
    if not near:
        return ELLIPTICAL
    if rule.mode == "berthing":
        # wrap-safe heading difference
        d = state.psi - berthed_state.psi
        dev = abs(math.atan2(math.sin(d), math.cos(d)))
        if dev > rule.heading_threshold:
            return ELLIPTICAL
    return RECTANGULAR


def domain_vertices(state, ship, ell: EllipticalDomainParams,
                    rect: RectangularDomainParams, rule: DomainSwitchRule,
                    berthed_state):
    """(kind, vertices) of the domain active at this state."""
    kind = select_domain(state, berthed_state, rule)
    if kind == RECTANGULAR:
        return kind, rectangular_vertices(state, ship, rect)
    return kind, elliptical_vertices(state, ship, ell)


# ---------------------------------------------------------------------------
# batched intrusion kernel


def pack_obstacles(obstacles):
    """Pad obstacle vertex lists into (K, max_nv, 2) plus a count vector."""
    if not obstacles:
        return np.zeros((0, 3, 2)), np.zeros(0, dtype=np.int64)
    max_nv = max(o.vertices.shape[0] for o in obstacles)
    obs = np.zeros((len(obstacles), max_nv, 2))
    nv = np.zeros(len(obstacles), dtype=np.int64)
    for i, o in enumerate(obstacles):
        k = o.vertices.shape[0]
        obs[i, :k] = o.vertices
        nv[i] = k
    return obs, nv


@njit(cache=True)
def _penetration_one(px, py, obs, o, nv):
    wn = 0
    for j in range(nv):
        ax = obs[o, j, 0]
        ay = obs[o, j, 1]
        jb = j + 1
        if jb == nv:
            jb = 0
        bx = obs[o, jb, 0]
        by = obs[o, jb, 1]
        cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        if cross == 0.0:
            dot = (px - ax) * (bx - ax) + (py - ay) * (by - ay)
            if 0.0 <= dot <= (bx - ax) * (bx - ax) + (by - ay) * (by - ay):
                return 0.0  # on the boundary: zero depth
        if ay <= py:
            if by > py and cross > 0.0:
                wn += 1
        else:
            if by <= py and cross < 0.0:
                wn -= 1
    if wn == 0:
        return 0.0
    best = 1e300
    for j in range(nv):
        ax = obs[o, j, 0]
        ay = obs[o, j, 1]
        jb = j + 1
        if jb == nv:
            jb = 0
        bx = obs[o, jb, 0]
        by = obs[o, jb, 1]
        dx = bx - ax
        dy = by - ay
        dd = dx * dx + dy * dy
        if dd == 0.0:
            ex = px - ax
            ey = py - ay
            d = math.sqrt(ex * ex + ey * ey)
        else:
            t = ((px - ax) * dx + (py - ay) * dy) / dd
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            ex = px - (ax + t * dx)
            ey = py - (ay + t * dy)
            d = math.sqrt(ex * ex + ey * ey)
        if d < best:
            best = d
    return best


@njit(cache=True)
def _intrusion_raw(states, dt_s, obs, obs_nv, half_l, half_b,
                   u_min, u_max, l_max_long, l_max_short, l_min,
                   lat_max, lat_min, rect_margin,
                   thr_d2, thr_psi, berth_x, berth_y, berth_psi, berthing):
    total = 0.0
    verts = np.empty((12, 2))
    n = states.shape[0]
    n_obs = obs.shape[0]
    for i in range(n):
        x0 = states[i, 0]
        u = states[i, 1]
        y0 = states[i, 2]
        vm = states[i, 3]
        psi = states[i, 4]
        dx = x0 - berth_x
        dy = y0 - berth_y
        near = dx * dx + dy * dy <= thr_d2
        if near and berthing:
            d = psi - berth_psi
            dev = abs(math.atan2(math.sin(d), math.cos(d)))
            near = dev <= thr_psi
        if near:
            nv_dom = 4
            hl = half_l + rect_margin
            hb = half_b + rect_margin
            verts[0, 0] = hl
            verts[0, 1] = hb
            verts[1, 0] = -hl
            verts[1, 1] = hb
            verts[2, 0] = -hl
            verts[2, 1] = -hb
            verts[3, 0] = hl
            verts[3, 1] = -hb
        else:
            nv_dom = 12
            U = math.sqrt(u * u + vm * vm)
            f = (U - u_min) / (u_max - u_min)
            if f < 0.0:
                f = 0.0
            elif f > 1.0:
                f = 1.0
            m_vel = l_min + f * (l_max_long - l_min)
            m_opp = l_min + f * (l_max_short - l_min)
            lat = lat_min + f * (lat_max - lat_min)
            if u >= 0.0:
                a_fore = half_l + m_vel
                a_aft = half_l + m_opp
            else:
                a_fore = half_l + m_opp
                a_aft = half_l + m_vel
            b = half_b + lat
            for k in range(12):
                th = k * (math.pi / 6.0)
                ct = math.cos(th)
                st = math.sin(th)
                a = a_fore if ct >= 0.0 else a_aft
                verts[k, 0] = a * ct
                verts[k, 1] = b * st
        cp = math.cos(psi)
        sp = math.sin(psi)
        for k in range(nv_dom):
            lx = verts[k, 0]
            ly = verts[k, 1]
            wx = x0 + lx * cp - ly * sp
            wy = y0 + lx * sp + ly * cp
            for o in range(n_obs):
                total += _penetration_one(wx, wy, obs, o, obs_nv[o])
    return total * dt_s


def intrusion_C(trajectory, port, ship, ell: EllipticalDomainParams,
                rect: RectangularDomainParams, rule: DomainSwitchRule,
                berthed_state, dt_s: float) -> float:
    """Time integral (rectangle rule over samples) of summed vertex penetrations."""
    states = np.ascontiguousarray(trajectory.states)
    if states.shape[0] == 0:
        raise ValueError("empty trajectory")
    obs, nv = pack_obstacles(port.obstacles)
    return float(_intrusion_raw(
        states, dt_s, obs, nv,
        0.5 * ship.l_pp, 0.5 * ship.breadth,
        ell.u_min, ell.u_max, ell.l_longi_max_long, ell.l_longi_max_short,
        ell.l_longi_min, ell.l_lat_max, ell.l_lat_min, rect.margin,
        rule.distance_threshold * rule.distance_threshold,
        rule.heading_threshold,
        berthed_state.x0, berthed_state.y0, berthed_state.psi,
        rule.mode == "berthing"))
