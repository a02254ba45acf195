"""3-DOF planar maneuvering model and fixed-step RK4 integration.

Force decomposition: bare hull damping, twin screws, a single aggregated
rudder behind the screws, bow/stern tunnel thrusters, and steady-wind
loads from 3-term Fourier coefficient rows. All quantities strictly SI;
angle conventions: x0 north, y0 east, psi measured from north toward
east, rudder positive to starboard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

try:
    from numba import njit
except ImportError:  # slow but functional without the JIT
    def njit(*args, **kwargs):
        def deco(f):
            return f
        if args and callable(args[0]):
            return args[0]
        return deco


# ---------------------------------------------------------------------------
# state / control containers


@dataclass
class ShipState:
    """Planar motion state.

    x0, y0 earth-fixed position [m] (north, east), u surge velocity [m/s],
    vm sway velocity at midship [m/s], psi heading [rad] from north
    (stored unwrapped), r yaw rate [rad/s]. Heading comparisons must go
    through a subtended angle, never raw subtraction.
    """

    x0: float
    u: float
    y0: float
    vm: float
    psi: float
    r: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x0, self.u, self.y0, self.vm, self.psi, self.r])

    @staticmethod
    def from_array(a) -> "ShipState":
        return ShipState(float(a[0]), float(a[1]), float(a[2]),
                         float(a[3]), float(a[4]), float(a[5]))

    def speed(self) -> float:
        return math.sqrt(self.u * self.u + self.vm * self.vm)


@dataclass
class ControlInput:
    """Actuator setting held constant over one control interval.

    delta rudder angle [rad], n_p / n_s port and starboard propeller
    revolutions [1/s], n_bt / n_st bow and stern thruster revolutions [1/s].
    """

    delta: float
    n_p: float
    n_s: float
    n_bt: float
    n_st: float

    def as_array(self) -> np.ndarray:
        return np.array([self.delta, self.n_p, self.n_s, self.n_bt, self.n_st])


@dataclass
class ControlSchedule:
    """Piecewise-constant schedule: m segments of duration dt_c, cut at t_f."""

    dt_c: float
    segments: list
    t_f: float

    def as_array(self) -> np.ndarray:
        return np.array([[c.delta, c.n_p, c.n_s, c.n_bt, c.n_st]
                         for c in self.segments])


@dataclass
class WindCondition:
    """Steady true wind; direction is where the wind blows FROM, earth frame [rad]."""

    true_speed: float
    true_direction: float

    def velocity_components(self):
        # wind blowing FROM direction theta moves air TOWARD theta + pi
        wn = -self.true_speed * math.cos(self.true_direction)
        we = -self.true_speed * math.sin(self.true_direction)
        return wn, we


# ---------------------------------------------------------------------------
# coefficient blocks


@dataclass
class HullCoeffs:
    """Linear plus quadratic damping, laterally symmetric by construction."""

    x_u: float
    x_uu: float
    x_vr: float
    y_v: float
    y_vv: float
    y_r: float
    y_rr: float
    n_v: float
    n_vv: float
    n_r: float
    n_rr: float


@dataclass
class PropellerCoeffs:
    k_t0: float              # bollard thrust coefficient, T = k_t0 rho n|n| D^4
    diameter: float          # [m]
    thrust_deduction: float  # t_p
    lateral_offset: float    # shaft distance from centerline [m]


@dataclass
class RudderCoeffs:
    area: float        # A_R [m^2]
    f_alpha: float     # normal-force gradient
    epsilon: float     # wake-to-inflow ratio
    kappa: float       # slipstream acceleration factor
    gamma_flow: float  # flow-straightening
    l_r: float         # effective inflow lever for v_R [m], negative aft
    x_r: float         # rudder position [m], negative aft
    t_r: float         # steering resistance deduction
    a_h: float         # hull augmentation
    x_h: float         # augmentation lever [m], negative aft


@dataclass
class ThrusterCoeffs:
    k_force: float   # lateral force = k rho n|n| D^4
    diameter: float  # [m]
    x_pos: float     # longitudinal position [m]


@dataclass
class WindCoeffs:
    rho_air: float
    front_area: float    # A_F [m^2]
    lateral_area: float  # A_L [m^2]
    cx: tuple            # (c0, c1, c2) for c0 + c1 cos g + c2 cos 2g
    cy: tuple            # (c1, c2, c3) for sin g, sin 2g, sin 3g
    cn: tuple


@dataclass
class ShipParticulars:
    """Principal dimensions, mass terms, and the force-model coefficient blocks."""

    l_pp: float
    breadth: float
    mass: float
    added_mass_x: float
    added_mass_y: float
    inertia_z: float
    added_inertia_z: float
    rho_water: float
    hull: HullCoeffs
    propeller: PropellerCoeffs
    rudder: RudderCoeffs
    bow_thruster: ThrusterCoeffs
    stern_thruster: ThrusterCoeffs
    wind: WindCoeffs

    def __post_init__(self):
        if self.l_pp <= 0 or self.breadth <= 0:
            raise ValueError("l_pp and breadth must be positive")
        if self.mass <= 0 or self.inertia_z <= 0:
            raise ValueError("mass and inertia must be positive")

    def pack(self) -> np.ndarray:
        """Flatten every force coefficient into the array layout the kernels use."""
        h, p, rd, bt, st, w = (self.hull, self.propeller, self.rudder,
                               self.bow_thruster, self.stern_thruster, self.wind)
        return np.array([
            self.mass, self.added_mass_x, self.added_mass_y,
            self.inertia_z, self.added_inertia_z, self.rho_water,
            h.x_u, h.x_uu, h.x_vr,
            h.y_v, h.y_vv, h.y_r, h.y_rr,
            h.n_v, h.n_vv, h.n_r, h.n_rr,
            p.k_t0, p.diameter, p.thrust_deduction, p.lateral_offset,
            rd.area, rd.f_alpha, rd.epsilon, rd.kappa, rd.gamma_flow,
            rd.l_r, rd.x_r, rd.t_r, rd.a_h, rd.x_h,
            bt.k_force, bt.diameter, bt.x_pos,
            st.k_force, st.diameter, st.x_pos,
            w.rho_air, w.front_area, w.lateral_area,
            w.cx[0], w.cx[1], w.cx[2],
            w.cy[0], w.cy[1], w.cy[2],
            w.cn[0], w.cn[1], w.cn[2],
            self.l_pp,
        ])


@dataclass
class Trajectory:
    """Sampled result of simulate: states and the controls actually applied.

    controls holds post-cutoff actuator values; row i is the input active on
    [t_i, t_{i+1}), the last row repeats the value that would apply at t_f.
    """

    t: np.ndarray
    states: np.ndarray    # (n+1, 6) rows (x0, u, y0, vm, psi, r)
    controls: np.ndarray  # (n+1, 5) rows (delta, n_p, n_s, n_bt, n_st)

    def __len__(self):
        return self.states.shape[0]

    def state_at(self, i: int) -> ShipState:
        return ShipState.from_array(self.states[i])

    def final_state(self) -> ShipState:
        return ShipState.from_array(self.states[-1])


class SimulationDiverged(RuntimeError):
    """State left the finite range during integration; carries the bad step."""

    def __init__(self, step: int):
        super().__init__(f"non-finite state at sample {step}")
        self.step = step


# ---------------------------------------------------------------------------
# scalar kernels (JIT-compiled when numba is present)


@njit(cache=True)
def _relative_wind_raw(u, vm, psi, wind_n, wind_e):
    cp = math.cos(psi)
    sp = math.sin(psi)
    dn = wind_n - (u * cp - vm * sp)
    de = wind_e - (u * sp + vm * cp)
    rx = cp * dn + sp * de
    ry = -sp * dn + cp * de
    ur = math.sqrt(rx * rx + ry * ry)
    if ur == 0.0:
        return 0.0, 0.0
    g = math.atan2(-ry, -rx)
    if g == math.pi:  # keep gamma in [-pi, pi)
        g = -math.pi
    return ur, g


@njit(cache=True)
def _forces_raw(u, vm, r, delta, n_p, n_s, n_bt, n_st, ur, gr, P):
    rho = P[5]
    # hull damping
    XH = -P[6] * u - P[7] * u * abs(u) + P[8] * vm * r
    YH = -P[9] * vm - P[10] * vm * abs(vm) - P[11] * r - P[12] * r * abs(r)
    NH = -P[13] * vm - P[14] * vm * abs(vm) - P[15] * r - P[16] * r * abs(r)
    # twin screws, quadratic thrust law
    d2 = P[18] * P[18]
    kp = P[17] * rho * d2 * d2
    Tp = kp * n_p * abs(n_p)
    Ts = kp * n_s * abs(n_s)
    XP = (1.0 - P[19]) * (Tp + Ts)
    NP = P[20] * (Tp - Ts)
    # rudder normal force; inflow accelerated by the screw race ahead of it
    n_avg = 0.5 * (n_p + n_s)
    if n_avg < 0.0:
        n_avg = 0.0
    u_in = P[23] * u + P[24] * P[18] * n_avg
    v_in = P[25] * (vm + P[26] * r)
    a_r = delta - math.atan2(v_in, u_in)
    fn = 0.5 * rho * P[21] * P[22] * (u_in * u_in + v_in * v_in) * math.sin(a_r)
    XR = -(1.0 - P[28]) * fn * math.sin(delta)
    YR = -(1.0 + P[29]) * fn * math.cos(delta)
    NR = -(P[27] + P[29] * P[30]) * fn * math.cos(delta)
    # tunnel thrusters, lateral force only
    b2 = P[32] * P[32]
    Ybt = P[31] * rho * n_bt * abs(n_bt) * b2 * b2
    s2 = P[35] * P[35]
    Yst = P[34] * rho * n_st * abs(n_st) * s2 * s2
    Nbt = P[33] * Ybt
    Nst = P[36] * Yst
    # wind loads
    q = 0.5 * P[37] * ur * ur
    cg = math.cos(gr)
    sg = math.sin(gr)
    c2g = math.cos(2.0 * gr)
    s2g = math.sin(2.0 * gr)
    s3g = math.sin(3.0 * gr)
    XA = q * P[38] * (P[40] + P[41] * cg + P[42] * c2g)
    YA = q * P[39] * (P[43] * sg + P[44] * s2g + P[45] * s3g)
    NA = q * P[39] * P[49] * (P[46] * sg + P[47] * s2g + P[48] * s3g)
    X = XH + XP + XR + XA
    Y = YH + YR + Ybt + Yst + YA
    N = NH + NP + NR + Nbt + Nst + NA
    return X, Y, N


@njit(cache=True)
def _deriv_raw(u, vm, psi, r, delta, n_p, n_s, n_bt, n_st,
               wind_n, wind_e, frozen, ur0, gr0, P):
    if frozen:
        ur = ur0
        gr = gr0
    else:
        ur, gr = _relative_wind_raw(u, vm, psi, wind_n, wind_e)
    X, Y, N = _forces_raw(u, vm, r, delta, n_p, n_s, n_bt, n_st, ur, gr, P)
    cp = math.cos(psi)
    sp = math.sin(psi)
    du = (X + (P[0] + P[2]) * vm * r) / (P[0] + P[1])
    dv = (Y - (P[0] + P[1]) * u * r) / (P[0] + P[2])
    dr = N / (P[3] + P[4])
    return u * cp - vm * sp, du, u * sp + vm * cp, dv, r, dr


@njit(cache=True)
def _rk4_raw(x0, u, y0, vm, psi, r, delta, n_p, n_s, n_bt, n_st,
             wind_n, wind_e, frozen, ur0, gr0, dt, P):
    k1 = _deriv_raw(u, vm, psi, r, delta, n_p, n_s, n_bt, n_st,
                    wind_n, wind_e, frozen, ur0, gr0, P)
    h = 0.5 * dt
    k2 = _deriv_raw(u + h * k1[1], vm + h * k1[3], psi + h * k1[4], r + h * k1[5],
                    delta, n_p, n_s, n_bt, n_st,
                    wind_n, wind_e, frozen, ur0, gr0, P)
    k3 = _deriv_raw(u + h * k2[1], vm + h * k2[3], psi + h * k2[4], r + h * k2[5],
                    delta, n_p, n_s, n_bt, n_st,
                    wind_n, wind_e, frozen, ur0, gr0, P)
    k4 = _deriv_raw(u + dt * k3[1], vm + dt * k3[3], psi + dt * k3[4], r + dt * k3[5],
                    delta, n_p, n_s, n_bt, n_st,
                    wind_n, wind_e, frozen, ur0, gr0, P)
    s = dt / 6.0
    return (x0 + s * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            u + s * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            y0 + s * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
            vm + s * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
            psi + s * (k1[4] + 2.0 * k2[4] + 2.0 * k3[4] + k4[4]),
            r + s * (k1[5] + 2.0 * k2[5] + 2.0 * k3[5] + k4[5]))


@njit(cache=True)
def _simulate_raw(init, ctrl, n_steps, sps, dt, cutoff,
                  wind_n, wind_e, frozen, ur0, gr0, P, states, applied):
    """Integrate n_steps RK4 steps; fills states/applied, returns the index of
    the first non-finite sample or -1 on success."""
    m = ctrl.shape[0]
    x0 = init[0]
    u = init[1]
    y0 = init[2]
    vm = init[3]
    psi = init[4]
    r = init[5]
    states[0, 0] = x0
    states[0, 1] = u
    states[0, 2] = y0
    states[0, 3] = vm
    states[0, 4] = psi
    states[0, 5] = r
    for i in range(n_steps + 1):
        seg = i // sps
        if seg >= m:
            seg = m - 1
        delta = ctrl[seg, 0]
        n_p = ctrl[seg, 1]
        n_s = ctrl[seg, 2]
        n_bt = ctrl[seg, 3]
        n_st = ctrl[seg, 4]
        # thrusters drop out above the cutoff speed
        if math.sqrt(u * u + vm * vm) > cutoff:
            n_bt = 0.0
            n_st = 0.0
        applied[i, 0] = delta
        applied[i, 1] = n_p
        applied[i, 2] = n_s
        applied[i, 3] = n_bt
        applied[i, 4] = n_st
        if i == n_steps:
            break
        x0, u, y0, vm, psi, r = _rk4_raw(
            x0, u, y0, vm, psi, r, delta, n_p, n_s, n_bt, n_st,
            wind_n, wind_e, frozen, ur0, gr0, dt, P)
        if not (math.isfinite(x0) and math.isfinite(u) and math.isfinite(y0)
                and math.isfinite(vm) and math.isfinite(psi) and math.isfinite(r)):
            return i + 1
        states[i + 1, 0] = x0
        states[i + 1, 1] = u
        states[i + 1, 2] = y0
        states[i + 1, 3] = vm
        states[i + 1, 4] = psi
        states[i + 1, 5] = r
    return -1


# ---------------------------------------------------------------------------
# public interface


def relative_wind(state: ShipState, wind: WindCondition):
    """Relative wind over the moving ship, in the ship frame.

    Returns (u_r, gamma_r): u_r >= 0 is the relative speed, gamma_r in
    [-pi, pi) is the direction the apparent wind comes from, 0 = dead ahead.
    At u_r = 0 the direction degenerates and gamma_r is defined as 0.
    """
    wn, we = wind.velocity_components()
    ur, gr = _relative_wind_raw(state.u, state.vm, state.psi, wn, we)
    return float(ur), float(gr)


def effective_side_thruster(n: float, ship_speed: float, cutoff_speed: float) -> float:
    """Tunnel thrusters lose effect at speed: zero above cutoff, unchanged at it."""
    if ship_speed > cutoff_speed:
        return 0.0
    return n


def derivative(state: ShipState, control: ControlInput, wind: WindCondition,
               ship: ShipParticulars) -> ShipState:
    """Time derivative of the state under the full force model.

    The returned container holds d/dt of each field. Kinematic rows are the
    exact rotation of (u, vm, r); dynamic rows divide summed forces by
    (mass + added mass) with the centripetal coupling retained.
    """
    wn, we = wind.velocity_components()
    d = _deriv_raw(state.u, state.vm, state.psi, state.r,
                   control.delta, control.n_p, control.n_s,
                   control.n_bt, control.n_st,
                   wn, we, False, 0.0, 0.0, ship.pack())
    out = ShipState(float(d[0]), float(d[1]), float(d[2]),
                    float(d[3]), float(d[4]), float(d[5]))
    if not all(math.isfinite(v) for v in (out.x0, out.u, out.y0, out.vm, out.psi, out.r)):
        raise ValueError("non-finite derivative; check the coefficient set")
    return out


def step_rk4(state: ShipState, control: ControlInput, wind: WindCondition,
             ship: ShipParticulars, dt: float) -> ShipState:
    """One classical RK4 step with control and wind held constant."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    wn, we = wind.velocity_components()
    s = _rk4_raw(state.x0, state.u, state.y0, state.vm, state.psi, state.r,
                 control.delta, control.n_p, control.n_s,
                 control.n_bt, control.n_st,
                 wn, we, False, 0.0, 0.0, dt, ship.pack())
    return ShipState(float(s[0]), float(s[1]), float(s[2]),
                     float(s[3]), float(s[4]), float(s[5]))


def simulate(initial: ShipState, schedule: ControlSchedule, wind: WindCondition,
             ship: ShipParticulars, dt_s: float = 1.0, *,
             cutoff_speed: float = 2.0, wind_feedback: bool = True) -> Trajectory:
    """Integrate the schedule from the initial state.

    Samples at i*dt_s for i = 0..floor(t_f/dt_s); the control active at time
    t is segments[floor(t/dt_c)] with the side-thruster cutoff applied from
    the instantaneous speed at the start of each step. The final partial
    segment is truncated at t_f. With wind_feedback False the relative wind
    is frozen at its initial-state value for the whole run.
    """
    if dt_s <= 0:
        raise ValueError("dt_s must be positive")
    m = len(schedule.segments)
    if m < 1:
        raise ValueError("schedule needs at least one segment")
    ratio = schedule.dt_c / dt_s
    sps = int(round(ratio))
    if sps < 1 or abs(ratio - sps) > 1e-9:
        raise ValueError("dt_s must divide dt_c evenly")
    if schedule.t_f < 0:
        raise ValueError("t_f must be nonnegative")
    if schedule.t_f > m * schedule.dt_c * (1 + 1e-12):
        raise ValueError("t_f exceeds the schedule horizon m*dt_c")
    n_steps = int(math.floor(schedule.t_f / dt_s))
    if n_steps > m * sps:
        n_steps = m * sps
    ctrl = np.ascontiguousarray(schedule.as_array(), dtype=np.float64)
    P = ship.pack()
    wn, we = wind.velocity_components()
    frozen = not wind_feedback
    ur0 = gr0 = 0.0
    if frozen:
        ur0, gr0 = _relative_wind_raw(initial.u, initial.vm, initial.psi, wn, we)
    states = np.empty((n_steps + 1, 6))
    applied = np.empty((n_steps + 1, 5))
    bad = _simulate_raw(initial.as_array(), ctrl, n_steps, sps, dt_s, cutoff_speed,
                        wn, we, frozen, ur0, gr0, P, states, applied)
    if bad >= 0:
        raise SimulationDiverged(bad)
    t = np.arange(n_steps + 1) * dt_s
    return Trajectory(t=t, states=states, controls=applied)
