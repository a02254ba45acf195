import math

import numpy as np
import pytest

from berthplan.domain import (ELLIPTICAL, KNOT, RECTANGULAR, DomainSwitchRule,
                              EllipticalDomainParams, RectangularDomainParams,
                              default_elliptical, domain_vertices,
                              elliptical_vertices, intrusion_C,
                              rectangular_vertices, select_domain)
from berthplan.dynamics import ShipState, Trajectory
from berthplan.geometry import PolygonObstacle, Port, penetration_length

BERTHED = ShipState(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def _ell50():
    return default_elliptical(50.0)


def _state(x0=0.0, u=0.0, y0=0.0, vm=0.0, psi=0.0, r=0.0):
    return ShipState(x0, u, y0, vm, psi, r)


def _traj(states, dt_s=1.0):
    states = np.asarray(states, dtype=np.float64)
    n = states.shape[0]
    return Trajectory(t=np.arange(n) * dt_s, states=states,
                      controls=np.zeros((n, 5)))


# ---------------------------------------------------------------------------
# vertices


def test_elliptical_vertices_at_rest(ship):
    v = elliptical_vertices(_state(), ship, _ell50())
    assert v.shape == (12, 2)
    # minimum margins: 25 + 25 fore/aft, 4.5 + 9 lateral
    assert v[0] == pytest.approx([50.0, 0.0])
    assert v[3] == pytest.approx([0.0, 13.5])
    assert v[6] == pytest.approx([-50.0, 0.0])
    assert v[9] == pytest.approx([0.0, -13.5])


def test_elliptical_vertices_full_speed_ahead(ship):
    v = elliptical_vertices(_state(u=6.0 * KNOT), ship, _ell50())
    assert v[0] == pytest.approx([25.0 + 42.5, 0.0])   # long margin on the bow
    assert v[6] == pytest.approx([-(25.0 + 25.0), 0.0])
    assert v[3] == pytest.approx([0.0, 4.5 + 19.5])


def test_elliptical_vertices_astern_swaps_long_margin(ship):
    v = elliptical_vertices(_state(u=-6.0 * KNOT), ship, _ell50())
    assert v[0] == pytest.approx([50.0, 0.0])
    assert v[6] == pytest.approx([-67.5, 0.0])


def test_elliptical_vertices_margin_interpolation(ship):
    p = _ell50()
    mid = 0.5 * (p.u_min + p.u_max)
    v = elliptical_vertices(_state(u=mid), ship, p)
    assert v[0] == pytest.approx([25.0 + 0.5 * (25.0 + 42.5), 0.0])
    assert v[3, 1] == pytest.approx(4.5 + 0.5 * (9.0 + 19.5))
    # clamped outside the speed band
    v_lo = elliptical_vertices(_state(u=0.3 * p.u_min), ship, p)
    v_rest = elliptical_vertices(_state(), ship, p)
    assert np.allclose(v_lo, v_rest)
    v_hi = elliptical_vertices(_state(u=3.0 * p.u_max), ship, p)
    v_max = elliptical_vertices(_state(u=p.u_max), ship, p)
    assert np.allclose(v_hi, v_max)


def test_vertices_rigid_transform(ship):
    rng = np.random.default_rng(21)
    p = _ell50()
    for _ in range(20):
        u, vm = rng.uniform(-3, 3, 2)
        x0, y0, psi = rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-7, 7)
        base = elliptical_vertices(_state(u=u, vm=vm), ship, p)
        moved = elliptical_vertices(_state(x0, u, y0, vm, psi), ship, p)
        R = np.array([[math.cos(psi), -math.sin(psi)],
                      [math.sin(psi), math.cos(psi)]])
        assert np.allclose(moved, base @ R.T + (x0, y0), atol=1e-9)


def test_rectangular_vertices_dimensions(ship):
    v = rectangular_vertices(_state(psi=0.4), ship, RectangularDomainParams(1.0))
    assert v.shape == (4, 2)
    sides = sorted(float(np.linalg.norm(v[(k + 1) % 4] - v[k])) for k in range(4))
    assert sides[0] == pytest.approx(9.0 + 2.0)
    assert sides[-1] == pytest.approx(50.0 + 2.0)
    # diagonal pairs agree
    assert sides[0] == pytest.approx(sides[1]) and sides[2] == pytest.approx(sides[3])


def test_domain_vertices_never_touch_the_hull(ship):
    # every vertex stays outside the bare ship rectangle at any speed
    rng = np.random.default_rng(13)
    p = _ell50()
    for _ in range(200):
        st = _state(u=rng.uniform(-4, 4), vm=rng.uniform(-2, 2))
        for lx, ly in elliptical_vertices(st, ship, p):
            assert abs(lx) >= 25.0 - 1e-12 or abs(ly) >= 4.5 - 1e-12


# ---------------------------------------------------------------------------
# domain switching


def test_select_domain_distance_inclusive():
    rule = DomainSwitchRule(110.0, math.radians(20.0), "berthing")
    assert select_domain(_state(x0=110.0), BERTHED, rule) == RECTANGULAR
    assert select_domain(_state(x0=math.nextafter(110.0, 200.0)), BERTHED, rule) \
        == ELLIPTICAL
    assert select_domain(_state(x0=66.0, y0=88.0), BERTHED, rule) == RECTANGULAR


def test_select_domain_heading_inclusive():
    rule = DomainSwitchRule(110.0, math.radians(20.0), "berthing")
    at = math.radians(20.0)
    assert select_domain(_state(x0=50.0, psi=at), BERTHED, rule) == RECTANGULAR
    assert select_domain(_state(x0=50.0, psi=-at), BERTHED, rule) == RECTANGULAR
    over = math.nextafter(at, 1.0)
    assert select_domain(_state(x0=50.0, psi=over), BERTHED, rule) == ELLIPTICAL


def test_select_domain_heading_wraps():
    rule = DomainSwitchRule(110.0, math.radians(20.0), "berthing")
    # heading near +-pi against a berthed heading of pi: small subtended angle
    berthed = ShipState(0, 0, 0, 0, math.pi, 0)
    assert select_domain(_state(x0=10.0, psi=-math.pi + 0.1), berthed, rule) \
        == RECTANGULAR
    assert select_domain(_state(x0=10.0, psi=2 * math.pi + 0.05 + math.pi),
                         berthed, rule) == RECTANGULAR


def test_select_domain_unberthing_ignores_heading():
    rule = DomainSwitchRule(110.0, math.radians(20.0), "unberthing")
    assert select_domain(_state(x0=50.0, psi=2.0), BERTHED, rule) == RECTANGULAR
    assert select_domain(_state(x0=120.0, psi=0.0), BERTHED, rule) == ELLIPTICAL


def test_domain_vertices_dispatch(ship):
    rule = DomainSwitchRule(110.0, math.radians(20.0), "berthing")
    kind, v = domain_vertices(_state(x0=500.0), ship, _ell50(),
                              RectangularDomainParams(1.0), rule, BERTHED)
    assert kind == ELLIPTICAL and v.shape == (12, 2)
    kind, v = domain_vertices(_state(x0=10.0), ship, _ell50(),
                              RectangularDomainParams(1.0), rule, BERTHED)
    assert kind == RECTANGULAR and v.shape == (4, 2)


# ---------------------------------------------------------------------------
# intrusion integral


def _port(*vertex_lists):
    obs = [PolygonObstacle(np.asarray(v, dtype=np.float64)) for v in vertex_lists]
    return Port(obs, np.array([[0.0, -10.0], [0.0, 10.0]]), 0.0)


def test_intrusion_single_sample_fixture(ship):
    # ship at rest at the origin, far from the berth reference: elliptical
    # domain with minimum margins; only the bow vertex (50, 0) penetrates the
    # block by exactly 1 m, and dt_s = 2 doubles it
    port = _port([[49.0, -5.0], [55.0, -5.0], [55.0, 5.0], [49.0, 5.0]])
    far = ShipState(1000.0, 0.0, 1000.0, 0.0, 0.0, 0.0)
    traj = _traj([[0.0, 0.0, 0.0, 0.0, 0.0, 0.0]], dt_s=2.0)
    rule = DomainSwitchRule(110.0, math.radians(20.0), "berthing")
    C = intrusion_C(traj, port, ship, _ell50(), RectangularDomainParams(1.0),
                    rule, far, 2.0)
    assert C == pytest.approx(2.0, rel=1e-12)


def test_intrusion_zero_when_clear(ship):
    port = _port([[200.0, 200.0], [210.0, 200.0], [210.0, 210.0], [200.0, 210.0]])
    traj = _traj([[0, 2.0, 0, 0, 0, 0], [2.0, 2.0, 0, 0, 0, 0]])
    rule = DomainSwitchRule(110.0, math.radians(20.0), "berthing")
    far = ShipState(-500.0, 0, -500.0, 0, 0, 0)
    assert intrusion_C(traj, port, ship, _ell50(), RectangularDomainParams(1.0),
                       rule, far, 1.0) == 0.0


def test_intrusion_matches_public_pipeline(ship):
    # kernel against the unbatched composition of the public pieces
    rng = np.random.default_rng(17)
    port = _port([[30.0, 20.0], [90.0, 20.0], [90.0, 60.0], [30.0, 60.0]],
                 [[-80.0, -70.0], [-20.0, -70.0], [-20.0, -30.0], [-80.0, -30.0]])
    ell = _ell50()
    rect = RectangularDomainParams(1.0)
    rule = DomainSwitchRule(110.0, math.radians(20.0), "berthing")
    berthed = ShipState(60.0, 0.0, 10.0, 0.0, 0.3, 0.0)
    states = np.c_[rng.uniform(-120, 120, 40), rng.uniform(-4, 4, 40),
                   rng.uniform(-120, 120, 40), rng.uniform(-2, 2, 40),
                   rng.uniform(-7, 7, 40), rng.uniform(-0.1, 0.1, 40)]
    dt_s = 0.5
    got = intrusion_C(_traj(states, dt_s), port, ship, ell, rect, rule,
                      berthed, dt_s)
    total = 0.0
    for row in states:
        st = ShipState.from_array(row)
        _, verts = domain_vertices(st, ship, ell, rect, rule, berthed)
        for p in verts:
            for o in port.obstacles:
                total += penetration_length(o, p)
    assert got == pytest.approx(total * dt_s, rel=1e-12, abs=1e-12)
    assert got > 0  # the sweep must actually hit something


def test_intrusion_switch_shrinks_domain_near_berth(ship):
    # aligned near-berth ship uses the small rectangle and stays clear;
    # a 30 deg heading error re-activates the big elliptical domain
    port = _port([[-26.0, 7.0], [26.0, 7.0], [26.0, 20.0], [-26.0, 20.0]])
    rule = DomainSwitchRule(110.0, math.radians(20.0), "berthing")
    rect = RectangularDomainParams(1.0)
    aligned = _traj([[0.0, 0.0, 0.0, 0.0, 0.0, 0.0]])
    off = _traj([[0.0, 0.0, 0.0, 0.0, math.radians(30.0), 0.0]])
    assert intrusion_C(aligned, port, ship, _ell50(), rect, rule, BERTHED, 1.0) == 0.0
    assert intrusion_C(off, port, ship, _ell50(), rect, rule, BERTHED, 1.0) > 0.0


def test_intrusion_refinement_consistency(ship):
    # straight glide through a block: halving dt_s changes the integral
    # by roughly the rectangle-rule error, not by orders of magnitude
    port = _port([[100.0, -40.0], [140.0, -40.0], [140.0, 40.0], [100.0, 40.0]])
    rule = DomainSwitchRule(110.0, math.radians(20.0), "berthing")
    far = ShipState(-4000.0, 0, -4000.0, 0, 0, 0)

    def sweep(dt):
        ts = np.arange(0.0, 120.0 + 1e-9, dt)
        states = np.c_[ts * 2.0, np.full_like(ts, 2.0), np.zeros_like(ts),
                       np.zeros_like(ts), np.zeros_like(ts), np.zeros_like(ts)]
        return intrusion_C(_traj(states, dt), port, ship, _ell50(),
                           RectangularDomainParams(1.0), rule, far, dt)

    c1, c2 = sweep(1.0), sweep(0.5)
    assert c1 > 0
    assert abs(c1 - c2) / c1 < 0.05


def test_param_validation():
    with pytest.raises(ValueError):
        EllipticalDomainParams(1.0, 2.0, 10.0, 10.0, 5.0, 5.0, 2.0)  # u_max < u_min
    with pytest.raises(ValueError):
        EllipticalDomainParams(3.0, 1.0, 4.0, 10.0, 5.0, 5.0, 2.0)  # max < min margin
    with pytest.raises(ValueError):
        RectangularDomainParams(-0.5)
    with pytest.raises(ValueError):
        DomainSwitchRule(0.0, 0.3, "berthing")
    with pytest.raises(ValueError):
        DomainSwitchRule(10.0, 0.3, "sideways")
