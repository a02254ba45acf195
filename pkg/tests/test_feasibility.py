import math

import pytest

from berthplan.feasibility import (InfeasibleClearance, max_heading_tolerance,
                                   max_heading_tolerance_deg)


def test_square_berth_hand_case():
    # berth line at 45 deg, tolerances 3-4-5: the projected offset is the
    # full hypotenuse 5; clearance 7 minus margin 1 leaves 1 m over the
    # lever arm L/2 + l = 5, so the bound is asin(0.2) exactly
    got = max_heading_tolerance(7.0, 1.0, 8.0, math.pi / 4, math.pi / 4, 3.0, 4.0)
    assert got == pytest.approx(math.asin(0.2), rel=1e-12)


def test_zero_budget_gives_zero_bound():
    # clearance exactly absorbed by margin plus projected tolerance
    d_xy = math.hypot(1.0, 1.0) * math.cos(math.pi / 4)
    got = max_heading_tolerance(1.0 + d_xy, 1.0, 100.0, 0.0, 0.0, 1.0, 1.0)
    assert got == pytest.approx(0.0, abs=1e-12)


def test_monotone_in_clearance_and_tolerances():
    args = dict(margin=1.0, length=100.0, berth_angle=0.0,
                berthed_heading=0.0, x_tol_1=1.0, x_tol_3=1.0)
    b = [max_heading_tolerance(c, **args) for c in (2.5, 3.0, 4.0, 6.0)]
    assert b == sorted(b)
    t = [max_heading_tolerance(4.0, 1.0, 100.0, 0.0, 0.0, x, x)
         for x in (0.5, 1.0, 1.5, 2.0)]
    assert t == sorted(t, reverse=True)


def test_berthed_heading_shifts_bound_linearly():
    base = max_heading_tolerance(4.0, 1.0, 100.0, 0.0, 0.0, 1.0, 1.0)
    shifted = max_heading_tolerance(4.0, 1.0, 100.0, 0.0, 0.1, 1.0, 1.0)
    assert shifted - base == pytest.approx(0.1, rel=1e-12)


def test_infeasible_cases():
    with pytest.raises(InfeasibleClearance):
        max_heading_tolerance(0.9, 1.0, 100.0, 0.0, 0.0, 1.0, 1.0)
    # projected tolerance overwhelms the clearance: arcsin argument < -1
    with pytest.raises(InfeasibleClearance) as ei:
        max_heading_tolerance(1.1, 1.0, 4.0, 0.0, 0.0, 200.0, 200.0)
    assert ei.value.arg < -1.0
    # clearance exceeding the lever arm: argument > 1
    with pytest.raises(InfeasibleClearance) as ei:
        max_heading_tolerance(500.0, 1.0, 4.0, 0.0, 0.0, 0.1, 0.1)
    assert ei.value.arg > 1.0
    with pytest.raises(ValueError):
        max_heading_tolerance(4.0, 1.0, -5.0, 0.0, 0.0, 1.0, 1.0)


def test_degree_wrapper_matches_radian_core():
    rad = max_heading_tolerance(4.0, 1.0, 100.0, math.radians(10.0),
                                math.radians(7.0), 1.0, 1.0)
    deg = max_heading_tolerance_deg(4.0, 1.0, 100.0, 10.0, 7.0, 1.0, 1.0)
    assert deg == pytest.approx(math.degrees(rad), rel=1e-12)
