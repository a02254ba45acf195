"""Closed-form check that the terminal tolerance box cannot push the
near-berth rectangular domain into the berth face.

Given the berth clearance D, the domain margin l, the ship length L, the
berth-line angle and the berthed heading, the worst positional offset
inside the tolerance box shortens the clearance budget; what remains
bounds the heading tolerance through the half-length lever arm.
"""

from __future__ import annotations

import math


class InfeasibleClearance(ValueError):
    """No heading budget: the positional tolerance already eats the clearance."""

    def __init__(self, arg: float):
        super().__init__(f"arcsin argument {arg:.6g} outside [-1, 1]; "
                         "clearance cannot absorb the positional tolerance")
        self.arg = arg


def max_heading_tolerance(clearance: float, margin: float, length: float,
                          berth_angle: float, berthed_heading: float,
                          x_tol_1: float, x_tol_3: float) -> float:
    """Largest admissible heading tolerance [rad]; all angles in radians.

    clearance D is the gap between ship side and berth face at the target
    pose, margin l the rectangular-domain inflation, length L the ship
    length over which a heading error rotates a corner toward the berth.
    """
    if clearance <= margin:
        raise InfeasibleClearance(-math.inf)
    if length <= 0:
        raise ValueError("length must be positive")
    theta_m = math.pi / 4.0 - berth_angle
    d_xy = math.sqrt(x_tol_1 * x_tol_1 + x_tol_3 * x_tol_3) * math.cos(theta_m)
    psi_tilde = berth_angle - berthed_heading
    arg = (clearance - margin - d_xy) / (0.5 * length + margin)
    if arg < -1.0 or arg > 1.0:
        raise InfeasibleClearance(arg)
    return math.asin(arg) - psi_tilde


def max_heading_tolerance_deg(clearance: float, margin: float, length: float,
                              berth_angle_deg: float, berthed_heading_deg: float,
                              x_tol_1: float, x_tol_3: float) -> float:
    """Degree-facing wrapper for the command line."""
    rad = max_heading_tolerance(clearance, margin, length,
                                math.radians(berth_angle_deg),
                                math.radians(berthed_heading_deg),
                                x_tol_1, x_tol_3)
    return math.degrees(rad)
