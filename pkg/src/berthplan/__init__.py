"""Minimum-time berthing and unberthing trajectory planning.

A 3-DOF maneuvering model with rudder, twin propellers, side thrusters
and wind forces is integrated under piecewise-constant controls; a
penalty-augmented time objective with checkpoint and ship-domain terms
is minimized by a restarting evolution strategy.
"""

from .cmaes import (DecisionVector, OptimizerConfig, ProgressRecord, decode,
                    encode, optimize)
from .domain import (DomainSwitchRule, EllipticalDomainParams,
                     RectangularDomainParams, default_elliptical,
                     domain_vertices, elliptical_vertices, intrusion_C,
                     rectangular_vertices, select_domain)
from .dynamics import (ControlInput, ControlSchedule, HullCoeffs,
                       PropellerCoeffs, RudderCoeffs, ShipParticulars,
                       ShipState, SimulationDiverged, ThrusterCoeffs,
                       Trajectory, WindCoeffs, WindCondition, derivative,
                       effective_side_thruster, relative_wind, simulate,
                       step_rk4)
from .feasibility import (InfeasibleClearance, max_heading_tolerance,
                          max_heading_tolerance_deg)
from .geometry import Port, PolygonObstacle, contains, penetration_length
from .objective import (CheckpointCondition, EvaluationReport, PenaltyWeights,
                        TerminalCondition, checkpoint_penalty, evaluate_J,
                        mode_penalty, score_states, subtended_angle,
                        terminal_penalty)
from .scenario import (Scenario, ScenarioError, load_scenario, read_trajectory,
                       save_scenario, scenario_from_dict, scenario_to_dict,
                       write_report, write_trajectory)

__version__ = "0.1.0"
