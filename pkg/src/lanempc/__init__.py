"""Integrated lane-change planning and tracking simulator.

A nonlinear bicycle-model plant, an arc-line lane-change reference path
builder, a receding-horizon controller that optimizes steering and rear
torque directly against a potential-field cost, a two-level baseline for
comparison, and a closed-loop scenario harness with CSV output.
"""

from .dynamics import (ControlInput, LowSpeedError, PlantFailureError,
                       VehicleParams, VehicleState, lateral_tire_forces,
                       slip_angles, state_derivative, step)
from .dubins import (PathConstructionError, PathSegment, ReferencePath,
                     build_lane_change_path, min_turn_radius,
                     nearest_arclength, reference_for_horizon,
                     sample_reference)
from .harness import (Metrics, SimulationAborted, SimulationLog,
                      compute_metrics, run, run_baseline_two_level)
from .mpc import (BoundarySamples, MpcConfig, PredictedTrajectory,
                  SolveResult, boundary_samples, cost, predict, solve_step)
from .optimize import BoxResult, minimize_box
from .scenario import (Obstacle, Rect, Road, Scenario,
                       min_obstacle_clearance, obstacle_boundary_at,
                       obstacle_pose_at, scenario_from_dict)

__version__ = "0.1.0"

__all__ = [
    "BoundarySamples", "BoxResult", "ControlInput", "LowSpeedError",
    "Metrics", "MpcConfig", "Obstacle", "PathConstructionError",
    "PathSegment", "PlantFailureError", "PredictedTrajectory", "Rect",
    "ReferencePath", "Road", "Scenario", "SimulationAborted",
    "SimulationLog", "SolveResult", "VehicleParams", "VehicleState",
    "boundary_samples", "build_lane_change_path", "compute_metrics", "cost",
    "lateral_tire_forces", "min_obstacle_clearance", "min_turn_radius",
    "minimize_box", "nearest_arclength", "obstacle_boundary_at",
    "obstacle_pose_at", "predict", "reference_for_horizon", "run",
    "run_baseline_two_level", "sample_reference", "scenario_from_dict",
    "slip_angles", "solve_step", "state_derivative", "step",
]
