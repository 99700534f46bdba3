"""Quasi-optimal AUV docking trajectories by inverse dynamics in a virtual domain."""

from .model import (
    Attitude, BodyVelocity, BoundaryConditions, CurrentField, DockSpec, DomainError, EndState,
    NedVector, NoFlyZone, Scenario, ScenarioError, SolverOptions, VehicleLimits, Weights,
    ground_velocity, load_scenario, rotation_body_to_ned, save_scenario,
)
from .planner import DecisionVector, PlanResult, assemble, initial_guess, optimize

__version__ = "0.1.0"
