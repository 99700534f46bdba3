"""
Decision vector, trajectory assembly and the optimization driver.

The optimizer searches over eight numbers: the virtual horizon ``tau_f``, the
boundary jerks at both ends, and the speed-factor shape ``lambda_m``.
Everything else is pinned by the scenario's boundary conditions.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import simplex
from .invdyn import SampledTrajectory, SpeedFactorProfile, sample_trajectory
from .model import DomainError, NedVector, NoFlyZone, Scenario, SolverOptions, wrap_angle
from .penalty import ViolationReport, evaluate_cost
from .refcurve import ReferenceCurve, build_curve

log = logging.getLogger(__name__)

SENTINEL_COST = 1e12


class InfeasibleDecision(DomainError):
    """Assembly failed; ``cost`` is a large finite stand-in for the optimizer."""

    def __init__(self, message: str, cost: float):
        super().__init__(message)
        self.cost = cost


@dataclass(frozen=True)
class DecisionVector:
    tau_f: float
    jerk0: NedVector
    jerkf: NedVector
    lambda_m: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.tau_f) and self.tau_f > 0):
            raise DomainError("tau_f must be > 0")
        if not (math.isfinite(self.lambda_m) and self.lambda_m > -1):
            raise DomainError("lambda_m must be > -1")

    def as_array(self) -> np.ndarray:
        return np.array([self.tau_f, *self.jerk0.as_array(), *self.jerkf.as_array(), self.lambda_m])

    @classmethod
    def from_array(cls, x) -> "DecisionVector":
        x = [float(v) for v in x]
        if len(x) != 8:
            raise ValueError("decision vector has 8 entries")
        return cls(x[0], NedVector(*x[1:4]), NedVector(*x[4:7]), x[7])


def fold_into_domain(x: np.ndarray) -> np.ndarray:
    """Reflect ``tau_f`` at 0 and ``lambda_m`` at -1 so every point is admissible."""
    x = np.array(x, dtype=float)
    if x[0] <= 0:
        x[0] = -x[0] if x[0] < 0 else np.nextafter(0.0, 1.0)
    if x[7] <= -1:
        x[7] = -2.0 - x[7] if x[7] < -1 else np.nextafter(-1.0, 0.0)
    return x


def reference_curve(d: DecisionVector, scenario: Scenario) -> ReferenceCurve:
    ini, fin = scenario.boundary.initial, scenario.boundary.final
    # turn the short way round
    yaw_f = ini.yaw + wrap_angle(fin.yaw - ini.yaw)
    return build_curve(
        ini.position.as_array(), ini.velocity.as_array(), ini.acceleration.as_array(), d.jerk0.as_array(),
        fin.position.as_array(), fin.velocity.as_array(), fin.acceleration.as_array(), d.jerkf.as_array(),
        (ini.yaw, ini.yaw_rate, ini.yaw_accel, yaw_f, fin.yaw_rate, fin.yaw_accel),
        d.tau_f,
    )


def assemble(d: DecisionVector, scenario: Scenario, shape: str = "smooth"
             ) -> tuple[SampledTrajectory, ViolationReport]:
    """Curves from boundary data and ``d``, inverse dynamics, then cost."""
    try:
        curve = reference_curve(d, scenario)
        traj = sample_trajectory(curve, SpeedFactorProfile(d.lambda_m, shape), scenario)
    except DomainError as exc:
        raise InfeasibleDecision(str(exc), SENTINEL_COST + abs(d.tau_f)) from exc
    return traj, evaluate_cost(traj, scenario)


def initial_guess(scenario: Scenario) -> DecisionVector:
    """
    Straight-line distance over the cruise speed (mid surge interval), zero
    jerks, flat speed factor. If the surge interval admits no forward cruise
    the mean boundary speed (or 1 m/s) stands in, so the search can still run
    and report the surge violation.
    """
    dist = scenario.straight_line_distance()
    if dist == 0:
        raise DomainError("start coincides with the dock")
    cruise = scenario.limits.cruise_speed
    if cruise <= 0:
        b = scenario.boundary
        cruise = 0.5 * (b.initial.velocity.norm() + b.final.velocity.norm()) or 1.0
    zero = NedVector(0.0, 0.0, 0.0)
    return DecisionVector(dist / cruise, zero, zero, 0.0)


def simplex_steps(guess: DecisionVector, opts: SolverOptions) -> np.ndarray:
    return np.array([opts.tau_step * guess.tau_f] + [opts.jerk_step] * 6 + [opts.lambda_step])


@dataclass
class PlanResult:
    decision: DecisionVector
    trajectory: SampledTrajectory
    report: ViolationReport
    iterations: int
    evaluations: int
    wall_time: float
    converged: bool
    trace: list[float] = field(default_factory=list, repr=False)

    @property
    def feasible(self) -> bool:
        return self.report.feasible


def planning_scenario(scenario: Scenario) -> Scenario:
    """
    Scenario the optimizer sees, backed off by ``solver.margin``.

    Limit intervals shrink by the margin times their width on each side, zone
    radii and the dock's entry cone angle grow/shrink by the same fraction.
    Quadratic penalties settle slightly outside whatever bound they are given,
    so the back-off is what makes the final plan feasible against the real one.
    """
    m = scenario.solver.margin
    if m == 0:
        return scenario
    zones = tuple(NoFlyZone(z.center, z.radius * (1.0 + m)) for z in scenario.zones)
    dock = replace(scenario.dock, entry_cone_angle=scenario.dock.entry_cone_angle * (1.0 - m))
    return replace(scenario, limits=scenario.limits.tightened(m), zones=zones, dock=dock)


def objective(scenario: Scenario, shape: str = "smooth"):
    """Cost of a raw (possibly out-of-domain) decision array."""
    def cost(x: np.ndarray) -> float:
        d = DecisionVector.from_array(fold_into_domain(x))
        try:
            return assemble(d, scenario, shape)[1].total_cost
        except InfeasibleDecision as exc:
            return exc.cost
    return cost


def optimize(scenario: Scenario, options: SolverOptions | None = None, shape: str = "smooth",
             start: DecisionVector | None = None) -> PlanResult:
    """
    Minimize flight time plus penalties over the decision vector.

    The reported trajectory and violation report are recomputed against the
    original scenario, not the backed-off one used during the search.
    """
    opts = scenario.solver if options is None else options
    if options is not None:
        scenario = replace(scenario, solver=options)
    t0 = time.perf_counter()
    guess = initial_guess(scenario) if start is None else start
    res = simplex.minimize(objective(planning_scenario(scenario), shape), guess.as_array(),
                           simplex_steps(guess, opts), tol=opts.tolerance,
                           max_evaluations=opts.max_evaluations)
    if not math.isfinite(res.fun) or res.fun >= SENTINEL_COST:
        raise RuntimeError("optimizer never reached an assemblable decision")
    best = DecisionVector.from_array(fold_into_domain(res.x))
    traj, report = assemble(best, scenario, shape)
    wall = time.perf_counter() - t0
    log.info("plan: cost=%.4f t_f=%.3f evals=%d feasible=%s (%.2fs)",
             report.total_cost, report.flight_time, res.evaluations, report.feasible, wall)
    return PlanResult(best, traj, report, res.iterations, res.evaluations, wall, res.converged, res.trace)
