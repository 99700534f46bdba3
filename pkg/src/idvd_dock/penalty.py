"""
Constraint violations and the scalar planning cost.

Every channel uses a squared hinge on the amount by which a node leaves its
admissible set; channels are averaged over time with trapezoidal weights and
added to the flight time with per-channel weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .invdyn import SampledTrajectory, TrajectoryNode
from .model import CHANNELS, DockSpec, NedVector, NoFlyZone, Scenario, wrap_angle

FEASIBILITY_TOL = 1e-9


def interval_violation(value, lo: float, hi: float):
    """Squared distance of ``value`` outside ``[lo, hi]``; zero inside."""
    value = np.asarray(value, dtype=float)
    out = np.maximum(0.0, value - hi) ** 2 + np.maximum(0.0, lo - value) ** 2
    return float(out) if out.ndim == 0 else out


def interval_excess(value, lo: float, hi: float):
    value = np.asarray(value, dtype=float)
    return np.maximum(0.0, np.maximum(value - hi, lo - value))


def _zone_penetration(points: np.ndarray, zones: Sequence[NoFlyZone]) -> np.ndarray:
    """(n, n_zones) penetration depths, zero outside."""
    if not zones:
        return np.zeros((len(points), 0))
    centers = np.array([z.center.as_array() for z in zones])
    radii = np.array([z.radius for z in zones])
    dist = np.linalg.norm(points[:, None, :] - centers[None, :, :], axis=2)
    return np.maximum(0.0, radii[None, :] - dist)


def nofly_violation(position: NedVector, zones: Iterable[NoFlyZone]) -> float:
    """Sum over zones of squared penetration depth."""
    pen = _zone_penetration(position.as_array()[None, :], list(zones))
    return float(np.sum(pen ** 2))


def zone_clearance(points: np.ndarray, zones: Sequence[NoFlyZone]) -> np.ndarray:
    """Signed distance of each point to the nearest zone surface (negative inside)."""
    if not zones:
        return np.full(len(points), np.inf)
    centers = np.array([z.center.as_array() for z in zones])
    radii = np.array([z.radius for z in zones])
    dist = np.linalg.norm(points[:, None, :] - centers[None, :, :], axis=2)
    return np.min(dist - radii[None, :], axis=1)


def _approach_excess(position, course, pitch, dock: DockSpec, terminal_window: float):
    near = np.linalg.norm(position - dock.position.as_array(), axis=-1) <= terminal_window
    half = dock.half_angle
    h = np.where(near, np.maximum(0.0, np.abs(wrap_angle(course - dock.yaw)) - half), 0.0)
    v = np.where(near, np.maximum(0.0, np.abs(wrap_angle(pitch - dock.pitch)) - half), 0.0)
    return h, v


def approach_violation(node: TrajectoryNode, dock: DockSpec, terminal_window: float) -> tuple[float, float]:
    """(horizontal, vertical) squared excess of the approach angles beyond the cone half-angle."""
    h, v = _approach_excess(node.position.as_array(), node.course_angle, node.flight_path_angle,
                            dock, terminal_window)
    return float(h) ** 2, float(v) ** 2


@dataclass(frozen=True)
class ChannelViolation:
    peak: float     # largest pointwise excess, natural units
    mean: float     # time-averaged squared excess


@dataclass(frozen=True)
class ViolationReport:
    channels: Mapping[str, ChannelViolation]
    flight_time: float
    total_cost: float

    @property
    def feasible(self) -> bool:
        return all(c.peak < FEASIBILITY_TOL for c in self.channels.values())

    def violated(self, tol: float = FEASIBILITY_TOL) -> list[str]:
        return [name for name, c in self.channels.items() if c.peak >= tol]

    def penalty(self) -> float:
        return self.total_cost - self.flight_time

    def as_record(self) -> dict[str, float]:
        rec: dict[str, float] = {}
        for name in CHANNELS:
            c = self.channels[name]
            rec[f"{name}_peak"] = c.peak
            rec[f"{name}_mean"] = c.mean
        return rec


def trapezoid_weights(t: np.ndarray) -> np.ndarray:
    """Weights that turn node values into their time average over [t0, tf]."""
    dt = np.diff(t)
    w = np.zeros_like(t)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w / (t[-1] - t[0])


def channel_excess(traj: SampledTrajectory, scenario: Scenario) -> dict[str, np.ndarray]:
    """Per-node excess (natural units) for each of the eight channels."""
    lim = scenario.limits
    h, v = _approach_excess(traj.position, traj.course, traj.pitch, scenario.dock, scenario.terminal_window)
    pen = _zone_penetration(traj.position, scenario.zones)
    return {
        "depth": interval_excess(traj.position[:, 2], *lim.depth),
        "surge": interval_excess(traj.body[:, 0], *lim.surge),
        "sway": interval_excess(traj.body[:, 1], *lim.sway),
        "pitch_rate": interval_excess(traj.pitch_rate, *lim.pitch_rate),
        "yaw_rate": interval_excess(traj.yaw_rate, *lim.yaw_rate),
        "approach_horizontal": h,
        "approach_vertical": v,
        # several overlapping zones add up; report the deepest single penetration
        "nofly": np.max(pen, axis=1) if pen.shape[1] else np.zeros(len(traj)),
        "_nofly_sq": np.sum(pen ** 2, axis=1),
    }


def evaluate_cost(traj: SampledTrajectory, scenario: Scenario) -> ViolationReport:
    """Flight time plus weighted, time-averaged squared violations."""
    ex = channel_excess(traj, scenario)
    nofly_sq = ex.pop("_nofly_sq")
    w = trapezoid_weights(traj.t)
    weights = scenario.weights
    channels = {}
    total = traj.t_f
    for name in CHANNELS:
        sq = nofly_sq if name == "nofly" else ex[name] ** 2
        mean = float(w @ sq)
        channels[name] = ChannelViolation(float(np.max(ex[name])), mean)
        total += getattr(weights, name) * mean
    return ViolationReport(channels, traj.t_f, total)
