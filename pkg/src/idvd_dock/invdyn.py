"""
Speed factor, virtual-to-time mapping and inverse dynamics.

A reference curve fixes geometry as a function of the normalized virtual
argument ``s``. The speed factor ``lam(s) = d tau / dt`` (normalized so that
``ds/dt = lam(s) / tau_f``) fixes timing; every state and rate then follows
algebraically from the curve derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .model import (
    Attitude, BodyVelocity, CurrentField, DomainError, NedVector, Scenario,
    rotation_body_to_ned, wrap_angle,
)
from .refcurve import ReferenceCurve

SHAPES = ("smooth", "quadratic")


@dataclass(frozen=True)
class SpeedFactorProfile:
    """
    Speed factor with one shape parameter ``lambda_m``.

    Both shapes equal 1 at the ends and ``1 + lambda_m`` at mid-curve:

    * ``smooth``:    1 + 16 lambda_m s^2 (1 - s)^2   (zero slope at the ends)
    * ``quadratic``: 1 + 4 lambda_m s (1 - s)

    The smooth shape keeps boundary accelerations exact; the quadratic one
    perturbs them by ``4 lambda_m v / tau_f``.
    """

    lambda_m: float = 0.0
    shape: str = "smooth"

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise DomainError(f"unknown speed-factor shape {self.shape!r}")
        if not (math.isfinite(self.lambda_m) and self.lambda_m > -1.0):
            raise DomainError("lambda_m must be > -1 for a positive speed factor")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        q = s * (1.0 - s)
        if self.shape == "smooth":
            return 1.0 + 16.0 * self.lambda_m * q * q
        return 1.0 + 4.0 * self.lambda_m * q

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        q = s * (1.0 - s)
        if self.shape == "smooth":
            return 32.0 * self.lambda_m * q * (1.0 - 2.0 * s)
        return 4.0 * self.lambda_m * (1.0 - 2.0 * s)


def time_map(profile: SpeedFactorProfile, tau_f: float, node_count: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Node times on a uniform ``s`` grid.

    ``t(s) = tau_f * int_0^s d xi / lam(xi)``, by the composite trapezoidal rule.
    """
    if not (math.isfinite(tau_f) and tau_f > 0):
        raise DomainError("tau_f must be > 0")
    if node_count < 10:
        raise DomainError("node_count must be >= 10")
    s = np.linspace(0.0, 1.0, node_count)
    lam = profile(s)
    if np.any(lam <= 0):
        raise DomainError("speed factor must be positive on [0, 1]")
    inv = 1.0 / lam
    h = s[1] - s[0]
    t = np.concatenate([[0.0], np.cumsum(0.5 * h * (inv[1:] + inv[:-1]))]) * tau_f
    if np.all(lam == 1.0):
        t = s * tau_f
    return s, t


def _pitch(dx, dy, dz):
    return np.arctan2(-dz, np.hypot(dx, dy))


def pitch_from_slope(dx: float, dy: float, dz: float) -> float:
    """Flight-path angle of a direction (nose up positive, NED down negative)."""
    if dx == 0 and dy == 0:
        raise DomainError("vertical tangent: pitch undefined")
    return float(_pitch(dx, dy, dz))


def _body_axes(yaw, pitch):
    """Body x, y, z axes expressed in NED, each of shape (..., 3)."""
    cy, sy, cp, sp = np.cos(yaw), np.sin(yaw), np.cos(pitch), np.sin(pitch)
    ex = np.stack([cy * cp, sy * cp, -sp], axis=-1)
    ey = np.stack([-sy, cy, np.zeros_like(cy)], axis=-1)
    ez = np.stack([cy * sp, sy * sp, cp], axis=-1)
    return ex, ey, ez


def body_velocity_from_ground(ground: NedVector, att: Attitude, current: CurrentField) -> BodyVelocity:
    """Invert the kinematic relation: body velocity through the water."""
    rel = ground.as_array() - current.as_array()
    return BodyVelocity(*(rotation_body_to_ned(att).T @ rel))


def _course(speed_water, yaw, pitch, current: CurrentField):
    vn = speed_water * np.cos(pitch) * np.cos(yaw) + current.magnitude * math.cos(current.direction)
    ve = speed_water * np.cos(pitch) * np.sin(yaw) + current.magnitude * math.sin(current.direction)
    return vn, ve


def resultant_ground_speed(speed_water: float, att: Attitude, current: CurrentField) -> NedVector:
    """
    North, east and down components of the resultant ground velocity for a
    vehicle moving through the water at ``speed_water`` along ``att``.

    Down is ``-|V| sin(pitch)`` so that nose-up motion decreases depth.
    """
    vn, ve = _course(speed_water, att.yaw, att.pitch, current)
    return NedVector(float(vn), float(ve), -speed_water * math.sin(att.pitch))


def course_angle(speed_water: float, att: Attitude, current: CurrentField) -> float:
    vn, ve = _course(speed_water, att.yaw, att.pitch, current)
    if vn == 0 and ve == 0:
        raise DomainError("zero horizontal ground speed: course undefined")
    return math.atan2(ve, vn)


@dataclass(frozen=True)
class TrajectoryNode:
    t: float
    tau_bar: float
    position: NedVector
    yaw: float
    pitch: float
    ground_velocity: NedVector
    body: BodyVelocity
    yaw_rate: float
    pitch_rate: float
    course_angle: float
    flight_path_angle: float
    speed: float


@dataclass(frozen=True, eq=False)
class SampledTrajectory:
    """
    Column-oriented samples of the full vehicle state.

    Arrays share the node axis; vectors are (n, 3) in NED or body axes. Yaw is
    kept both continuous (``yaw_unwrapped``) and normalized (``yaw``).
    """

    t: np.ndarray
    tau_bar: np.ndarray
    position: np.ndarray
    yaw_unwrapped: np.ndarray
    pitch: np.ndarray
    ground_velocity: np.ndarray
    body: np.ndarray
    yaw_rate: np.ndarray
    pitch_rate: np.ndarray
    course: np.ndarray
    speed: np.ndarray

    @property
    def t_f(self) -> float:
        return float(self.t[-1])

    @property
    def yaw(self) -> np.ndarray:
        return wrap_angle(self.yaw_unwrapped)

    @property
    def flight_path_angle(self) -> np.ndarray:
        return self.pitch

    def __len__(self) -> int:
        return len(self.t)

    def path_length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.position, axis=0), axis=1)))

    @cached_property
    def nodes(self) -> tuple[TrajectoryNode, ...]:
        yaw = self.yaw
        return tuple(
            TrajectoryNode(
                t=float(self.t[i]), tau_bar=float(self.tau_bar[i]),
                position=NedVector.of(self.position[i]),
                yaw=float(yaw[i]), pitch=float(self.pitch[i]),
                ground_velocity=NedVector.of(self.ground_velocity[i]),
                body=BodyVelocity(*map(float, self.body[i])),
                yaw_rate=float(self.yaw_rate[i]), pitch_rate=float(self.pitch_rate[i]),
                course_angle=float(self.course[i]), flight_path_angle=float(self.pitch[i]),
                speed=float(self.speed[i]),
            )
            for i in range(len(self.t))
        )


def sample_trajectory(curve: ReferenceCurve, profile: SpeedFactorProfile, scenario: Scenario,
                      node_count: int | None = None) -> SampledTrajectory:
    """Recover states and rates at ``node_count`` nodes uniformly spaced in ``s``."""
    n = scenario.node_count if node_count is None else node_count
    s, t = time_map(profile, curve.tau_f, n)
    rate = profile(s) / curve.tau_f                    # ds/dt
    pos, yaw = curve.on_grid(n, 0)
    d1, dyaw = curve.on_grid(n, 1)
    ground = d1 * rate[:, None]

    horiz = np.hypot(d1[:, 0], d1[:, 1])
    bad = np.flatnonzero(horiz == 0)
    if bad.size:
        raise DomainError(f"vertical tangent at node {bad[0]}: pitch undefined")
    pitch = np.arctan2(-d1[:, 2], horiz)

    yaw_rate = dyaw * rate

    rel = ground - scenario.current.as_array()
    ex, ey, ez = _body_axes(yaw, pitch)
    body = np.stack([np.sum(ex * rel, axis=1), np.sum(ey * rel, axis=1), np.sum(ez * rel, axis=1)], axis=1)

    pitch_rate = np.gradient(pitch, t, edge_order=2)

    # Course from the resultant of water-relative motion and current, with the
    # water-relative motion described by its own magnitude and direction.
    speed_water = np.linalg.norm(rel, axis=1)
    dir_yaw = np.arctan2(rel[:, 1], rel[:, 0])
    dir_pitch = np.arctan2(-rel[:, 2], np.hypot(rel[:, 0], rel[:, 1]))
    vn, ve = _course(speed_water, dir_yaw, dir_pitch, scenario.current)
    bad = np.flatnonzero((vn == 0) & (ve == 0))
    if bad.size:
        raise DomainError(f"zero horizontal ground speed at node {bad[0]}: course undefined")
    course = np.arctan2(ve, vn)

    speed = rate * np.sqrt(np.sum(d1 * d1, axis=1))
    return SampledTrajectory(t, s, pos, yaw, pitch, ground, body, yaw_rate, pitch_rate, course, speed)
