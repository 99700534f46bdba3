"""
Domain types, scenario configuration and frame conversions.

All quantities are SI with angles in radians. Scenario files (YAML) accept
degrees through keys carrying a ``_deg`` suffix; the plain key means radians.

Frames
------
NED : north-east-down, down is positive depth.
Body : surge forward, sway starboard, heave down. Roll is not modelled.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import yaml


class DomainError(ValueError):
    """Input lies outside the mathematical domain of an operation."""


class ScenarioError(ValueError):
    """Scenario content violates an invariant."""


class ScenarioParseError(ScenarioError):
    """Scenario file could not be read or parsed."""


def wrap_angle(angle):
    """Map an angle (or array of angles) to (-pi, pi]."""
    wrapped = math.pi - np.mod(math.pi - np.asarray(angle, dtype=float), 2.0 * math.pi)
    wrapped = np.where(wrapped <= -math.pi, wrapped + 2.0 * math.pi, wrapped)
    return float(wrapped) if wrapped.ndim == 0 else wrapped


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


# --------------------------------------------------------------------------- #
# Value types
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class NedVector:
    north: float
    east: float
    down: float

    def __post_init__(self):
        if not _finite(self.north, self.east, self.down):
            raise DomainError(f"non-finite NED component in {self}")

    @classmethod
    def of(cls, values: Sequence[float]) -> "NedVector":
        n, e, d = (float(v) for v in values)
        return cls(n, e, d)

    def as_array(self) -> np.ndarray:
        return np.array([self.north, self.east, self.down])

    def norm(self) -> float:
        return math.sqrt(self.north ** 2 + self.east ** 2 + self.down ** 2)

    def __sub__(self, other: "NedVector") -> "NedVector":
        return NedVector(self.north - other.north, self.east - other.east, self.down - other.down)

    def __add__(self, other: "NedVector") -> "NedVector":
        return NedVector(self.north + other.north, self.east + other.east, self.down + other.down)


ZERO = NedVector(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Attitude:
    """Yaw and pitch; yaw is normalized to (-pi, pi] on construction."""

    yaw: float
    pitch: float

    def __post_init__(self):
        if not _finite(self.yaw, self.pitch):
            raise DomainError("non-finite attitude")
        if not -math.pi / 2 < self.pitch < math.pi / 2:
            raise DomainError(f"pitch {self.pitch} outside (-pi/2, pi/2): roll-free rotation is singular")
        object.__setattr__(self, "yaw", float(wrap_angle(self.yaw)))


@dataclass(frozen=True)
class BodyVelocity:
    surge: float
    sway: float
    heave: float

    def __post_init__(self):
        if not _finite(self.surge, self.sway, self.heave):
            raise DomainError("non-finite body velocity")

    def as_array(self) -> np.ndarray:
        return np.array([self.surge, self.sway, self.heave])


@dataclass(frozen=True)
class CurrentField:
    """Horizontal, uniform, steady current."""

    magnitude: float = 0.0
    direction: float = 0.0

    def __post_init__(self):
        if not _finite(self.magnitude, self.direction):
            raise ScenarioError("current: non-finite value")
        if self.magnitude < 0:
            raise ScenarioError("current: magnitude must be >= 0")

    @property
    def north(self) -> float:
        return self.magnitude * math.cos(self.direction)

    @property
    def east(self) -> float:
        return self.magnitude * math.sin(self.direction)

    def as_array(self) -> np.ndarray:
        return np.array([self.north, self.east, 0.0])


# How far a stated entry-cone angle may exceed the one implied by the cone geometry.
CONE_ANGLE_TOL = math.radians(1.0)


@dataclass(frozen=True)
class DockSpec:
    """
    Funnel dock pose and geometry.

    ``entry_cone_angle`` is the full cone angle; approach must stay within half
    of it. When omitted it is derived as ``2*atan((R - r)/h)``. A stated angle
    may be narrower than the geometric one (a stricter approach) but not wider.
    """

    position: NedVector
    yaw: float
    pitch: float
    cone_length: float
    outer_radius: float
    inner_radius: float
    entry_cone_angle: float | None = None

    def __post_init__(self):
        if not _finite(self.yaw, self.pitch, self.cone_length, self.outer_radius, self.inner_radius):
            raise ScenarioError("dock: non-finite value")
        if self.cone_length <= 0:
            raise ScenarioError("dock: cone_length must be > 0")
        if not self.outer_radius > self.inner_radius > 0:
            raise ScenarioError("dock: need outer_radius > inner_radius > 0")
        if not -math.pi / 2 < self.pitch < math.pi / 2:
            raise ScenarioError("dock: pitch must lie in (-90, 90) deg")
        implied = 2.0 * math.atan((self.outer_radius - self.inner_radius) / self.cone_length)
        if self.entry_cone_angle is None:
            object.__setattr__(self, "entry_cone_angle", implied)
        else:
            if not 0 < self.entry_cone_angle < math.pi:
                raise ScenarioError("dock: entry_cone_angle must lie in (0, 180) deg")
            if self.entry_cone_angle > implied + CONE_ANGLE_TOL:
                raise ScenarioError(
                    f"dock: entry_cone_angle {math.degrees(self.entry_cone_angle):.3f} deg inconsistent "
                    f"with cone geometry ({math.degrees(implied):.3f} deg)")

    @property
    def half_angle(self) -> float:
        return 0.5 * self.entry_cone_angle


@dataclass(frozen=True)
class NoFlyZone:
    center: NedVector
    radius: float

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ScenarioError("zone: radius must be > 0")


@dataclass(frozen=True)
class VehicleLimits:
    """Closed intervals; rates in rad/s. Defaults are REMUS-class placeholders."""

    depth: tuple[float, float] = (0.0, 100.0)
    surge: tuple[float, float] = (0.0, 2.5)
    sway: tuple[float, float] = (-0.5, 0.5)
    pitch_rate: tuple[float, float] = (-0.2, 0.2)
    yaw_rate: tuple[float, float] = (-0.3, 0.3)

    def __post_init__(self):
        for name in ("depth", "surge", "sway", "pitch_rate", "yaw_rate"):
            lo, hi = getattr(self, name)
            lo, hi = float(lo), float(hi)
            if not _finite(lo, hi):
                raise ScenarioError(f"limits.{name}: non-finite bound")
            if not lo < hi:
                raise ScenarioError(f"limits.{name}: need min < max, got [{lo}, {hi}]")
            object.__setattr__(self, name, (lo, hi))

    @property
    def cruise_speed(self) -> float:
        return 0.5 * (self.surge[0] + self.surge[1])

    def tightened(self, fraction: float) -> "VehicleLimits":
        """Shrink every interval by ``fraction`` of its width on each side."""
        def shrink(iv):
            pad = fraction * (iv[1] - iv[0])
            return iv[0] + pad, iv[1] - pad
        return VehicleLimits(**{k: shrink(getattr(self, k)) for k in CHANNEL_LIMITS})


CHANNEL_LIMITS = ("depth", "surge", "sway", "pitch_rate", "yaw_rate")
CHANNELS = CHANNEL_LIMITS + ("approach_horizontal", "approach_vertical", "nofly")


@dataclass(frozen=True)
class Weights:
    depth: float = 100.0
    surge: float = 100.0
    sway: float = 100.0
    pitch_rate: float = 100.0
    yaw_rate: float = 100.0
    approach_horizontal: float = 100.0
    approach_vertical: float = 100.0
    nofly: float = 100.0

    def __post_init__(self):
        for name in CHANNELS:
            w = float(getattr(self, name))
            if not (math.isfinite(w) and w >= 0):
                raise ScenarioError(f"weights.{name} must be finite and >= 0")
            object.__setattr__(self, name, w)

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in CHANNELS}


@dataclass(frozen=True)
class EndState:
    """
    Pose and derivatives at one end of the trajectory.

    ``speed`` is kept when the velocity was derived from it (ground speed along
    the yaw/pitch direction) so perturbed poses can rebuild a matching velocity.
    """

    position: NedVector
    velocity: NedVector
    acceleration: NedVector = ZERO
    yaw: float = 0.0
    pitch: float = 0.0
    yaw_rate: float = 0.0
    yaw_accel: float = 0.0
    speed: float | None = None

    def __post_init__(self):
        if not _finite(self.yaw, self.pitch, self.yaw_rate, self.yaw_accel):
            raise ScenarioError("boundary: non-finite angle value")
        if not -math.pi / 2 < self.pitch < math.pi / 2:
            raise ScenarioError("boundary: pitch must lie in (-90, 90) deg")
        if self.speed is not None and not (math.isfinite(self.speed) and self.speed >= 0):
            raise ScenarioError("boundary: speed must be finite and >= 0")


def heading_vector(yaw: float, pitch: float) -> NedVector:
    """Unit vector along the body x-axis."""
    return NedVector(math.cos(yaw) * math.cos(pitch), math.sin(yaw) * math.cos(pitch), -math.sin(pitch))


def end_state(position: NedVector, yaw: float, pitch: float, speed: float, *,
              acceleration: NedVector = ZERO, yaw_rate: float = 0.0, yaw_accel: float = 0.0) -> EndState:
    """End state moving over ground at ``speed`` along the heading direction."""
    h = heading_vector(yaw, pitch)
    velocity = NedVector(speed * h.north, speed * h.east, speed * h.down)
    return EndState(position, velocity, acceleration, yaw, pitch, yaw_rate, yaw_accel, speed)


@dataclass(frozen=True)
class BoundaryConditions:
    initial: EndState
    final: EndState


@dataclass(frozen=True)
class SolverOptions:
    max_evaluations: int = 5000
    tolerance: float = 1e-6
    tau_step: float = 0.10          # fraction of the initial tau_f
    jerk_step: float = 0.05         # m/s^3
    lambda_step: float = 0.2
    margin: float = 0.0             # limit back-off used while optimizing, fraction of interval width

    def __post_init__(self):
        if int(self.max_evaluations) < 1:
            raise ScenarioError("solver.max_evaluations must be >= 1")
        object.__setattr__(self, "max_evaluations", int(self.max_evaluations))
        if not self.tolerance > 0:
            raise ScenarioError("solver.tolerance must be > 0")
        if min(self.tau_step, self.jerk_step, self.lambda_step) <= 0:
            raise ScenarioError("solver: simplex steps must be > 0")
        if not 0 <= self.margin < 0.5:
            raise ScenarioError("solver.margin must lie in [0, 0.5)")


@dataclass(frozen=True)
class Scenario:
    boundary: BoundaryConditions
    dock: DockSpec
    current: CurrentField = CurrentField()
    zones: tuple[NoFlyZone, ...] = ()
    limits: VehicleLimits = VehicleLimits()
    weights: Weights = Weights()
    node_count: int = 101
    terminal_window: float = 20.0
    solver: SolverOptions = SolverOptions()

    def __post_init__(self):
        object.__setattr__(self, "zones", tuple(self.zones))
        if int(self.node_count) != self.node_count or self.node_count < 10:
            raise ScenarioError("node_count must be an integer >= 10")
        object.__setattr__(self, "node_count", int(self.node_count))
        if not (math.isfinite(self.terminal_window) and self.terminal_window > 0):
            raise ScenarioError("terminal_window must be > 0")
        fin, dock = self.boundary.final, self.dock
        if fin.position != dock.position:
            raise ScenarioError("boundary.final position must equal the dock position")
        if wrap_angle(fin.yaw - dock.yaw) != 0.0 or fin.pitch != dock.pitch:
            raise ScenarioError("boundary.final yaw/pitch must equal the dock orientation")

    @property
    def start(self) -> NedVector:
        return self.boundary.initial.position

    def straight_line_distance(self) -> float:
        return (self.dock.position - self.start).norm()


# --------------------------------------------------------------------------- #
# Frame conversions
# --------------------------------------------------------------------------- #

def rotation_body_to_ned(att: Attitude) -> np.ndarray:
    """Roll-free body-to-NED rotation (yaw about down, then pitch)."""
    if not -math.pi / 2 < att.pitch < math.pi / 2:
        raise DomainError("pitch at +-pi/2: rotation singular")
    cy, sy = math.cos(att.yaw), math.sin(att.yaw)
    cp, sp = math.cos(att.pitch), math.sin(att.pitch)
    return np.array([
        [cy * cp, -sy, cy * sp],
        [sy * cp, cy, sy * sp],
        [-sp, 0.0, cp],
    ])


def ground_velocity(body: BodyVelocity, att: Attitude, current: CurrentField) -> NedVector:
    """Rate of change of NED position: rotated water-relative velocity plus current."""
    v = rotation_body_to_ned(att) @ body.as_array() + current.as_array()
    return NedVector.of(v)


# --------------------------------------------------------------------------- #
# Scenario files
# --------------------------------------------------------------------------- #

def _angle(d: Mapping[str, Any], key: str, default: float | None = None) -> float:
    """Read ``key`` in radians or ``key_deg`` in degrees."""
    if key in d and f"{key}_deg" in d:
        raise ScenarioError(f"both '{key}' and '{key}_deg' given")
    if f"{key}_deg" in d:
        return math.radians(float(d[f"{key}_deg"]))
    if key in d:
        return float(d[key])
    if default is None:
        raise ScenarioError(f"missing required key '{key}' (or '{key}_deg')")
    return default


def _interval(d: Mapping[str, Any], key: str, default: tuple[float, float]) -> tuple[float, float]:
    if f"{key}_deg" in d:
        lo, hi = d[f"{key}_deg"]
        return math.radians(float(lo)), math.radians(float(hi))
    if key in d:
        lo, hi = d[key]
        return float(lo), float(hi)
    return default


def _vec(d: Mapping[str, Any], key: str, default: NedVector | None = None) -> NedVector:
    if key not in d:
        if default is None:
            raise ScenarioError(f"missing required key '{key}'")
        return default
    v = d[key]
    if not isinstance(v, (list, tuple)) or len(v) != 3:
        raise ScenarioError(f"'{key}' must be a list of three numbers")
    try:
        return NedVector.of(v)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"'{key}': {exc}") from exc


def _end_state(d: Mapping[str, Any], position: NedVector, yaw: float, pitch: float) -> EndState:
    speed = d.get("speed")
    accel = _vec(d, "acceleration", ZERO)
    yaw_rate = _angle(d, "yaw_rate", 0.0)
    yaw_accel = _angle(d, "yaw_accel", 0.0)
    if "velocity" in d:
        return EndState(position, _vec(d, "velocity"), accel, yaw, pitch, yaw_rate, yaw_accel,
                        None if speed is None else float(speed))
    if speed is None:
        raise ScenarioError("boundary end needs 'speed' or 'velocity'")
    return end_state(position, yaw, pitch, float(speed), acceleration=accel,
                     yaw_rate=yaw_rate, yaw_accel=yaw_accel)


def scenario_from_dict(data: Mapping[str, Any]) -> Scenario:
    """Build and validate a Scenario from the nested mapping of a scenario file."""
    try:
        b = data["boundary"]
        dk = data["dock"]
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"missing required section {exc}") from exc
    try:
        dock = DockSpec(
            position=_vec(dk, "position"),
            yaw=_angle(dk, "yaw"),
            pitch=_angle(dk, "pitch", 0.0),
            cone_length=float(dk["cone_length"]),
            outer_radius=float(dk["outer_radius"]),
            inner_radius=float(dk["inner_radius"]),
            entry_cone_angle=(_angle(dk, "entry_cone_angle")
                              if "entry_cone_angle" in dk or "entry_cone_angle_deg" in dk else None),
        )
        ini = b["initial"]
        initial = _end_state(ini, _vec(ini, "position"), _angle(ini, "yaw"), _angle(ini, "pitch", 0.0))
        fin = b.get("final", {}) or {}
        for key in ("position", "yaw", "yaw_deg", "pitch", "pitch_deg"):
            if key in fin:
                raise ScenarioError(f"boundary.final.{key} is taken from the dock; remove it")
        final = _end_state(fin, dock.position, dock.yaw, dock.pitch)

        cur = data.get("current", {}) or {}
        current = CurrentField(float(cur.get("magnitude", 0.0)), _angle(cur, "direction", 0.0))
        zones = tuple(NoFlyZone(_vec(z, "center"), float(z["radius"])) for z in data.get("zones", []) or [])

        lim = data.get("limits", {}) or {}
        dl = VehicleLimits()
        limits = VehicleLimits(
            depth=_interval(lim, "depth", dl.depth),
            surge=_interval(lim, "surge", dl.surge),
            sway=_interval(lim, "sway", dl.sway),
            pitch_rate=_interval(lim, "pitch_rate", dl.pitch_rate),
            yaw_rate=_interval(lim, "yaw_rate", dl.yaw_rate),
        )
        w = data.get("weights", {}) or {}
        unknown = set(w) - set(CHANNELS)
        if unknown:
            raise ScenarioError(f"unknown weight keys {sorted(unknown)}")
        weights = Weights(**{k: float(v) for k, v in w.items()})

        s = dict(data.get("solver", {}) or {})
        node_count = s.pop("node_count", 101)
        terminal_window = float(data.get("terminal_window", s.pop("terminal_window", 20.0)))
        solver = SolverOptions(**s)
        return Scenario(BoundaryConditions(initial, final), dock, current, zones, limits, weights,
                        node_count, terminal_window, solver)
    except KeyError as exc:
        raise ScenarioError(f"missing required key {exc}") from exc
    except TypeError as exc:
        raise ScenarioError(str(exc)) from exc


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ScenarioParseError(f"{path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ScenarioParseError(f"{path}: malformed YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioParseError(f"{path}: top level must be a mapping")
    return scenario_from_dict(data)


def _end_dict(e: EndState, with_pose: bool) -> dict[str, Any]:
    d: dict[str, Any] = {}
    if with_pose:
        d["position"] = list(asdict(e.position).values())
        d["yaw"] = e.yaw
        d["pitch"] = e.pitch
    d["velocity"] = list(asdict(e.velocity).values())
    if e.speed is not None:
        d["speed"] = e.speed
    d["acceleration"] = list(asdict(e.acceleration).values())
    d["yaw_rate"] = e.yaw_rate
    d["yaw_accel"] = e.yaw_accel
    return d


def scenario_to_dict(sc: Scenario) -> dict[str, Any]:
    """Nested mapping with radian-valued keys; inverse of ``scenario_from_dict``."""
    dock = sc.dock
    return {
        "boundary": {
            "initial": _end_dict(sc.boundary.initial, True),
            "final": _end_dict(sc.boundary.final, False),
        },
        "dock": {
            "position": list(asdict(dock.position).values()),
            "yaw": dock.yaw,
            "pitch": dock.pitch,
            "cone_length": dock.cone_length,
            "outer_radius": dock.outer_radius,
            "inner_radius": dock.inner_radius,
            "entry_cone_angle": dock.entry_cone_angle,
        },
        "current": {"magnitude": sc.current.magnitude, "direction": sc.current.direction},
        "zones": [{"center": list(asdict(z.center).values()), "radius": z.radius} for z in sc.zones],
        "limits": {k: list(getattr(sc.limits, k)) for k in CHANNEL_LIMITS},
        "weights": sc.weights.as_dict(),
        "terminal_window": sc.terminal_window,
        "solver": {"node_count": sc.node_count, **asdict(sc.solver)},
    }


def save_scenario(sc: Scenario, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(scenario_to_dict(sc), sort_keys=False))


def with_solver(sc: Scenario, **changes: Any) -> Scenario:
    """Copy of ``sc`` with solver options (and ``node_count``) overridden."""
    node_count = changes.pop("node_count", sc.node_count)
    return replace(sc, node_count=node_count, solver=replace(sc.solver, **changes))
