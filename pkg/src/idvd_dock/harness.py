"""
Monte Carlo robustness study.

Each run perturbs the nominal scenario with its own counter-based RNG stream
(Philox keyed by ``base_seed + run_index``), plans it independently, and
records flight time, path length, average speed and terminal errors. Runs
share nothing, so they can be farmed out to worker processes; results are
always returned in run order.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .model import (
    CurrentField, NedVector, Scenario, ScenarioError, end_state, wrap_angle,
)
from .planner import optimize

log = logging.getLogger(__name__)

MAX_REDRAWS = 10


@dataclass(frozen=True)
class Gaussian:
    """Zero-mean perturbation added to the nominal value."""
    sigma: float

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("sigma must be >= 0")

    def draw(self, rng: np.random.Generator, nominal: float) -> float:
        return nominal + self.sigma * rng.standard_normal()


@dataclass(frozen=True)
class Uniform:
    """Replaces the nominal value with a draw from [lo, hi)."""
    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi >= self.lo:
            raise ValueError("need hi >= lo")

    def draw(self, rng: np.random.Generator, nominal: float) -> float:
        return float(rng.uniform(self.lo, self.hi))


# Draw order is fixed so a given seed always maps to the same scenario.
PARAMETERS = (
    "init_north", "init_east", "init_depth", "init_yaw",
    "dock_north", "dock_east", "dock_depth", "dock_yaw",
    "current_magnitude", "current_direction",
)


@dataclass(frozen=True)
class PerturbationSpec:
    channels: Mapping[str, Gaussian | Uniform] = field(default_factory=dict)

    def __post_init__(self):
        unknown = set(self.channels) - set(PARAMETERS)
        if unknown:
            raise ValueError(f"unknown perturbation parameters {sorted(unknown)}")

    def is_null(self) -> bool:
        return all(isinstance(d, Gaussian) and d.sigma == 0 for d in self.channels.values())


def experiment_spec(experiment: str | int) -> PerturbationSpec:
    """
    Perturbation sets of the three robustness experiments.

    ``standard`` is the unperturbed condition. Experiment 2 adds current
    variation to experiment 1; experiment 3 switches the three headings
    (start, current, dock) to full-circle uniform draws on top of experiment 2.
    """
    exp = str(experiment)
    if exp == "standard":
        return PerturbationSpec({})
    deg = math.radians
    ch: dict[str, Gaussian | Uniform] = {
        "init_north": Gaussian(10.0), "init_east": Gaussian(10.0),
        "dock_north": Gaussian(10.0), "dock_east": Gaussian(10.0),
        "init_depth": Gaussian(2.0), "dock_depth": Gaussian(2.0),
        "init_yaw": Gaussian(deg(45.0)), "dock_yaw": Gaussian(deg(45.0)),
    }
    if exp == "1":
        return PerturbationSpec(ch)
    ch["current_magnitude"] = Gaussian(0.3)
    ch["current_direction"] = Gaussian(deg(90.0))
    if exp == "2":
        return PerturbationSpec(ch)
    if exp == "3":
        full = Uniform(0.0, 2.0 * math.pi)
        ch.update(init_yaw=full, current_direction=full, dock_yaw=full)
        return PerturbationSpec(ch)
    raise ValueError(f"unknown experiment {experiment!r}; expected 1, 2, 3 or standard")


def _nominal_values(sc: Scenario) -> dict[str, float]:
    p0, pd = sc.start, sc.dock.position
    return {
        "init_north": p0.north, "init_east": p0.east, "init_depth": p0.down,
        "init_yaw": sc.boundary.initial.yaw,
        "dock_north": pd.north, "dock_east": pd.east, "dock_depth": pd.down,
        "dock_yaw": sc.dock.yaw,
        "current_magnitude": sc.current.magnitude, "current_direction": sc.current.direction,
    }


def _rebuild(sc: Scenario, v: Mapping[str, float]) -> Scenario:
    ini, fin = sc.boundary.initial, sc.boundary.final

    def moved(e, position, yaw, pitch):
        speed = e.speed if e.speed is not None else e.velocity.norm()
        return end_state(position, yaw, pitch, speed, acceleration=e.acceleration,
                         yaw_rate=e.yaw_rate, yaw_accel=e.yaw_accel)

    start = NedVector(v["init_north"], v["init_east"], v["init_depth"])
    dock_pos = NedVector(v["dock_north"], v["dock_east"], v["dock_depth"])
    dock = replace(sc.dock, position=dock_pos, yaw=v["dock_yaw"])
    boundary = replace(sc.boundary,
                       initial=moved(ini, start, v["init_yaw"], ini.pitch),
                       final=moved(fin, dock_pos, v["dock_yaw"], dock.pitch))
    current = CurrentField(max(0.0, v["current_magnitude"]), v["current_direction"])
    out = replace(sc, boundary=boundary, dock=dock, current=current)
    if out.straight_line_distance() == 0:
        raise ScenarioError("perturbed start coincides with the dock")
    return out


def perturb(scenario: Scenario, spec: PerturbationSpec, seed: int) -> Scenario:
    """
    Draw one perturbed scenario.

    Gaussian channels add to the nominal value, uniform channels replace it.
    Negative current magnitudes are clamped to zero. Draws producing an invalid
    scenario are repeated up to ``MAX_REDRAWS`` times from the same stream.
    """
    if spec.is_null():
        return scenario
    rng = np.random.Generator(np.random.Philox(seed))
    nominal = _nominal_values(scenario)
    last: Exception | None = None
    for _ in range(MAX_REDRAWS):
        values = dict(nominal)
        for name in PARAMETERS:
            if name in spec.channels:
                values[name] = spec.channels[name].draw(rng, nominal[name])
        try:
            return _rebuild(scenario, values)
        except (ScenarioError, ValueError) as exc:
            last = exc
    raise ScenarioError(f"no valid perturbed scenario after {MAX_REDRAWS} draws: {last}")


@dataclass(frozen=True)
class RunMetrics:
    run: int
    seed: int
    flight_time: float
    path_length: float
    average_speed: float
    feasible: bool
    final_position_error: float
    final_heading_error: float
    wall_time: float
    straight_line: float
    violations: Mapping[str, float] = field(default_factory=dict)
    error: str = ""


METRICS = ("flight_time", "path_length", "average_speed",
           "final_position_error", "final_heading_error", "wall_time")


def run_one(nominal: Scenario, spec: PerturbationSpec, run: int, base_seed: int) -> RunMetrics:
    """Plan one perturbed scenario; failures come back as infeasible rows."""
    seed = base_seed + run
    t0 = time.perf_counter()
    try:
        sc = perturb(nominal, spec, seed)
        res = optimize(sc)
    except Exception as exc:  # a failed run is data, not a reason to stop the study
        log.warning("run %d (seed %d) failed: %s", run, seed, exc)
        nan = math.nan
        return RunMetrics(run, seed, nan, nan, nan, False, nan, nan,
                          time.perf_counter() - t0, nan, {}, f"{type(exc).__name__}: {exc}")
    traj = res.trajectory
    length = traj.path_length()
    pos_err = float(np.linalg.norm(traj.position[-1] - sc.dock.position.as_array()))
    yaw_err = abs(float(wrap_angle(traj.yaw_unwrapped[-1] - sc.dock.yaw)))
    return RunMetrics(run, seed, traj.t_f, length, length / traj.t_f, res.feasible, pos_err, yaw_err,
                      res.wall_time, sc.straight_line_distance(), res.report.as_record())


@dataclass(frozen=True)
class MetricStats:
    mean: float
    std: float
    min: float
    max: float


@dataclass(frozen=True)
class StudySummary:
    label: str
    n_runs: int
    n_failed: int
    stats: Mapping[str, MetricStats]
    violation_percentage: float
    rmsd_final_position: float

    def as_dict(self) -> dict:
        return {
            "label": self.label, "n_runs": self.n_runs, "n_failed": self.n_failed,
            "violation_percentage": self.violation_percentage,
            "rmsd_final_position": self.rmsd_final_position,
            "metrics": {k: asdict(v) for k, v in self.stats.items()},
        }


def _stats(values: Sequence[float]) -> MetricStats:
    x = np.array([v for v in values if math.isfinite(v)], dtype=float)
    if x.size == 0:
        return MetricStats(math.nan, math.nan, math.nan, math.nan)
    std = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    return MetricStats(float(np.mean(x)), std, float(np.min(x)), float(np.max(x)))


def summarize(rows: Sequence[RunMetrics], label: str) -> StudySummary:
    """
    Aggregate per-run rows.

    Statistics skip failed runs (NaN metrics); std is the sample standard
    deviation. ``violation_percentage`` counts every run that is not feasible,
    failed runs included. RMSD is over final-position errors against each
    run's own (perturbed) dock position.
    """
    n = len(rows)
    stats = {m: _stats([getattr(r, m) for r in rows]) for m in METRICS}
    errs = np.array([r.final_position_error for r in rows if math.isfinite(r.final_position_error)])
    rmsd = float(np.sqrt(np.mean(errs ** 2))) if errs.size else math.nan
    infeasible = sum(1 for r in rows if not r.feasible)
    return StudySummary(label, n, sum(1 for r in rows if r.error), stats,
                        100.0 * infeasible / n if n else math.nan, rmsd)


def _run_job(args):
    return run_one(*args)


def run_study(nominal: Scenario, spec: PerturbationSpec, n_runs: int, base_seed: int = 0, *,
              label: str = "study", jobs: int = 1) -> tuple[list[RunMetrics], StudySummary]:
    """Plan ``n_runs`` perturbed scenarios (optionally in ``jobs`` processes) and summarize."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    tasks = [(nominal, spec, k, base_seed) for k in range(n_runs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_job, tasks, chunksize=max(1, n_runs // (4 * jobs))))
    else:
        rows = [_run_job(t) for t in tasks]
    return rows, summarize(rows, label)


@dataclass(frozen=True)
class Comparison:
    labels: tuple[str, ...]                          # standard first
    means: Mapping[str, tuple[float, ...]]           # metric -> mean per label
    relative: Mapping[str, tuple[float, ...]]        # metric -> (exp - std)/|std| per experiment

    def rows(self) -> list[list]:
        out = [["metric", *self.labels]]
        for m in self.means:
            out.append([m, *self.means[m]])
        return out


COMPARED = ("flight_time", "path_length", "average_speed")


def compare_to_standard(standard: StudySummary, experiments: Sequence[StudySummary],
                        metrics: Sequence[str] = COMPARED) -> Comparison:
    """Relative difference of each experiment's metric means from the standard condition."""
    for s in (standard, *experiments):
        if set(s.stats) != set(standard.stats):
            raise ValueError(f"summary {s.label!r} has a different metric set")
    missing = set(metrics) - set(standard.stats)
    if missing:
        raise ValueError(f"unknown metrics {sorted(missing)}")
    means, rel = {}, {}
    for m in metrics:
        ref = standard.stats[m].mean
        means[m] = (ref, *(e.stats[m].mean for e in experiments))
        rel[m] = tuple((e.stats[m].mean - ref) / abs(ref) for e in experiments)
    return Comparison((standard.label, *(e.label for e in experiments)), means, rel)


def quantitatively_similar(cmp: Comparison, metric: str = "flight_time", threshold: float = 0.25) -> bool:
    return all(abs(r) <= threshold for r in cmp.relative[metric])
