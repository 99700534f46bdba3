"""Plot-ready output files: trajectory/violation/run CSVs and YAML summaries."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
import yaml

from .harness import METRICS, RunMetrics
from .invdyn import SampledTrajectory
from .model import CHANNELS
from .penalty import ViolationReport

TRAJECTORY_COLUMNS = ("t", "x", "y", "z", "psi", "theta", "u", "v", "w",
                      "psi_dot", "theta_dot", "chi", "speed")
ANGLE_COLUMNS = ("psi", "theta", "psi_dot", "theta_dot", "chi")

VIOLATION_COLUMNS = tuple(f"{c}_{k}" for c in CHANNELS for k in ("peak", "mean"))
RUN_COLUMNS = ("run", "seed", "flight_time", "path_length", "average_speed", "feasible",
               "final_position_error", "final_heading_error", "wall_time", "straight_line",
               *VIOLATION_COLUMNS, "error")


def trajectory_table(traj: SampledTrajectory, degrees: bool = False) -> dict[str, np.ndarray]:
    cols = {
        "t": traj.t,
        "x": traj.position[:, 0], "y": traj.position[:, 1], "z": traj.position[:, 2],
        "psi": traj.yaw, "theta": traj.pitch,
        "u": traj.body[:, 0], "v": traj.body[:, 1], "w": traj.body[:, 2],
        "psi_dot": traj.yaw_rate, "theta_dot": traj.pitch_rate,
        "chi": traj.course, "speed": traj.speed,
    }
    if degrees:
        cols.update({k: np.degrees(cols[k]) for k in ANGLE_COLUMNS})
    return cols


def write_trajectory_csv(traj: SampledTrajectory, path: str | Path, degrees: bool = False) -> None:
    cols = trajectory_table(traj, degrees)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        for i in range(len(traj)):
            w.writerow([repr(float(cols[c][i])) for c in TRAJECTORY_COLUMNS])


def read_trajectory_csv(path: str | Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {c: np.array([float(r[c]) for r in rows]) for c in TRAJECTORY_COLUMNS}


def write_violations_csv(report: ViolationReport, path: str | Path) -> None:
    """One-row CSV: flight time, total cost, feasibility and every channel aggregate."""
    rec = {"flight_time": report.flight_time, "total_cost": report.total_cost,
           "feasible": int(report.feasible), **report.as_record()}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(rec.keys())
        w.writerow([repr(v) if isinstance(v, float) else v for v in rec.values()])


def read_violations_csv(path: str | Path) -> dict[str, float]:
    with open(path, newline="") as fh:
        (row,) = list(csv.DictReader(fh))
    return {k: float(v) for k, v in row.items()}


def _cell(v: Any) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_runs_csv(rows: Sequence[RunMetrics], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RUN_COLUMNS)
        for r in rows:
            rec = {c: getattr(r, c) for c in RUN_COLUMNS if c not in VIOLATION_COLUMNS}
            rec.update({c: r.violations.get(c, math.nan) for c in VIOLATION_COLUMNS})
            w.writerow([_cell(rec[c]) for c in RUN_COLUMNS])


def read_runs_csv(path: str | Path) -> list[RunMetrics]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(RunMetrics(
                run=int(row["run"]), seed=int(row["seed"]),
                **{m: float(row[m]) for m in METRICS},
                feasible=bool(int(row["feasible"])),
                straight_line=float(row["straight_line"]),
                violations={c: float(row[c]) for c in VIOLATION_COLUMNS
                            if not math.isnan(float(row[c]))},
                error=row["error"],
            ))
    return out


def _plain(obj: Any) -> Any:
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def write_yaml(data: Mapping[str, Any], path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(_plain(data), sort_keys=False))


def read_yaml(path: str | Path) -> Any:
    return yaml.safe_load(Path(path).read_text())
