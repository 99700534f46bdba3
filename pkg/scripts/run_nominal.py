#!/usr/bin/env python3
"""Plan the shipped nominal scenario and write plot-ready files."""

import argparse
from pathlib import Path

import numpy as np

from idvd_dock import output
from idvd_dock.model import load_scenario
from idvd_dock.penalty import zone_clearance
from idvd_dock.planner import initial_guess, optimize

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", default=ROOT / "scenarios" / "nominal.yaml", type=Path)
    ap.add_argument("--out", default=ROOT / "out" / "nominal", type=Path)
    ap.add_argument("--shape", choices=("smooth", "quadratic"), default="smooth")
    args = ap.parse_args()

    sc = load_scenario(args.scenario)
    res = optimize(sc, shape=args.shape)
    traj = res.trajectory
    args.out.mkdir(parents=True, exist_ok=True)
    output.write_trajectory_csv(traj, args.out / "trajectory.csv")
    output.write_violations_csv(res.report, args.out / "violations.csv")

    print(f"straight line      {sc.straight_line_distance():9.3f} m")
    print(f"initial tau_f      {initial_guess(sc).tau_f:9.3f} s")
    print(f"flight time        {traj.t_f:9.3f} s")
    print(f"path length        {traj.path_length():9.3f} m")
    print(f"peak surge         {traj.body[:, 0].max():9.3f} m/s")
    print(f"peak |sway|        {np.abs(traj.body[:, 1]).max():9.3f} m/s")
    print(f"min zone clearance {zone_clearance(traj.position, sc.zones).min():9.3f} m")
    print(f"feasible           {res.feasible} ({res.evaluations} evaluations, {res.wall_time:.2f} s)")
    for name in res.report.violated():
        print(f"  violated: {name} peak {res.report.channels[name].peak:.3g}")


if __name__ == "__main__":
    main()
