"""
Command-line front end.

    idvd-dock plan --scenario scenarios/nominal.yaml --out out/plan
    idvd-dock montecarlo --scenario scenarios/nominal.yaml --experiment 1 --runs 100 --out out/exp1
    idvd-dock emit-matrix-check

Exit status: 0 success (feasible plan), 2 plan completed but infeasible, 1 error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import harness, output
from .model import ScenarioError, load_scenario, with_solver
from .planner import optimize
from .refcurve import SPATIAL_MATRIX, YAW_MATRIX, matrix_sanity

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2
EXPERIMENTS = ("1", "2", "3", "standard")


def _load(args):
    sc = load_scenario(args.scenario)
    overrides = {}
    if args.nodes is not None:
        overrides["node_count"] = args.nodes
    if args.max_evals is not None:
        overrides["max_evaluations"] = args.max_evals
    return with_solver(sc, **overrides) if overrides else sc


def cmd_plan(args) -> int:
    sc = _load(args)
    res = optimize(sc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    output.write_trajectory_csv(res.trajectory, out / "trajectory.csv", degrees=args.degrees)
    output.write_violations_csv(res.report, out / "violations.csv")
    rep = res.report
    output.write_yaml({
        "feasible": rep.feasible,
        "violated_channels": rep.violated(),
        "cost": rep.total_cost,
        "t_f": rep.flight_time,
        "path_length": res.trajectory.path_length(),
        "iterations": res.iterations,
        "evaluations": res.evaluations,
        "converged": res.converged,
        "decision": {
            "tau_f": res.decision.tau_f,
            "jerk0": res.decision.jerk0.as_array().tolist(),
            "jerkf": res.decision.jerkf.as_array().tolist(),
            "lambda_m": res.decision.lambda_m,
        },
        "wall_time": res.wall_time,
    }, out / "summary.yaml")
    status = "feasible" if rep.feasible else "INFEASIBLE (" + ", ".join(rep.violated()) + ")"
    print(f"t_f={rep.flight_time:.3f} s  cost={rep.total_cost:.4f}  {status}  "
          f"[{res.evaluations} evals, {res.wall_time:.2f} s] -> {out}")
    return EXIT_OK if rep.feasible else EXIT_INFEASIBLE


def _study(sc, experiment: str, args):
    spec = harness.experiment_spec(experiment)
    n = args.runs
    return harness.run_study(sc, spec, n, args.seed, label=experiment, jobs=args.jobs)


def cmd_montecarlo(args) -> int:
    sc = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    experiments = EXPERIMENTS if args.experiment == "all" else (args.experiment,)
    summaries = {}
    for exp in experiments:
        rows, summary = _study(sc, exp, args)
        output.write_runs_csv(rows, out / f"runs_{exp}.csv")
        output.write_yaml(summary.as_dict(), out / f"summary_{exp}.yaml")
        summaries[exp] = summary
        ft = summary.stats["flight_time"]
        print(f"experiment {exp}: {summary.n_runs} runs, violation {summary.violation_percentage:.1f}%, "
              f"flight time {ft.mean:.2f} +- {ft.std:.2f} s, RMSD {summary.rmsd_final_position:.3g} m")
    if "standard" in summaries and len(summaries) > 1:
        cmp = harness.compare_to_standard(summaries["standard"],
                                          [summaries[e] for e in experiments if e != "standard"])
        output.write_yaml({"labels": list(cmp.labels),
                           "means": {k: list(v) for k, v in cmp.means.items()},
                           "relative_to_standard": {k: list(v) for k, v in cmp.relative.items()}},
                          out / "comparison.yaml")
    return EXIT_OK


def cmd_emit_matrix_check(args) -> int:
    np.set_printoptions(precision=6, suppress=True, linewidth=120)
    ok = True
    for name, mat in (("spatial (8x8)", SPATIAL_MATRIX), ("yaw (6x6)", YAW_MATRIX)):
        det = float(np.linalg.det(mat))
        print(f"{name} boundary matrix:\n{mat}")
        print(f"  det = {det:.6g}  cond = {np.linalg.cond(mat):.6g}\n")
        ok &= abs(det) > 1e-8
    try:
        matrix_sanity()
    except ValueError as exc:
        print(exc, file=sys.stderr)
        ok = False
    return EXIT_OK if ok else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="idvd-dock", description="AUV docking trajectory planner")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, runs: bool):
        sp.add_argument("--scenario", required=True, help="scenario YAML file")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--nodes", type=int, help="override node count")
        sp.add_argument("--max-evals", type=int, help="override simplex evaluation budget")
        sp.add_argument("--degrees", action="store_true", help="write angles in degrees")
        if runs:
            sp.add_argument("--seed", type=int, default=0, help="base seed; run k uses seed+k")
            sp.add_argument("--runs", type=int, default=100)
            sp.add_argument("--experiment", choices=(*EXPERIMENTS, "all"), default="1")
            sp.add_argument("--jobs", type=int, default=1, help="worker processes")

    common(sub.add_parser("plan", help="plan one scenario"), runs=False)
    common(sub.add_parser("montecarlo", help="run a Monte Carlo robustness study"), runs=True)
    sub.add_parser("emit-matrix-check", help="print the boundary matrices and their determinants")
    return p


COMMANDS = {"plan": cmd_plan, "montecarlo": cmd_montecarlo, "emit-matrix-check": cmd_emit_matrix_check}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ScenarioError as exc:
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
