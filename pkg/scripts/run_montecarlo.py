#!/usr/bin/env python3
"""Run the standard condition and the three robustness experiments, then print a comparison table."""

import argparse
from pathlib import Path

from idvd_dock import harness, output
from idvd_dock.model import load_scenario

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", default=ROOT / "scenarios" / "nominal.yaml", type=Path)
    ap.add_argument("--out", default=ROOT / "out" / "montecarlo", type=Path)
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--threshold", type=float, default=0.25, help="relative flight-time similarity threshold")
    args = ap.parse_args()

    sc = load_scenario(args.scenario)
    args.out.mkdir(parents=True, exist_ok=True)
    summaries = {}
    for exp in ("standard", "1", "2", "3"):
        n = 1 if exp == "standard" else args.runs
        rows, s = harness.run_study(sc, harness.experiment_spec(exp), n, args.seed, label=exp, jobs=args.jobs)
        output.write_runs_csv(rows, args.out / f"runs_{exp}.csv")
        output.write_yaml(s.as_dict(), args.out / f"summary_{exp}.yaml")
        summaries[exp] = s
        print(f"{exp:>8}: violation {s.violation_percentage:5.1f}%  RMSD {s.rmsd_final_position:.2e} m  "
              f"failed {s.n_failed}")

    cmp = harness.compare_to_standard(summaries["standard"], [summaries[e] for e in "123"])
    print()
    for row in cmp.rows():
        print(f"{row[0]:>14}" + "".join(f"{v:>12}" if isinstance(v, str) else f"{v:12.3f}" for v in row[1:]))
    print()
    for m, rel in cmp.relative.items():
        print(f"{m:>14}" + "".join(f"{r:+12.1%}" for r in rel))
    ok = harness.quantitatively_similar(cmp, "flight_time", args.threshold)
    print(f"\nflight time within {args.threshold:.0%} of standard in every experiment: {ok}")


if __name__ == "__main__":
    main()
