"""Rerun the Example-1 strategy comparison and print the summary table.

Desk-scale by default (10 replicates, one level); pass --full for the
complete grid of levels, budgets, and strategies.  Results land in
--out as results.csv / summary.csv.
"""
import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import contour_seeker as cs
from contour_seeker.traceio import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--replicates", type=int, default=10)
    ap.add_argument("--levels", type=float, nargs="+", default=[-0.9])
    ap.add_argument("--budgets", type=int, nargs="+", default=[12, 21])
    ap.add_argument("--strategies", nargs="+",
                    default=["rcc", "one_shot"],
                    choices=["rcc", "rcc_ei", "arsd", "ecl", "ei", "lcb", "one_shot"])
    ap.add_argument("--full", action="store_true",
                    help="all strategies, levels {-0.9, 0.5, 1.5, 2.5}, budgets {12,15,18,21}")
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--parallel", type=int, default=4)
    ap.add_argument("--out", default="runs/example1_table")
    args = ap.parse_args()

    if args.full:
        args.strategies = ["rcc", "rcc_ei", "arsd", "ecl", "ei", "lcb", "one_shot"]
        args.levels = [-0.9, 0.5, 1.5, 2.5]
        args.budgets = [12, 15, 18, 21]

    sim = cs.builtin_simulator("example1")
    cfg = cs.BenchConfig(
        strategies=tuple(cs.Strategy(k, delta=0.05) for k in args.strategies),
        levels=tuple(args.levels),
        budgets=tuple(args.budgets),
        n0=9,
        replicates=args.replicates,
        per_combo=100,
        ref_per_combo=200,
        eps=0.05,
        seed=args.seed,
    )
    result = cs.replicate_benchmark(sim, cfg, workers=args.parallel)

    os.makedirs(args.out, exist_ok=True)
    write_csv(os.path.join(args.out, "results.csv"),
              ["strategy", "a", "N", "replicate", "m_c0", "wall_time_s", "failed"],
              [[r.strategy, r.level, r.budget, r.replicate, r.m_c0, r.wall_time_s, int(r.failed)]
               for r in result.rows])
    write_csv(os.path.join(args.out, "summary.csv"),
              ["strategy", "a", "N", "mean_m_c0", "rel_efficiency", "n_ok", "n_failed"],
              [[s.strategy, s.level, s.budget, s.mean_m_c0, s.rel_efficiency, s.n_ok, s.n_failed]
               for s in result.summary])

    print(f"fairness checks: {result.fairness_checked}, violations: {result.fairness_violations}")
    print(f"{'strategy':>10} {'a':>6} {'N':>4} {'mean M_C0':>12} {'rel.eff':>8}")
    for s in sorted(result.summary, key=lambda s: (s.level, s.budget, s.strategy)):
        print(f"{s.strategy:>10} {s.level:>6.2f} {s.budget:>4d} {s.mean_m_c0:>12.6f} "
              f"{s.rel_efficiency:>8.2f}")
    print(f"written to {args.out}/")


if __name__ == "__main__":
    main()
