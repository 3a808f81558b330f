"""Run every desk-scale experiment on the synthetic benchmark and print a summary.

    python3 scripts/run_benchmark.py --seeds 30 --sweep-seeds 1 --json results.json
"""

import argparse
import json
import statistics
import time

from dualces import benchmark as B


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=30, help="seeds for the cascade comparison")
    ap.add_argument("--sweep-seeds", type=int, default=1, help="seeds for the L-bar sweep and adaptive runs")
    ap.add_argument("--json", help="write raw numbers here")
    args = ap.parse_args()
    results = {}

    t = time.time()
    shape = B.tradeoff_shape()
    results["tradeoff"] = {"budgets": shape.budgets, "saliency_mean": shape.mean_curve("saliency"),
                           "focus_mean": shape.mean_curve("focus"), "saliency_p": shape.saliency_p,
                           "focus_p": shape.focus_p}
    print(f"tradeoff       saliency {['%.3f' % v for v in shape.mean_curve('saliency')]} p={shape.saliency_p:.2e}")
    print(f"               focus    {['%.3f' % v for v in shape.mean_curve('focus')]} p={shape.focus_p:.2e}"
          f"  ({time.time() - t:.0f}s)")

    t = time.time()
    sweep = B.lbar_sweep(seeds=range(args.sweep_seeds))
    results["lbar_sweep"] = {"means": sweep.means(), "relative_spread": sweep.relative_spread}
    print(f"L-bar sweep    {', '.join(f'{k}:{v:.4f}' for k, v in sweep.means().items())}"
          f"  spread {sweep.relative_spread:.2%}  ({time.time() - t:.0f}s)")

    t = time.time()
    runs = B.adaptive_convergence(sweep, seeds=range(args.sweep_seeds))
    worst_change = max(r.final_relative_change for r in runs)
    worst_ratio = min(r.ratio for r in runs)
    results["adaptive"] = [{"topic": r.topic_id, "seed": r.seed, "final_L": r.length_trace[-1],
                            "change": r.final_relative_change, "ratio": r.ratio, "best_lbar": r.best_lbar}
                           for r in runs]
    print(f"adaptive       max final dL {worst_change:.3%}  min ratio to best fixed {worst_ratio:.4f}"
          f"  mean final L {statistics.fmean(r.length_trace[-1] for r in runs):.0f}  ({time.time() - t:.0f}s)")

    t = time.time()
    cb = B.cascade_benefit(seeds=range(args.seeds))
    results["cascade"] = {k: statistics.fmean(v) for k, v in vars(cb).items()}
    print(f"cascade        ROUGE-2 R dual {statistics.fmean(cb.dual_rouge2):.4f} vs CES+ "
          f"{statistics.fmean(cb.ces_plus_rouge2):.4f}; feedback coverage "
          f"{statistics.fmean(cb.dual_feedback_cov):.1f} vs {statistics.fmean(cb.ces_plus_feedback_cov):.1f}"
          f"  ({time.time() - t:.0f}s)")

    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=1)


if __name__ == "__main__":
    main()
