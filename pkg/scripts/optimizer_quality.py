"""CE against exhaustive search on random budgeted max-coverage instances.

Prints, per instance family (seed base), how many seeded runs land within
2% of the optimum.

    python3 scripts/optimizer_quality.py --bases 2024 1 2 3 4 5
"""

import argparse

from dualces.benchmark import optimizer_quality


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bases", type=int, nargs="+", default=[2024])
    ap.add_argument("--instances", type=int, default=50)
    ap.add_argument("--seeds", type=int, default=2)
    args = ap.parse_args()
    for base in args.bases:
        ratios = optimizer_quality(base, args.instances, range(args.seeds))
        hits = sum(r >= 0.98 for r in ratios)
        print(f"seed base {base}: {hits}/{len(ratios)} runs >= 98% of optimum, worst {min(ratios):.4f}")


if __name__ == "__main__":
    main()
