"""Time ttc and hm_improve at doubling market sizes and report per-doubling ratios.

    python3 scripts/scaling.py --out scaling.csv
"""

import argparse
import csv
import sys

from coremarket.bench import BenchConfig, doubling_ratios, run


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=list(BenchConfig.sizes))
    ap.add_argument("--repeat", type=int, default=BenchConfig.repeat)
    ap.add_argument("--instances", type=int, default=BenchConfig.instances)
    ap.add_argument("--seed", type=int, default=BenchConfig.seed)
    ap.add_argument("--limit", type=float, default=2.5, help="largest acceptable ratio per doubling")
    ap.add_argument("--out", help="CSV path (default: stdout)")
    args = ap.parse_args()

    cfg = BenchConfig(sizes=tuple(args.sizes), seed=args.seed, repeat=args.repeat, instances=args.instances)
    rows = run(cfg)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.DictWriter(fh, fieldnames=list(rows[0]))
    w.writeheader()
    w.writerows(rows)
    if args.out:
        fh.close()

    worst = 0.0
    for alg in ("ttc", "hm_improve"):
        ratios = doubling_ratios(rows, alg)
        worst = max([worst, *ratios])
        print(f"{alg:>10}: " + "  ".join(f"{r:.2f}" for r in ratios), file=sys.stderr)
    print(f"worst ratio {worst:.2f} (limit {args.limit})", file=sys.stderr)
    return 0 if worst <= args.limit else 1


if __name__ == "__main__":
    sys.exit(main())
