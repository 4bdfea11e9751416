#!/usr/bin/env python3
"""Developed vs baseline comparison over several seeds, printed as a performance table.

    python scripts/reproduce_comparison.py --seeds 0..9 --out results/comparison
"""

import argparse
import os
import time

from sslbpinn.cli import parse_seeds
from sslbpinn.config import load_config
from sslbpinn.io import export_svg_plots
from sslbpinn.simulator import compare


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config")
    ap.add_argument("--seeds", type=parse_seeds, default=list(range(10)))
    ap.add_argument("--trajectory", choices=("literal", "ramp"))
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args()

    cfg = load_config(args.config)
    if args.trajectory:
        cfg = cfg.replace(trajectory=args.trajectory)
    t0 = time.perf_counter()
    report, traces = compare(cfg, args.seeds, workers=args.workers, keep_traces={args.seeds[0]})
    print(report.to_table())
    print()
    for m in ("f_tilde", "err_M", "err_C", "err_F"):
        per_seed = " ".join(f"{v:+.2f}" for v in report.per_seed_improvement(m))
        print(f"{m:8s} wins {report.wins(m)}/{len(args.seeds)}  per-seed improvement [%]: {per_seed}")
    print(f"\n{2 * len(args.seeds)} runs in {time.perf_counter() - t0:.1f} s")

    if args.out:
        os.makedirs(args.out, exist_ok=True)
        report.to_csv(os.path.join(args.out, "report.csv"))
        with open(os.path.join(args.out, "report.txt"), "w") as fh:
            fh.write(report.to_table() + "\n")
        s = args.seeds[0]
        export_svg_plots({arm: traces[(s, arm)] for arm in ("developed", "baseline")},
                         os.path.join(args.out, f"seed{s}"))


if __name__ == "__main__":
    main()
