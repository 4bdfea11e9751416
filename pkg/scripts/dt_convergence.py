#!/usr/bin/env python3
"""Step-size study: RMS tracking error of a noise-free developed run for dt, dt/2, dt/4."""

import argparse

from sslbpinn.config import load_config
from sslbpinn.metrics import rms
from sslbpinn.simulator import run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config")
    ap.add_argument("--duration", type=float, default=10.0)
    ap.add_argument("--levels", type=int, default=3)
    args = ap.parse_args()

    base = load_config(args.config).replace(noise=False, mode="developed", duration=args.duration)
    prev = None
    print(f"{'dt':>10} {'rms e [rad]':>14} {'change [%]':>11}")
    for level in range(args.levels):
        dt = base.dt / 2 ** level
        value = rms(run(base.replace(dt=dt)).e)
        change = "" if prev is None else f"{100 * abs(value - prev) / value:11.4f}"
        print(f"{dt:10.3g} {value:14.8f} {change}")
        prev = value


if __name__ == "__main__":
    main()
