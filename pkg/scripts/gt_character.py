"""Sample Gelfand-Tsetlin paths for a character with ten alpha+, five beta+ and ten alpha- parameters.

Prints the mean of each level row and a rough picture of the mean top row.

    python scripts/gt_character.py --N 40 --samples 10
"""
import argparse
import time

import numpy as np

from schurdyn.samplers import sample_gt_batch
from schurdyn.specializations import EdreiSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=40)
    ap.add_argument("--samples", type=int, default=10)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    char = EdreiSpec(alpha_plus=(0.1,) * 10, beta_plus=(0.5,) * 5, alpha_minus=(0.1,) * 10)
    t0 = time.perf_counter()
    paths = sample_gt_batch(char, args.N, args.samples, args.seed, args.threads)
    print(f"{args.samples} paths of depth {args.N} in {time.perf_counter() - t0:.2f}s")
    for k in (1, 2, args.N // 2, args.N):
        rows = np.array([p[k - 1] for p in paths], dtype=float)
        mean = rows.mean(axis=0)
        shown = " ".join(f"{x:.1f}" for x in mean[:12]) + (" ..." if k > 12 else "")
        print(f"level {k:3d}: mean row {shown}")
    top = np.array([p[-1] for p in paths], dtype=float).mean(axis=0)
    lo, hi = int(np.floor(top.min())), int(np.ceil(top.max()))
    print(f"mean top row spans [{lo}, {hi}]; histogram of its entries:")
    counts, edges = np.histogram(top, bins=min(10, max(1, hi - lo)))
    for c, e in zip(counts, edges):
        print(f"  {e:7.2f} | {'#' * int(c)}")


if __name__ == "__main__":
    main()
