"""Distribution of nontrivial one-dimensional draws per plane-partition sample.

Compares the observed maximum against AB(B+1)/2 for several walls and q.

    python scripts/draw_counts.py --runs 10000
"""
import argparse

import numpy as np

from schurdyn.combinatorics import PlanePartitionShape
from schurdyn.samplers import sample_spp_batch


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    shapes = [PlanePartitionShape(4, 3), PlanePartitionShape(4, 3, (2, 1, 1, 0)),
              PlanePartitionShape(3, 4, (4, 2)), PlanePartitionShape(5, 5)]
    print(f"{'shape':24s} {'q':>5s} {'bound':>6s} {'max':>5s} {'mean':>7s} {'hit bound':>9s}")
    for shape in shapes:
        bound = shape.A * shape.B * (shape.B + 1) // 2
        for q in (0.3, 0.5, 0.7, 0.9):
            _, draws = sample_spp_batch(shape, q, args.runs, args.seed)
            label = f"{shape.A}x{shape.B} pi={list(shape.pi)}"
            print(f"{label:24s} {q:5.2f} {bound:6d} {draws.max():5d} {draws.mean():7.2f} "
                  f"{int((draws == bound).sum()):9d}")


if __name__ == "__main__":
    main()
