"""Sample q^volume plane partitions on a small wall and a large one and render them.

Writes an ASCII heat map of the mean height and an SVG of one sample per shape.

    python scripts/plane_partition_shapes.py --out-dir out/ --samples 10
"""
import argparse
import pathlib
import time

from schurdyn.cli import ascii_heights, svg_lozenges
from schurdyn.combinatorics import PlanePartitionShape
from schurdyn.oracle import mean_volume_closed_form
from schurdyn.samplers import sample_spp_batch


def staircase_wall(A: int, B: int, steps: int) -> tuple[int, ...]:
    """A back wall that descends in ``steps`` equal stairs."""
    return tuple(max(0, B - (i * steps // A + 1) * (B // steps)) for i in range(A))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="out")
    ap.add_argument("--samples", type=int, default=10)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--size", type=int, default=40, help="side of the large box")
    ap.add_argument("--q-large", type=float, default=0.9)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    cases = [("small", PlanePartitionShape(4, 3, (2, 1, 1, 0)), 0.5),
             ("large", PlanePartitionShape(args.size, args.size, staircase_wall(args.size, args.size, 4)),
              args.q_large)]
    for name, shape, q in cases:
        t0 = time.perf_counter()
        grids, draws = sample_spp_batch(shape, q, args.samples, args.seed, args.threads)
        elapsed = time.perf_counter() - t0
        mean = grids.mean(axis=0)
        print(f"{name}: A={shape.A} B={shape.B} q={q} samples={args.samples} "
              f"mean volume {grids.sum(axis=(1, 2)).mean():.2f} "
              f"(closed form {mean_volume_closed_form(shape, q):.2f}), "
              f"max draws {draws.max()}, {elapsed:.2f}s")
        (out / f"{name}_mean.txt").write_text(ascii_heights(mean.tolist(), shape) + "\n")
        (out / f"{name}_sample.svg").write_text(svg_lozenges(grids[0].tolist(), shape, unit=10 if name == "large" else 20))
    print(f"wrote {out}/")


if __name__ == "__main__":
    main()
