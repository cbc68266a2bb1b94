#!/usr/bin/env python3
"""Peak-height scatter against the number of disorder segments S.

Compares the relative spread of the ground-state peak height below and above
a segment-count split, the usual check that results stop depending on the
fineness of the disorder pattern.
"""

import argparse
import os

import qal


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--s-values", default="50,100,150,200,250,300,350,400")
    ap.add_argument("--split", type=int, default=200)
    ap.add_argument("--v0", type=float, default=1.0)
    ap.add_argument("--g5", type=float, nargs="*", default=[0.0, 1.0])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--n-seeds", type=int, default=8)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()

    os.makedirs(args.outdir, exist_ok=True)
    values = tuple(float(s) for s in args.s_values.split(","))
    seeds = tuple(args.seed + k for k in range(args.n_seeds))

    for g5 in args.g5:
        spec = qal.SweepSpec(variable="S", values=values, seeds=seeds, V0=args.v0, g5=g5)
        rows = qal.run_sweep(spec)
        lo, hi = qal.stabilization_check(rows, args.split)
        tagbase = os.path.join(args.outdir, "peak-vs-S-g5-%g" % g5)
        meta = ["experiment=segment_stability", "V0=%g" % args.v0, "g5=%g" % g5]
        with open(tagbase + ".csv", "w") as fh:
            fh.write(qal.sweeps.rows_to_csv(rows, meta))
        with open(tagbase + "-agg.csv", "w") as fh:
            fh.write(qal.sweeps.aggs_to_csv(qal.aggregate(rows), meta))
        print("g5=%g: rel std below S=%d: %.4f  at/above: %.4f" % (g5, args.split, lo, hi))


if __name__ == "__main__":
    main()
