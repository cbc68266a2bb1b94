#!/usr/bin/env python3
"""Locate the abrupt localization-breaking jump of the width along a g5 scan.

Runs one g5 sweep per requested disorder amplitude and reports the critical
nonlinearity found on the ensemble medians (none = no abrupt jump detected).
"""

import argparse
import os

import numpy as np

import qal


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--v0", type=float, nargs="*", default=[1.0, 3.0, 5.0])
    ap.add_argument("--g5-max", type=float, default=3.0)
    ap.add_argument("--g5-step", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--n-seeds", type=int, default=16)
    ap.add_argument("--jump-factor", type=float, default=5.0)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()

    os.makedirs(args.outdir, exist_ok=True)
    values = tuple(np.round(np.arange(0.0, args.g5_max + 1e-9, args.g5_step), 10))
    seeds = tuple(args.seed + k for k in range(args.n_seeds))

    for V0 in args.v0:
        spec = qal.SweepSpec(variable="g5", values=values, seeds=seeds, V0=V0, S=300)
        rows = qal.run_sweep(spec)
        series = qal.median_delta_x_series(rows)
        crit = qal.critical_g5(series, jump_factor=args.jump_factor)
        tagbase = os.path.join(args.outdir, "width-vs-g5-V0-%g" % V0)
        meta = ["experiment=transition_scan", "V0=%g" % V0]
        with open(tagbase + ".csv", "w") as fh:
            fh.write(qal.sweeps.rows_to_csv(rows, meta))
        with open(tagbase + "-agg.csv", "w") as fh:
            fh.write(qal.sweeps.aggs_to_csv(qal.aggregate(rows), meta))
        print("V0=%g: critical g5 = %s" % (V0, "none" if crit is None else "%.2f" % crit))


if __name__ == "__main__":
    main()
