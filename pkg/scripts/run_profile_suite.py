#!/usr/bin/env python3
"""Run the three profile experiments at full scale and stash the reports.

Writes poisson.json / tail.json / moments.json (plus per-replicate CSVs)
into --outdir.  Exit status is nonzero if any lane reports a failed check.
"""

import argparse
import os
import sys

from rrtlab.cli import main as rrtlab_main

LANES = ["poisson", "tail", "moments"]


def run():
    ap = argparse.ArgumentParser()
    ap.add_argument("--outdir", default="out")
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--threads", type=int, default=4)
    ap.add_argument("--lanes", default=",".join(LANES),
                    help="comma separated subset of %s" % ",".join(LANES))
    args = ap.parse_args()

    lanes = [s.strip() for s in args.lanes.split(",")]
    for lane in lanes:
        if lane not in LANES:
            print("unknown lane %r" % lane, file=sys.stderr)
            return 1

    os.makedirs(args.outdir, exist_ok=True)
    worst = 0
    for lane in lanes:
        rc = rrtlab_main([
            lane,
            "--seed", str(args.seed),
            "--threads", str(args.threads),
            "--csv", os.path.join(args.outdir, lane + ".csv"),
            "--json", os.path.join(args.outdir, lane + ".json"),
        ])
        print("%s -> rc=%d" % (lane, rc))
        worst = max(worst, rc)
    return worst


if __name__ == "__main__":
    sys.exit(run())
