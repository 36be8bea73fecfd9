#!/usr/bin/env python3
# Normal-fluctuation lane at n=2^20.  Extra flags pass straight through,
# e.g. scripts/run_clt.py --reps 500 --json clt.json

import sys

from rrtlab.cli import main

if __name__ == "__main__":
    sys.exit(main(["clt", "--seed", "2024", "--threads", "4"] + sys.argv[1:]))
