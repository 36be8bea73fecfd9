#!/usr/bin/env python3
"""Sweep every exact oracle over the sizes it can enumerate in seconds.

One line per (check, n).  Orthant stops at 5 and alternating at 7 because
their cost grows much faster than the tree census itself.
"""

import sys

from rrtlab.cli import main

PLAN = [
    ("fibers", range(2, 6)),
    ("degree-law", range(2, 7)),
    ("moments", range(2, 7)),
    ("decoupling", range(2, 6)),
    ("orthant", range(2, 6)),
    ("alternating", range(2, 8)),
]


def run():
    failures = 0
    for check, sizes in PLAN:
        for n in sizes:
            rc = main(["exact", "--n", str(n), "--check", check])
            status = "ok" if rc == 0 else "FAIL"
            print("%-12s n=%d  %s" % (check, n, status))
            failures += rc != 0
    if failures:
        print("%d failing checks" % failures, file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(run())
