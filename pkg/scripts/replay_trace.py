#!/usr/bin/env python3
"""Replay a stored driving sequence and print what it produced.

Defaults to the worked six-leaf example in fixtures/.  Output covers the
final tree, when each edge appeared, the increasing relabelling, and the
per-vertex selection history.
"""

import argparse
import os
import sys

from rrtlab import kingman

HERE = os.path.dirname(os.path.abspath(__file__))
DEFAULT = os.path.join(HERE, "..", "fixtures", "six_leaf.json")


def run():
    ap = argparse.ArgumentParser()
    ap.add_argument("events", nargs="?", default=DEFAULT, help="events JSON path")
    args = ap.parse_args()

    with open(args.events) as fh:
        events = kingman.CoalescentEvents.from_json(fh.read())

    print("n=%d" % events.n)
    for step, ((a, b), coin) in enumerate(zip(events.pairs, events.coins), start=1):
        print("  step %d: pair (%d, %d), coin %d" % (step, a, b, coin))

    out = kingman.replay(events)
    parent = out.final_tree.parent
    print("final tree: root %d, parents %s" % (
        out.final_tree.root, {v: parent[v] for v in sorted(parent)}))
    print("edge times: %s" % {v: out.edge_time[v] for v in sorted(out.edge_time)})
    print("relabel:    %s" % {v: out.relabel[v] for v in sorted(out.relabel)})
    phi_parent = out.phi_tree.parent
    print("image tree: %s" % {v: phi_parent[v] for v in sorted(phi_parent)})

    print("selection history:")
    for v, rec in sorted(kingman.selection_records(events).items()):
        print("  vertex %d: times=%s favours=%s p=%s degree=%d" % (
            v, list(rec.times), list(rec.favours), rec.p, rec.degree))

    for k in (2, 3, events.n):
        print("tau_%d = %s" % (k, kingman.tau_k(events, k)))
    return 0


if __name__ == "__main__":
    sys.exit(run())
