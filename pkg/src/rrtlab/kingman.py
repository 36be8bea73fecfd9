"""Discrete coalescent chain on forests of rooted trees.

Start from n singleton trees.  At step i (i = 1..n-1) the forest holds
n+1-i trees, indexed 1..n+1-i in increasing order of their smallest vertex
label.  A uniform pair of indices {a_i, b_i} with a_i < b_i is drawn together
with a fair coin xi_i.  The two trees merge: on xi_i = 1 the new edge points
from the root of tree b_i to the root of tree a_i (tree a_i's root keeps
being a root), on xi_i = 0 the other way round.  After n-1 steps a single
rooted tree on 1..n remains.

The index of the merged tree is a_i again (its smallest label is the smaller
of the two minima), so the sorted order maintains itself and replay can keep
the forest in a flat list.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np
from numba import njit

from .errors import InvalidStructureError
from .trees import DegreeVector, RootedTree

__all__ = [
    "CoalescentEvents",
    "LabelledOutcome",
    "SelectionRecord",
    "sample_events",
    "replay",
    "replay_degrees",
    "selection_records",
    "fast_degree_sample",
    "selection_stats_sample",
    "tau_k",
    "sample_tau",
]


class CoalescentEvents:
    """A full driving sequence: pairs (a_i, b_i) and coins xi_i, i = 1..n-1."""

    __slots__ = ("n", "pairs", "coins")

    def __init__(self, n, pairs, coins):
        if n < 1:
            raise InvalidStructureError(f"need n >= 1, got {n}")
        pairs = tuple((int(a), int(b)) for a, b in pairs)
        coins = tuple(int(c) for c in coins)
        if len(pairs) != n - 1 or len(coins) != n - 1:
            raise InvalidStructureError(
                f"need {n - 1} pairs and coins, got {len(pairs)} and {len(coins)}"
            )
        for i, (a, b) in enumerate(pairs, start=1):
            m = n + 1 - i
            if not (1 <= a < b <= m):
                raise InvalidStructureError(
                    f"step {i}: pair ({a}, {b}) not an index pair in 1..{m}"
                )
        for c in coins:
            if c not in (0, 1):
                raise InvalidStructureError(f"coin {c} not in {{0, 1}}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "coins", coins)

    def __setattr__(self, name, value):
        raise AttributeError("CoalescentEvents is immutable")

    def __eq__(self, other):
        if not isinstance(other, CoalescentEvents):
            return NotImplemented
        return (self.n, self.pairs, self.coins) == (other.n, other.pairs, other.coins)

    def __hash__(self):
        return hash((self.n, self.pairs, self.coins))

    def __repr__(self):
        return f"CoalescentEvents(n={self.n}, pairs={self.pairs}, coins={self.coins})"

    def to_json(self) -> str:
        obj = {
            "schema": "rrtlab/v1",
            "n": self.n,
            "pairs": [[a, b] for a, b in self.pairs],
            "coins": list(self.coins),
        }
        return json.dumps(obj, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CoalescentEvents":
        try:
            obj = json.loads(text)
            n = int(obj["n"])
            pairs = [(int(a), int(b)) for a, b in obj["pairs"]]
            coins = [int(c) for c in obj["coins"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidStructureError(f"malformed events document: {exc}") from exc
        return cls(n, pairs, coins)


@dataclass(frozen=True)
class LabelledOutcome:
    """Replay result: the coalescent tree, when each edge appeared, and the
    relabelled (increasing) image under the time-reversal map."""

    final_tree: RootedTree
    edge_time: Mapping[int, int]  # non-root vertex -> step its parent edge appeared
    relabel: Mapping[int, int]  # vertex -> new label; root -> 1, u -> n+1-edge_time[u]
    phi_tree: RootedTree

    def to_jsonable(self) -> dict:
        return {
            "final_tree": {
                "n": self.final_tree.n,
                "root": self.final_tree.root,
                "parent": {str(v): p for v, p in sorted(self.final_tree.parent.items())},
            },
            "edge_time": {str(v): t for v, t in sorted(self.edge_time.items())},
            "relabel": {str(v): l for v, l in sorted(self.relabel.items())},
            "phi_tree": {
                "n": self.phi_tree.n,
                "root": self.phi_tree.root,
                "parent": {str(v): p for v, p in sorted(self.phi_tree.parent.items())},
            },
        }


@dataclass(frozen=True)
class SelectionRecord:
    """Steps at which a vertex's tree took part in a merge.

    favours[j] is 1 when the coin went the way of the vertex's tree at
    times[j].  p is the first unfavourable selection time (None when every
    selection was favourable).  degree counts the selection times strictly
    before p, which is the vertex's final number of children.
    """

    times: tuple[int, ...]
    favours: tuple[int, ...]
    p: Optional[int]
    degree: int


def _draw_streams(n: int, rng: np.random.Generator):
    # Pair at step t (0-based): first index uniform on 0..m-1, second uniform
    # on the remaining m-1 slots, with m = n - t live trees.  Coins are fair.
    m = np.arange(n, 1, -1)
    firsts = rng.integers(0, m)
    seconds = rng.integers(0, m - 1)
    coins = rng.integers(0, 2, size=n - 1)
    return firsts, seconds, coins


def sample_events(n: int, rng: np.random.Generator) -> CoalescentEvents:
    """Draw a uniform driving sequence for the n-vertex chain."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if n == 1:
        return CoalescentEvents(1, (), ())
    firsts, seconds, coins = _draw_streams(n, rng)
    seconds = seconds + (seconds >= firsts)
    lo = np.minimum(firsts, seconds) + 1
    hi = np.maximum(firsts, seconds) + 1
    pairs = list(zip(lo.tolist(), hi.tolist()))
    return CoalescentEvents(n, pairs, coins.tolist())


def replay(events: CoalescentEvents) -> LabelledOutcome:
    """Run the chain for a given driving sequence.

    Returns the final tree on the original labels, the step at which each
    non-root vertex acquired its parent, the time-reversal relabelling
    (root -> 1, u -> n+1 - edge_time[u]) and the relabelled tree, which is
    always increasing.
    """
    n = events.n
    roots = list(range(1, n + 1))
    parent: dict[int, int] = {}
    edge_time: dict[int, int] = {}
    for step, ((a, b), coin) in enumerate(zip(events.pairs, events.coins), start=1):
        ra = roots[a - 1]
        rb = roots[b - 1]
        winner, loser = (ra, rb) if coin == 1 else (rb, ra)
        parent[loser] = winner
        edge_time[loser] = step
        # merged tree keeps index a: its minimum label is tree a's minimum
        roots[a - 1] = winner
        del roots[b - 1]
    final = RootedTree(n, roots[0], parent)
    relabel = {final.root: 1}
    for u, t in edge_time.items():
        relabel[u] = n + 1 - t
    phi_parent = {relabel[u]: relabel[p] for u, p in parent.items()}
    return LabelledOutcome(final, edge_time, relabel, RootedTree(n, 1, phi_parent))


def replay_degrees(events: CoalescentEvents) -> np.ndarray:
    """Degree vector of replay(events).final_tree, skipping tree construction."""
    n = events.n
    roots = list(range(1, n + 1))
    deg = np.zeros(n, dtype=np.int64)
    for (a, b), coin in zip(events.pairs, events.coins):
        ra = roots[a - 1]
        rb = roots[b - 1]
        winner = ra if coin == 1 else rb
        deg[winner - 1] += 1
        roots[a - 1] = winner
        del roots[b - 1]
    return deg


def selection_records(events: CoalescentEvents) -> dict[int, SelectionRecord]:
    """Selection times, favour bits, first unfavourable time and resulting
    degree for every vertex."""
    n = events.n
    roots = list(range(1, n + 1))
    members: list[list[int]] = [[v] for v in range(1, n + 1)]
    times: list[list[int]] = [[] for _ in range(n + 1)]
    favs: list[list[int]] = [[] for _ in range(n + 1)]
    for step, ((a, b), coin) in enumerate(zip(events.pairs, events.coins), start=1):
        fav_a = 1 if coin == 1 else 0
        for v in members[a - 1]:
            times[v].append(step)
            favs[v].append(fav_a)
        for v in members[b - 1]:
            times[v].append(step)
            favs[v].append(1 - fav_a)
        ra = roots[a - 1]
        rb = roots[b - 1]
        roots[a - 1] = ra if coin == 1 else rb
        members[a - 1].extend(members[b - 1])
        del roots[b - 1]
        del members[b - 1]
    out = {}
    for v in range(1, n + 1):
        fv = favs[v]
        if 0 in fv:
            k = fv.index(0)
            out[v] = SelectionRecord(tuple(times[v]), tuple(fv), times[v][k], k)
        else:
            out[v] = SelectionRecord(tuple(times[v]), tuple(fv), None, len(fv))
    return out


# ---------------------------------------------------------------------------
# fast paths
#
# The samplers below skip the sorted-index bookkeeping: live trees sit in a
# flat array, the merged tree overwrites the winner's slot and the freed slot
# is filled from the end.  Which tree sits where is a function of the draws
# alone, so the drawn pair is still uniform over live trees and the coin is
# still fair and independent; the chain has the same law as replaying
# sample_events.  Tests check this against exact enumeration at small n.
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _merge_kernel(firsts, seconds, coins, roots, deg):  # pragma: no cover
    n = deg.shape[0]
    for v in range(n):
        roots[v] = v
        deg[v] = 0
    m = n
    for t in range(n - 1):
        i = firsts[t]
        j = seconds[t]
        if j >= i:
            j += 1
        if j < i:
            i, j = j, i
        # coin 1 favours the lower slot, matching the replay convention
        if coins[t] == 1:
            w, l = i, j
        else:
            w, l = j, i
        deg[roots[w]] += 1
        roots[l] = roots[m - 1]
        m -= 1


@njit(cache=True, nogil=True)
def _trace_kernel(n, firsts, seconds, coins):  # pragma: no cover
    # follow one record through the merges; by exchangeability of slots this
    # has the law of any fixed vertex's selection history
    pos = 0
    m = n
    size = 0
    deg = 0
    p = 0
    stopped = False
    for t in range(n - 1):
        i = firsts[t]
        j = seconds[t]
        if j >= i:
            j += 1
        if j < i:
            i, j = j, i
        if coins[t] == 1:
            w, l = i, j
        else:
            w, l = j, i
        if pos == i or pos == j:
            size += 1
            if not stopped:
                if pos == w:
                    deg += 1
                else:
                    stopped = True
                    p = t + 1
        if pos == l:
            pos = w
        if pos == m - 1:
            pos = l
        m -= 1
    return size, deg, p


def degree_sample_into(
    n: int,
    rng: np.random.Generator,
    deg: np.ndarray,
    roots: np.ndarray,
) -> None:
    """Fill deg with a fresh chain degree sample, reusing caller buffers."""
    if n == 1:
        deg[0] = 0
        return
    firsts, seconds, coins = _draw_streams(n, rng)
    _merge_kernel(firsts, seconds, coins, roots, deg)


def fast_degree_sample(n: int, rng: np.random.Generator) -> DegreeVector:
    """Degree vector of the final chain tree in O(n), no replay.

    Same distribution as child_counts(replay(sample_events(n, rng)).final_tree);
    the realization for a given seed differs.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    deg = np.empty(n, dtype=np.int64)
    roots = np.empty(n, dtype=np.int64)
    degree_sample_into(n, rng, deg, roots)
    return DegreeVector(deg)


def selection_stats_sample(n: int, rng: np.random.Generator) -> tuple[int, int, Optional[int]]:
    """(|S_v|, degree of v, first unfavourable time) for one fixed vertex.

    All vertices are exchangeable here, so the sample is drawn for a single
    tracked record in O(n) rather than via full selection_records.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if n == 1:
        return 0, 0, None
    firsts, seconds, coins = _draw_streams(n, rng)
    size, deg, p = _trace_kernel(n, firsts, seconds, coins)
    return int(size), int(deg), (int(p) if p else None)


def tau_k(events: CoalescentEvents, k: int) -> Optional[int]:
    """First step whose pair lies inside 1..k, or None if there is none."""
    if not 2 <= k <= events.n:
        raise ValueError(f"need 2 <= k <= n = {events.n}, got k = {k}")
    for step, (a, b) in enumerate(events.pairs, start=1):
        if b <= k:
            return step
    return None


def sample_tau(n: int, k: int, rng: np.random.Generator) -> Optional[int]:
    """Draw tau_k(sample_events(n, rng), k) without materializing the events.

    Consumes the generator exactly as sample_events does, so for equal seeds
    the two routes agree.
    """
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n = {n}, got k = {k}")
    firsts, seconds, coins = _draw_streams(n, rng)
    del coins  # drawn to keep the stream aligned with sample_events
    seconds = seconds + (seconds >= firsts)
    hit = np.maximum(firsts, seconds) <= k - 1
    idx = int(np.argmax(hit))
    if not hit[idx]:
        return None
    return idx + 1
