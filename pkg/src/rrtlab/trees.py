"""Rooted labelled trees stored as parent maps.

Vertices are labelled 1..n.  A tree is a parent map: every non-root vertex
points at its parent, the root has no entry.  Degree of a vertex always means
its number of children.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterator, Mapping

import numpy as np

from .errors import InvalidStructureError

__all__ = ["RootedTree", "DegreeVector", "child_counts", "degree_multiset", "is_increasing"]


class RootedTree:
    """Immutable rooted tree on labels 1..n.

    parent maps vertex -> parent for every non-root vertex and has no entry
    for the root.  Construction validates connectivity, so a RootedTree in
    hand is always a genuine tree.
    """

    __slots__ = ("n", "root", "parent", "_hash")

    def __init__(self, n: int, root: int, parent: Mapping[int, int]):
        if n < 1:
            raise InvalidStructureError(f"need n >= 1, got {n}")
        if not (1 <= root <= n):
            raise InvalidStructureError(f"root {root} outside 1..{n}")
        pmap = dict(parent)
        if root in pmap:
            raise InvalidStructureError(f"root {root} has a parent entry")
        if len(pmap) != n - 1:
            raise InvalidStructureError(
                f"expected {n - 1} parent entries, got {len(pmap)}"
            )
        for v, p in pmap.items():
            if not (1 <= v <= n) or not (1 <= p <= n):
                raise InvalidStructureError(f"edge {v}->{p} outside 1..{n}")
            if v == p:
                raise InvalidStructureError(f"self-loop at {v}")
        # walk each vertex to the root once; iterative with path marking
        seen = {root}
        for v in pmap:
            path = []
            u = v
            while u not in seen:
                path.append(u)
                u = pmap.get(u)
                if u is None:
                    raise InvalidStructureError(f"vertex {path[-1]} disconnected from root")
                if u in path:
                    raise InvalidStructureError(f"cycle through vertex {u}")
            seen.update(path)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "parent", MappingProxyType(pmap))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("RootedTree is immutable")

    def __eq__(self, other):
        if not isinstance(other, RootedTree):
            return NotImplemented
        return (
            self.n == other.n
            and self.root == other.root
            and dict(self.parent) == dict(other.parent)
        )

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.n, self.root, tuple(sorted(self.parent.items()))))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"RootedTree(n={self.n}, root={self.root}, parent={dict(self.parent)})"

    def children(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {v: [] for v in range(1, self.n + 1)}
        for v, p in self.parent.items():
            out[p].append(v)
        return out

    def to_json(self) -> str:
        obj = {
            "n": self.n,
            "root": self.root,
            "parent": {str(v): p for v, p in sorted(self.parent.items())},
        }
        return json.dumps(obj, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RootedTree":
        try:
            obj = json.loads(text)
            n = int(obj["n"])
            root = int(obj["root"])
            parent = {int(v): int(p) for v, p in obj["parent"].items()}
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise InvalidStructureError(f"malformed tree document: {exc}") from exc
        return cls(n, root, parent)


@dataclass(frozen=True)
class DegreeVector:
    """Children counts per vertex, stored dense: counts[v-1] is the degree of v."""

    counts: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", arr)
        if arr.ndim != 1 or arr.shape[0] < 1:
            raise InvalidStructureError("degree vector must be a nonempty 1-d array")
        if (arr < 0).any():
            raise InvalidStructureError("negative degree")
        if arr.sum() != arr.shape[0] - 1:
            raise InvalidStructureError(
                f"degrees sum to {int(arr.sum())}, expected {arr.shape[0] - 1}"
            )

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    def of(self, v: int) -> int:
        if not (1 <= v <= self.n):
            raise InvalidStructureError(f"vertex {v} outside 1..{self.n}")
        return int(self.counts[v - 1])

    def as_dict(self) -> dict[int, int]:
        return {v + 1: int(c) for v, c in enumerate(self.counts)}

    def multiset(self) -> tuple[int, ...]:
        return tuple(sorted((int(c) for c in self.counts), reverse=True))

    def __eq__(self, other):
        if not isinstance(other, DegreeVector):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)

    def __iter__(self) -> Iterator[int]:
        return iter(int(c) for c in self.counts)


def child_counts(tree: RootedTree) -> DegreeVector:
    """Degree (number of children) of every vertex of the tree."""
    counts = np.zeros(tree.n, dtype=np.int64)
    for _, p in tree.parent.items():
        counts[p - 1] += 1
    return DegreeVector(counts)


def degree_multiset(tree: RootedTree) -> tuple[int, ...]:
    """Degrees with vertex identity forgotten, sorted descending."""
    return child_counts(tree).multiset()


def is_increasing(tree: RootedTree) -> bool:
    """True iff the root is 1 and every child label exceeds its parent label."""
    if tree.root != 1:
        return False
    return all(p < v for v, p in tree.parent.items())
