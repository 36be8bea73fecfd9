"""Uniform random recursive trees by sequential uniform attachment."""

from __future__ import annotations

import numpy as np

from .trees import DegreeVector, RootedTree

__all__ = ["grow_rrt", "degree_sample"]


def _sample_parents(n: int, rng: np.random.Generator) -> np.ndarray:
    # parents[k-2] is the parent of vertex k, uniform on 1..k-1.
    # Generator.integers is rejection-based, so no modulo bias.
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if n == 1:
        return np.empty(0, dtype=np.int64)
    return rng.integers(1, np.arange(2, n + 1))


def grow_rrt(n: int, rng: np.random.Generator) -> RootedTree:
    """Grow a random recursive tree on 1..n, uniform over increasing trees.

    Vertex k attaches to a uniform vertex of 1..k-1, independently for each k.
    """
    parents = _sample_parents(n, rng)
    return RootedTree(n, 1, {k + 2: int(p) for k, p in enumerate(parents)})


def degree_sample(n: int, rng: np.random.Generator) -> DegreeVector:
    """Degree vector of grow_rrt(n, rng) without building the tree object.

    Uses the same attachment draws as grow_rrt, so for a fixed generator
    state the two agree exactly.
    """
    parents = _sample_parents(n, rng)
    return DegreeVector(np.bincount(parents, minlength=n + 1)[1:])
