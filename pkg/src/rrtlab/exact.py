"""Exact small-n oracles by brute-force enumeration, in rational arithmetic.

Increasing trees are enumerated for n <= 9 and full chain driving sequences
for n <= 6; both guards are hard errors, since the counts grow like (n-1)!
and n!(n-1)!.  Everything downstream of the enumerations is computed with
Fractions, so equalities and inequalities in reports are exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Optional

import numpy as np

from .errors import ResourceGuardError
from .kingman import CoalescentEvents, replay_degrees, selection_records, tau_k
from .stats import floor_log2
from .trees import RootedTree

__all__ = [
    "TREE_ENUM_MAX_N",
    "EVENTS_ENUM_MAX_N",
    "ExactLaw",
    "enumerate_increasing_trees",
    "enumerate_events",
    "phi_fiber_census",
    "exact_profile_law",
    "exact_factorial_moments",
    "OrthantReport",
    "orthant_check",
    "AlternatingReport",
    "alternating_bounds",
    "DecouplingReport",
    "decoupling_check",
]

TREE_ENUM_MAX_N = 9
EVENTS_ENUM_MAX_N = 6


def _check_tree_guard(n: int) -> None:
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if n > TREE_ENUM_MAX_N:
        raise ResourceGuardError(
            f"tree enumeration capped at n = {TREE_ENUM_MAX_N}, got {n}"
        )


def _check_events_guard(n: int) -> None:
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if n > EVENTS_ENUM_MAX_N:
        raise ResourceGuardError(
            f"event enumeration capped at n = {EVENTS_ENUM_MAX_N}, got {n}"
        )


def _iter_parent_tuples(n: int) -> Iterator[tuple[int, ...]]:
    # (p_2, ..., p_n) with p_k < k: vertex n attaches anywhere in an
    # enumeration of the (n-1)-vertex trees
    if n == 1:
        yield ()
        return
    for prefix in _iter_parent_tuples(n - 1):
        for p in range(1, n):
            yield prefix + (p,)


def enumerate_increasing_trees(n: int) -> Iterator[RootedTree]:
    """All (n-1)! increasing trees on 1..n, root 1."""
    _check_tree_guard(n)
    for parents in _iter_parent_tuples(n):
        yield RootedTree(n, 1, {k + 2: p for k, p in enumerate(parents)})


def enumerate_events(n: int) -> Iterator[CoalescentEvents]:
    """All n!(n-1)! driving sequences of the n-vertex chain."""
    _check_events_guard(n)
    step_choices = []
    for i in range(1, n):
        m = n + 1 - i
        pairs = [(a, b) for a in range(1, m) for b in range(a + 1, m + 1)]
        step_choices.append([(p, c) for p in pairs for c in (0, 1)])
    for combo in itertools.product(*step_choices):
        yield CoalescentEvents(n, [p for p, _ in combo], [c for _, c in combo])


@dataclass(frozen=True)
class ExactLaw:
    """A probability law with exact rational weights."""

    weights: Mapping

    def __post_init__(self):
        if sum(self.weights.values(), Fraction(0)) != 1:
            raise ValueError("weights must sum to exactly 1")
        if any(w < 0 for w in self.weights.values()):
            raise ValueError("weights must be nonnegative")

    def prob(self, outcome) -> Fraction:
        return self.weights.get(outcome, Fraction(0))

    @property
    def support(self):
        return sorted(k for k, w in self.weights.items() if w > 0)

    def mean(self, value=lambda o: o) -> Fraction:
        return sum((Fraction(value(o)) * w for o, w in self.weights.items()), Fraction(0))


def _degrees_of_parents(parents: tuple[int, ...], n: int) -> list[int]:
    deg = [0] * n
    for p in parents:
        deg[p - 1] += 1
    return deg


def exact_profile_law(n: int, source: str) -> ExactLaw:
    """Law of the degree multiset under either construction.

    source "rrt" averages over the (n-1)! increasing trees, "kingman" over
    the n!(n-1)! driving sequences.  The two laws agree; tests assert it.
    """
    counts: dict[tuple, int] = {}
    if source == "rrt":
        _check_tree_guard(n)
        total = math.factorial(n - 1)
        for parents in _iter_parent_tuples(n):
            key = tuple(sorted(_degrees_of_parents(parents, n), reverse=True))
            counts[key] = counts.get(key, 0) + 1
    elif source == "kingman":
        _check_events_guard(n)
        total = math.factorial(n) * math.factorial(n - 1)
        for ev in enumerate_events(n):
            key = tuple(sorted(replay_degrees(ev).tolist(), reverse=True))
            counts[key] = counts.get(key, 0) + 1
    else:
        raise ValueError(f"source must be 'rrt' or 'kingman', got {source!r}")
    return ExactLaw({k: Fraction(c, total) for k, c in counts.items()})


def phi_fiber_census(n: int) -> dict[RootedTree, int]:
    """How many driving sequences map to each increasing tree after relabelling."""
    _check_events_guard(n)
    fibers: dict[RootedTree, int] = {}
    from .kingman import replay

    for ev in enumerate_events(n):
        key = replay(ev).phi_tree
        fibers[key] = fibers.get(key, 0) + 1
    return fibers


def exact_factorial_moments(
    n: int, spec: Mapping[int, int], top: Optional[int] = None
) -> Fraction:
    """E of the product of falling factorials of profile counts, exactly.

    spec maps profile index -> exponent; when top is given that index uses
    the tail count X_{>=top}.  Averaged over the increasing trees.
    """
    _check_tree_guard(n)
    spec = {int(k): int(a) for k, a in spec.items() if int(a) != 0}
    if any(a < 0 for a in spec.values()):
        raise ValueError("exponents must be nonnegative")
    if top is not None and spec and top != max(spec):
        raise ValueError("top index must be the largest index of the spec")
    fl = floor_log2(n)
    total = 0
    for parents in _iter_parent_tuples(n):
        deg = _degrees_of_parents(parents, n)
        prod = 1
        for k, a in spec.items():
            if k == top:
                val = sum(1 for d in deg if d - fl >= k)
            else:
                val = sum(1 for d in deg if d - fl == k)
            if val < a:
                prod = 0
                break
            prod *= math.perm(val, a)
        total += prod
    return Fraction(total, math.factorial(n - 1))


# ---------------------------------------------------------------------------
# inequality suites
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrthantReport:
    """Joint degree tails versus products of marginal tails over vertex pairs.

    The inequality is a theorem for these trees, so any violation row points
    at an implementation bug rather than at the mathematics.
    """

    n: int
    pairs: tuple[tuple[int, int], ...]
    checks_run: int
    violations: tuple
    rows: tuple = ()

    @property
    def all_hold(self) -> bool:
        return len(self.violations) == 0


def orthant_check(
    n: int,
    pairs: Optional[list[tuple[int, int]]] = None,
    include_rows: bool = False,
) -> OrthantReport:
    """Check P(deg(u) >= s, deg(v) >= t) <= P(deg(u) >= s) P(deg(v) >= t)
    for vertex pairs of the uniform increasing tree, thresholds 0..n-1."""
    _check_tree_guard(n)
    degs = np.array(
        [_degrees_of_parents(p, n) for p in _iter_parent_tuples(n)], dtype=np.int64
    )
    total = degs.shape[0]
    if pairs is None:
        pairs = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)]
    for u, v in pairs:
        if not (1 <= u <= n and 1 <= v <= n) or u == v:
            raise ValueError(f"bad vertex pair ({u}, {v})")
    rows = []
    violations = []
    checks = 0
    for u, v in pairs:
        du = degs[:, u - 1]
        dv = degs[:, v - 1]
        for s in range(n):
            cu = int((du >= s).sum())
            for t in range(n):
                cv = int((dv >= t).sum())
                cj = int(((du >= s) & (dv >= t)).sum())
                lhs = Fraction(cj, total)
                rhs = Fraction(cu, total) * Fraction(cv, total)
                checks += 1
                row = ((u, v), (s, t), lhs, rhs)
                if lhs > rhs:
                    violations.append(row)
                if include_rows:
                    rows.append(row)
    return OrthantReport(
        n=n,
        pairs=tuple(pairs),
        checks_run=checks,
        violations=tuple(violations),
        rows=tuple(rows),
    )


@dataclass(frozen=True)
class AlternatingReport:
    """Truncated inclusion-exclusion for P(X_{>=i} = 0), with the one-step
    bracket E[X] - E[(X)_2]/2 <= P(X_{>=i} > 0) <= E[X]."""

    n: int
    i: int
    r_max: int
    p_zero: Fraction
    partial_sums: tuple  # S_0 .. S_{r_max}
    factorial_moments: tuple  # E[(X)_0] .. E[(X)_{r_max}]
    pz_lower: Fraction
    pz_upper: Fraction

    @property
    def bounds_hold(self) -> bool:
        for r, s in enumerate(self.partial_sums):
            if r % 2 == 0 and s < self.p_zero:
                return False
            if r % 2 == 1 and s > self.p_zero:
                return False
        return True

    @property
    def pz_holds(self) -> bool:
        return self.pz_lower <= 1 - self.p_zero <= self.pz_upper


def alternating_bounds(n: int, i: int, r_max: int = 4) -> AlternatingReport:
    """Exact alternating bounds for the probability of an empty tail cell."""
    _check_tree_guard(n)
    if r_max < 1:
        raise ValueError(f"need r_max >= 1, got {r_max}")
    fl = floor_log2(n)
    total = math.factorial(n - 1)
    tail_counts = []
    for parents in _iter_parent_tuples(n):
        deg = _degrees_of_parents(parents, n)
        tail_counts.append(sum(1 for d in deg if d - fl >= i))
    zero = sum(1 for x in tail_counts if x == 0)
    p_zero = Fraction(zero, total)
    moments = []
    for r in range(r_max + 1):
        moments.append(Fraction(sum(math.perm(x, r) for x in tail_counts), total))
    sums = []
    acc = Fraction(0)
    for r in range(r_max + 1):
        acc += Fraction((-1) ** r) * moments[r] / math.factorial(r)
        sums.append(acc)
    return AlternatingReport(
        n=n,
        i=i,
        r_max=r_max,
        p_zero=p_zero,
        partial_sums=tuple(sums),
        factorial_moments=tuple(moments),
        pz_lower=moments[1] - moments[2] / 2,
        pz_upper=moments[1],
    )


@dataclass(frozen=True)
class DecouplingReport:
    """Degree tails versus coin-discounted selection tails, exactly.

    k = 1 is an identity: P(deg(1) >= m) = 2^-m P(|S_1| >= m).  For k = 2 the
    upper bound discounts the joint selection tail, the lower bound also
    truncates selections at a horizon I that precedes the first step whose
    pair lies in {1, 2}.
    """

    n: int
    k1_rows: tuple  # (m, lhs, rhs)
    k2_upper_rows: tuple  # ((m1, m2), lhs, rhs)
    k2_lower_rows: tuple  # ((m1, m2), I, lhs, rhs)
    violations: tuple

    @property
    def all_hold(self) -> bool:
        return len(self.violations) == 0

    @property
    def k1_equalities_hold(self) -> bool:
        return all(lhs == rhs for _, lhs, rhs in self.k1_rows)


def decoupling_check(n: int, horizons: Optional[list[int]] = None) -> DecouplingReport:
    """Exhaustively verify the selection-set decoupling bounds at small n."""
    _check_events_guard(n)
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if horizons is None:
        horizons = list(range(1, n))
    deg1, deg2, s1, s2, t2 = [], [], [], [], []
    c1, c2 = [], []
    for ev in enumerate_events(n):
        deg = replay_degrees(ev)
        recs = selection_records(ev)
        deg1.append(int(deg[0]))
        deg2.append(int(deg[1]))
        s1.append(len(recs[1].times))
        s2.append(len(recs[2].times))
        t2.append(tau_k(ev, 2))
        c1.append([sum(1 for t in recs[1].times if t <= h) for h in range(1, n)])
        c2.append([sum(1 for t in recs[2].times if t <= h) for h in range(1, n)])
    deg1 = np.array(deg1)
    deg2 = np.array(deg2)
    s1 = np.array(s1)
    s2 = np.array(s2)
    t2 = np.array(t2)
    c1 = np.array(c1)
    c2 = np.array(c2)
    total = deg1.shape[0]

    k1_rows = []
    violations = []
    for m in range(1, n):
        lhs = Fraction(int((deg1 >= m).sum()), total)
        rhs = Fraction(int((s1 >= m).sum()), total) / 2**m
        k1_rows.append((m, lhs, rhs))
        if lhs != rhs:
            violations.append(("k1", m, lhs, rhs))

    k2_upper = []
    k2_lower = []
    for m1 in range(1, n):
        for m2 in range(1, n):
            joint = (deg1 >= m1) & (deg2 >= m2)
            lhs = Fraction(int(joint.sum()), total)
            disc = Fraction(1, 2 ** (m1 + m2))
            rhs = disc * Fraction(int(((s1 >= m1) & (s2 >= m2)).sum()), total)
            k2_upper.append(((m1, m2), lhs, rhs))
            if lhs > rhs:
                violations.append(("k2-upper", (m1, m2), lhs, rhs))
            for h in horizons:
                ok = (t2 > h) & (c1[:, h - 1] >= m1) & (c2[:, h - 1] >= m2)
                low = disc * Fraction(int(ok.sum()), total)
                k2_lower.append(((m1, m2), h, lhs, low))
                if lhs < low:
                    violations.append(("k2-lower", (m1, m2), h, lhs, low))
    return DecouplingReport(
        n=n,
        k1_rows=tuple(k1_rows),
        k2_upper_rows=tuple(k2_upper),
        k2_lower_rows=tuple(k2_lower),
        violations=tuple(violations),
    )
