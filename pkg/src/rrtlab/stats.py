"""Degree profile statistics, limiting reference laws, goodness of fit.

Profiles are indexed relative to floor(log2 n): X_i is the number of vertices
of degree floor(log2 n) + i.  The floor is computed from the integer bit
length, never through floating point, so powers of two land exactly on
eps = 0.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy import stats as sps

from .errors import InvalidStructureError
from .trees import DegreeVector

__all__ = [
    "floor_log2",
    "epsilon",
    "DegreeProfile",
    "profile",
    "limit_mean",
    "tail_reference",
    "LimitLaw",
    "MomentSpec",
    "falling_factorial",
    "moment_prediction",
    "factorial_moment_estimate",
    "clt_zscore",
    "min_geometric_pmf",
    "selection_size_mean",
    "selection_size_bernoulli_sample",
    "PoissonRef",
    "NormalRef",
    "FiniteRef",
    "GofReport",
    "gof",
    "two_sample_chi_square",
]


def floor_log2(n: int) -> int:
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return n.bit_length() - 1


def epsilon(n: int) -> float:
    """Fractional part of log2 n, exactly 0.0 at powers of two."""
    fl = floor_log2(n)
    if n == 1 << fl:
        return 0.0
    return math.log2(n) - fl


@dataclass(frozen=True)
class DegreeProfile:
    """Counts X_i of vertices at degree floor_log + i; only nonzero i stored."""

    n: int
    eps: float
    floor_log: int
    delta: int  # maximum degree
    x: Mapping[int, int]

    def __post_init__(self):
        if sum(self.x.values()) != self.n:
            raise InvalidStructureError("profile counts must sum to n")
        if self.delta != max(i for i, c in self.x.items() if c > 0) + self.floor_log:
            raise InvalidStructureError("delta inconsistent with profile support")

    @classmethod
    def from_degrees(cls, degrees: Iterable[int], n: Optional[int] = None) -> "DegreeProfile":
        counts = Counter(int(d) for d in degrees)
        if n is None:
            n = sum(counts.values())
        if sum(counts.values()) != n:
            raise InvalidStructureError("degree count does not match n")
        if sum(d * c for d, c in counts.items()) != n - 1:
            raise InvalidStructureError("degrees must sum to n - 1")
        fl = floor_log2(n)
        x = {d - fl: c for d, c in sorted(counts.items()) if c > 0}
        return cls(n, epsilon(n), fl, max(counts), dict(x))

    def x_at(self, i: int) -> int:
        return self.x.get(i, 0)

    def x_ge(self, i: int) -> int:
        return sum(c for j, c in self.x.items() if j >= i)


def profile(degrees: DegreeVector) -> DegreeProfile:
    """Degree profile of a degree vector."""
    counts = np.bincount(degrees.counts)
    n = degrees.n
    fl = floor_log2(n)
    x = {int(d) - fl: int(c) for d, c in enumerate(counts) if c > 0}
    return DegreeProfile(n, epsilon(n), fl, int(len(counts) - 1), x)


def limit_mean(i: int, eps: float) -> float:
    """Limiting mean of X_i: 2^(-i-1+eps)."""
    return 2.0 ** (-i - 1 + eps)


def tail_reference(i: int, eps: float) -> float:
    """Limiting value of P(max degree >= floor_log + i): 1 - exp(-2^(-i+eps))."""
    return 1.0 - math.exp(-(2.0 ** (-i + eps)))


@dataclass(frozen=True)
class LimitLaw:
    """Limit reference at a fixed eps: cell means, max-degree tail, z-scores."""

    eps: float

    def mean(self, i: int) -> float:
        return limit_mean(i, self.eps)

    def tail(self, i: int) -> float:
        return tail_reference(i, self.eps)

    def standardize(self, x: float, i: int) -> float:
        mu = self.mean(i)
        return (x - mu) / math.sqrt(mu)


@dataclass(frozen=True)
class MomentSpec:
    """Which product of falling factorials to take.

    a maps profile index -> exponent.  When top is set, the factor at index
    top uses the tail count X_{>=top} instead of X_{top}; top must be the
    largest index of the spec.
    """

    a: Mapping[int, int] = field(default_factory=dict)
    top: Optional[int] = None

    def __post_init__(self):
        cleaned = {int(k): int(v) for k, v in self.a.items() if int(v) != 0}
        for k, v in cleaned.items():
            if v < 0:
                raise ValueError(f"exponent a_{k} = {v} must be nonnegative")
        object.__setattr__(self, "a", cleaned)
        if self.top is not None:
            if self.top not in cleaned:
                raise ValueError(f"top index {self.top} has no exponent")
            if self.top != max(cleaned):
                raise ValueError("top index must be the largest index of the spec")

    def to_jsonable(self) -> dict:
        return {"a": {str(k): v for k, v in sorted(self.a.items())}, "top": self.top}


def falling_factorial(x: float, a: int) -> float:
    """(x)_a = x (x-1) ... (x-a+1), with (x)_0 = 1."""
    if a < 0:
        raise ValueError(f"need a >= 0, got {a}")
    out = 1.0
    for t in range(a):
        out *= x - t
    return out


def moment_prediction(spec: MomentSpec, eps: float) -> float:
    """Limit of the mixed factorial moment: tail factor 2^(-top+eps) per power,
    plain factors 2^(-(k+1)+eps) per power."""
    out = 1.0
    for k, a in spec.a.items():
        base = 2.0 ** (-k + eps) if k == spec.top else limit_mean(k, eps)
        out *= base**a
    return out


def _spec_value(prof: DegreeProfile, spec: MomentSpec) -> float:
    out = 1.0
    for k, a in spec.a.items():
        val = prof.x_ge(k) if k == spec.top else prof.x_at(k)
        out *= falling_factorial(val, a)
    return out


def factorial_moment_estimate(
    profiles: Sequence[DegreeProfile], spec: MomentSpec
) -> tuple[float, float]:
    """Monte Carlo estimate of the mixed factorial moment and its standard error."""
    if len(profiles) == 0:
        raise ValueError("need at least one profile")
    vals = np.array([_spec_value(p, spec) for p in profiles], dtype=float)
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return est, se


def clt_zscore(prof: DegreeProfile, i: int) -> float:
    """(X_i - mu)/sqrt(mu) with mu the limiting mean at the profile's eps."""
    mu = limit_mean(i, prof.eps)
    return (prof.x_at(i) - mu) / math.sqrt(mu)


# ---------------------------------------------------------------------------
# reference laws for the selection-set machinery
# ---------------------------------------------------------------------------


def min_geometric_pmf(s: int) -> dict[int, float]:
    """Law of min(s, G) where P(G >= m) = 2^-m: the conditional degree law
    given s selections."""
    if s < 0:
        raise ValueError(f"need s >= 0, got {s}")
    pmf = {m: 2.0 ** (-m - 1) for m in range(s)}
    pmf[s] = 2.0 ** (-s)
    return pmf


def selection_size_mean(n: int) -> float:
    """Expected number of selections of a fixed vertex: 2(H_n - 1)."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return 2.0 * math.fsum(1.0 / i for i in range(2, n + 1))


def selection_size_bernoulli_sample(n: int, rng: np.random.Generator) -> int:
    """Draw a sum of independent Bernoulli(2/i), i = 2..n: the reference law
    for the number of selections of a fixed vertex."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if n == 1:
        return 0
    i = np.arange(2, n + 1)
    return int((rng.random(n - 1) < 2.0 / i).sum())


# ---------------------------------------------------------------------------
# goodness of fit
# ---------------------------------------------------------------------------

_TV_TRUNCATION_MASS = 1e-12
_MIN_EXPECTED = 5.0


@dataclass(frozen=True)
class PoissonRef:
    mu: float


@dataclass(frozen=True)
class NormalRef:
    pass


@dataclass(frozen=True)
class FiniteRef:
    pmf: Mapping


@dataclass(frozen=True)
class GofReport:
    chi_square: Optional[tuple[float, int, float]]  # (stat, dof, p)
    tv: Optional[float]
    ks: Optional[float]


def _pool_adjacent(observed: np.ndarray, expected: np.ndarray):
    # greedy left-to-right pooling until every group's expected mass >= 5;
    # a trailing light group is folded into its predecessor
    o_groups, e_groups = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected):
        o_acc += o
        e_acc += e
        if e_acc >= _MIN_EXPECTED:
            o_groups.append(o_acc)
            e_groups.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if e_groups:
            o_groups[-1] += o_acc
            e_groups[-1] += e_acc
        else:
            o_groups.append(o_acc)
            e_groups.append(e_acc)
    return np.array(o_groups), np.array(e_groups)


def _chi_square_from_cells(observed, expected) -> tuple[float, int, float]:
    o, e = _pool_adjacent(np.asarray(observed, float), np.asarray(expected, float))
    if len(o) < 2:
        return 0.0, 0, 1.0
    if (e <= 0).any():
        return math.inf, len(o) - 1, 0.0
    stat = float(((o - e) ** 2 / e).sum())
    dof = len(o) - 1
    return stat, dof, float(sps.chi2.sf(stat, dof))


def _poisson_cells(samples: np.ndarray, mu: float):
    # cells 0..K plus the open reference tail; K covers both the data and all
    # reference mass above the 1e-12 truncation point
    kmax = int(samples.max(initial=0))
    k = 0
    while sps.poisson.sf(k, mu) >= _TV_TRUNCATION_MASS:
        k += 1
    kmax = max(kmax, k)
    support = np.arange(kmax + 1)
    obs = np.bincount(samples, minlength=kmax + 1).astype(float)
    ref = sps.poisson.pmf(support, mu)
    tail = float(sps.poisson.sf(kmax, mu))
    return obs, ref, tail


def gof(samples, reference) -> GofReport:
    """Fit of a sample against a reference law.

    Discrete references get a pooled chi-square and total variation distance
    (reference tail beyond the data pooled into one cell); the normal
    reference gets the Kolmogorov-Smirnov statistic.
    """
    if isinstance(reference, FiniteRef):
        # outcomes may be tuples; keep them out of numpy
        samples = list(samples)
        nsamp = len(samples)
    else:
        samples = np.asarray(samples)
        nsamp = samples.size
    if nsamp == 0:
        raise ValueError("need at least one sample")

    if isinstance(reference, NormalRef):
        ks = float(sps.kstest(samples.astype(float), "norm").statistic)
        return GofReport(chi_square=None, tv=None, ks=ks)

    if isinstance(reference, PoissonRef):
        if samples.dtype.kind not in "iu" or (samples < 0).any():
            raise ValueError("Poisson reference needs nonnegative integer samples")
        obs, ref, tail = _poisson_cells(samples, reference.mu)
        emp = obs / nsamp
        tv = 0.5 * (float(np.abs(emp - ref).sum()) + tail)
        chi = _chi_square_from_cells(obs, np.append(ref * nsamp, tail * nsamp))
        return GofReport(chi_square=chi, tv=tv, ks=None)

    if isinstance(reference, FiniteRef):
        counts = Counter(samples)
        support = sorted(reference.pmf, key=lambda v: (-reference.pmf[v], repr(v)))
        extra = sorted((v for v in counts if v not in reference.pmf), key=repr)
        obs = np.array([counts.get(v, 0) for v in support + extra], float)
        ref = np.array([float(reference.pmf[v]) for v in support] + [0.0] * len(extra))
        tv = 0.5 * float(np.abs(obs / nsamp - ref).sum())
        if extra:
            chi = (math.inf, len(support), 0.0)  # mass where the reference has none
        else:
            chi = _chi_square_from_cells(obs, ref * nsamp)
        return GofReport(chi_square=chi, tv=tv, ks=None)

    raise ValueError(f"unknown reference law {reference!r}")


def two_sample_chi_square(xs, ys, min_count: int = 10) -> tuple[float, int, float]:
    """Chi-square test that two integer samples come from the same law.

    Adjacent value cells are pooled until each holds min_count combined
    observations.
    """
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    lo = int(min(xs.min(), ys.min()))
    hi = int(max(xs.max(), ys.max()))
    cx = np.bincount(xs - lo, minlength=hi - lo + 1)
    cy = np.bincount(ys - lo, minlength=hi - lo + 1)
    col_x, col_y = [], []
    ax = ay = 0
    for a, b in zip(cx, cy):
        ax += int(a)
        ay += int(b)
        if ax + ay >= min_count:
            col_x.append(ax)
            col_y.append(ay)
            ax = ay = 0
    if ax + ay > 0:
        if col_x:
            col_x[-1] += ax
            col_y[-1] += ay
        else:
            col_x.append(ax)
            col_y.append(ay)
    if len(col_x) < 2:
        return 0.0, 0, 1.0
    table = np.array([col_x, col_y])
    stat, p, dof, _ = sps.chi2_contingency(table, correction=False)
    return float(stat), int(dof), float(p)
