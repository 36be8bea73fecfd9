import math
from collections import Counter

import numpy as np
import scipy.stats as sps
from hypothesis import given
from hypothesis import strategies as st

from rrtlab import child_counts, degree_sample, grow_rrt, is_increasing
from rrtlab.exact import enumerate_increasing_trees


@given(st.integers(2, 50), st.integers(0, 2**32 - 1))
def test_growth_yields_increasing_trees(n, seed):
    t = grow_rrt(n, np.random.default_rng(seed))
    assert is_increasing(t)


def test_degree_sample_matches_grown_tree():
    # both draw the same attachment vector, so equal seeds must agree exactly
    for seed in range(40):
        for n in (2, 3, 7, 64):
            d1 = degree_sample(n, np.random.default_rng(seed))
            d2 = child_counts(grow_rrt(n, np.random.default_rng(seed)))
            assert d1 == d2


def test_uniform_over_increasing_trees_n4():
    # 6 increasing trees on 4 vertices, each with probability 1/6
    trees = list(enumerate_increasing_trees(4))
    assert len(trees) == 6
    rng = np.random.default_rng(11)
    counts = Counter(grow_rrt(4, rng) for _ in range(12000))
    assert set(counts) == set(trees)
    expected = [12000 / 6] * 6
    stat = sum((c - e) ** 2 / e for c, e in zip(counts.values(), expected))
    assert sps.chi2.sf(stat, 5) > 1e-4


def test_uniform_over_increasing_trees_n5():
    trees = list(enumerate_increasing_trees(5))
    assert len(trees) == 24
    rng = np.random.default_rng(12)
    counts = Counter(grow_rrt(5, rng) for _ in range(24000))
    stat = sum((counts.get(t, 0) - 1000) ** 2 / 1000 for t in trees)
    assert sps.chi2.sf(stat, 23) > 1e-4


def test_root_degree_mean():
    # E[deg(1)] = H_{n-1}
    n = 200
    rng = np.random.default_rng(13)
    reps = 4000
    vals = np.array([degree_sample(n, rng).of(1) for _ in range(reps)], float)
    target = sum(1.0 / i for i in range(1, n))
    se = vals.std(ddof=1) / math.sqrt(reps)
    assert abs(vals.mean() - target) < 4 * se


def test_single_vertex():
    t = grow_rrt(1, np.random.default_rng(0))
    assert t.n == 1 and t.root == 1
    assert degree_sample(1, np.random.default_rng(0)).counts.tolist() == [0]
