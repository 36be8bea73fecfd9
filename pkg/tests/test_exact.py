import math
from fractions import Fraction

import pytest

from rrtlab import (
    ResourceGuardError,
    RootedTree,
    alternating_bounds,
    decoupling_check,
    enumerate_events,
    enumerate_increasing_trees,
    exact_factorial_moments,
    exact_profile_law,
    is_increasing,
    orthant_check,
    phi_fiber_census,
    replay,
)


# ---------------------------------------------------------------------------
# counting
# ---------------------------------------------------------------------------


def test_increasing_tree_counts():
    for n in range(1, 8):
        assert sum(1 for _ in enumerate_increasing_trees(n)) == math.factorial(n - 1)


def test_all_enumerated_trees_are_increasing():
    for t in enumerate_increasing_trees(5):
        assert is_increasing(t)


def test_event_counts():
    for n in range(2, 6):
        want = math.factorial(n) * math.factorial(n - 1)
        assert sum(1 for _ in enumerate_events(n)) == want


def test_fiber_census_constant():
    for n in (2, 3, 4):
        census = phi_fiber_census(n)
        assert len(census) == math.factorial(n - 1)
        assert set(census.values()) == {math.factorial(n)}


def test_fibers_cover_exactly_the_increasing_trees():
    census = phi_fiber_census(4)
    assert set(census) == set(enumerate_increasing_trees(4))


def test_enumeration_guards():
    with pytest.raises(ResourceGuardError):
        list(enumerate_increasing_trees(10))
    with pytest.raises(ResourceGuardError):
        list(enumerate_events(7))
    with pytest.raises(ResourceGuardError):
        exact_profile_law(12, "rrt")


# ---------------------------------------------------------------------------
# degree laws
# ---------------------------------------------------------------------------


def test_profile_law_n3():
    law = exact_profile_law(3, "rrt")
    assert law.prob((1, 1, 0)) == Fraction(1, 2)
    assert law.prob((2, 0, 0)) == Fraction(1, 2)


def test_profile_law_n4():
    law = exact_profile_law(4, "rrt")
    assert law.prob((1, 1, 1, 0)) == Fraction(1, 6)
    assert law.prob((2, 1, 0, 0)) == Fraction(2, 3)
    assert law.prob((3, 0, 0, 0)) == Fraction(1, 6)


def test_law_equality_both_constructions():
    # the relabelling pushes the merge-chain law onto the growth law exactly
    for n in range(2, 7):
        a = exact_profile_law(n, "rrt")
        b = exact_profile_law(n, "kingman")
        assert dict(a.weights) == dict(b.weights)


def test_law_rejects_unknown_source():
    with pytest.raises(ValueError):
        exact_profile_law(3, "other")


def test_exact_factorial_moment_n4():
    # E[X_0] at n = 4: floor_log = 2, one vertex of degree 2 with prob 2/3
    assert exact_factorial_moments(4, {0: 1}) == Fraction(2, 3)


def test_exact_factorial_moments_consistency():
    # E[X_{-1}] + E[X_0] + ... weighted by cell counts recovers n
    n = 5
    fl = 2
    total = Fraction(0)
    for i in range(-fl, n - fl):
        total += exact_factorial_moments(n, {i: 1})
    assert total == n


def test_exact_second_factorial_moment():
    # (X)_2 of the degree-0 cell at n = 3: the path has one degree-0 vertex
    # ((1)_2 = 0), the star has two ((2)_2 = 2), each with prob 1/2
    val = exact_factorial_moments(3, {-1: 2})
    assert val == 1


# ---------------------------------------------------------------------------
# inequality suites
# ---------------------------------------------------------------------------


def test_orthant_holds_small_n():
    for n in range(2, 6):
        rep = orthant_check(n)
        assert rep.all_hold
        assert rep.violations == ()


def test_orthant_rows_make_sense():
    rep = orthant_check(3, include_rows=True)
    assert len(rep.rows) == rep.checks_run
    for _, _, lhs, rhs in rep.rows:
        assert lhs <= rhs


def test_alternating_bounds_bracket():
    for n in range(2, 8):
        fl = n.bit_length() - 1
        for i in range(-fl, n - fl):
            rep = alternating_bounds(n, i, r_max=4)
            assert rep.bounds_hold
            assert rep.pz_holds
            assert rep.pz_lower <= 1 - rep.p_zero <= rep.pz_upper


def test_alternating_n4_values():
    # tail count X_{>=0} at n = 4: empty only for the profile (1,1,1,0),
    # mass 1/6; mean 5/6; two vertices of degree >= 2 cannot fit, so the
    # second factorial moment vanishes and the bracket is tight
    rep = alternating_bounds(4, 0)
    assert rep.p_zero == Fraction(1, 6)
    assert rep.factorial_moments[1] == Fraction(5, 6)
    assert rep.factorial_moments[2] == 0
    assert rep.pz_lower == rep.pz_upper == Fraction(5, 6)


def test_decoupling_small_n():
    for n in range(2, 6):
        rep = decoupling_check(n)
        assert rep.all_hold
        assert rep.k1_equalities_hold
        assert rep.violations == ()


def test_guards_on_suites():
    with pytest.raises(ResourceGuardError):
        orthant_check(10)
    with pytest.raises(ResourceGuardError):
        decoupling_check(8)


# ---------------------------------------------------------------------------
# law objects
# ---------------------------------------------------------------------------


def test_law_support_and_mean():
    law = exact_profile_law(4, "rrt")
    assert set(law.support) == {(1, 1, 1, 0), (2, 1, 0, 0), (3, 0, 0, 0)}
    assert sum(law.prob(s) for s in law.support) == 1


def test_replay_agrees_with_census_convention():
    # every enumerated event sequence must replay to a tree counted by the census
    census = phi_fiber_census(3)
    for ev in enumerate_events(3):
        out = replay(ev)
        assert out.phi_tree in census
