import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rrtlab import (
    DegreeVector,
    InvalidStructureError,
    RootedTree,
    child_counts,
    degree_multiset,
    is_increasing,
)


def test_singleton():
    t = RootedTree(1, 1, {})
    assert t.n == 1 and t.root == 1
    assert t.children() == {1: []}


def test_path_tree_children():
    t = RootedTree(3, 1, {2: 1, 3: 2})
    assert t.children() == {1: [2], 2: [3], 3: []}


def test_rejects_cycle():
    with pytest.raises(InvalidStructureError):
        RootedTree(4, 1, {2: 3, 3: 2, 4: 1})


def test_rejects_root_parent_entry():
    with pytest.raises(InvalidStructureError):
        RootedTree(2, 1, {1: 2, 2: 1})


def test_rejects_wrong_entry_count():
    with pytest.raises(InvalidStructureError):
        RootedTree(3, 1, {2: 1})


def test_rejects_out_of_range_edge():
    with pytest.raises(InvalidStructureError):
        RootedTree(2, 1, {2: 5})


def test_rejects_self_loop():
    with pytest.raises(InvalidStructureError):
        RootedTree(3, 1, {2: 2, 3: 1})


def test_immutable():
    t = RootedTree(2, 1, {2: 1})
    with pytest.raises(AttributeError):
        t.root = 2
    with pytest.raises(TypeError):
        t.parent[2] = 2


def test_eq_and_hash_ignore_dict_order():
    a = RootedTree(3, 1, {2: 1, 3: 1})
    b = RootedTree(3, 1, {3: 1, 2: 1})
    c = RootedTree(3, 1, {2: 1, 3: 2})
    assert a == b
    assert hash(a) == hash(b)
    assert a != c


def test_json_roundtrip_nonstandard_root():
    t = RootedTree(4, 2, {1: 2, 3: 1, 4: 3})
    assert RootedTree.from_json(t.to_json()) == t


def test_from_json_rejects_garbage():
    with pytest.raises(InvalidStructureError):
        RootedTree.from_json('{"n": 2}')


def test_degree_vector_validates_sum():
    with pytest.raises(InvalidStructureError):
        DegreeVector(np.array([1, 1]))


def test_degree_vector_rejects_negative():
    with pytest.raises(InvalidStructureError):
        DegreeVector(np.array([-1, 2]))


def test_degree_vector_accessors():
    d = DegreeVector(np.array([2, 0, 0]))
    assert d.n == 3
    assert d.of(1) == 2 and d.of(3) == 0
    assert d.as_dict() == {1: 2, 2: 0, 3: 0}
    assert d.multiset() == (2, 0, 0)
    with pytest.raises(InvalidStructureError):
        d.of(4)


def test_child_counts_star():
    t = RootedTree(4, 1, {2: 1, 3: 1, 4: 1})
    assert child_counts(t) == DegreeVector(np.array([3, 0, 0, 0]))
    assert degree_multiset(t) == (3, 0, 0, 0)


def test_is_increasing():
    assert is_increasing(RootedTree(3, 1, {2: 1, 3: 2}))
    assert not is_increasing(RootedTree(3, 2, {1: 2, 3: 2}))
    assert not is_increasing(RootedTree(3, 1, {3: 1, 2: 3}))


@st.composite
def parent_maps(draw):
    n = draw(st.integers(1, 12))
    parent = {v: draw(st.integers(1, v - 1)) for v in range(2, n + 1)}
    return n, parent


@given(parent_maps())
def test_increasing_parent_maps_always_validate(case):
    n, parent = case
    t = RootedTree(n, 1, parent)
    d = child_counts(t)
    assert int(d.counts.sum()) == n - 1
    assert is_increasing(t)
    assert RootedTree.from_json(t.to_json()) == t
