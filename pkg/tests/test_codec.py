import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latticeplan.codec import (LatticePath, OrderedTree, PathError, Side, TreeNode, TupleError,
                               dump_tuples, enumerate_tuples, load_tuples, path_to_tuple,
                               tree_to_tuple, tuple_to_path, tuple_to_tree, validate_tuple)
from tests.oracles import catalan, dyck_tuples, repair_tuple


@pytest.mark.parametrize("t", [(1, 0), (4, 0, 0, 0, 0), (1, 1, 0), (2, 0, 1, 0)])
def test_valid_tuples(t):
    assert validate_tuple(t)


@pytest.mark.parametrize("t, fragment", [
    ((0, 1), "prefix"),
    ((1, 1), "t_n"),
    ((3, 0, 0), "outside"),
    ((1, 0, 0), "prefix"),
    ((2, 0, 0, 0), "prefix"),
    ((2, 2, 0), "sum"),
    ((), "empty"),
])
def test_invalid_tuples_report_reason(t, fragment):
    verdict = validate_tuple(t)
    assert not verdict
    assert fragment in verdict.reason


def test_tuple_to_path_examples():
    assert tuple_to_path((1, 0)).nodes == ((0, 0), (0, 1), (1, 1))
    assert tuple_to_path((1, 1, 0)).nodes == ((0, 0), (0, 1), (1, 2), (2, 2))
    below = tuple_to_path((1, 0), Side.BELOW)
    assert below.nodes == ((0, 0), (1, 0), (1, 1))
    assert below.side is Side.BELOW


def test_tuple_to_path_rejects_invalid():
    with pytest.raises(TupleError):
        tuple_to_path((0, 1))


def test_path_to_tuple_examples():
    assert path_to_tuple(LatticePath(((0, 0), (0, 1), (1, 1)))) == (1, 0)
    assert path_to_tuple(LatticePath(((0, 0), (0, 1), (1, 2), (2, 2)))) == (1, 1, 0)
    assert path_to_tuple(LatticePath(((0, 0), (1, 0), (1, 1)), Side.BELOW)) == (1, 0)


@pytest.mark.parametrize("nodes", [
    ((0, 0), (0, 2), (1, 1), (2, 2)),          # descends
    ((0, 0), (1, 0), (1, 1)),                  # below the diagonal, declared above
    ((1, 0), (0, 1), (1, 1)),                  # wrong start
    ((0, 0), (0, 1), (2, 2)),                  # skips a column
    ((0, 0), (0, 1), (1, 1), (2, 1)),          # wrong end
])
def test_path_to_tuple_rejects(nodes):
    with pytest.raises(PathError):
        path_to_tuple(LatticePath(nodes))


def test_tuple_to_tree_examples():
    star = tuple_to_tree((2, 0, 0))
    assert star.child_lists() == [[1, 2], [], []]
    chain = tuple_to_tree((1, 1, 0))
    assert chain.child_lists() == [[1], [2], []]
    # hand stack trace: root expects 2; node1 expects 1 and takes node2; node3 goes to root
    t = tuple_to_tree((2, 1, 0, 0))
    assert [n.parent for n in t.nodes] == [None, 0, 1, 0]
    assert t.child_lists() == [[1, 3], [2], [], []]


def test_tree_to_tuple_examples():
    root_two_leaves = OrderedTree((TreeNode(2, None), TreeNode(0, 0), TreeNode(0, 0)))
    assert tree_to_tuple(root_two_leaves) == (2, 0, 0)
    chain = OrderedTree((TreeNode(1, None), TreeNode(1, 0), TreeNode(0, 1)))
    assert tree_to_tuple(chain) == (1, 1, 0)


def test_enumerate_small_cases():
    assert enumerate_tuples(2) == [(1, 0)]
    assert len(enumerate_tuples(5)) == 14
    assert len(enumerate_tuples(8)) == 429


@pytest.mark.parametrize("n", range(2, 9))
def test_enumeration_matches_dyck_oracle(n):
    assert enumerate_tuples(n) == dyck_tuples(n)


@pytest.mark.parametrize("n", range(2, 11))
def test_enumeration_counts_are_catalan(n):
    tuples = enumerate_tuples(n)
    assert len(tuples) == catalan(n - 1)
    assert len(set(tuples)) == len(tuples)


@pytest.mark.parametrize("n", [1, 16])
def test_enumeration_guard(n):
    with pytest.raises(ValueError):
        enumerate_tuples(n)


@pytest.mark.parametrize("n", range(2, 9))
def test_exhaustive_roundtrips(n):
    paths = set()
    for t in enumerate_tuples(n):
        p = tuple_to_path(t)
        assert p.nodes[-1] == (n - 1, n - 1)
        assert all(y >= x for x, y in p.nodes)
        assert path_to_tuple(p) == t
        assert path_to_tuple(tuple_to_path(t, Side.BELOW)) == t
        tree = tuple_to_tree(t)
        assert len(tree.nodes) == n and tree.edge_count == n - 1
        assert tree_to_tuple(tree) == t
        paths.add(p.nodes)
    assert len(paths) == catalan(n - 1)


def test_random_tree_roundtrips():
    rng = np.random.default_rng(7)
    for _ in range(10_000):
        n = int(rng.integers(2, 65))
        t = repair_tuple(rng.geometric(0.5, size=n) - 1)
        assert validate_tuple(t)
        assert tree_to_tuple(tuple_to_tree(t)) == t


@st.composite
def valid_tuples(draw, max_n=256):
    n = draw(st.integers(2, max_n))
    raw = draw(st.lists(st.integers(0, 6), min_size=n, max_size=n))
    return repair_tuple(raw)


@given(valid_tuples())
def test_roundtrips_property(t):
    assert validate_tuple(t)
    assert path_to_tuple(tuple_to_path(t)) == t
    assert tree_to_tuple(tuple_to_tree(t)) == t
    preorder_counts = tuple(node.children for node in tuple_to_tree(t).nodes)
    assert preorder_counts == t


def test_serialization_roundtrip():
    tuples = enumerate_tuples(5)
    text = dump_tuples(tuples)
    assert text.splitlines()[0] == "1,1,1,1,0"
    assert load_tuples(text) == tuples
    p = tuple_to_path((1, 1, 0))
    assert json.loads(p.to_json()) == [[0, 0], [0, 1], [1, 2], [2, 2]]
    assert LatticePath.from_json(p.to_json()) == p
