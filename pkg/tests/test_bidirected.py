import itertools

import pytest

from conftest import graph, load
from magset.bidirected import (
    analyse,
    bidirected_classes,
    block_partition,
    check_order,
    chordless_cycles,
    forbidden_scan,
    partition_failure,
    root_tree,
    rooted_condition,
    rooted_decomposition,
)
from magset.generators import all_bidirected
from magset.graph_core import GraphError, cycle_graph, dual_graph
from magset.heads import constrained_sets, pset_bits
from magset.imset_algebra import standard_imset
from magset.markov_props import verdict

CHAIN5_ORDER = (0, 2, 4, 1, 3)  # 1,3,5,2,4


def test_class_counts():
    assert [len(bidirected_classes(n)) for n in range(1, 6)] == [1, 2, 4, 11, 34]


def test_root_tree_cases():
    assert root_tree([[False]]).root == 0
    t = root_tree([[False, False], [False, False]])
    assert t.root == 0 and t.high.root == 1 and t.low is None
    t = root_tree([[False, True], [True, False]])
    assert t is not None and t.root == 1 and t.low.root == 0


def test_chain5_witness_list():
    g = load("chain5")
    w = check_order(g, CHAIN5_ORDER)
    assert w is not None
    lst = rooted_decomposition(g, w)
    expected = [
        g.triple([3], [1]),
        g.triple([5], [1, 3]),
        g.triple([2], [5], [1, 3]),
        g.triple([4], [2], [1, 5]),
        g.triple([4], [1], [3, 5]),
    ]
    assert lst.as_set() == {t.canonical() for t in expected}
    assert len(lst) == 5


def test_chain5_default_witness_also_decomposes():
    g = load("chain5")
    w = rooted_condition(g)
    assert w is not None
    lst = rooted_decomposition(g, w)
    assert lst.imset() == standard_imset(g)


def test_cycle4_rooted_no_hits():
    g = load("cycle4")
    rep = analyse(g)
    assert rep.rooted and rep.forbidden_hits == []


def test_cycle5_fails_with_hit_b():
    g = cycle_graph(5)
    assert rooted_condition(g) is None
    hits = forbidden_scan(g)
    assert [h.pattern for h in hits] == ["b"]
    assert hits[0].format(g) == "(b) k=5 on 1,3,5,2,4"
    assert partition_failure(dual_graph(g), 4, g.full) != ""


def test_chain6_hit():
    g = load("chain6")
    rep = analyse(g)
    assert not rep.rooted
    assert "chain6" in {h.pattern for h in rep.forbidden_hits}


def test_chordless_cycles():
    c = cycle_graph(6)
    assert chordless_cycles(c.sib, 5) == [(0, 1, 2, 3, 4, 5)]
    assert chordless_cycles(cycle_graph(4).sib, 5) == []


def test_directed_rejected():
    with pytest.raises(GraphError):
        rooted_condition(graph("1 -> 2"))


def test_fixed_order_can_fail_where_search_succeeds():
    g = load("chain5")
    assert rooted_condition(g) is not None
    failures = 0
    for order in itertools.permutations(range(5)):
        failures += check_order(g, order) is None
    assert 0 < failures < 120


def test_decomposition_partitions_disconnected_sets():
    for n in range(2, 6):
        for g in all_bidirected(n):
            w = rooted_condition(g)
            if w is None:
                continue
            lst = rooted_decomposition(g, w, check=False)
            ps = pset_bits(g)
            covered = [S for t in lst for S in constrained_sets(t)]
            assert len(covered) == len(set(covered))
            assert set(covered) == {S for S in range(1, 1 << n) if not ps >> S & 1}


def test_rooted_iff_perfect_n5():
    for n in range(1, 6):
        for g in bidirected_classes(n):
            v = verdict(g, all_triples_check=False, check_faithful="none")
            good = v.combinatorial and v.perfectly_markovian
            assert (rooted_condition(g) is not None) == good
            assert (not forbidden_scan(g)) == v.perfectly_markovian


def test_block_partition_first_vertex():
    g = load("chain5")
    p = block_partition(dual_graph(g), 0, 1)
    assert p is not None and p.blocks == []
