import itertools
import math
import random

import networkx as nx
import pytest

from chordenum import oracle as o
from chordenum.gfsystem import ktree_count
from chordenum.oracle import LabelledGraph as G


def k4_minus_edge():
    return G.from_edges(4, [e for e in itertools.combinations(range(4), 2) if e != (2, 3)])


def chordal_graphs(n):
    for mask in range(1 << math.comb(n, 2)):
        g = G.from_mask(n, mask)
        if o.is_chordal(g):
            yield g


def test_graph_invariants():
    with pytest.raises(o.OracleError):
        G(2, (0b10, 0))
    with pytest.raises(o.OracleError):
        G(1, (1,))
    with pytest.raises(o.OracleError):
        G.from_edges(2, [(0, 0)])


def test_is_chordal():
    assert not o.is_chordal(G.cycle(4))
    assert o.is_chordal(G.complete(5))
    assert o.is_chordal(G.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]))
    assert not o.is_chordal(G.cycle(5))


def test_treewidth():
    assert o.treewidth_chordal(G.path(5)) == 1
    assert o.treewidth_chordal(G.complete(4)) == 3
    assert o.treewidth_chordal(k4_minus_edge()) == 2
    with pytest.raises(o.OracleError):
        o.treewidth_chordal(G.cycle(4))


def test_is_k_connected():
    assert not o.is_k_connected(G.path(3), 2)
    assert o.is_k_connected(G.complete(2), 2)
    assert not o.is_k_connected(G.complete(1), 2)
    assert o.is_k_connected(G(0, ()), 0)
    assert not o.is_k_connected(G.from_edges(3, [(0, 1)]), 1)
    assert o.is_k_connected(G.from_edges(3, [(0, 1)]), 0)
    assert o.connectivity(G.complete(4)) == 4
    assert o.connectivity(k4_minus_edge()) == 2


def test_count_cliques():
    assert o.count_cliques(G.complete(4), 3) == 4
    assert o.count_cliques(k4_minus_edge(), 1) == 4
    assert o.count_cliques(k4_minus_edge(), 3) == 2


def test_enumerate_count_examples():
    assert o.enumerate_count(1, 1, 4) == 16
    assert o.enumerate_count(2, 0, 3) == 8
    assert o.enumerate_count(2, 2, 4) == 6
    with pytest.raises(o.OracleError):
        o.enumerate_count(2, 1, 9)


def test_census_matches_filtering():
    """The (clique number, connectivity) census against per-graph predicates."""
    n = 5
    for t in range(1, 4):
        for k in range(0, t + 1):
            direct = sum(
                1 for g in chordal_graphs(n) if o.treewidth_chordal(g) <= t and o.is_k_connected(g, k)
            )
            assert o.enumerate_count(t, k, n) == direct


def test_ktree_diagonal_oracle():
    for t in (1, 2, 3):
        for n in range(1, 7):
            assert o.enumerate_count(t, t, n) == ktree_count(t, n)


def test_parallel_census_agrees():
    o._CENSUS.pop(5, None)
    serial = dict(o.census(5))
    o._CENSUS.pop(5, None)
    assert dict(o.census(5, workers=2)) == serial


def test_minimal_separators_are_cliques():
    g = G.from_edges(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)])
    seps = o.minimal_separators(g)
    assert frozenset({2}) in seps
    assert all(o.is_clique(g, s) for s in seps)
    # a non-chordal graph has a non-clique minimal separator
    assert not all(o.is_clique(G.cycle(4), s) for s in o.minimal_separators(G.cycle(4)))


def test_slices():
    g = G.path(3)
    dec = o.slices(g, {1})
    assert dec.separator == frozenset({1})
    assert sorted(map(sorted, dec.slices)) == [[0, 1], [1, 2]]


def test_decompose_examples():
    assert o.decompose(G.complete(4), 3) == [frozenset(range(4))]
    assert o.decompose(G.path(3), 1) == [frozenset({0, 1}), frozenset({1, 2})]
    with pytest.raises(o.OracleError):
        o.decompose(G.cycle(4), 1)
    with pytest.raises(o.OracleError):
        o.decompose(G.path(3), 2)


def test_decompose_k1_is_block_decomposition():
    rng = random.Random(7)
    graphs = [g for g in chordal_graphs(6) if o.is_k_connected(g, 1)]
    for g in rng.sample(graphs, 300):
        ref = nx.Graph(g.edges())
        blocks = sorted((frozenset(b) for b in nx.biconnected_components(ref)), key=sorted)
        assert o.decompose(g, 1) == blocks


def test_validate_examples():
    for k in range(0, 4):
        assert o.validate_decomposition(G.complete(4), k)
    with pytest.raises(o.OracleError):
        o.validate_decomposition(G.cycle(4), 1)


def test_clique_bookkeeping():
    g = G.from_edges(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)])
    assert o.clique_bookkeeping(g, 1)
    parts = o.decompose(g, 1)
    # clique counts of the whole from the parts, shared k-cliques counted once
    for i in range(2, 4):
        assert o.count_cliques(g, i) == sum(o.count_cliques(g.induced(p), i) for p in parts)


@pytest.mark.slow
def test_validate_sweep_n5():
    for n in range(1, 6):
        for g in chordal_graphs(n):
            for k in range(0, min(o.connectivity(g), 3) + 1):
                verdict = o.validate_decomposition(g, k)
                assert verdict, verdict.reason
                assert o.clique_bookkeeping(g, k)
