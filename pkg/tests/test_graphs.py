"""Stable graph enumeration checked against an independent brute-force
generator with its own isomorphism filtering."""

import itertools

import pytest

from spintaut.graphs import (GraphError, StableGraph, aut_order,
                             canonicalize, contract,
                             enumerate_stable_graphs, enumerate_star_trees,
                             isomorphisms)


def _brute_classes(g, n):
    """All stable graphs of genus g with n legs, one representative per
    isomorphism class, via exhaustive search and permutation-minimal
    serialization.  Deliberately shares no code with the package
    enumerator."""
    reps = set()
    for nv in range(1, 2 * g - 2 + n + 1):
        for h1 in range(g + 1):
            ne = nv - 1 + h1
            gsum = g - h1
            pairs = [(i, j) for i in range(nv) for j in range(i, nv)]
            for genera in itertools.product(range(gsum + 1), repeat=nv):
                if sum(genera) != gsum:
                    continue
                for edges in itertools.combinations_with_replacement(
                        pairs, ne):
                    if not _connected(nv, edges):
                        continue
                    for assign in itertools.product(range(nv), repeat=n):
                        if not _stable(nv, genera, edges, assign):
                            continue
                        reps.add(_min_serial(nv, genera, edges, assign))
    return reps


def _connected(nv, edges):
    seen = {0}
    todo = [0]
    adj = {v: [] for v in range(nv)}
    for (a, b) in edges:
        adj[a].append(b)
        adj[b].append(a)
    while todo:
        for w in adj[todo.pop()]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return len(seen) == nv


def _stable(nv, genera, edges, assign):
    for v in range(nv):
        val = sum(1 for x in assign if x == v)
        val += sum((a == v) + (b == v) for (a, b) in edges)
        if 2 * genera[v] - 2 + val <= 0:
            return False
    return True


def _min_serial(nv, genera, edges, assign):
    best = None
    for perm in itertools.permutations(range(nv)):
        gs = tuple(genera[perm.index(v)] for v in range(nv))
        es = tuple(sorted(tuple(sorted((perm[a], perm[b])))
                          for (a, b) in edges))
        ls = tuple(perm[v] for v in assign)
        cand = (gs, es, ls)
        if best is None or cand < best:
            best = cand
    return best


@pytest.mark.parametrize("g,n,count", [(0, 3, 1), (1, 1, 2), (2, 0, 7)])
def test_counts_match_brute_force(g, n, count):
    graphs = enumerate_stable_graphs(g, n)
    assert len(graphs) == count
    assert len(_brute_classes(g, n)) == count


@pytest.mark.parametrize("g,n,count", [(1, 1, 1), (1, 3, 1),
                                       (2, 0, 2), (3, 0, 3)])
def test_star_tree_counts(g, n, count):
    trees = enumerate_star_trees(g, n)
    assert len(trees) == count
    brute = [key for key in _brute_classes(g, n)
             if len(key[1]) == len(key[0]) - 1       # h1 = 0
             and all(a != b for (a, b) in key[1])    # no loops
             and all(gv > 0 for gv in key[0])]
    assert len(brute) == count


def test_enumeration_is_deterministic():
    a = enumerate_stable_graphs(2, 0)
    b = tuple(StableGraph.from_cert(gr.cert()) for gr in a)
    assert tuple(gr.cert() for gr in a) == tuple(gr.cert() for gr in b)


def test_aut_order_loop_graph():
    # genus 0 vertex with one leg and a loop: swapping the two loop
    # branches is the only non-trivial symmetry
    graph = StableGraph((0,), ((1, 0),), ((0, 0),))
    assert aut_order(graph) == 2


def test_aut_order_symmetric_banana():
    # two genus 1 vertices joined by one edge: the vertex swap
    graph = StableGraph((1, 1), (), ((0, 1),))
    assert aut_order(graph) == 2


def test_aut_order_asymmetric_edge():
    graph = StableGraph((1, 2), (), ((0, 1),))
    assert aut_order(graph) == 1


def test_canonicalize_identifies_relabelings():
    g1 = StableGraph((1, 2), ((1, 0), (2, 1)), ((0, 1),))
    g2 = StableGraph((2, 1), ((2, 0), (1, 1)), ((1, 0),))
    assert canonicalize(g1)[0].cert() == canonicalize(g2)[0].cert()
    assert len(list(isomorphisms(g1, g2))) == 1


def test_contract_merges_and_keeps_genus():
    graph = StableGraph((1, 1), ((1, 0),), ((0, 1),))
    small, vmap, kept = contract(graph, {0})
    assert small.n_vertices == 1
    assert small.genus() == 2
    assert kept == ()


def test_contract_loop_raises_genus():
    graph = StableGraph((0,), ((1, 0),), ((0, 0),))
    small, _, _ = contract(graph, {0})
    assert small.genera == (1,)


def test_unstable_input_rejected():
    with pytest.raises(GraphError):
        StableGraph((0,), ((1, 0), (2, 0)), ())
    with pytest.raises(GraphError):
        enumerate_stable_graphs(0, 2)


def test_json_roundtrip():
    graph = StableGraph((1, 0), ((1, 1), (2, 1)), ((0, 1), (0, 1)))
    doc = graph.to_json_dict()
    assert StableGraph.from_json_dict(doc) == graph
