import random

import pytest

from ptfc.errors import CapabilityError, InputError
from ptfc.graphs import (
    Decomposition,
    Graph,
    SeparatorSequence,
    TermHypergraph,
    decomposition_from_elimination,
    heuristic_ordering,
    min_fill_decomposition,
    moral_graph,
    ordering_for,
    pathwidth_decomposition_exact,
    pathwidth_exact,
    primal_graph,
    treewidth_exact,
)


def path(n):
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def clique(n):
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def grid(rows, cols):
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph(rows * cols, edges)


def random_graph(n, p, seed):
    rng = random.Random(seed)
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)
                     if rng.random() < p])


def test_graph_basics():
    g = path(4)
    assert g.edges() == [(0, 1), (1, 2), (2, 3)]
    assert g.neighbors(1) == [0, 2]
    assert g.is_forest()
    assert not cycle(4).is_forest()
    assert len(Graph(5, [(0, 1), (2, 3)]).components()) == 3


def test_graph_json_round_trip():
    g = cycle(5)
    back = Graph.from_json(g.to_json())
    assert back.n == 5
    assert back.edges() == g.edges()


def test_moral_graph_marries_coparents():
    # node 2 has parents 0 and 1, so 0-1 is a moral edge
    g = moral_graph(3, [(), (), (0, 1)])
    assert g.has_edge(0, 1)
    assert g.has_edge(0, 2)
    assert g.has_edge(1, 2)


def test_moral_graph_rejects_cycles():
    with pytest.raises(InputError):
        moral_graph(2, [(1,), (0,)])


def test_primal_graph_expands_hyperedges():
    h = TermHypergraph(4, [(0, 1, 2), (3,)])
    g = primal_graph(h)
    assert g.has_edge(0, 1) and g.has_edge(0, 2) and g.has_edge(1, 2)
    assert g.degree(3) == 0


def test_known_widths():
    for g, tw, pw in (
        (path(6), 1, 1),
        (cycle(5), 2, 2),
        (clique(5), 4, 4),
        (grid(3, 3), 3, 3),
        (Graph(4), 0, 0),
    ):
        got_tw, dec = treewidth_exact(g)
        got_pw, seq = pathwidth_exact(g)
        assert got_tw == tw
        assert got_pw == pw
        dec.validate(g)
        assert seq.value == pw


def test_tree_width_one():
    rng = random.Random(0)
    for trial in range(5):
        n = rng.randrange(2, 9)
        edges = [(rng.randrange(i), i) for i in range(1, n)]
        g = Graph(n, edges)
        tw, dec = treewidth_exact(g)
        assert tw == 1
        dec.validate(g)


def test_dual_pathwidth_oracles_agree():
    cases = [path(6), cycle(6), clique(5), grid(2, 4)]
    for seed in range(25):
        cases.append(random_graph(seed % 7 + 2, 0.4, seed))
    for g in cases:
        a, seq = pathwidth_exact(g)
        b, dec = pathwidth_decomposition_exact(g)
        assert a == b, g
        assert seq.value == a
        dec.validate(g)
        assert dec.kind == "path"


def test_validator_rejects_corruption():
    g = path(4)
    _, dec = treewidth_exact(g)
    broken = Decomposition(dec.kind, dec.bags, dec.tree[:-1])
    with pytest.raises(InputError):
        broken.validate(g)
    # erase a vertex everywhere
    with pytest.raises(InputError):
        Decomposition(dec.kind, tuple(b - {3} for b in dec.bags), dec.tree).validate(g)
    # drop an edge's coverage by clearing every bag containing both endpoints
    bags = tuple(b - {0} if {0, 1} <= b else b for b in dec.bags)
    with pytest.raises(InputError):
        Decomposition(dec.kind, bags, dec.tree).validate(g)


def test_min_fill_upper_bound():
    for seed in range(8):
        g = random_graph(7, 0.35, seed)
        dec = min_fill_decomposition(g)
        dec.validate(g)
        tw, _ = treewidth_exact(g)
        assert dec.width >= tw


def test_separator_sequence_from_ordering():
    g = path(4)
    seq = SeparatorSequence.from_ordering(g, [0, 1, 2, 3])
    assert seq.value == 1
    assert seq.separator_at(0) == frozenset()
    assert seq.separator_at(1) == frozenset({0})
    assert seq.separator_at(2) == frozenset({1})
    assert seq.separator_at(4) == frozenset()


def test_heuristic_never_beats_exact():
    for seed in range(10):
        g = random_graph(7, 0.3, seed)
        exact, _ = pathwidth_exact(g)
        heur = heuristic_ordering(g)
        assert heur.value >= exact


def test_ordering_for_uses_exact_at_small_n():
    g = cycle(6)
    seq = ordering_for(g)
    exact, _ = pathwidth_exact(g)
    assert seq.value == exact


def test_capability_limits():
    with pytest.raises(CapabilityError):
        treewidth_exact(clique(17))
    with pytest.raises(CapabilityError):
        pathwidth_exact(clique(15))
    with pytest.raises(CapabilityError):
        pathwidth_decomposition_exact(clique(12))


def test_elimination_decomposition_validates():
    for seed in range(6):
        g = random_graph(8, 0.3, seed)
        order = list(range(8))
        random.Random(seed).shuffle(order)
        dec = decomposition_from_elimination(g, order)
        dec.validate(g)


def test_decomposition_dot_export():
    _, dec = treewidth_exact(path(4))
    dot = dec.to_dot()
    assert dot.startswith("graph")
    assert "--" in dot
