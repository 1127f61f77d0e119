import itertools
import json
import random
from fractions import Fraction

import pytest

from ptfc.errors import CapabilityError, InputError
from ptfc.obdd import (
    Obdd,
    ObddNode,
    build_exact_obdd,
    canonical_form,
    export_dot,
    node_budget_default,
    reduce,
)
from ptfc.polynomials import MultilinearPolynomial, Ptf

F = Fraction


def two_block_ptf() -> Ptf:
    return Ptf(MultilinearPolynomial(4, {
        frozenset({0}): F(1), frozenset({1}): F(1),
        frozenset({2}): F(1), frozenset({3}): F(1),
        frozenset({0, 1}): F(-1), frozenset({2, 3}): F(-1),
        frozenset(): F(-2),
    }), "01")


def test_two_block_diagram():
    ptf = two_block_ptf()
    d = build_exact_obdd(ptf, range(4))
    for bits in itertools.product((0, 1), repeat=4):
        assert d.evaluate(bits) == ptf.sign(bits)
    assert d.count_models() == 9
    assert d.is_layered()


def test_reduce_equivalent_idempotent_exhausted():
    d = build_exact_obdd(two_block_ptf(), range(4))
    r = reduce(d)
    for bits in itertools.product((0, 1), repeat=4):
        assert r.evaluate(bits) == d.evaluate(bits)
    assert r.count_models() == 9
    assert reduce(r).size == r.size
    for u in r.nodes.values():
        if u.sink is None:
            assert u.lo != u.hi


def test_count_models_with_layer_jumps():
    # only the middle variable matters; reduction skips the other layers
    poly = MultilinearPolynomial(3, {frozenset({1}): F(1), frozenset(): F(-1, 2)})
    d = reduce(build_exact_obdd(Ptf(poly, "01"), range(3)))
    assert d.count_models() == 4
    assert d.size <= 3


def test_constant_diagrams():
    for c, models in ((F(1), 8), (F(-1), 0)):
        poly = MultilinearPolynomial(3, {frozenset(): c})
        d = build_exact_obdd(Ptf(poly, "01"), range(3))
        assert d.count_models() == models
        assert reduce(d).count_models() == models


def test_random_ptfs_against_brute_force():
    rng = random.Random(12)
    for _ in range(25):
        n = rng.randrange(2, 8)
        terms = {}
        for _ in range(rng.randrange(1, 2 * n)):
            support = frozenset(rng.sample(range(n), rng.choice((1, 2))))
            value = F(rng.randrange(-6, 7))
            if value:
                terms[support] = value
        terms[frozenset()] = F(rng.randrange(-4, 5))
        terms = {s: c for s, c in terms.items() if c}
        ptf = Ptf(MultilinearPolynomial(n, terms), "01")
        order = list(range(n))
        rng.shuffle(order)
        d = reduce(build_exact_obdd(ptf, order))
        count = 0
        for bits in itertools.product((0, 1), repeat=n):
            want = ptf.sign(bits)
            assert d.evaluate(bits) == want
            count += want
        assert d.count_models() == count


def test_ordering_must_be_permutation():
    with pytest.raises(InputError):
        build_exact_obdd(two_block_ptf(), [0, 1, 2, 2])


def test_pm1_encoding_rejected():
    ptf = Ptf(MultilinearPolynomial(2, {frozenset({0}): F(1)}), "pm1")
    with pytest.raises(InputError):
        build_exact_obdd(ptf, range(2))


def test_node_budget():
    with pytest.raises(CapabilityError):
        build_exact_obdd(two_block_ptf(), range(4), node_budget=3)


def test_node_budget_env_override(monkeypatch):
    monkeypatch.setenv("PTFC_NODE_BUDGET", "123")
    assert node_budget_default() == 123
    monkeypatch.setenv("PTFC_NODE_BUDGET", "zero")
    with pytest.raises(InputError):
        node_budget_default()


def test_canonical_form_invariant_under_relabeling():
    d = reduce(build_exact_obdd(two_block_ptf(), range(4)))
    shift = {uid: uid + 100 for uid in d.nodes}
    moved = {
        shift[uid]: ObddNode(
            id=shift[uid], layer=u.layer, var=u.var,
            lo=None if u.lo is None else shift[u.lo],
            hi=None if u.hi is None else shift[u.hi],
            sink=u.sink,
        )
        for uid, u in d.nodes.items()
    }
    e = Obdd(d.n, d.ordering, moved, shift[d.start])
    assert canonical_form(d) == canonical_form(e)


def test_canonical_form_separates_functions():
    a = reduce(build_exact_obdd(two_block_ptf(), range(4)))
    other = Ptf(MultilinearPolynomial(4, {frozenset({0}): F(1), frozenset(): F(-1, 2)}), "01")
    b = reduce(build_exact_obdd(other, range(4)))
    assert canonical_form(a) != canonical_form(b)


def test_json_round_trip():
    d = reduce(build_exact_obdd(two_block_ptf(), range(4)))
    data = json.loads(json.dumps(d.to_json()))
    assert data["ordering"][0] >= 1  # serialized 1-based
    back = Obdd.from_json(data)
    for bits in itertools.product((0, 1), repeat=4):
        assert back.evaluate(bits) == d.evaluate(bits)


def test_evaluate_checks_length():
    d = build_exact_obdd(two_block_ptf(), range(4))
    with pytest.raises(InputError):
        d.evaluate((0, 1))


def test_dot_export():
    d = reduce(build_exact_obdd(two_block_ptf(), range(4)))
    dot = export_dot(d)
    assert dot == export_dot(d)
    assert "rank=same" in dot
    assert "shape=circle" in dot and "shape=box" in dot
    assert "style=dashed" in dot


def test_validation_rejects_malformed():
    nodes = {
        0: ObddNode(id=0, layer=1, var=0, lo=1, hi=1, sink=None),
        1: ObddNode(id=1, layer=2, var=None, lo=None, hi=None, sink=1),
    }
    Obdd(1, [0], nodes, 0)
    bad = {
        0: ObddNode(id=0, layer=1, var=0, lo=0, hi=1, sink=None),
        1: ObddNode(id=1, layer=2, var=None, lo=None, hi=None, sink=1),
    }
    with pytest.raises(InputError):
        Obdd(1, [0], bad, 0)  # edge does not go deeper
