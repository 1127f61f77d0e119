import itertools
import json
from fractions import Fraction

import pytest

from conftest import random_banded_model, random_forest_model
from ptfc.errors import CapabilityError, InputError
from ptfc.gobdd import (
    Gobdd,
    approx_input_gobdd,
    joint_gobdd,
    separator_conditionals,
    uniform_gobdd,
    weighted_mass,
)
from ptfc.graphs import moral_graph, ordering_for
from ptfc.obdd import build_exact_obdd, reduce
from ptfc.polynomials import MultilinearPolynomial, Ptf

F = Fraction


def seq_for(model):
    return ordering_for(moral_graph(model.n, model.parents))


def test_uniform_generator():
    g = uniform_gobdd(3)
    assert g.width == 1
    for bits in itertools.product((0, 1), repeat=3):
        assert g.prob(bits) == F(1, 8)


def test_joint_generator_exact():
    m = random_forest_model(7, seed=5)
    seq = seq_for(m)
    for c in (0, 1):
        gen = joint_gobdd(m, seq, c)
        pc = m.prior1 if c else 1 - m.prior1
        total = F(0)
        for bits in itertools.product((0, 1), repeat=7):
            p = gen.prob(bits)
            assert p == m.joint_probability(bits, c) / pc
            total += p
        assert total == 1


def test_joint_generator_bad_class():
    m = random_forest_model(4, seed=0)
    with pytest.raises(InputError):
        joint_gobdd(m, seq_for(m), 2)


def test_separator_conditionals_match_definition():
    m = random_forest_model(5, seed=8)
    seq = seq_for(m)
    conds = separator_conditionals(m, seq)
    # layer 1 has an empty separator: the table is the plain marginal
    var = seq.ordering[0]
    for c in (0, 1):
        pc = m.prior1 if c else 1 - m.prior1
        mass = sum(
            m.joint_probability(bits, c)
            for bits in itertools.product((0, 1), repeat=5)
            if bits[var] == 0
        )
        assert conds[0][()][c] == mass / pc


def test_approx_generator_sandwich_small():
    m = random_banded_model(8, seed=3)
    seq = seq_for(m)
    for eps in (F(1, 5), F(1, 20)):
        gen = approx_input_gobdd(m, seq, eps)
        for bits in itertools.product((0, 1), repeat=8):
            approx = gen.prob(bits)
            exact = m.input_probability(bits)
            assert (1 - eps) * exact <= approx <= (1 + eps) * exact, bits


def test_approx_generator_eps_validation():
    m = random_forest_model(4, seed=1)
    with pytest.raises(InputError):
        approx_input_gobdd(m, seq_for(m), F(0))
    with pytest.raises(InputError):
        approx_input_gobdd(m, seq_for(m), F(3, 2))


def test_capability_limit_on_marginals():
    m = random_forest_model(17, seed=2)
    with pytest.raises(CapabilityError):
        joint_gobdd(m, [*range(17)], 1)


def test_sampling_deterministic_and_calibrated():
    m = random_forest_model(3, seed=6)
    gen = joint_gobdd(m, seq_for(m), 1)
    a = gen.sample_many(400, seed=1)
    assert a == gen.sample_many(400, seed=1)
    # frequency of the most likely assignment within a loose band
    best = max(itertools.product((0, 1), repeat=3), key=gen.prob)
    freq = F(sum(1 for s in a if s == best), 400)
    assert abs(freq - gen.prob(best)) < F(1, 8)


def test_json_round_trip_quantized():
    m = random_forest_model(5, seed=9)
    seq = seq_for(m)
    approx = approx_input_gobdd(m, seq, F(1, 10))
    back = Gobdd.from_json(json.loads(json.dumps(approx.to_json())))
    for bits in itertools.product((0, 1), repeat=5):
        assert back.prob(bits) == approx.prob(bits)
    joint = joint_gobdd(m, seq, 0)
    back = Gobdd.from_json(json.loads(json.dumps(joint.to_json())))
    for bits in itertools.product((0, 1), repeat=5):
        assert abs(back.prob(bits) - joint.prob(bits)) < F(1, 1 << 55)


def test_single_sink_enforced():
    nodes = {
        0: dict(id=0, layer=1, var=1, lo=1, hi=2, p="0.5"),
        1: dict(id=1, layer=2, sink=1, lo=None, hi=None),
        2: dict(id=2, layer=2, sink=1, lo=None, hi=None),
    }
    with pytest.raises(InputError):
        Gobdd.from_json({"n": 1, "ordering": [1], "start": 0,
                         "nodes": list(nodes.values())})


def test_weighted_mass():
    m = random_forest_model(6, seed=4)
    seq = seq_for(m)
    poly = MultilinearPolynomial(6, {frozenset({i}): F(1) for i in range(6)}
                                 | {frozenset(): F(-3)})
    d = reduce(build_exact_obdd(Ptf(poly, "01"), seq.ordering))
    gen = joint_gobdd(m, seq, 1)
    want = sum(
        gen.prob(bits)
        for bits in itertools.product((0, 1), repeat=6)
        if sum(bits) >= 3
    )
    assert weighted_mass(d, gen) == want
    # uniform weights recover plain model counting (orderings must match)
    d_id = reduce(build_exact_obdd(Ptf(poly, "01"), list(range(6))))
    assert weighted_mass(d_id, uniform_gobdd(6)) == F(d_id.count_models(), 64)


def test_weighted_mass_ordering_mismatch():
    poly = MultilinearPolynomial(3, {frozenset({0}): F(1)})
    d = build_exact_obdd(Ptf(poly, "01"), [2, 1, 0])
    with pytest.raises(InputError):
        weighted_mass(d, uniform_gobdd(3))
