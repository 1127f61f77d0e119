import itertools

import numpy as np
import pytest

from ga2m_eval.errors import InputError
from ga2m_eval.model import LearnedAdditiveModel, distill_quadratic
from ga2m_eval.ptf_io import evaluate_terms


def all_bits(n):
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=float)


def test_extracted_polynomial_matches_logit_everywhere():
    model = LearnedAdditiveModel(
        4,
        0.25,
        (1.0, -2.0, 0.5, 0.0),
        {(0, 1): -1.5, (2, 3): 3.0},
    )
    bits = all_bits(4)
    terms = model.extract_polynomial()
    assert np.allclose(evaluate_terms(4, terms, bits), model.logit(bits))
    assert frozenset((3,)) not in terms


def test_decision_equivalence_by_enumeration():
    model = LearnedAdditiveModel(3, -1.0, (1.0, 1.0, 1.0), {(0, 2): -2.0})
    bits = all_bits(3)
    terms = model.extract_polynomial()
    poly_dec = (evaluate_terms(3, terms, bits) >= 0).astype(int)
    assert (poly_dec == model.decide(bits)).all()


def test_boundary_goes_to_class_one():
    model = LearnedAdditiveModel(2, 0.0, (0.0, 0.0), {})
    assert model.decide(np.array([[0, 1]]))[0] == 1


def test_constant_model_extracts_constant_only():
    model = LearnedAdditiveModel(5, -3.0, (0.0,) * 5, {})
    terms = model.extract_polynomial()
    assert terms == {frozenset(): -3.0}
    assert (model.decide(all_bits(5)) == 0).all()


def test_affine_logit_drops_pairs():
    model = LearnedAdditiveModel(2, 0.0, (1.0, 1.0), {(0, 1): -10.0})
    bits = all_bits(2)
    assert model.logit(bits)[3] == -8.0
    assert model.affine_logit(bits)[3] == 2.0


def test_pair_index_validation():
    with pytest.raises(InputError):
        LearnedAdditiveModel(3, 0.0, (0.0, 0.0, 0.0), {(2, 1): 1.0})
    with pytest.raises(InputError):
        LearnedAdditiveModel(3, 0.0, (0.0, 0.0, 0.0), {(0, 3): 1.0})
    with pytest.raises(InputError):
        LearnedAdditiveModel(3, 0.0, (0.0, 0.0), {})


def test_rejects_non_binary_input():
    model = LearnedAdditiveModel(2, 0.0, (1.0, 1.0), {})
    with pytest.raises(InputError):
        model.logit(np.array([[0.0, 0.5]]))


def test_distillation_recovers_known_quadratic_exactly():
    rng = np.random.default_rng(7)
    n = 6
    c0 = rng.normal()
    a = rng.normal(size=n)
    b = np.triu(rng.normal(size=(n, n)), k=1)

    def f(rows):
        rows = np.asarray(rows)
        return c0 + rows @ a + np.einsum("ri,ij,rj->r", rows, b, rows)

    got_c0, got_a, got_b = distill_quadratic(f, n)
    assert got_c0 == pytest.approx(c0, abs=1e-12)
    assert np.allclose(got_a, a, atol=1e-12)
    assert np.allclose(got_b, b, atol=1e-12)
    # the corner reconstruction agrees with f on every input, not just corners
    bits = all_bits(n)
    model = LearnedAdditiveModel(
        n,
        float(got_c0),
        tuple(got_a),
        {(i, j): float(got_b[i, j]) for i in range(n) for j in range(i + 1, n)},
    )
    assert np.allclose(model.logit(bits), f(bits), atol=1e-10)
