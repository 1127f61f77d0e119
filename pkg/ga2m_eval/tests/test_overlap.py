from ga2m_eval.overlap import term_overlap


def pairs(*sups):
    return {frozenset(s): 1.0 for s in sups}


def test_identical_structure_scores_one():
    p = pairs((0, 1), (2, 3)) | {frozenset((0,)): 5.0}
    assert term_overlap(p, p) == 1.0


def test_disjoint_structure_scores_zero():
    assert term_overlap(pairs((0, 1)), pairs((2, 3))) == 0.0


def test_partial_overlap_fraction():
    truth = pairs((0, 1), (1, 2), (3, 4), (5, 6))
    learned = pairs((0, 1), (3, 4), (7, 8))
    assert term_overlap(truth, learned) == 0.5


def test_extra_learned_pairs_do_not_hurt():
    truth = pairs((0, 1))
    learned = pairs((0, 1), (2, 3), (4, 5))
    assert term_overlap(truth, learned) == 1.0


def test_affine_truth_is_vacuously_matched():
    truth = {frozenset((0,)): 1.0}
    assert term_overlap(truth, pairs((0, 1))) == 1.0


def test_zero_weight_pairs_are_not_structure():
    truth = pairs((0, 1))
    learned = {frozenset((0, 1)): 0.0}
    assert term_overlap(truth, learned) == 0.0
