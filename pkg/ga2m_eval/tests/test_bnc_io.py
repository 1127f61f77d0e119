import numpy as np
import pytest

from ga2m_eval.bnc_io import (
    all_assignments,
    joint_arrays,
    load_bnc,
    top_line_accuracy,
    truth_labels,
    whole_domain_accuracy,
)
from ga2m_eval.errors import InputError


def tiny_doc():
    return {
        "n": 2,
        "class_prior": [1, 2],
        "nodes": [
            {
                "id": 1,
                "parents": [],
                "cpt": [
                    {"parent_bits": [], "c": 0, "p1": [1, 4]},
                    {"parent_bits": [], "c": 1, "p1": [3, 4]},
                ],
            },
            {
                "id": 2,
                "parents": [1],
                "cpt": [
                    {"parent_bits": [0], "c": 0, "p1": [1, 2]},
                    {"parent_bits": [1], "c": 0, "p1": [1, 3]},
                    {"parent_bits": [0], "c": 1, "p1": [2, 3]},
                    {"parent_bits": [1], "c": 1, "p1": [9, 10]},
                ],
            },
        ],
    }


def test_joint_matches_hand_computation():
    jp0, jp1 = joint_arrays(tiny_doc())
    # assignment index m holds x1 in bit 0 and x2 in bit 1
    assert jp0 == pytest.approx([0.1875, 0.5 * 0.25 * 2 / 3, 0.1875, 0.5 * 0.25 / 3])
    assert jp1 == pytest.approx([0.5 * 0.25 / 3, 0.0375, 0.5 * 0.25 * 2 / 3, 0.3375])
    assert jp0.sum() + jp1.sum() == pytest.approx(1.0)


def test_accuracies():
    jp0, jp1 = joint_arrays(tiny_doc())
    labels = truth_labels(jp0, jp1)
    assert labels.tolist() == [0, 0, 0, 1]
    top = top_line_accuracy(jp0, jp1)
    assert top == pytest.approx(0.1875 + 0.5 * 0.25 * 2 / 3 + 0.1875 + 0.3375)
    assert whole_domain_accuracy(labels, jp0, jp1) == pytest.approx(top)
    assert whole_domain_accuracy(np.ones(4, dtype=int), jp0, jp1) == pytest.approx(0.5)


def test_all_assignments_bit_order():
    bits = all_assignments(3)
    assert bits.shape == (8, 3)
    assert bits[5].tolist() == [1, 0, 1]


def test_rejects_bad_documents(tmp_path):
    doc = tiny_doc()
    doc["nodes"][1]["cpt"].pop()
    with pytest.raises(InputError, match="incomplete"):
        joint_arrays(doc)

    doc = tiny_doc()
    doc["nodes"][1]["cpt"].append(doc["nodes"][1]["cpt"][0])
    with pytest.raises(InputError, match="duplicate"):
        joint_arrays(doc)

    doc = tiny_doc()
    doc["nodes"][0]["id"] = 2
    with pytest.raises(InputError):
        joint_arrays(doc)

    doc = tiny_doc()
    doc["n"] = 30
    with pytest.raises(InputError, match="limit"):
        joint_arrays(doc)

    path = tmp_path / "bad.json"
    path.write_text("{}")
    with pytest.raises(InputError):
        load_bnc(path)


def test_fixture_file_top_line(fig1_file):
    doc = load_bnc(fig1_file)
    jp0, jp1 = joint_arrays(doc)
    assert top_line_accuracy(jp0, jp1) == pytest.approx(0.9266, abs=5e-4)
