"""Exact whole-domain evaluation against a classifier description file.

Loads the JSON emitted for tree-augmented classifiers (class prior plus
one conditional probability table per feature node) and materialises the
joint distribution over all feature assignments as two float arrays, one
per class.  Assignment ``m`` encodes feature ``j`` in bit ``j``.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .errors import InputError

ENUMERATION_LIMIT = 16


def load_bnc(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "n" not in doc or "nodes" not in doc:
        raise InputError("classifier document must carry 'n' and 'nodes'")
    return doc


def all_assignments(n: int) -> np.ndarray:
    """All 0/1 rows, shape (2**n, n); row m holds bit j of m in column j."""
    if n > ENUMERATION_LIMIT:
        raise InputError(f"enumeration over {n} features exceeds the limit of {ENUMERATION_LIMIT}")
    masks = np.arange(1 << n, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n)) & 1).astype(np.int8)


def _fraction(pair) -> float:
    if (
        not isinstance(pair, list)
        or len(pair) != 2
        or not all(isinstance(x, int) for x in pair)
        or pair[1] <= 0
    ):
        raise InputError(f"probabilities must be [numerator, denominator] pairs, got {pair!r}")
    return float(Fraction(pair[0], pair[1]))


def joint_arrays(doc: dict) -> tuple[np.ndarray, np.ndarray]:
    """Return (jp0, jp1): joint probability of (assignment, class) per class."""
    n = doc["n"]
    if not isinstance(n, int) or n < 1:
        raise InputError("'n' must be a positive integer")
    if n > ENUMERATION_LIMIT:
        raise InputError(f"enumeration over {n} features exceeds the limit of {ENUMERATION_LIMIT}")
    prior1 = _fraction(doc.get("class_prior", [1, 2]))
    if not 0.0 <= prior1 <= 1.0:
        raise InputError("class prior out of range")
    bits = all_assignments(n)
    joints = [np.full(1 << n, 1.0 - prior1), np.full(1 << n, prior1)]
    seen = set()
    for node in doc["nodes"]:
        nid = node.get("id")
        if not isinstance(nid, int) or not 1 <= nid <= n or nid in seen:
            raise InputError(f"bad node id {nid!r}")
        seen.add(nid)
        parents = node.get("parents", [])
        if not all(isinstance(p, int) and 1 <= p <= n and p != nid for p in parents):
            raise InputError(f"bad parent list for node {nid}")
        k = len(parents)
        # p1 lookup per (class, parent-bit code); code packs bits in list order
        tables = np.full((2, 1 << k), -1.0)
        for row in node.get("cpt", []):
            pb = row.get("parent_bits", [])
            c = row.get("c")
            if c not in (0, 1) or len(pb) != k or not all(b in (0, 1) for b in pb):
                raise InputError(f"bad CPT row for node {nid}")
            code = sum(b << i for i, b in enumerate(pb))
            if tables[c, code] >= 0.0:
                raise InputError(f"duplicate CPT row for node {nid}")
            p1 = _fraction(row["p1"])
            if not 0.0 <= p1 <= 1.0:
                raise InputError(f"probability out of range for node {nid}")
            tables[c, code] = p1
        if (tables < 0.0).any():
            raise InputError(f"incomplete CPT for node {nid}")
        codes = np.zeros(1 << n, dtype=np.int64)
        for i, p in enumerate(parents):
            codes |= bits[:, p - 1].astype(np.int64) << i
        x = bits[:, nid - 1]
        for c in (0, 1):
            p1 = tables[c, codes]
            joints[c] *= np.where(x == 1, p1, 1.0 - p1)
    if seen != set(range(1, n + 1)):
        raise InputError("nodes must cover ids 1..n exactly once")
    return joints[0], joints[1]


def truth_labels(jp0: np.ndarray, jp1: np.ndarray) -> np.ndarray:
    """Most probable class per assignment, ties resolved to class 1."""
    return (jp1 >= jp0).astype(np.int8)


def whole_domain_accuracy(predictions: np.ndarray, jp0: np.ndarray, jp1: np.ndarray) -> float:
    """Probability mass on which the 0/1 prediction array matches the class."""
    predictions = np.asarray(predictions)
    if predictions.shape != jp0.shape:
        raise InputError("prediction array must cover every assignment")
    mass = np.where(predictions == 1, jp1, jp0).sum()
    return float(mass / (jp0.sum() + jp1.sum()))


def top_line_accuracy(jp0: np.ndarray, jp1: np.ndarray) -> float:
    """Accuracy of the classifier itself, the ceiling for any predictor."""
    return float(np.maximum(jp0, jp1).sum() / (jp0.sum() + jp1.sum()))
