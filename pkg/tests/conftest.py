import random
from fractions import Fraction

import pytest

from ptfc.bnc import BncModel
from ptfc.fixtures import fig1_tan

# CPT entries are drawn away from 0, 1/2, and 1 so posterior margins stay
# usable; same bands the library's random models use, sampled independently.
BANDS = (
    (Fraction(1, 7), Fraction(2, 7)),
    (Fraction(3, 7), Fraction(4, 7)),
    (Fraction(5, 7), Fraction(6, 7)),
)


def band_probability(rng: random.Random, q_bits: int = 10) -> Fraction:
    lo, hi = BANDS[rng.randrange(3)]
    scale = 1 << q_bits
    first = int(lo * scale) + 1
    last = (hi * scale).__ceil__() - 1
    return Fraction(rng.randint(first, last), scale)


def random_forest_model(n: int, seed: int, q_bits: int = 10) -> BncModel:
    """Random in-forest classifier: each node's parent is an earlier node or
    nothing."""
    rng = random.Random(seed)
    parents = []
    for i in range(n):
        if i and rng.random() < 0.7:
            parents.append((rng.randrange(i),))
        else:
            parents.append(())
    cpt = []
    for ps in parents:
        table = {}
        for m in range(1 << len(ps)):
            bits = tuple((m >> j) & 1 for j in range(len(ps)))
            for c in (0, 1):
                table[(bits, c)] = band_probability(rng, q_bits)
        cpt.append(table)
    return BncModel(n, Fraction(1, 2), parents, cpt)


def random_banded_model(n: int, seed: int, q_bits: int = 10) -> BncModel:
    """Classifier whose node i may depend on nodes i-1 and i-2; the moral
    graph is then a band of triangles, tree-width two."""
    rng = random.Random(seed)
    parents = []
    for i in range(n):
        ps = [p for p in (i - 1, i - 2) if p >= 0 and rng.random() < 0.6]
        parents.append(tuple(ps))
    cpt = []
    for ps in parents:
        table = {}
        for m in range(1 << len(ps)):
            bits = tuple((m >> j) & 1 for j in range(len(ps)))
            for c in (0, 1):
                table[(bits, c)] = band_probability(rng, q_bits)
        cpt.append(table)
    return BncModel(n, Fraction(1, 2), parents, cpt)


@pytest.fixture(scope="session")
def fig1():
    return fig1_tan()
