"""Built-in demo models.

fig1_tan() is the 14-variable tree-augmented classifier used throughout the
tests and demos: two 7-node dependency trees rooted at X1 and X8, class prior
1/2, CPT entries given to three decimals.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional

from .bnc import BncModel, CptKey

# node id (1-based): (parent or None, P(1|0,0), P(1|0,1), P(1|1,0), P(1|1,1));
# for roots the two entries are P(1|C=0), P(1|C=1).
_FIG1_ROWS = {
    1: (None, 234, 732),
    2: (1, 472, 164, 156, 455),
    3: (1, 506, 203, 812, 458),
    4: (2, 810, 202, 508, 734),
    5: (2, 281, 759, 527, 554),
    6: (3, 148, 453, 268, 157),
    7: (3, 743, 470, 449, 540),
    8: (None, 235, 479),
    9: (8, 284, 535, 469, 827),
    10: (8, 844, 471, 184, 733),
    11: (9, 559, 471, 798, 224),
    12: (9, 176, 790, 850, 785),
    13: (10, 149, 163, 542, 433),
    14: (10, 483, 220, 236, 194),
}

FIG1_N = 14


def fig1_forest() -> List[Optional[int]]:
    """Parent slot per node, 0-based."""
    return [None if row[0] is None else row[0] - 1 for row in
            (_FIG1_ROWS[i + 1] for i in range(FIG1_N))]


def fig1_tan() -> BncModel:
    parents = [(() if p is None else (p,)) for p in fig1_forest()]
    cpt: List[Dict[CptKey, Fraction]] = []
    for i in range(FIG1_N):
        row = _FIG1_ROWS[i + 1]
        table: Dict[CptKey, Fraction] = {}
        if row[0] is None:
            table[((), 0)] = Fraction(row[1], 1000)
            table[((), 1)] = Fraction(row[2], 1000)
        else:
            for idx, (pb, c) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
                table[((pb,), c)] = Fraction(row[1 + idx], 1000)
        cpt.append(table)
    return BncModel(FIG1_N, Fraction(1, 2), parents, cpt)
