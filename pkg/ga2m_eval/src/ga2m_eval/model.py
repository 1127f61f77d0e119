"""Additive model with pairwise interactions over binary features.

The decision function is a multilinear polynomial of degree at most two
on 0/1 inputs: a constant, one weight per feature, and one weight per
selected feature pair.  Predictions threshold that value at zero, with
the boundary mapped to class 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple

import numpy as np

from .errors import InputError
from .ptf_io import Terms

Pair = Tuple[int, int]


@dataclass(frozen=True)
class LearnedAdditiveModel:
    n: int
    constant: float
    affine: Tuple[float, ...]
    pairs: Dict[Pair, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise InputError("need at least one feature")
        if len(self.affine) != self.n:
            raise InputError("affine weights must cover every feature")
        for i, j in self.pairs:
            if not (0 <= i < j < self.n):
                raise InputError(f"bad pair ({i}, {j}); indices are 0-based with i < j")

    def logit(self, bits: np.ndarray) -> np.ndarray:
        bits = np.asarray(bits, dtype=float)
        if bits.ndim == 1:
            bits = bits[None, :]
        if bits.shape[1] != self.n:
            raise InputError(f"expected {self.n} feature columns")
        if not np.isin(bits, (0.0, 1.0)).all():
            raise InputError("features must be 0/1")
        out = np.full(bits.shape[0], self.constant)
        out += bits @ np.asarray(self.affine)
        for (i, j), w in self.pairs.items():
            out += w * bits[:, i] * bits[:, j]
        return out

    def decide(self, bits: np.ndarray) -> np.ndarray:
        """0/1 predictions; the zero boundary counts as class 1."""
        return (self.logit(bits) >= 0.0).astype(np.int8)

    def affine_logit(self, bits: np.ndarray) -> np.ndarray:
        """Decision value with every pair weight dropped."""
        return LearnedAdditiveModel(self.n, self.constant, self.affine, {}).logit(bits)

    def extract_polynomial(self) -> Terms:
        """Terms of the decision function keyed by variable support.

        Zero coefficients are dropped, so sign behaviour is preserved
        exactly: the polynomial evaluates to the same value as logit().
        """
        terms: Terms = {}
        if self.constant != 0.0:
            terms[frozenset()] = self.constant
        for i, w in enumerate(self.affine):
            if w != 0.0:
                terms[frozenset((i,))] = w
        for pair, w in self.pairs.items():
            if w != 0.0:
                terms[frozenset(pair)] = w
        return terms


def distill_quadratic(
    f: Callable[[np.ndarray], np.ndarray], n: int
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Recover the coefficients of a multilinear degree-two function.

    Evaluates f at the corner inputs 0, e_i, and e_i + e_j only:
    constant = f(0), affine_i = f(e_i) - f(0), and the pair weight is
    the second difference f(e_ij) - f(e_i) - f(e_j) + f(0).  Exact for
    any function of that form; callers should verify strays when f is
    only believed to be quadratic.
    """
    if n < 1:
        raise InputError("need at least one feature")
    rows = [np.zeros(n)]
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        rows.append(e)
    pair_index = {}
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros(n)
            e[i] = 1.0
            e[j] = 1.0
            pair_index[(i, j)] = len(rows)
            rows.append(e)
    vals = np.asarray(f(np.asarray(rows)), dtype=float)
    if vals.shape != (len(rows),):
        raise InputError("decision function must return one value per row")
    c0 = float(vals[0])
    a = vals[1 : n + 1] - c0
    b = np.zeros((n, n))
    for (i, j), r in pair_index.items():
        b[i, j] = vals[r] - vals[1 + i] - vals[1 + j] + c0
    return c0, a, b
