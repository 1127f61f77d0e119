"""A monotone family separating general from positive threshold size.

For n = 2k and the perfect matching M = {(2j-1, 2j)}, the function accepts
when more than k bits are set, or exactly k bits are set with no matched
pair fully set.  A general quadratic threshold form needs only the k
matching terms; a positive form provably needs a mixed quadratic term for
every pair of blocks, and the audit here checks that structure on a
candidate, producing either a counting certificate or a four-point witness
of failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .errors import InputError
from .polynomials import MultilinearPolynomial, Ptf, is_positive

EXHAUSTIVE_K_LIMIT = 5


@dataclass(frozen=True)
class SeparationInstance:
    """Half-size k: the function lives on n = 2k variables, matched in
    consecutive pairs."""

    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InputError(f"half-size must be at least 1, got {self.k}")

    @property
    def n(self) -> int:
        return 2 * self.k

    @property
    def matching(self) -> Tuple[Tuple[int, int], ...]:
        """Matched variable pairs, 0-based."""
        return tuple((2 * j, 2 * j + 1) for j in range(self.k))


def f_n_oracle(inst: SeparationInstance, a: Sequence[int]) -> int:
    """1 iff more than k bits are set, or exactly k are set and no matched
    pair is fully set.  Constant on every level except k."""
    if len(a) != inst.n:
        raise InputError(f"assignment has {len(a)} bits, instance has {inst.n}")
    bits = [int(v) for v in a]
    if any(v not in (0, 1) for v in bits):
        raise InputError("assignment bits must be 0 or 1")
    level = sum(bits)
    if level >= inst.k + 1:
        return 1
    if level < inst.k:
        return 0
    return 1 if all(bits[u] + bits[v] <= 1 for u, v in inst.matching) else 0


def qtf_general(inst: SeparationInstance) -> Ptf:
    """Linear-size quadratic form whose sign matches the function: all
    singletons, one term per matched pair, and a constant.  At k=2 the pair
    terms carry weight one; for larger k weight 1/k keeps the sign right on
    every level."""
    n = inst.n
    k = inst.k
    pair_coeff = Fraction(-1) if k == 2 else Fraction(-1, k)
    terms: Dict[FrozenSet[int], Fraction] = {frozenset({i}): Fraction(1) for i in range(n)}
    for u, v in inst.matching:
        terms[frozenset({u, v})] = pair_coeff
    terms[frozenset()] = Fraction(-k)
    return Ptf(MultilinearPolynomial(n, terms), "01")


def qtf_positive(inst: SeparationInstance) -> Tuple[Ptf, Fraction]:
    """Quadratic-size positive form: singletons plus every non-matched pair
    weighted 1/C(k,2), accepted at threshold k+1."""
    k = inst.k
    if k < 2:
        raise InputError(f"positive form needs k >= 2, got {k}")
    n = inst.n
    matched = set(inst.matching)
    weight = Fraction(1, k * (k - 1) // 2)
    terms: Dict[FrozenSet[int], Fraction] = {frozenset({i}): Fraction(1) for i in range(n)}
    for u, v in combinations(range(n), 2):
        if (u, v) not in matched:
            terms[frozenset({u, v})] = weight
    return Ptf(MultilinearPolynomial(n, terms), "01"), Fraction(k + 1)


def _block_coords(i: int) -> Tuple[int, int]:
    return (2 * i, 2 * i + 1)


def _witness_assignments(inst: SeparationInstance, i: int, j: int) -> List[Tuple[int, ...]]:
    """Four assignments agreeing outside blocks i and j, where the outside
    completion alternates 0,1 so it sits at level k-2 with no matched pair
    fully set."""
    base = [0] * inst.n
    toggle = 0
    for b in range(inst.k):
        if b in (i, j):
            continue
        u, v = _block_coords(b)
        base[u] = toggle
        base[v] = 1 - toggle
        toggle = 1 - toggle
    patterns = [((0, 0), (1, 1)), ((1, 1), (0, 0)), ((1, 0), (1, 0)), ((0, 1), (0, 1))]
    out = []
    for pi, pj in patterns:
        a = list(base)
        a[2 * i], a[2 * i + 1] = pi
        a[2 * j], a[2 * j + 1] = pj
        out.append(tuple(a))
    return out


def mixed_term_audit(
    candidate: Ptf, threshold: Fraction, inst: SeparationInstance
) -> dict:
    """Check that a positive quadratic candidate has the structure any
    correct positive representation must have: a mixed term joining every
    pair of blocks.

    Returns a certificate counting the mixed pairs, or, for the first block
    pair with no mixed term, a witness of four assignments together with the
    exact additive identity that forces one of them to be misclassified.
    """
    threshold = Fraction(threshold)
    if not is_positive(candidate, threshold):
        raise InputError("audit requires a positive candidate")
    if candidate.poly.n != inst.n:
        raise InputError(
            f"candidate has {candidate.poly.n} variables, instance needs {inst.n}"
        )
    if candidate.poly.degree > 2:
        raise InputError("audit covers quadratic candidates only")

    represents: Optional[bool] = None
    if inst.k <= EXHAUSTIVE_K_LIMIT:
        represents = True
        for a in product((0, 1), repeat=inst.n):
            value = 1 if candidate.poly.evaluate(a) >= threshold else 0
            if value != f_n_oracle(inst, a):
                represents = False
                break

    def gamma(u: int, v: int) -> Fraction:
        return candidate.poly.coefficient(frozenset({u, v}))

    missing: Optional[Tuple[int, int]] = None
    pairs_with_mixed = 0
    for i, j in combinations(range(inst.k), 2):
        iu, iv = _block_coords(i)
        ju, jv = _block_coords(j)
        if any(gamma(u, v) != 0 for u in (iu, iv) for v in (ju, jv)):
            pairs_with_mixed += 1
        elif missing is None:
            missing = (i, j)

    total_pairs = inst.k * (inst.k - 1) // 2
    if missing is None:
        return {
            "kind": "certificate",
            "k": inst.k,
            "block_pairs": total_pairs,
            "pairs_with_mixed_term": pairs_with_mixed,
            "quadratic_size_at_least": total_pairs,
            "represents": represents,
        }

    i, j = missing
    points = _witness_assignments(inst, i, j)
    values = [candidate.poly.evaluate(a) for a in points]
    # with no mixed term between the blocks, the two sides differ exactly by
    # the two matched-pair weights
    lhs = values[0] + values[1]
    rhs = values[2] + values[3] + gamma(*_block_coords(i)) + gamma(*_block_coords(j))
    wants = (0, 0, 1, 1)
    violations = [
        idx
        for idx, (val, want) in enumerate(zip(values, wants))
        if (1 if val >= threshold else 0) != want
    ]
    return {
        "kind": "witness",
        "k": inst.k,
        "blocks": (i + 1, j + 1),
        "assignments": [list(a) for a in points],
        "values": [str(v) for v in values],
        "threshold": str(threshold),
        "identity_lhs": str(lhs),
        "identity_rhs": str(rhs),
        "identity_holds": lhs == rhs,
        "violations": violations,
        "represents": represents,
    }
