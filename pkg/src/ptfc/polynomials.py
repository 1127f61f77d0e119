"""Multilinear polynomials and polynomial threshold functions on {0,1}^n.

A polynomial is a map from variable subsets to rational coefficients; a
threshold function is its sign (nonnegative -> 1).  The log-odds construction
turns a classifier into such a polynomial whose sign reproduces the
classifier's decisions; since logs are rounded to a fixed-point grid, the
resulting object carries a tolerance and falls back to exact rational odds
whenever an evaluation lands inside it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .bnc import BncModel
from .errors import CapabilityError, InputError
from .fixedpoint import DEFAULT_GRID_BITS, decimal_str, log_fixed, parse_fraction

Support = FrozenSet[int]

EXACT_REPRESENTATION_LIMIT = 20


class MultilinearPolynomial:
    """Immutable sum of coefficient-weighted monomials x_I, I a subset of [n]."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[Iterable[int], Fraction]) -> None:
        if n < 0:
            raise InputError(f"variable count must be nonnegative, got {n}")
        object.__setattr__(self, "n", n)
        normalized: Dict[Support, Fraction] = {}
        for vars_, coeff in terms.items():
            support = frozenset(int(v) for v in vars_)
            for v in support:
                if not 0 <= v < n:
                    raise InputError(f"variable {v} out of range for n={n}")
            coeff = Fraction(coeff)
            if coeff == 0:
                continue
            if support in normalized:
                raise InputError(f"duplicate term support {sorted(support)}")
            normalized[support] = coeff
        object.__setattr__(self, "terms", normalized)

    def __setattr__(self, name, value):
        raise AttributeError("MultilinearPolynomial is immutable")

    @property
    def degree(self) -> int:
        return max((len(s) for s in self.terms), default=0)

    @property
    def size(self) -> int:
        return len(self.terms)

    def coefficient(self, vars_: Iterable[int]) -> Fraction:
        return self.terms.get(frozenset(vars_), Fraction(0))

    def term_supports(self) -> List[Support]:
        return sorted(self.terms, key=lambda s: (len(s), sorted(s)))

    def evaluate(self, values: Sequence) -> Fraction:
        if len(values) != self.n:
            raise InputError(f"assignment has {len(values)} values, polynomial has {self.n}")
        total = Fraction(0)
        for support, coeff in self.terms.items():
            prod = coeff
            for v in support:
                prod *= values[v]
                if prod == 0:
                    break
            total += prod
        return total

    def scaled(self, factor: Fraction) -> "MultilinearPolynomial":
        factor = Fraction(factor)
        return MultilinearPolynomial(
            self.n, {s: c * factor for s, c in self.terms.items()}
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultilinearPolynomial)
            and self.n == other.n
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        parts = []
        for support in self.term_supports():
            coeff = self.terms[support]
            mono = "*".join(f"x{v + 1}" for v in sorted(support)) or "1"
            parts.append(f"{coeff}*{mono}")
        body = " + ".join(parts) or "0"
        return f"MultilinearPolynomial(n={self.n}, {body})"


@dataclass(frozen=True)
class Ptf:
    """A polynomial together with the domain encoding its variables use.

    encoding "01": variables take the assignment bits directly.
    encoding "pm1": bit x maps to 1 - 2x, so bit 0 -> +1 and bit 1 -> -1.
    """

    poly: MultilinearPolynomial
    encoding: str = "01"

    def __post_init__(self):
        if self.encoding not in ("01", "pm1"):
            raise InputError(f"unknown encoding {self.encoding!r}")

    @property
    def n(self) -> int:
        return self.poly.n

    def domain_values(self, bits: Sequence[int]) -> Tuple:
        if self.encoding == "01":
            return tuple(bits)
        return tuple(1 - 2 * b for b in bits)

    def evaluate(self, bits: Sequence[int]) -> Fraction:
        return self.poly.evaluate(self.domain_values(bits))

    def sign(self, bits: Sequence[int]) -> int:
        return 1 if self.evaluate(bits) >= 0 else 0


def _as_ptf(obj: Union[Ptf, MultilinearPolynomial]) -> Ptf:
    if isinstance(obj, Ptf):
        return obj
    if isinstance(obj, MultilinearPolynomial):
        return Ptf(obj)
    raise InputError(f"expected a polynomial or Ptf, got {type(obj).__name__}")


def evaluate(obj, bits: Sequence[int]) -> Fraction:
    return _as_ptf(obj).evaluate(bits)


def sign(obj, bits: Sequence[int]) -> int:
    """Threshold evaluation: 1 iff the polynomial is nonnegative at bits.

    Log-odds forms override this with their exact-odds fallback.
    """
    if isinstance(obj, LogOddsForm):
        return obj.decide(bits)
    return _as_ptf(obj).sign(bits)


@dataclass(frozen=True)
class LogOddsForm(Ptf):
    """Log-odds polynomial of a classifier, on the 2**-grid_bits grid.

    Evaluations with |value| >= tau carry the correct sign outright; below
    tau the accumulated rounding of the stored logs could flip it, so decide()
    re-checks those points against the exact rational odds ratio.
    """

    model: Optional[BncModel] = None
    tau: Fraction = Fraction(0)
    grid_bits: int = DEFAULT_GRID_BITS

    def decide(self, bits: Sequence[int]) -> int:
        value = self.evaluate(bits)
        if value >= self.tau:
            return 1
        if value <= -self.tau:
            return 0
        return self.model.classify(bits)


def bnc_to_ptf(model: BncModel, grid_bits: int = DEFAULT_GRID_BITS) -> LogOddsForm:
    """Expand a classifier's posterior log-odds into a multilinear polynomial.

    Each CPT row contributes its class log-ratio times the indicator product
    of the row's configuration over the node's family; the expansion is done
    on the odds ratios themselves with exact subset algebra, so each stored
    coefficient is a single rounded log of an exact rational.  Term supports
    stay inside families, hence degree <= 1 + max parent-set size; exact
    cancellations (ratio products equal to 1) drop terms entirely.
    """
    odds: Dict[Support, Fraction] = {frozenset(): model.prior1 / (1 - model.prior1)}
    for i in range(model.n):
        family = (i,) + model.parents[i]
        k = len(model.parents[i])
        for m in range(1 << k):
            pbits = tuple((m >> j) & 1 for j in range(k))
            for a_i in (0, 1):
                p1_c0 = model.cpt[i][(pbits, 0)]
                p1_c1 = model.cpt[i][(pbits, 1)]
                ratio = (p1_c1 / p1_c0) if a_i == 1 else ((1 - p1_c1) / (1 - p1_c0))
                if ratio == 1:
                    continue
                config = (a_i,) + pbits
                ones = frozenset(v for v, bit in zip(family, config) if bit == 1)
                zeros = [v for v, bit in zip(family, config) if bit == 0]
                for m2 in range(1 << len(zeros)):
                    extra = frozenset(zeros[j] for j in range(len(zeros)) if (m2 >> j) & 1)
                    support = ones | extra
                    power = -1 if len(extra) % 2 else 1
                    current = odds.get(support, Fraction(1))
                    odds[support] = current * (ratio if power == 1 else 1 / ratio)
    terms: Dict[Support, Fraction] = {}
    for support, q in odds.items():
        if q == 1:
            continue
        coeff = log_fixed(q, grid_bits)
        if coeff != 0:
            terms[support] = coeff
    poly = MultilinearPolynomial(model.n, terms)
    q_bits = model.precision_bits
    spec_tau = Fraction(model.n * (1 << (2 * q_bits)), 1 << grid_bits)
    rounding_bound = Fraction(len(odds), 1 << (grid_bits + 1))
    return LogOddsForm(
        poly=poly,
        encoding="01",
        model=model,
        tau=max(spec_tau, rounding_bound),
        grid_bits=grid_bits,
    )


def exact_representation(truth, n: Optional[int] = None) -> MultilinearPolynomial:
    """Unique multilinear interpolant of a Boolean function on {0,1}^n.

    truth may be a callable on bit tuples or a sequence of length 2**n indexed
    by the bitmask with bit i = x_i.  Subtracting 1/2 from the result gives a
    sign-representation of the function.
    """
    if callable(truth):
        if n is None:
            raise InputError("n is required when the function is given as a callable")
        table = [int(truth(tuple((mask >> i) & 1 for i in range(n)))) for mask in range(1 << n)]
    else:
        table = [int(v) for v in truth]
        if n is None:
            n = (len(table) - 1).bit_length()
        if len(table) != 1 << n:
            raise InputError(f"truth table length {len(table)} is not 2**{n}")
    if n > EXACT_REPRESENTATION_LIMIT:
        raise CapabilityError(
            f"exact representation needs n <= {EXACT_REPRESENTATION_LIMIT}, got {n}"
        )
    for v in table:
        if v not in (0, 1):
            raise InputError("truth table values must be 0 or 1")
    coeffs = list(table)
    for i in range(n):
        bit = 1 << i
        for mask in range(1 << n):
            if mask & bit:
                coeffs[mask] -= coeffs[mask ^ bit]
    terms = {
        frozenset(i for i in range(n) if (mask >> i) & 1): Fraction(coeffs[mask])
        for mask in range(1 << n)
        if coeffs[mask] != 0
    }
    return MultilinearPolynomial(n, terms)


def convert_domain(obj: Union[Ptf, MultilinearPolynomial], target: str) -> Ptf:
    """Rewrite a threshold function in the other variable encoding.

    Uses the affine bijection y = 1 - 2x between {0,1} and {+1,-1}; the sign
    pattern over bit assignments is unchanged, and every new term support is
    a subset of an old one.
    """
    ptf = _as_ptf(obj)
    if target not in ("01", "pm1"):
        raise InputError(f"unknown encoding {target!r}")
    if target == ptf.encoding:
        return ptf
    # x = (1-y)/2 when leaving "01"; y = 1-2x when leaving "pm1".
    c0, c1 = (Fraction(1, 2), Fraction(-1, 2)) if target == "pm1" else (Fraction(1), Fraction(-2))
    out: Dict[Support, Fraction] = {}
    for support, coeff in ptf.poly.terms.items():
        expansion: Dict[Support, Fraction] = {frozenset(): coeff}
        for v in support:
            next_exp: Dict[Support, Fraction] = {}
            for sub, weight in expansion.items():
                for piece_support, piece_coeff in ((sub, weight * c0), (sub | {v}, weight * c1)):
                    if piece_coeff == 0:
                        continue
                    next_exp[piece_support] = next_exp.get(piece_support, Fraction(0)) + piece_coeff
            expansion = next_exp
        for sub, weight in expansion.items():
            out[sub] = out.get(sub, Fraction(0)) + weight
    poly = MultilinearPolynomial(ptf.poly.n, {s: c for s, c in out.items() if c != 0})
    return Ptf(poly, target)


def is_positive(obj: Union[Ptf, MultilinearPolynomial], threshold: Fraction) -> bool:
    """True iff all coefficients are nonnegative, there is no constant term,
    and the threshold is nonnegative."""
    ptf = _as_ptf(obj)
    if Fraction(threshold) < 0:
        return False
    for support, coeff in ptf.poly.terms.items():
        if not support or coeff < 0:
            return False
    return True


def monotone_dnf_to_positive_ptf(
    dnf: Sequence[Iterable[int]], n: int
) -> Tuple[Ptf, Fraction]:
    """Counting representation of a monotone DNF: sum the conjunctions as
    monomials and threshold at 1/2."""
    terms: Dict[Support, Fraction] = {}
    for conj in dnf:
        support = frozenset(int(v) for v in conj)
        if not support:
            raise InputError("empty conjunction makes the DNF constant true")
        for v in support:
            if v < 0:
                raise InputError("negated literals are not allowed in a monotone DNF")
        terms[support] = terms.get(support, Fraction(0)) + 1
    poly = MultilinearPolynomial(n, terms)
    return Ptf(poly), Fraction(1, 2)


def ptf_to_json(obj: Union[Ptf, MultilinearPolynomial], grid_bits: int = DEFAULT_GRID_BITS) -> dict:
    ptf = _as_ptf(obj)
    terms = [
        {
            "vars": [v + 1 for v in sorted(support)],
            "coeff": decimal_str(ptf.poly.terms[support], grid_bits),
        }
        for support in ptf.poly.term_supports()
    ]
    return {"n": ptf.poly.n, "encoding": ptf.encoding, "terms": terms}


def ptf_from_json(data: Mapping) -> Ptf:
    try:
        n = int(data["n"])
        encoding = data.get("encoding", "01")
        raw_terms = data["terms"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed polynomial object: {exc}") from exc
    terms: Dict[Support, Fraction] = {}
    for item in raw_terms:
        vars_ = frozenset(int(v) - 1 for v in item.get("vars", ()))
        if any(not 0 <= v < n for v in vars_):
            raise InputError(f"term variables {sorted(item.get('vars', ()))} out of range 1..{n}")
        coeff = parse_fraction(item["coeff"])
        if vars_ in terms:
            raise InputError(f"duplicate term {sorted(v + 1 for v in vars_)}")
        terms[vars_] = coeff
    return Ptf(MultilinearPolynomial(n, terms), encoding)


def dump_ptf(obj, path: str, grid_bits: int = DEFAULT_GRID_BITS) -> None:
    with open(path, "w") as fh:
        json.dump(ptf_to_json(obj, grid_bits), fh, indent=1)
        fh.write("\n")


def load_ptf(path: str) -> Ptf:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read polynomial file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"polynomial file {path} is not valid JSON: {exc}") from exc
    return ptf_from_json(data)
