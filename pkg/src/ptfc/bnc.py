"""Bayesian network classifiers over binary features, with exact arithmetic.

A model has a class node C with a Bernoulli prior and binary feature nodes
X_1..X_n; C is implicitly a parent of every X_i, and the explicit parent sets
listed per node refer to other feature nodes only.  All probabilities are
Fractions, so joint probabilities, posterior odds and whole-domain accuracy
are computed without rounding.
"""

from __future__ import annotations

import csv
import json
import random
from fractions import Fraction
from math import gcd
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .errors import CapabilityError, InputError
from .fixedpoint import parse_fraction

Assignment = Tuple[int, ...]
CptKey = Tuple[Tuple[int, ...], int]

ENUMERATION_LIMIT = 20
TABLE_LIMIT = 16


def _check_bit(value, what: str) -> int:
    if value not in (0, 1):
        raise InputError(f"{what} must be 0 or 1, got {value!r}")
    return int(value)


def _check_probability(p, what: str) -> Fraction:
    try:
        p = Fraction(p)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{what} is not a rational: {p!r}") from exc
    if not 0 < p < 1:
        raise InputError(f"{what} must lie strictly between 0 and 1, got {p}")
    return p


class BncModel:
    """Immutable classifier: prior P(C=1) plus per-node CPTs P(X_i=1 | parents, C).

    parents[i] lists the feature parents of X_i (0-based, order fixed);
    cpt[i] maps (parent_bits, c) to P(X_i=1 | parents=parent_bits, C=c)
    and must contain every combination.
    """

    def __init__(
        self,
        n: int,
        prior1: Fraction,
        parents: Sequence[Sequence[int]],
        cpt: Sequence[Mapping[CptKey, Fraction]],
    ) -> None:
        if n < 1:
            raise InputError(f"need at least one feature node, got n={n}")
        self.n = n
        self.prior1 = _check_probability(prior1, "class prior")
        if len(parents) != n or len(cpt) != n:
            raise InputError("parents and cpt must both have one entry per node")
        self.parents: Tuple[Tuple[int, ...], ...] = tuple(
            tuple(int(p) for p in ps) for ps in parents
        )
        for i, ps in enumerate(self.parents):
            if len(set(ps)) != len(ps):
                raise InputError(f"node {i}: repeated parent in {ps}")
            for p in ps:
                if not 0 <= p < n or p == i:
                    raise InputError(f"node {i}: invalid parent {p}")
        self.cpt: Tuple[Dict[CptKey, Fraction], ...] = tuple(
            self._check_cpt(i, dict(table)) for i, table in enumerate(cpt)
        )
        self.topological_order = self._topological_order()
        self.degree = 1 + max((len(ps) for ps in self.parents), default=0)
        self._tables: Optional[Tuple[int, List[int], List[int]]] = None

    def _check_cpt(self, i: int, table: Dict[CptKey, Fraction]) -> Dict[CptKey, Fraction]:
        k = len(self.parents[i])
        want = {
            (tuple((m >> j) & 1 for j in range(k)), c)
            for m in range(1 << k)
            for c in (0, 1)
        }
        got = set(table)
        if got != want:
            raise InputError(f"node {i}: CPT keys {got} do not cover {sorted(want)}")
        return {
            key: _check_probability(p, f"node {i} CPT entry {key}")
            for key, p in table.items()
        }

    def _topological_order(self) -> Tuple[int, ...]:
        indeg = [len(ps) for ps in self.parents]
        children: List[List[int]] = [[] for _ in range(self.n)]
        for i, ps in enumerate(self.parents):
            for p in ps:
                children[p].append(i)
        ready = sorted(i for i in range(self.n) if indeg[i] == 0)
        order: List[int] = []
        while ready:
            i = ready.pop(0)
            order.append(i)
            for ch in sorted(children[i]):
                indeg[ch] -= 1
                if indeg[ch] == 0:
                    ready.append(ch)
            ready.sort()
        if len(order) != self.n:
            raise InputError("parent structure contains a directed cycle")
        return tuple(order)

    # -- structure ---------------------------------------------------------

    def families(self) -> List[Tuple[int, ...]]:
        """Support of each node's CPT factor: the node plus its parents."""
        return [tuple(sorted((i, *self.parents[i]))) for i in range(self.n)]

    def is_forest(self) -> bool:
        return all(len(ps) <= 1 for ps in self.parents)

    @property
    def precision_bits(self) -> int:
        """Max bit length over all CPT numerators and denominators."""
        bits = max(self.prior1.numerator.bit_length(), self.prior1.denominator.bit_length())
        for table in self.cpt:
            for p in table.values():
                bits = max(bits, p.numerator.bit_length(), p.denominator.bit_length())
        return bits

    # -- exact probability queries ------------------------------------------

    def node_probability(self, i: int, bits: Sequence[int], c: int) -> Fraction:
        """P(X_i = bits[i] | parents from bits, C=c)."""
        key = (tuple(bits[p] for p in self.parents[i]), c)
        p1 = self.cpt[i][key]
        return p1 if bits[i] == 1 else 1 - p1

    def joint_probability(self, bits: Sequence[int], c: int) -> Fraction:
        if len(bits) != self.n:
            raise InputError(f"assignment has {len(bits)} bits, model has {self.n}")
        prob = self.prior1 if c == 1 else 1 - self.prior1
        for i in range(self.n):
            prob *= self.node_probability(i, bits, c)
        return prob

    def input_probability(self, bits: Sequence[int]) -> Fraction:
        return self.joint_probability(bits, 0) + self.joint_probability(bits, 1)

    def posterior_odds(self, bits: Sequence[int]) -> Fraction:
        return self.joint_probability(bits, 1) / self.joint_probability(bits, 0)

    def classify(self, bits: Sequence[int]) -> int:
        """Most probable class given the assignment; ties go to class 1."""
        return 1 if self.joint_probability(bits, 1) >= self.joint_probability(bits, 0) else 0

    # -- whole-domain enumeration -------------------------------------------

    def joint_tables(self) -> Tuple[int, List[int], List[int]]:
        """(D, t0, t1) with P(a, c) = t_c[mask(a)] / D, mask bit i = a_i.

        Integer tables make whole-domain sums cheap; cached per model.
        """
        if self.n > TABLE_LIMIT:
            raise CapabilityError(
                f"joint tables need n <= {TABLE_LIMIT}, model has n={self.n}"
            )
        if self._tables is not None:
            return self._tables
        denom = self.prior1.denominator
        scaled: List[Dict[CptKey, int]] = []
        node_denoms: List[int] = []
        for i in range(self.n):
            d = 1
            for p in self.cpt[i].values():
                d = d * p.denominator // gcd(d, p.denominator)
            node_denoms.append(d)
            scaled.append({key: int(p * d) for key, p in self.cpt[i].items()})
            denom *= d
        size = 1 << self.n
        tables = ([0] * size, [0] * size)
        order = self.topological_order
        for c in (0, 1):
            prior_num = (
                self.prior1.numerator
                if c == 1
                else self.prior1.denominator - self.prior1.numerator
            )
            out = tables[c]

            def fill(pos: int, mask: int, num: int) -> None:
                if pos == self.n:
                    out[mask] = num
                    return
                i = order[pos]
                key = (tuple((mask >> p) & 1 for p in self.parents[i]), c)
                one = scaled[i][key]
                fill(pos + 1, mask, num * (node_denoms[i] - one))
                fill(pos + 1, mask | (1 << i), num * one)

            fill(0, 0, prior_num)
        self._tables = (denom, tables[0], tables[1])
        return self._tables

    def accuracy(self, classifier: Callable[[Assignment], int]) -> Fraction:
        """Probability mass of assignments the classifier labels correctly,
        summed over the whole domain with the model's own labels weighted in.
        """
        if self.n > ENUMERATION_LIMIT:
            raise CapabilityError(
                f"whole-domain accuracy needs n <= {ENUMERATION_LIMIT}, got n={self.n}"
            )
        total = Fraction(0)
        if self.n <= TABLE_LIMIT:
            denom, t0, t1 = self.joint_tables()
            num = 0
            for mask in range(1 << self.n):
                bits = tuple((mask >> i) & 1 for i in range(self.n))
                num += t1[mask] if classifier(bits) == 1 else t0[mask]
            return Fraction(num, denom)
        for bits in _all_assignments(self.n):
            total += self.joint_probability(bits, classifier(bits))
        return total

    def self_accuracy(self) -> Fraction:
        return self.accuracy(self.classify)

    # -- sampling -------------------------------------------------------------

    def sample_many(self, count: int, seed: int) -> List[Tuple[Assignment, int]]:
        """Deterministic forward samples: class first, then nodes in
        topological order; each bit compares an exact rng draw to the CPT entry.
        """
        rng = random.Random(seed)
        out: List[Tuple[Assignment, int]] = []
        for _ in range(count):
            c = 1 if Fraction(rng.random()) < self.prior1 else 0
            bits = [0] * self.n
            for i in self.topological_order:
                key = (tuple(bits[p] for p in self.parents[i]), c)
                bits[i] = 1 if Fraction(rng.random()) < self.cpt[i][key] else 0
            out.append((tuple(bits), c))
        return out

    def sample(self, seed: int) -> Tuple[Assignment, int]:
        return self.sample_many(1, seed)[0]

    # -- serialization --------------------------------------------------------

    def to_json(self) -> dict:
        nodes = []
        for i in range(self.n):
            rows = []
            k = len(self.parents[i])
            for m in range(1 << k):
                pbits = tuple((m >> j) & 1 for j in range(k))
                for c in (0, 1):
                    p = self.cpt[i][(pbits, c)]
                    rows.append(
                        {
                            "parent_bits": list(pbits),
                            "c": c,
                            "p1": [p.numerator, p.denominator],
                        }
                    )
            nodes.append(
                {
                    "id": i + 1,
                    "parents": [p + 1 for p in self.parents[i]],
                    "cpt": rows,
                }
            )
        return {
            "n": self.n,
            "class_prior": [self.prior1.numerator, self.prior1.denominator],
            "nodes": nodes,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "BncModel":
        try:
            n = int(data["n"])
            prior_num, prior_den = data["class_prior"]
            raw_nodes = data["nodes"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed model object: {exc}") from exc
        if len(raw_nodes) != n:
            raise InputError(f"model lists {len(raw_nodes)} nodes but n={n}")
        ids = [int(node["id"]) for node in raw_nodes]
        base = _id_base(ids, n)
        parents: List[Tuple[int, ...]] = [()] * n
        cpt: List[Dict[CptKey, Fraction]] = [{}] * n
        for node in raw_nodes:
            i = int(node["id"]) - base
            ps = tuple(int(p) - base for p in node.get("parents", ()))
            table: Dict[CptKey, Fraction] = {}
            for row in node["cpt"]:
                pbits = tuple(_check_bit(b, "parent_bits entry") for b in row["parent_bits"])
                if len(pbits) != len(ps):
                    raise InputError(
                        f"node {node['id']}: parent_bits length {len(pbits)} "
                        f"does not match {len(ps)} parents"
                    )
                c = _check_bit(row["c"], "class bit")
                num, den = row["p1"]
                table[(pbits, c)] = Fraction(int(num), int(den))
            parents[i] = ps
            cpt[i] = table
        return cls(n, Fraction(int(prior_num), int(prior_den)), parents, cpt)

    def dump(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "BncModel":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read model file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"model file {path} is not valid JSON: {exc}") from exc
        return cls.from_json(data)


def _id_base(ids: Sequence[int], n: int) -> int:
    if sorted(ids) == list(range(1, n + 1)):
        return 1
    if sorted(ids) == list(range(n)):
        return 0
    raise InputError(f"node ids must be exactly 1..{n} or 0..{n - 1}")


def _all_assignments(n: int) -> Iterator[Assignment]:
    for mask in range(1 << n):
        yield tuple((mask >> i) & 1 for i in range(n))


def write_samples_csv(path: str, n: int, samples: Iterable[Tuple[Assignment, int]]) -> None:
    """CSV with header x1,...,xn,c and one 0/1 row per sample."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(n)] + ["c"])
        for bits, c in samples:
            writer.writerow(list(bits) + [c])


_TAN_INTERVALS = ((Fraction(1, 7), Fraction(2, 7)),
                  (Fraction(3, 7), Fraction(4, 7)),
                  (Fraction(5, 7), Fraction(6, 7)))


def _random_interval_probability(rng: random.Random, q_bits: int) -> Fraction:
    lo, hi = _TAN_INTERVALS[rng.randrange(3)]
    scale = 1 << q_bits
    first = int(lo * scale) + 1
    top = hi * scale
    last = -(-top.numerator // top.denominator) - 1
    if last < first:
        raise InputError(f"q_bits={q_bits} leaves no grid point inside ({lo}, {hi})")
    return Fraction(rng.randint(first, last), scale)


def random_tan(
    n: int,
    forest: Sequence[Optional[int]],
    seed: int,
    q_bits: int = 20,
) -> BncModel:
    """Random classifier on a given in-forest: P(C=1)=1/2 and every CPT entry
    drawn uniformly from the q_bits-grid points inside
    (1/7,2/7) u (3/7,4/7) u (5/7,6/7).
    """
    if len(forest) != n:
        raise InputError(f"forest must assign a parent slot to each of {n} nodes")
    parents = [(() if p is None else (int(p),)) for p in forest]
    rng = random.Random(seed)
    cpt: List[Dict[CptKey, Fraction]] = []
    for i in range(n):
        table: Dict[CptKey, Fraction] = {}
        k = len(parents[i])
        for m in range(1 << k):
            pbits = tuple((m >> j) & 1 for j in range(k))
            for c in (0, 1):
                table[(pbits, c)] = _random_interval_probability(rng, q_bits)
        cpt.append(table)
    return BncModel(n, Fraction(1, 2), parents, cpt)
