"""Generator OBDDs: distributions over bit vectors as edge-weighted diagrams.

A node carries one probability p; its 0-edge has weight p and its 1-edge
weight 1-p, so every diagram is structurally normalized no matter how the
weights were rounded.  joint_gobdd represents one class-conditional input
distribution of a classifier exactly, keying nodes on separator assignments.
approx_input_gobdd represents the class mixture approximately: nodes split
additionally on the quantized running log of the class ratio along the
prefix, with grid step eps/(2n) so the per-assignment error telescopes to a
two-sided (1 +- eps) sandwich.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import mpmath

from .bnc import BncModel
from .errors import CapabilityError, InputError
from .fixedpoint import DEFAULT_GRID_BITS, decimal_str, log_units, parse_fraction, quantize_mpf
from .graphs import SeparatorSequence

MARGINAL_LIMIT = 16


@dataclass(frozen=True)
class GobddNode:
    id: int
    layer: int
    p: Optional[Fraction]  # None only on the sink
    lo: Optional[int]
    hi: Optional[int]


class Gobdd:
    """Immutable weighted diagram with a single sink on layer n+1."""

    def __init__(
        self,
        n: int,
        ordering: Sequence[int],
        nodes: Mapping[int, GobddNode],
        start: int,
        keys: Optional[dict] = None,
    ) -> None:
        self.n = n
        self.ordering = tuple(int(v) for v in ordering)
        if sorted(self.ordering) != list(range(n)):
            raise InputError("ordering is not a permutation of the variables")
        self.nodes = dict(nodes)
        self.start = start
        self.keys = dict(keys or {})  # id -> construction key, not serialized
        sinks = [u for u in self.nodes.values() if u.p is None]
        if len(sinks) != 1 or sinks[0].layer != n + 1:
            raise InputError("need exactly one sink on the last layer")
        self.sink = sinks[0].id
        for u in self.nodes.values():
            if u.p is None:
                continue
            if not 0 <= u.p <= 1:
                raise InputError(f"node {u.id} probability {u.p} outside [0,1]")
            for child in (u.lo, u.hi):
                if child not in self.nodes or self.nodes[child].layer != u.layer + 1:
                    raise InputError(f"node {u.id} edges must go to the next layer")

    @property
    def layers(self) -> Dict[int, List[GobddNode]]:
        out: Dict[int, List[GobddNode]] = {}
        for u in self.nodes.values():
            out.setdefault(u.layer, []).append(u)
        return out

    @property
    def width(self) -> int:
        return max(len(v) for v in self.layers.values())

    @property
    def size(self) -> int:
        return len(self.nodes)

    def prob(self, bits: Sequence[int]) -> Fraction:
        """Path product: 0-edges weigh p, 1-edges 1-p."""
        if len(bits) != self.n:
            raise InputError(f"assignment has {len(bits)} bits, diagram has {self.n}")
        u = self.nodes[self.start]
        mass = Fraction(1)
        while u.p is not None:
            if bits[self.ordering[u.layer - 1]]:
                mass *= 1 - u.p
                u = self.nodes[u.hi]
            else:
                mass *= u.p
                u = self.nodes[u.lo]
        return mass

    def sample_many(self, count: int, seed: int) -> List[Tuple[int, ...]]:
        rng = random.Random(seed)
        out = []
        for _ in range(count):
            bits = [0] * self.n
            u = self.nodes[self.start]
            while u.p is not None:
                if Fraction(rng.random()) < u.p:
                    bits[self.ordering[u.layer - 1]] = 0
                    u = self.nodes[u.lo]
                else:
                    bits[self.ordering[u.layer - 1]] = 1
                    u = self.nodes[u.hi]
            out.append(tuple(bits))
        return out

    def sample(self, seed: int) -> Tuple[int, ...]:
        return self.sample_many(1, seed)[0]

    def to_json(self, grid_bits: int = DEFAULT_GRID_BITS) -> dict:
        """Weights are written as decimal strings, quantizing any weight whose
        denominator is not supported by a finite decimal to the grid."""
        nodes = []
        for uid in sorted(self.nodes):
            u = self.nodes[uid]
            nodes.append(
                {
                    "id": u.id,
                    "layer": u.layer,
                    "var": None if u.p is None else self.ordering[u.layer - 1] + 1,
                    "lo": u.lo,
                    "hi": u.hi,
                    "sink": 1 if u.p is None else None,
                    "p": None if u.p is None else decimal_str(u.p, grid_bits),
                }
            )
        return {
            "n": self.n,
            "ordering": [v + 1 for v in self.ordering],
            "nodes": nodes,
            "start": self.start,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Gobdd":
        try:
            n = int(data["n"])
            ordering = [int(v) - 1 for v in data["ordering"]]
            start = int(data["start"])
            raw = data["nodes"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed generator object: {exc}") from exc
        nodes: Dict[int, GobddNode] = {}
        for item in raw:
            uid = int(item["id"])
            p = item.get("p")
            nodes[uid] = GobddNode(
                id=uid,
                layer=int(item["layer"]),
                p=None if p is None else parse_fraction(p),
                lo=None if item.get("lo") is None else int(item["lo"]),
                hi=None if item.get("hi") is None else int(item["hi"]),
            )
        return cls(n, ordering, nodes, start)

    def dump(self, path: str, grid_bits: int = DEFAULT_GRID_BITS) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(grid_bits), fh, indent=1)
            fh.write("\n")


def uniform_gobdd(n: int) -> Gobdd:
    """Width-one product distribution with every bit fair."""
    nodes = {}
    half = Fraction(1, 2)
    for layer in range(1, n + 1):
        nodes[layer - 1] = GobddNode(id=layer - 1, layer=layer, p=half, lo=layer, hi=layer)
    nodes[n] = GobddNode(id=n, layer=n + 1, p=None, lo=None, hi=None)
    return Gobdd(n, range(n), nodes, 0)


def _normalize_ordering(model: BncModel, ordering) -> SeparatorSequence:
    if isinstance(ordering, SeparatorSequence):
        seq = ordering
    else:
        from .graphs import moral_graph

        seq = SeparatorSequence.from_ordering(
            moral_graph(model.n, model.parents), ordering
        )
    if sorted(seq.ordering) != list(range(model.n)):
        raise InputError("ordering does not cover the model's variables")
    return seq


def separator_conditionals(
    model: BncModel, ordering: SeparatorSequence
) -> List[Dict[Tuple[int, ...], Tuple[Fraction, Fraction]]]:
    """Per layer l and per assignment b to the layer's incoming separator:
    (P(x_l = 0 | b, C=0), P(x_l = 0 | b, C=1)), all exact.

    The factorization guarantees the next bit depends on the prefix only
    through the separator, so these tables drive both generator
    constructions.  Exhaustive marginalization caps the variable count.
    """
    if model.n > MARGINAL_LIMIT:
        raise CapabilityError(
            f"separator marginals need n <= {MARGINAL_LIMIT}, model has n={model.n}"
        )
    _, t0, t1 = model.joint_tables()
    n = model.n
    out: List[Dict[Tuple[int, ...], Tuple[Fraction, Fraction]]] = []
    for layer in range(1, n + 1):
        var = ordering.ordering[layer - 1]
        sep = sorted(ordering.separator_at(layer - 1))
        positions = sep + [var]
        sums: Dict[Tuple[int, ...], List[int]] = {}
        for mask in range(1 << n):
            key = tuple((mask >> v) & 1 for v in positions)
            cell = sums.get(key)
            if cell is None:
                cell = [0, 0]
                sums[key] = cell
            cell[0] += t0[mask]
            cell[1] += t1[mask]
        table: Dict[Tuple[int, ...], Tuple[Fraction, Fraction]] = {}
        for bmask in range(1 << len(sep)):
            b = tuple((bmask >> i) & 1 for i in range(len(sep)))
            zero = sums[b + (0,)]
            one = sums[b + (1,)]
            table[b] = (
                Fraction(zero[0], zero[0] + one[0]),
                Fraction(zero[1], zero[1] + one[1]),
            )
        out.append(table)
    return out


def _restrict(bits_by_var: Dict[int, int], positions: Sequence[int]) -> Tuple[int, ...]:
    return tuple(bits_by_var[v] for v in positions)


def joint_gobdd(model: BncModel, ordering, c: int) -> Gobdd:
    """Exact generator for P(X | C=c), one node per separator assignment."""
    if c not in (0, 1):
        raise InputError(f"class bit must be 0 or 1, got {c}")
    seq = _normalize_ordering(model, ordering)
    conds = separator_conditionals(model, seq)
    n = model.n
    nodes: Dict[int, GobddNode] = {}
    keys: Dict[int, tuple] = {}
    ids: Dict[Tuple[int, Tuple[int, ...]], int] = {}
    counter = 0
    for layer in range(1, n + 2):
        sep = sorted(seq.separator_at(layer - 1)) if layer <= n else []
        states = [()] if layer > n else [
            tuple((m >> i) & 1 for i in range(len(sep))) for m in range(1 << len(sep))
        ]
        for b in sorted(states):
            ids[(layer, b)] = counter
            counter += 1
    for (layer, b), uid in ids.items():
        if layer == n + 1:
            nodes[uid] = GobddNode(id=uid, layer=layer, p=None, lo=None, hi=None)
            keys[uid] = (layer, (), b)
            continue
        var = seq.ordering[layer - 1]
        sep = sorted(seq.separator_at(layer - 1))
        nxt = sorted(seq.separator_at(layer)) if layer < n else []
        val = dict(zip(sep, b))
        children = []
        for x in (0, 1):
            val[var] = x
            children.append(ids[(layer + 1, _restrict(val, nxt))])
        del val[var]
        p0 = conds[layer - 1][b][c]
        nodes[uid] = GobddNode(id=uid, layer=layer, p=p0, lo=children[0], hi=children[1])
        keys[uid] = (layer, tuple(sep), b)
    return Gobdd(n, seq.ordering, nodes, ids[(1, ())], keys)


def approx_input_gobdd(
    model: BncModel,
    ordering,
    eps,
    grid_bits: int = DEFAULT_GRID_BITS,
) -> Gobdd:
    """Approximate generator for the input distribution P(X) = sum_c P(X, C=c).

    The exact mixture conditional at a node is (r q1 + q0) / (r + 1) with r
    the class ratio P(prefix, C=1)/P(prefix, C=0) and q_c the per-class
    conditionals; r is carried as an integer count of eps/(2n)-sized log
    steps, so prefixes agreeing on separator bits and rounded ratio share a
    node.  Edge weights evaluate that formula at the rounded ratio and land
    on the fixed-point grid.
    """
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise InputError(f"eps must lie in (0,1), got {eps}")
    seq = _normalize_ordering(model, ordering)
    n = model.n
    conds = separator_conditionals(model, seq)
    step = eps / (2 * n)
    prior_odds = model.prior1 / (1 - model.prior1)

    # reachable (separator bits, ratio bin) states, layer by layer
    start_key = ((), log_units(prior_odds, step))
    layer_states: List[Dict[Tuple[Tuple[int, ...], int], Dict[str, object]]] = []
    current: Dict[Tuple[Tuple[int, ...], int], Dict[str, object]] = {start_key: {}}
    prec = max(80, grid_bits + 48)
    for layer in range(1, n + 1):
        var = seq.ordering[layer - 1]
        sep = sorted(seq.separator_at(layer - 1))
        nxt = sorted(seq.separator_at(layer)) if layer < n else []
        upcoming: Dict[Tuple[Tuple[int, ...], int], Dict[str, object]] = {}
        for (b, j), info in current.items():
            q0_zero, q1_zero = conds[layer - 1][b]
            with mpmath.workprec(prec):
                r = mpmath.exp(mpmath.mpf(j) * mpmath.mpf(step.numerator)
                                / mpmath.mpf(step.denominator))
                w_zero = (r * q1_zero + q0_zero) / (r + 1)
                p_u = quantize_mpf(w_zero, grid_bits)
            lowest = Fraction(1, 1 << grid_bits)
            p_u = min(max(p_u, lowest), 1 - lowest)
            val = dict(zip(sep, b))
            children = []
            for x in (0, 1):
                qx0 = q0_zero if x == 0 else 1 - q0_zero
                qx1 = q1_zero if x == 0 else 1 - q1_zero
                j2 = j + log_units(qx1 / qx0, step)
                val[var] = x
                key = (_restrict(val, nxt), j2)
                if key not in upcoming:
                    upcoming[key] = {}
                children.append(key)
            del val[var]
            info["p"] = p_u
            info["children"] = children
        layer_states.append(current)
        current = upcoming
    # merge everything into the single sink
    layer_states.append({((), 0): {}})

    nodes: Dict[int, GobddNode] = {}
    keys: Dict[int, tuple] = {}
    ids: List[Dict[Tuple[Tuple[int, ...], int], int]] = []
    counter = 0
    for layer in range(n + 1):
        mapping = {}
        for key in sorted(layer_states[layer]):
            mapping[key] = counter
            counter += 1
        ids.append(mapping)
    sink_id = ids[n][((), 0)]
    nodes[sink_id] = GobddNode(id=sink_id, layer=n + 1, p=None, lo=None, hi=None)
    keys[sink_id] = (n + 1, (), (), 0)
    for layer in range(n, 0, -1):
        sep = tuple(sorted(seq.separator_at(layer - 1)))
        for key, info in layer_states[layer - 1].items():
            uid = ids[layer - 1][key]
            if layer == n:
                lo = hi = sink_id
            else:
                lo = ids[layer][info["children"][0]]
                hi = ids[layer][info["children"][1]]
            nodes[uid] = GobddNode(
                id=uid, layer=layer, p=info["p"], lo=lo, hi=hi
            )
            keys[uid] = (layer, sep, key[0], key[1])
    return Gobdd(n, seq.ordering, nodes, ids[0][start_key], keys)


def weighted_mass(obdd, d: Gobdd) -> Fraction:
    """Probability mass the distribution puts on the diagram's accepted set.

    Both arguments must share an ordering; the diagram may have layer jumps
    (reduced form), in which case skipped variables marginalize out through
    the generator.
    """
    if tuple(obdd.ordering) != tuple(d.ordering):
        raise InputError("diagram and generator orderings differ")
    memo: Dict[Tuple[int, int], Fraction] = {}

    def walk(uid: int, gid: int) -> Fraction:
        u = obdd.nodes[uid]
        if u.sink is not None:
            # remaining generator mass always totals one
            return Fraction(u.sink)
        g = d.nodes[gid]
        key = (uid, gid)
        if key in memo:
            return memo[key]
        if g.layer < u.layer:
            result = g.p * walk(uid, g.lo) + (1 - g.p) * walk(uid, g.hi)
        else:
            result = g.p * walk(u.lo, g.lo) + (1 - g.p) * walk(u.hi, g.hi)
        memo[key] = result
        return result

    return walk(obdd.start, d.start)
