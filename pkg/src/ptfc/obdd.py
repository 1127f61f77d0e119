"""Layered and reduced ordered binary decision diagrams.

Exact construction from a threshold polynomial walks the variables in a given
order and merges partial assignments with equal (s, b) state: s the sum of
fully-determined terms, b the assigned bits still feeding undetermined terms
(the separator restriction).  A bottom-up subfunction merge afterwards yields
the minimal layered OBDD for the ordering; reduce() additionally drops nodes
whose edges agree, which introduces layer-jumping edges.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import CapabilityError, InputError
from .graphs import SeparatorSequence, TermHypergraph, primal_graph
from .polynomials import MultilinearPolynomial, Ptf

DEFAULT_NODE_BUDGET = 10_000_000


def node_budget_default() -> int:
    """Library default, overridable through PTFC_NODE_BUDGET."""
    raw = os.environ.get("PTFC_NODE_BUDGET")
    if raw is None:
        return DEFAULT_NODE_BUDGET
    try:
        value = int(raw)
    except ValueError as exc:
        raise InputError(f"PTFC_NODE_BUDGET={raw!r} is not an integer") from exc
    if value <= 0:
        raise InputError(f"PTFC_NODE_BUDGET must be positive, got {value}")
    return value


@dataclass(frozen=True)
class ObddNode:
    id: int
    layer: int
    var: Optional[int]
    lo: Optional[int]
    hi: Optional[int]
    sink: Optional[int]


class Obdd:
    """Immutable decision diagram; sinks live on layer n+1."""

    def __init__(
        self,
        n: int,
        ordering: Sequence[int],
        nodes: Mapping[int, ObddNode],
        start: int,
        meta: Optional[dict] = None,
    ) -> None:
        self.n = n
        self.ordering = tuple(int(v) for v in ordering)
        if sorted(self.ordering) != list(range(n)):
            raise InputError("ordering is not a permutation of the variables")
        self.nodes = dict(nodes)
        self.start = start
        self.meta = dict(meta or {})
        self._check()

    def _check(self) -> None:
        if self.start not in self.nodes:
            raise InputError(f"start node {self.start} missing")
        sinks = [u for u in self.nodes.values() if u.sink is not None]
        if not sinks or {u.layer for u in sinks} != {self.n + 1}:
            raise InputError("sinks must exist exactly on the last layer")
        for u in self.nodes.values():
            if u.sink is not None:
                if u.sink not in (0, 1) or u.lo is not None or u.hi is not None:
                    raise InputError(f"malformed sink node {u.id}")
                continue
            if not 1 <= u.layer <= self.n:
                raise InputError(f"node {u.id} on invalid layer {u.layer}")
            if u.var != self.ordering[u.layer - 1]:
                raise InputError(f"node {u.id} labeled {u.var}, layer expects "
                                 f"{self.ordering[u.layer - 1]}")
            for child in (u.lo, u.hi):
                if child not in self.nodes:
                    raise InputError(f"node {u.id} points at missing node {child}")
                if self.nodes[child].layer <= u.layer:
                    raise InputError(f"edge from {u.id} does not go deeper")

    @property
    def layers(self) -> Dict[int, List[ObddNode]]:
        out: Dict[int, List[ObddNode]] = {}
        for u in self.nodes.values():
            out.setdefault(u.layer, []).append(u)
        return out

    @property
    def width(self) -> int:
        return max(len(v) for v in self.layers.values())

    @property
    def size(self) -> int:
        return len(self.nodes)

    def is_layered(self) -> bool:
        return all(
            u.sink is not None
            or (self.nodes[u.lo].layer == u.layer + 1 and self.nodes[u.hi].layer == u.layer + 1)
            for u in self.nodes.values()
        )

    def evaluate(self, bits: Sequence[int]) -> int:
        if len(bits) != self.n:
            raise InputError(f"assignment has {len(bits)} bits, diagram has {self.n}")
        u = self.nodes[self.start]
        while u.sink is None:
            u = self.nodes[u.hi if bits[u.var] else u.lo]
        return u.sink

    def count_models(self) -> int:
        """Accepted assignments, counting skipped layers as free bits."""
        ways: Dict[int, int] = {}
        for layer in range(self.n + 1, 0, -1):
            for u in self.layers.get(layer, ()):
                if u.sink is not None:
                    ways[u.id] = u.sink
                else:
                    lo, hi = self.nodes[u.lo], self.nodes[u.hi]
                    ways[u.id] = (
                        (1 << (lo.layer - layer - 1)) * ways[lo.id]
                        + (1 << (hi.layer - layer - 1)) * ways[hi.id]
                    )
        return (1 << (self.nodes[self.start].layer - 1)) * ways[self.start]

    def to_json(self) -> dict:
        nodes = []
        for uid in sorted(self.nodes):
            u = self.nodes[uid]
            nodes.append(
                {
                    "id": u.id,
                    "layer": u.layer,
                    "var": None if u.var is None else u.var + 1,
                    "lo": u.lo,
                    "hi": u.hi,
                    "sink": u.sink,
                }
            )
        return {
            "n": self.n,
            "ordering": [v + 1 for v in self.ordering],
            "nodes": nodes,
            "start": self.start,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Obdd":
        try:
            n = int(data["n"])
            ordering = [int(v) - 1 for v in data["ordering"]]
            start = int(data["start"])
            raw = data["nodes"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed diagram object: {exc}") from exc
        nodes: Dict[int, ObddNode] = {}
        for item in raw:
            uid = int(item["id"])
            if uid in nodes:
                raise InputError(f"duplicate node id {uid}")
            var = item.get("var")
            sink = item.get("sink")
            nodes[uid] = ObddNode(
                id=uid,
                layer=int(item["layer"]),
                var=None if var is None else int(var) - 1,
                lo=None if item.get("lo") is None else int(item["lo"]),
                hi=None if item.get("hi") is None else int(item["hi"]),
                sink=None if sink is None else int(sink),
            )
        return cls(n, ordering, nodes, start)

    def dump(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "Obdd":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read diagram file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"diagram file {path} is not valid JSON: {exc}") from exc
        return cls.from_json(data)


def _relabel(
    n: int,
    ordering: Sequence[int],
    nodes: Dict[int, ObddNode],
    start: int,
    meta: Optional[dict] = None,
) -> Obdd:
    """Canonical ids: layer-major, stable within layer by old id; drops
    anything unreachable from start."""
    reachable = set()
    stack = [start]
    while stack:
        uid = stack.pop()
        if uid in reachable:
            continue
        reachable.add(uid)
        u = nodes[uid]
        if u.sink is None:
            stack.extend((u.lo, u.hi))
    order = sorted(reachable, key=lambda uid: (nodes[uid].layer, uid))
    newid = {uid: i for i, uid in enumerate(order)}
    rebuilt = {}
    for uid in order:
        u = nodes[uid]
        rebuilt[newid[uid]] = ObddNode(
            id=newid[uid],
            layer=u.layer,
            var=u.var,
            lo=None if u.lo is None else newid[u.lo],
            hi=None if u.hi is None else newid[u.hi],
            sink=u.sink,
        )
    return Obdd(n, ordering, rebuilt, newid[start], meta)


def build_exact_obdd(
    ptf: Union[Ptf, MultilinearPolynomial],
    ordering: Union[SeparatorSequence, Sequence[int]],
    node_budget: Optional[int] = None,
) -> Obdd:
    """Minimal layered OBDD of sign(ptf) under the given variable order.

    States are merged on (partial sum of determined terms, separator bits)
    while building, then a subfunction-merging pass canonicalizes each layer
    bottom-up.  Raises a capability error naming the layer if the state count
    passes the node budget.
    """
    poly = ptf.poly if isinstance(ptf, Ptf) else ptf
    if isinstance(ptf, Ptf) and ptf.encoding != "01":
        raise InputError("diagram construction expects the 01 encoding")
    n = poly.n
    if isinstance(ordering, SeparatorSequence):
        order = list(ordering.ordering)
    else:
        order = [int(v) for v in ordering]
    hyper = TermHypergraph.from_polynomial(poly)
    seps = SeparatorSequence.from_ordering(primal_graph(hyper), order)
    budget = node_budget if node_budget is not None else node_budget_default()

    position = {v: i + 1 for i, v in enumerate(order)}
    terms_at: List[List[Tuple[Tuple[int, ...], Fraction]]] = [[] for _ in range(n + 1)]
    for support, coeff in poly.terms.items():
        if support:
            layer = max(position[v] for v in support)
            terms_at[layer].append((tuple(sorted(support)), coeff))
    for bucket in terms_at:
        bucket.sort()

    constant = poly.terms.get(frozenset(), Fraction(0))
    sep_vars = [sorted(seps.separator_at(layer)) for layer in range(n + 1)]

    total_nodes = 0
    # states per layer: (s, bits aligned to sep_vars[layer-1]) -> node index
    layer_states: List[Dict[Tuple[Fraction, Tuple[int, ...]], int]] = []
    transitions: List[List[Tuple[int, int]]] = []
    current = {(constant, ()): 0}
    for layer in range(1, n + 1):
        var = order[layer - 1]
        prev_vars = sep_vars[layer - 1]
        next_vars = sep_vars[layer]
        layer_states.append(current)
        total_nodes += len(current)
        if total_nodes > budget:
            raise CapabilityError(
                f"node budget {budget} exceeded while expanding layer {layer}"
            )
        step: List[Tuple[int, int]] = [None] * len(current)
        nxt: Dict[Tuple[Fraction, Tuple[int, ...]], int] = {}
        for (s, bits), idx in current.items():
            val = dict(zip(prev_vars, bits))
            targets = []
            for x in (0, 1):
                if x == 0:
                    s2 = s
                else:
                    s2 = s
                    for support, coeff in terms_at[layer]:
                        prod = coeff
                        for u in support:
                            if u == var:
                                continue
                            if not val[u]:
                                prod = 0
                                break
                        s2 += prod
                val[var] = x
                bits2 = tuple(val[u] for u in next_vars)
                key = (s2, bits2)
                if key not in nxt:
                    nxt[key] = len(nxt)
                targets.append(nxt[key])
            del val[var]
            step[idx] = (targets[0], targets[1])
        transitions.append(step)
        current = nxt
    layer_states.append(current)
    total_nodes += len(current)
    if total_nodes > budget:
        raise CapabilityError(f"node budget {budget} exceeded at the final layer")

    # assign provisional ids layer by layer, states sorted for determinism
    ids: List[Dict[int, int]] = []
    counter = 0
    for layer in range(n + 1):
        states = layer_states[layer]
        mapping = {}
        for key in sorted(states, key=lambda k: (k[0], k[1])):
            mapping[states[key]] = counter
            counter += 1
        ids.append(mapping)

    nodes: Dict[int, ObddNode] = {}
    sink_ids: Dict[int, int] = {}
    for key in sorted(layer_states[n], key=lambda k: (k[0], k[1])):
        idx = layer_states[n][key]
        value = 1 if key[0] >= 0 else 0
        uid = ids[n][idx]
        sink_ids[uid] = value
        nodes[uid] = ObddNode(id=uid, layer=n + 1, var=None, lo=None, hi=None, sink=value)
    for layer in range(n, 0, -1):
        var = order[layer - 1]
        for state_idx, (lo_idx, hi_idx) in enumerate(transitions[layer - 1]):
            uid = ids[layer - 1][state_idx]
            nodes[uid] = ObddNode(
                id=uid,
                layer=layer,
                var=var,
                lo=ids[layer][lo_idx],
                hi=ids[layer][hi_idx],
                sink=None,
            )
    start = ids[0][0]
    merged = _merge_subfunctions(n, order, nodes, start)
    return merged


def _merge_subfunctions(
    n: int, ordering: Sequence[int], nodes: Dict[int, ObddNode], start: int
) -> Obdd:
    """Bottom-up canonicalization: nodes with identical (lo, hi) signatures on
    each layer collapse, giving the minimal layered OBDD for the ordering."""
    by_layer: Dict[int, List[ObddNode]] = {}
    for u in nodes.values():
        by_layer.setdefault(u.layer, []).append(u)
    canon: Dict[int, int] = {}
    rebuilt: Dict[int, ObddNode] = {}
    for layer in range(n + 1, 0, -1):
        signature: Dict[Tuple, int] = {}
        for u in sorted(by_layer.get(layer, ()), key=lambda x: x.id):
            if u.sink is not None:
                sig = ("sink", u.sink)
                lo = hi = None
            else:
                lo, hi = canon[u.lo], canon[u.hi]
                sig = (lo, hi)
            if sig in signature:
                canon[u.id] = signature[sig]
            else:
                signature[sig] = u.id
                canon[u.id] = u.id
                rebuilt[u.id] = ObddNode(
                    id=u.id, layer=u.layer, var=u.var, lo=lo, hi=hi, sink=u.sink
                )
    return _relabel(n, ordering, rebuilt, canon[start])


def reduce(obdd: Obdd) -> Obdd:
    """Apply the deletion rule: nodes with both edges to one successor vanish
    and incoming edges are redirected past them."""
    repl: Dict[int, int] = {}
    rebuilt: Dict[int, ObddNode] = {}
    for layer in range(obdd.n + 1, 0, -1):
        for u in obdd.layers.get(layer, ()):
            if u.sink is not None:
                repl[u.id] = u.id
                rebuilt[u.id] = u
                continue
            lo, hi = repl[u.lo], repl[u.hi]
            if lo == hi:
                repl[u.id] = lo
            else:
                repl[u.id] = u.id
                rebuilt[u.id] = ObddNode(
                    id=u.id, layer=u.layer, var=u.var, lo=lo, hi=hi, sink=None
                )
    meta = dict(obdd.meta)
    meta["reduced"] = True
    return _relabel(obdd.n, obdd.ordering, rebuilt, repl[obdd.start], meta)


def canonical_form(obdd: Obdd) -> Tuple:
    """Structure tuple invariant under node renaming: nodes in start-BFS
    order (lo before hi) with layer-relative references."""
    index: Dict[int, int] = {}
    queue = [obdd.start]
    shape: List[Tuple] = []
    while queue:
        uid = queue.pop(0)
        if uid in index:
            continue
        index[uid] = len(index)
        u = obdd.nodes[uid]
        if u.sink is None:
            queue.extend((u.lo, u.hi))
    for uid in sorted(index, key=index.get):
        u = obdd.nodes[uid]
        if u.sink is not None:
            shape.append((u.layer, "sink", u.sink))
        else:
            shape.append((u.layer, u.var, index[u.lo], index[u.hi]))
    return tuple(shape)


def export_dot(obdd: Obdd) -> str:
    """Deterministic DOT text: dashed 0-edges, solid 1-edges, one rank per
    layer."""
    lines = ["digraph obdd {", "  rankdir=TB;"]
    layers = obdd.layers
    for layer in sorted(layers):
        for u in sorted(layers[layer], key=lambda x: x.id):
            if u.sink is not None:
                lines.append(f'  n{u.id} [label="{u.sink}", shape=box];')
            else:
                lines.append(f'  n{u.id} [label="x{u.var + 1}", shape=circle];')
        members = " ".join(f"n{u.id};" for u in sorted(layers[layer], key=lambda x: x.id))
        lines.append(f"  {{ rank=same; {members} }}")
    for uid in sorted(obdd.nodes):
        u = obdd.nodes[uid]
        if u.sink is None:
            lines.append(f"  n{u.id} -> n{u.lo} [style=dashed];")
            lines.append(f"  n{u.id} -> n{u.hi};")
    lines.append("}")
    return "\n".join(lines) + "\n"
