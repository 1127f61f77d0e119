"""Compile a bounded-width classifier into a small approximating OBDD.

Pipeline: variable ordering from the moral graph, log-odds threshold
polynomial, approximate input generator with half the error budget, then a
forward product construction whose per-layer state is (partial sum,
generator node).  Layers are compressed greedily: states are grouped by
generator node, sorted by partial sum, and a state opens a new kept node
only when its acceptance probability exceeds the last kept one by more than
eps/(2n); everything else is rerouted into the previous kept node.  The
acceptance probabilities come from a backward pass over the generator alone,
as monotone step functions of the partial sum, so the uncompressed product
is never materialized.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .bnc import BncModel
from .errors import CapabilityError, InputError
from .fixedpoint import DEFAULT_GRID_BITS, decimal_str
from .gobdd import Gobdd, approx_input_gobdd
from .graphs import SeparatorSequence, moral_graph, ordering_for
from .obdd import DEFAULT_NODE_BUDGET, Obdd, ObddNode, node_budget_default
from .polynomials import LogOddsForm, MultilinearPolynomial, bnc_to_ptf

Value = Union[float, Fraction]

DEFAULT_DISTINGUISHED_PER_LAYER = 100_000
STEP_TABLE_LIMIT = 4_000_000


@dataclass(frozen=True)
class CompileParams:
    """eps is the total error budget; k and q are informational echoes of the
    model's width bound and entry precision; the budgets cap output nodes and
    kept nodes per layer."""

    eps: Fraction = Fraction(1, 10)
    k: Optional[int] = None
    q: Optional[int] = None
    grid_bits: int = DEFAULT_GRID_BITS
    node_budget: Optional[int] = None
    distinguished_per_layer: int = DEFAULT_DISTINGUISHED_PER_LAYER

    def validated(self) -> "CompileParams":
        eps = Fraction(self.eps)
        if not 0 < eps < 1:
            raise InputError(f"eps must lie in (0,1), got {eps}")
        budget = self.node_budget if self.node_budget is not None else node_budget_default()
        if budget <= 0 or self.distinguished_per_layer <= 0:
            raise InputError("budgets must be positive")
        if self.grid_bits <= 0:
            raise InputError("grid_bits must be positive")
        return CompileParams(
            eps=eps,
            k=self.k,
            q=self.q,
            grid_bits=self.grid_bits,
            node_budget=budget,
            distinguished_per_layer=self.distinguished_per_layer,
        )


@dataclass(frozen=True)
class ProductState:
    """A point of the virtual product: layer, exact partial sum of the
    determined polynomial terms, and the generator node for the prefix."""

    layer: int
    s: Fraction
    node: int


class AlphaTables:
    """Acceptance probability alpha(node, s) = P(final sum >= 0) when the
    remaining variables are drawn from the generator starting at `node` and
    the determined-term sum so far is s.

    Stored per generator node as a step function of s: cut points are exact
    integers on the coefficient grid, values are nondecreasing.  Exact mode
    keeps values as fractions; float mode is what compilation uses.
    """

    def __init__(
        self,
        poly: MultilinearPolynomial,
        gen: Gobdd,
        grid_bits: int = DEFAULT_GRID_BITS,
        exact: bool = False,
    ) -> None:
        if poly.n != gen.n:
            raise InputError("polynomial and generator disagree on variable count")
        self.scale = 1 << grid_bits
        self.exact = exact
        pos = {v: i for i, v in enumerate(gen.ordering)}

        def as_int(coeff: Fraction) -> int:
            scaled = coeff * self.scale
            if scaled.denominator != 1:
                raise InputError(
                    f"coefficient {coeff} is not on the 2^-{grid_bits} grid"
                )
            return scaled.numerator

        self.s0 = 0
        terms_at: Dict[int, List[Tuple[int, Tuple[int, ...]]]] = {}
        for sup, coeff in poly.terms.items():
            if not sup:
                self.s0 = as_int(coeff)
                continue
            layer = 1 + max(pos[v] for v in sup)
            var = gen.ordering[layer - 1]
            rest = tuple(v for v in sup if v != var)
            terms_at.setdefault(layer, []).append((as_int(coeff), rest))

        one: Value = Fraction(1) if exact else 1.0
        zero: Value = Fraction(0) if exact else 0.0
        self.start = gen.start
        self._c1: Dict[int, int] = {}
        self._tables: Dict[int, Tuple[List[int], List[Value]]] = {}
        order = sorted(gen.nodes.values(), key=lambda u: (-u.layer, u.id))
        for u in order:
            if u.p is None:
                self._tables[u.id] = ([0], [zero, one])
                continue
            layer = u.layer
            key = gen.keys.get(u.id)
            c1 = 0
            for coeff, rest in terms_at.get(layer, ()):
                if rest and key is None:
                    raise InputError(
                        "generator lacks construction keys needed for "
                        "terms of degree two or more"
                    )
                prod = 1
                if rest:
                    bits = dict(zip(key[1], key[2]))
                    for v in rest:
                        if v not in bits:
                            raise InputError(
                                f"term variable x{v + 1} missing from the "
                                f"generator separator at layer {layer}"
                            )
                        prod *= bits[v]
                        if not prod:
                            break
                c1 += coeff * prod
            self._c1[u.id] = c1
            p: Value = u.p if exact else float(u.p)
            q: Value = (1 - u.p) if exact else float(1 - u.p)
            cuts_lo, vals_lo = self._tables[u.lo]
            cuts_hi, vals_hi = self._tables[u.hi]
            self._tables[u.id] = _combine(p, q, cuts_lo, vals_lo, cuts_hi, vals_hi, c1)

    def c1(self, node: int) -> int:
        """Sum added to s on the 1-edge out of `node`, on the integer grid.
        The 0-edge adds nothing: every term resolved at a layer contains the
        layer's variable."""
        return self._c1[node]

    def alpha_scaled(self, node: int, s_int: int) -> Value:
        cuts, vals = self._tables[node]
        return vals[bisect.bisect_right(cuts, s_int)]

    def alpha(self, node: int, s: Fraction) -> Value:
        scaled = Fraction(s) * self.scale
        if scaled.denominator != 1:
            raise InputError(f"partial sum {s} is not on the coefficient grid")
        return self.alpha_scaled(node, scaled.numerator)

    def table_size(self, node: int) -> int:
        return len(self._tables[node][0])


def _combine(
    p: Value,
    q: Value,
    cuts_a: List[int],
    vals_a: List[Value],
    cuts_b: List[int],
    vals_b: List[Value],
    shift: int,
) -> Tuple[List[int], List[Value]]:
    """Step function s -> p*a(s) + q*b(s + shift), cuts deduplicated."""
    cuts: List[int] = []
    vals: List[Value] = [p * vals_a[0] + q * vals_b[0]]
    i = j = 0
    la, lb = len(cuts_a), len(cuts_b)
    while i < la or j < lb:
        ca = cuts_a[i] if i < la else None
        cb = cuts_b[j] - shift if j < lb else None
        if cb is None or (ca is not None and ca <= cb):
            c = ca
            i += 1
            if ca == cb:
                j += 1
        else:
            c = cb
            j += 1
        v = p * vals_a[i] + q * vals_b[j]
        if v != vals[-1]:
            cuts.append(c)
            vals.append(v)
    if len(cuts) > STEP_TABLE_LIMIT:
        raise CapabilityError(
            f"acceptance table exceeded {STEP_TABLE_LIMIT} steps"
        )
    return cuts, vals


def acceptance_probability(tables: AlphaTables, state: ProductState) -> Value:
    """Probability that a random completion from the state is accepted."""
    return tables.alpha(state.node, state.s)


def _monotone_or_die(layer: int, gid: int, svals: List[int], alphas: List[Value]) -> None:
    for i in range(1, len(alphas)):
        if alphas[i] < alphas[i - 1]:
            raise AssertionError(
                "acceptance probability decreased in s: "
                f"layer {layer}, generator node {gid}, "
                f"s {svals[i - 1]} -> {svals[i]}, "
                f"alpha {alphas[i - 1]} -> {alphas[i]}"
            )


def compile(model: BncModel, params: CompileParams = CompileParams()) -> Obdd:
    """Build an OBDD whose disagreement mass with the classifier, under the
    classifier's own input distribution, is at most params.eps."""
    params = params.validated()
    eps = params.eps
    n = model.n
    seq = ordering_for(moral_graph(n, model.parents))
    lof = bnc_to_ptf(model, params.grid_bits)
    gen = approx_input_gobdd(model, seq, eps / 2, params.grid_bits)
    tables = AlphaTables(lof.poly, gen, params.grid_bits, exact=False)
    threshold = float(eps / (2 * n))

    nodes: Dict[int, ObddNode] = {}
    counter = 0
    start_id: Optional[int] = None
    layer_gaps: List[float] = []
    sizes: List[int] = []
    # raw frontier entering each layer: (s_int, generator node) -> kept id
    frontier: List[Tuple[int, int]] = [(tables.s0, gen.start)]
    # parent edges waiting for the frontier to be compressed
    pending: List[Tuple[int, int, Tuple[int, int]]] = []
    for layer in range(1, n + 2):
        groups: Dict[int, List[int]] = {}
        for s, gid in frontier:
            groups.setdefault(gid, []).append(s)
        kept_of: Dict[Tuple[int, int], Tuple[int, int]] = {}
        kept: List[Tuple[int, int]] = []
        max_gap = 0.0
        for gid in sorted(groups):
            svals = sorted(groups[gid])
            alphas = [tables.alpha_scaled(gid, s) for s in svals]
            _monotone_or_die(layer, gid, svals, alphas)
            base = None
            idx = 0
            while idx < len(svals):
                kept.append((svals[idx], gid))
                kept_of[(svals[idx], gid)] = (svals[idx], gid)
                base = alphas[idx]
                # monotonicity makes the group boundary a bisection target
                stop = bisect.bisect_right(alphas, base + threshold, lo=idx + 1)
                for middle in range(idx + 1, stop):
                    kept_of[(svals[middle], gid)] = (svals[idx], gid)
                    max_gap = max(max_gap, alphas[middle] - base)
                idx = stop
        if len(kept) > params.distinguished_per_layer:
            raise CapabilityError(
                f"layer {layer} needs {len(kept)} kept nodes, "
                f"budget is {params.distinguished_per_layer}"
            )
        layer_gaps.append(max_gap)
        sizes.append(len(kept))
        ids: Dict[Tuple[int, int], int] = {}
        for key in sorted(kept, key=lambda t: (t[1], t[0])):
            ids[key] = counter
            counter += 1
            if counter > params.node_budget:
                raise CapabilityError(
                    f"node budget {params.node_budget} exhausted at layer {layer}"
                )
        if layer == 1:
            start_id = ids[kept_of[(tables.s0, gen.start)]]
        for parent, which, raw in pending:
            target = ids[kept_of[raw]]
            u = nodes[parent]
            nodes[parent] = ObddNode(
                id=u.id,
                layer=u.layer,
                var=u.var,
                lo=target if which == 0 else u.lo,
                hi=target if which == 1 else u.hi,
                sink=None,
            )
        pending = []
        if layer == n + 1:
            for (s, gid), uid in ids.items():
                nodes[uid] = ObddNode(
                    id=uid, layer=layer, var=None, lo=None, hi=None,
                    sink=1 if s >= 0 else 0,
                )
            break
        upcoming: Dict[Tuple[int, int], None] = {}
        var = seq.ordering[layer - 1]
        for (s, gid), uid in ids.items():
            g = gen.nodes[gid]
            raw_lo = (s, g.lo)
            raw_hi = (s + tables.c1(gid), g.hi)
            nodes[uid] = ObddNode(
                id=uid, layer=layer, var=var, lo=None, hi=None, sink=None
            )
            pending.append((uid, 0, raw_lo))
            pending.append((uid, 1, raw_hi))
            upcoming[raw_lo] = None
            upcoming[raw_hi] = None
        frontier = list(upcoming)

    meta = {
        "eps": decimal_str(eps, params.grid_bits),
        "eps_generator": decimal_str(eps / 2, params.grid_bits),
        "merge_threshold": threshold,
        "layer_max_merged_gap": layer_gaps,
        "merged_gap_total": sum(layer_gaps),
        "kept_per_layer": sizes,
        "ordering": [v + 1 for v in seq.ordering],
        "vertex_separation": seq.value,
        "generator_size": gen.size,
        "generator_width": gen.width,
        "ptf_terms": lof.poly.size,
        "tau": decimal_str(lof.tau, 2 * params.grid_bits),
        "grid_bits": params.grid_bits,
        "k": params.k,
        "q": params.q if params.q is not None else model.precision_bits,
    }
    return Obdd(n, seq.ordering, nodes, start_id, meta)


def verify_compilation(
    model: BncModel,
    obdd: Obdd,
    gen: Optional[Gobdd] = None,
    eps: Optional[Fraction] = None,
) -> dict:
    """Exhaustive comparison of a diagram against the classifier.

    Reports the disagreement mass under the input distribution, the additive
    error on the acceptance probability, and, when the generator used for
    compilation is supplied, the worst multiplicative deviation of the
    generator from the true input distribution.
    """
    n = model.n
    if n > 14:
        raise CapabilityError(f"exhaustive verification needs n <= 14, got {n}")
    if obdd.n != n:
        raise InputError("diagram and model disagree on variable count")
    denom, t0, t1 = model.joint_tables()
    disagree = 0
    accept_model = 0
    accept_obdd = 0
    worst_dev = Fraction(0)
    for mask in range(1 << n):
        bits = tuple((mask >> i) & 1 for i in range(n))
        f = 1 if t1[mask] >= t0[mask] else 0
        g = obdd.evaluate(bits)
        w = t0[mask] + t1[mask]
        if f:
            accept_model += w
        if g:
            accept_obdd += w
        if f != g:
            disagree += w
        if gen is not None:
            approx = gen.prob(bits)
            exact = Fraction(w, denom)
            ratio = approx / exact
            worst_dev = max(worst_dev, ratio - 1, 1 / ratio - 1)
    mass = Fraction(disagree, denom)
    additive = abs(Fraction(accept_obdd, denom) - Fraction(accept_model, denom))
    report = {
        "n": n,
        "size": obdd.size,
        "width": obdd.width,
        "disagreement_mass": {"exact": str(mass), "value": float(mass)},
        "p_accept_model": float(Fraction(accept_model, denom)),
        "p_accept_obdd": float(Fraction(accept_obdd, denom)),
        "additive_error": float(additive),
        "meta": dict(obdd.meta),
    }
    if eps is not None:
        eps = Fraction(eps)
        report["eps"] = float(eps)
        report["pass"] = bool(mass <= eps)
    if gen is not None:
        half = Fraction(eps) / 2 if eps is not None else None
        report["generator_sandwich"] = {
            "worst_deviation": float(worst_dev),
            "bound": None if half is None else float(half),
            "pass": None if half is None else bool(worst_dev <= half),
        }
    return report
