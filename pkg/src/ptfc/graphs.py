"""Graphs, hypergraphs, and width machinery.

Provides moral and primal graphs, tree and path decompositions with an
independent validator, exact tree-width and vertex-separation searches at
desk scale, and deterministic heuristic orderings for anything larger.
The vertex-separation value of an ordering equals the path-width reachable
with it, which is what the diagram constructions downstream consume.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .errors import CapabilityError, InputError

TREEWIDTH_EXACT_LIMIT = 16
PATHWIDTH_EXACT_LIMIT = 14
PATH_DECOMPOSITION_SEARCH_LIMIT = 11


class Graph:
    """Undirected simple graph on vertices 0..n-1 with bitmask adjacency."""

    __slots__ = ("n", "adj")

    def __init__(self, n: int, edges: Iterable[Tuple[int, int]] = ()) -> None:
        if n < 0:
            raise InputError(f"vertex count must be nonnegative, got {n}")
        self.n = n
        adj = [0] * n
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                continue
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        self.adj = tuple(adj)

    def edges(self) -> List[Tuple[int, int]]:
        out = []
        for u in range(self.n):
            mask = self.adj[u] >> (u + 1)
            v = u + 1
            while mask:
                if mask & 1:
                    out.append((u, v))
                mask >>= 1
                v += 1
        return out

    def neighbors(self, v: int) -> List[int]:
        return _bits(self.adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def degree(self, v: int) -> int:
        return bin(self.adj[v]).count("1")

    def edge_count(self) -> int:
        return sum(self.degree(v) for v in range(self.n)) // 2

    def components(self) -> List[List[int]]:
        seen = 0
        out = []
        for v in range(self.n):
            if seen >> v & 1:
                continue
            frontier = 1 << v
            comp = 0
            while frontier:
                comp |= frontier
                nxt = 0
                for u in _bits(frontier):
                    nxt |= self.adj[u]
                frontier = nxt & ~comp
            seen |= comp
            out.append(_bits(comp))
        return out

    def is_forest(self) -> bool:
        return self.edge_count() == self.n - len(self.components())

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [[u + 1, v + 1] for u, v in self.edges()]}

    @classmethod
    def from_json(cls, data) -> "Graph":
        try:
            n = int(data["n"])
            raw = data["edges"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed graph object: {exc}") from exc
        edges = []
        for e in raw:
            if len(e) != 2:
                raise InputError(f"graph edge {e} is not a pair")
            edges.append((int(e[0]) - 1, int(e[1]) - 1))
        return cls(n, edges)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.edge_count()})"


def _bits(mask: int) -> List[int]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return out


class TermHypergraph:
    """Vertex set [n] with the supports of a polynomial's terms as hyperedges.

    Empty supports (constant terms) are discarded; duplicates collapse.
    """

    __slots__ = ("n", "edges")

    def __init__(self, n: int, edges: Iterable[Iterable[int]]) -> None:
        if n < 0:
            raise InputError(f"vertex count must be nonnegative, got {n}")
        self.n = n
        seen: Set[FrozenSet[int]] = set()
        for edge in edges:
            support = frozenset(int(v) for v in edge)
            for v in support:
                if not 0 <= v < n:
                    raise InputError(f"hyperedge vertex {v} out of range for n={n}")
            if support:
                seen.add(support)
        self.edges = tuple(sorted(seen, key=lambda s: (len(s), sorted(s))))

    @classmethod
    def from_polynomial(cls, poly) -> "TermHypergraph":
        return cls(poly.n, poly.terms.keys())

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [[v + 1 for v in sorted(e)] for e in self.edges]}

    @classmethod
    def from_json(cls, data) -> "TermHypergraph":
        try:
            return cls(int(data["n"]), [[int(v) - 1 for v in e] for e in data["edges"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed hypergraph object: {exc}") from exc


def primal_graph(h: TermHypergraph) -> Graph:
    """Replace every hyperedge by a clique; singletons add nothing."""
    edges = []
    for e in h.edges:
        vs = sorted(e)
        for i in range(len(vs)):
            for j in range(i + 1, len(vs)):
                edges.append((vs[i], vs[j]))
    return Graph(h.n, edges)


def moral_graph(n: int, parents: Sequence[Sequence[int]]) -> Graph:
    """Undirect a DAG and marry co-parents.

    parents[i] lists the direct parents of node i; the input must be acyclic.
    """
    indeg = [0] * n
    children: List[List[int]] = [[] for _ in range(n)]
    for i, ps in enumerate(parents):
        for p in ps:
            if not 0 <= p < n or p == i:
                raise InputError(f"node {i}: invalid parent {p}")
            indeg[i] += 1
            children[p].append(i)
    ready = [i for i in range(n) if indeg[i] == 0]
    done = 0
    while ready:
        v = ready.pop()
        done += 1
        for ch in children[v]:
            indeg[ch] -= 1
            if indeg[ch] == 0:
                ready.append(ch)
    if done != n:
        raise InputError("parent structure contains a directed cycle")
    edges = []
    for i, ps in enumerate(parents):
        for p in ps:
            edges.append((i, p))
        ps = sorted(ps)
        for a in range(len(ps)):
            for b in range(a + 1, len(ps)):
                edges.append((ps[a], ps[b]))
    return Graph(n, edges)


@dataclass(frozen=True)
class Decomposition:
    """Tree or path decomposition: bags indexed 0..k-1 plus decomposition-tree
    edges.  Validity is established only by validate(), never assumed."""

    kind: str
    bags: Tuple[FrozenSet[int], ...]
    tree: Tuple[Tuple[int, int], ...]

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=1) - 1

    def validate(self, g: Graph) -> None:
        """Raise InputError unless this is a valid decomposition of g."""
        k = len(self.bags)
        if k == 0:
            if g.n == 0:
                return
            raise InputError("decomposition has no bags")
        adj: List[Set[int]] = [set() for _ in range(k)]
        for a, b in self.tree:
            if not (0 <= a < k and 0 <= b < k):
                raise InputError(f"decomposition edge ({a},{b}) out of range")
            adj[a].add(b)
            adj[b].add(a)
        if len(self.tree) != k - 1:
            raise InputError(f"decomposition tree has {len(self.tree)} edges, needs {k - 1}")
        seen = {0}
        stack = [0]
        while stack:
            for u in adj[stack.pop()]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        if len(seen) != k:
            raise InputError("decomposition tree is disconnected")
        if self.kind == "path" and any(len(a) > 2 for a in adj):
            raise InputError("path decomposition tree has a branching bag")
        for bag in self.bags:
            for v in bag:
                if not 0 <= v < g.n:
                    raise InputError(f"bag vertex {v} out of range")
        for u, v in g.edges():
            if not any(u in bag and v in bag for bag in self.bags):
                raise InputError(f"edge ({u},{v}) not covered by any bag")
        for v in range(g.n):
            holding = [t for t in range(k) if v in self.bags[t]]
            if not holding:
                raise InputError(f"vertex {v} appears in no bag")
            reach = {holding[0]}
            stack = [holding[0]]
            while stack:
                for u in adj[stack.pop()]:
                    if u not in reach and v in self.bags[u]:
                        reach.add(u)
                        stack.append(u)
            if reach != set(holding):
                raise InputError(f"bags containing vertex {v} are not connected")

    def to_dot(self) -> str:
        lines = [f"graph {self.kind}_decomposition {{", "  node [shape=box];"]
        for t, bag in enumerate(self.bags):
            label = ",".join(str(v + 1) for v in sorted(bag)) or "empty"
            lines.append(f'  b{t} [label="{{{label}}}"];')
        for a, b in sorted(self.tree):
            lines.append(f"  b{a} -- b{b};")
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SeparatorSequence:
    """A vertex ordering with its separators: separators[l-1] holds the
    placed vertices that still have edges to unplaced ones after l
    placements; value is the largest separator size."""

    ordering: Tuple[int, ...]
    separators: Tuple[FrozenSet[int], ...]
    value: int

    @classmethod
    def from_ordering(cls, g: Graph, ordering: Sequence[int]) -> "SeparatorSequence":
        order = tuple(int(v) for v in ordering)
        if sorted(order) != list(range(g.n)):
            raise InputError(f"ordering {order} is not a permutation of 0..{g.n - 1}")
        placed = 0
        seps: List[FrozenSet[int]] = []
        for v in order:
            placed |= 1 << v
            unplaced = ((1 << g.n) - 1) & ~placed
            seps.append(
                frozenset(u for u in _bits(placed) if g.adj[u] & unplaced)
            )
        value = max((len(s) for s in seps), default=0)
        return cls(order, tuple(seps), value)

    def separator_at(self, layer: int) -> FrozenSet[int]:
        """Separator after the first `layer` placements; layer 0 is empty."""
        if layer == 0:
            return frozenset()
        return self.separators[layer - 1]


# -- exact tree-width ---------------------------------------------------------


def _min_fill_order(g: Graph) -> List[int]:
    """Greedy elimination: repeatedly remove the vertex adding fewest fill
    edges, lowest index on ties."""
    adj = {v: set(g.neighbors(v)) for v in range(g.n)}
    order = []
    remaining = set(range(g.n))
    while remaining:
        best = None
        best_fill = None
        for v in sorted(remaining):
            nbrs = adj[v]
            fill = sum(
                1
                for u in nbrs
                for w in nbrs
                if u < w and w not in adj[u]
            )
            if best_fill is None or fill < best_fill:
                best, best_fill = v, fill
        nbrs = sorted(adj[best])
        for i in range(len(nbrs)):
            for j in range(i + 1, len(nbrs)):
                adj[nbrs[i]].add(nbrs[j])
                adj[nbrs[j]].add(nbrs[i])
        for u in nbrs:
            adj[u].discard(best)
        del adj[best]
        remaining.remove(best)
        order.append(best)
    return order


def decomposition_from_elimination(g: Graph, order: Sequence[int]) -> Decomposition:
    """Tree decomposition with one bag per eliminated vertex: the vertex plus
    its not-yet-eliminated neighborhood in the fill-in graph."""
    n = g.n
    position = {v: i for i, v in enumerate(order)}
    adj = {v: set(g.neighbors(v)) for v in range(n)}
    bags: List[FrozenSet[int]] = []
    later_of: List[Optional[int]] = []
    for v in order:
        nbrs = sorted(u for u in adj[v] if position[u] > position[v])
        bags.append(frozenset([v, *nbrs]))
        later_of.append(min(nbrs, key=lambda u: position[u]) if nbrs else None)
        for i in range(len(nbrs)):
            for j in range(i + 1, len(nbrs)):
                adj[nbrs[i]].add(nbrs[j])
                adj[nbrs[j]].add(nbrs[i])
        for u in nbrs:
            adj[u].discard(v)
    edges = []
    roots = []
    for idx, nxt in enumerate(later_of):
        if nxt is None:
            roots.append(idx)
        else:
            edges.append((idx, position[nxt]))
    for a, b in zip(roots, roots[1:]):
        edges.append((a, b))
    if not bags:
        bags = [frozenset()]
    return Decomposition("tree", tuple(bags), tuple(edges))


def min_fill_decomposition(g: Graph) -> Decomposition:
    return decomposition_from_elimination(g, _min_fill_order(g))


def treewidth_exact(g: Graph) -> Tuple[int, Decomposition]:
    """Optimal tree-width with a witness decomposition.

    Memoized search over elimination prefixes with the min-fill width as an
    upper bound for pruning.
    """
    if g.n > TREEWIDTH_EXACT_LIMIT:
        raise CapabilityError(
            f"exact tree-width needs n <= {TREEWIDTH_EXACT_LIMIT}, got {g.n}"
        )
    if g.n == 0:
        return 0, Decomposition("tree", (frozenset(),), ())
    upper_dec = min_fill_decomposition(g)
    upper = upper_dec.width
    full = (1 << g.n) - 1
    memo: Dict[int, int] = {0: 0}
    choice: Dict[int, int] = {}

    def reach_degree(v: int, eliminated: int) -> int:
        # neighbors of v in the graph where `eliminated` vertices are contracted
        seen = 1 << v
        frontier = g.adj[v]
        result = 0
        while frontier:
            new = frontier & ~seen
            if not new:
                break
            seen |= new
            result |= new & ~eliminated
            frontier = 0
            for u in _bits(new & eliminated):
                frontier |= g.adj[u]
        return bin(result).count("1")

    def solve(remaining: int, bound: int) -> int:
        # min over elimination orders of `remaining` of the max reach-degree,
        # given everything outside `remaining` is eliminated already
        if remaining in memo:
            return memo[remaining]
        eliminated = full & ~remaining
        best = bound
        best_v = None
        for v in _bits(remaining):
            d = reach_degree(v, eliminated | (1 << v))
            if d >= best:
                continue
            rest = solve(remaining & ~(1 << v), best)
            cost = max(d, rest)
            if cost < best:
                best = cost
                best_v = v
        if best < bound:
            memo[remaining] = best
            if best_v is not None:
                choice[remaining] = best_v
        return best

    width = solve(full, upper)
    if width >= upper:
        return upper, upper_dec
    order = []
    remaining = full
    while remaining:
        v = choice[remaining]
        order.append(v)
        remaining &= ~(1 << v)
    dec = decomposition_from_elimination(g, order)
    dec.validate(g)
    return width, dec


# -- exact vertex separation (= path-width) -----------------------------------


def pathwidth_exact(g: Graph) -> Tuple[int, SeparatorSequence]:
    """Optimal vertex separation: dynamic program over placed-prefix sets."""
    if g.n > PATHWIDTH_EXACT_LIMIT:
        raise CapabilityError(
            f"exact path-width needs n <= {PATHWIDTH_EXACT_LIMIT}, got {g.n}"
        )
    if g.n == 0:
        return 0, SeparatorSequence((), (), 0)
    n = g.n
    full = (1 << n) - 1

    def boundary(prefix: int) -> int:
        outside = full & ~prefix
        count = 0
        for v in _bits(prefix):
            if g.adj[v] & outside:
                count += 1
        return count

    cost = {0: 0}
    parent: Dict[int, int] = {}
    # subsets in order of population count so all sub-prefixes are done first
    by_size: List[List[int]] = [[] for _ in range(n + 1)]
    for mask in range(1 << n):
        by_size[bin(mask).count("1")].append(mask)
    for size in range(1, n + 1):
        for prefix in by_size[size]:
            b = boundary(prefix)
            best = None
            best_v = None
            for v in _bits(prefix):
                sub = cost[prefix & ~(1 << v)]
                if best is None or sub < best:
                    best, best_v = sub, v
            cost[prefix] = max(b, best)
            parent[prefix] = best_v
    order = []
    prefix = full
    while prefix:
        v = parent[prefix]
        order.append(v)
        prefix &= ~(1 << v)
    order.reverse()
    seq = SeparatorSequence.from_ordering(g, order)
    assert seq.value == cost[full]
    return cost[full], seq


def pathwidth_decomposition_exact(g: Graph) -> Tuple[int, Decomposition]:
    """Optimal path-width by direct search over path decompositions.

    Independent of the vertex-separation program above: states are
    (forgotten set, current bag) with introduce/forget moves; a vertex may be
    forgotten only once all its neighbors have been introduced.  Iterative
    deepening on the bag capacity gives the optimum.
    """
    if g.n > PATH_DECOMPOSITION_SEARCH_LIMIT:
        raise CapabilityError(
            f"path decomposition search needs n <= {PATH_DECOMPOSITION_SEARCH_LIMIT},"
            f" got {g.n}"
        )
    if g.n == 0:
        return 0, Decomposition("path", (frozenset(),), ())
    full = (1 << g.n) - 1

    def search(capacity: int) -> Optional[List[int]]:
        # returns the sequence of bags (as masks) or None
        start = (0, 0)
        prev: Dict[Tuple[int, int], Tuple[int, int]] = {start: None}
        frontier = [start]
        while frontier:
            nxt = []
            for state in frontier:
                forgotten, bag = state
                if forgotten | bag == full:
                    bags = []
                    cur = state
                    while cur is not None:
                        bags.append(cur[1])
                        cur = prev[cur]
                    bags.reverse()
                    return bags
                for v in _bits(full & ~(forgotten | bag)):
                    if bin(bag).count("1") < capacity:
                        cand = (forgotten, bag | (1 << v))
                        if cand not in prev:
                            prev[cand] = state
                            nxt.append(cand)
                for v in _bits(bag):
                    if g.adj[v] & ~(forgotten | bag):
                        continue
                    cand = (forgotten | (1 << v), bag & ~(1 << v))
                    if cand not in prev:
                        prev[cand] = state
                        nxt.append(cand)
            frontier = nxt
        return None

    for width in range(g.n):
        bags = search(width + 1)
        if bags is not None:
            bag_sets = tuple(frozenset(_bits(b)) for b in bags)
            edges = tuple((i, i + 1) for i in range(len(bag_sets) - 1))
            dec = Decomposition("path", bag_sets, edges)
            dec.validate(g)
            return width, dec
    raise AssertionError("search must succeed at capacity n")


# -- heuristic orderings -------------------------------------------------------


def _tree_centroid_order(g: Graph, component: List[int]) -> List[int]:
    """Centroid-first recursive order of a tree component: the centroid is
    placed, then each remaining subtree in turn; at most one centroid per
    recursion level ever sits in a separator."""
    if len(component) == 1:
        return [component[0]]
    comp_set = set(component)

    sizes: Dict[int, int] = {}

    def subtree_sizes(root: int) -> None:
        stack = [(root, None, False)]
        while stack:
            v, par, processed = stack.pop()
            if processed:
                sizes[v] = 1 + sum(
                    sizes[u] for u in g.neighbors(v) if u != par and u in comp_set
                )
            else:
                stack.append((v, par, True))
                for u in g.neighbors(v):
                    if u != par and u in comp_set:
                        stack.append((u, v, False))

    root = min(component)
    subtree_sizes(root)
    total = len(component)
    centroid = None
    best = None
    for v in sorted(component):
        heaviest = max(
            [sizes[u] for u in g.neighbors(v) if u in comp_set and sizes[u] < sizes[v]]
            + [total - sizes[v]],
            default=0,
        )
        if best is None or heaviest < best:
            best, centroid = heaviest, v
    order = [centroid]
    rest = comp_set - {centroid}
    sub_components: List[List[int]] = []
    seen: Set[int] = set()
    for v in sorted(rest):
        if v in seen:
            continue
        comp = []
        stack = [v]
        seen.add(v)
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in g.neighbors(u):
                if w in rest and w not in seen:
                    seen.add(w)
                    stack.append(w)
        sub_components.append(sorted(comp))
    for comp in sub_components:
        order.extend(_tree_centroid_order(g, comp))
    return order


def _decomposition_centroid_order(g: Graph, dec: Decomposition) -> List[int]:
    """Order vertices by recursively splitting the decomposition tree at its
    centroid bag; emits each centroid bag before its subtrees."""
    k = len(dec.bags)
    adj: List[List[int]] = [[] for _ in range(k)]
    for a, b in dec.tree:
        adj[a].append(b)
        adj[b].append(a)
    emitted: Set[int] = set()
    order: List[int] = []

    def emit(bag_idx: int) -> None:
        for v in sorted(dec.bags[bag_idx]):
            if v not in emitted:
                emitted.add(v)
                order.append(v)

    def split(bag_ids: List[int]) -> None:
        if not bag_ids:
            return
        if len(bag_ids) == 1:
            emit(bag_ids[0])
            return
        members = set(bag_ids)
        sizes: Dict[int, int] = {}
        root = bag_ids[0]
        stack = [(root, None, False)]
        while stack:
            t, par, processed = stack.pop()
            if processed:
                sizes[t] = 1 + sum(sizes[u] for u in adj[t] if u != par and u in members)
            else:
                stack.append((t, par, True))
                for u in adj[t]:
                    if u != par and u in members:
                        stack.append((u, t, False))
        centroid = None
        best = None
        for t in sorted(members):
            heaviest = max(
                [sizes[u] for u in adj[t] if u in members and sizes[u] < sizes[t]]
                + [len(members) - sizes[t]],
                default=0,
            )
            if best is None or heaviest < best:
                best, centroid = heaviest, t
        emit(centroid)
        remaining = members - {centroid}
        seen: Set[int] = set()
        for t in sorted(remaining):
            if t in seen:
                continue
            comp = []
            stack2 = [t]
            seen.add(t)
            while stack2:
                u = stack2.pop()
                comp.append(u)
                for w in adj[u]:
                    if w in remaining and w not in seen:
                        seen.add(w)
                        stack2.append(w)
            split(sorted(comp))

    split(list(range(k)))
    for v in range(g.n):
        if v not in emitted:
            emitted.add(v)
            order.append(v)
    return order


def heuristic_ordering(g: Graph) -> SeparatorSequence:
    """Best of a fixed candidate set, by actual separator value.

    Candidates: the natural order; centroid-first orders of tree components
    (logarithmic separators on forests); a centroid split of the min-fill
    decomposition tree (tracks width times log for bounded-width graphs).
    Deterministic: first candidate wins ties.
    """
    candidates: List[List[int]] = [list(range(g.n))]
    if g.is_forest():
        order: List[int] = []
        for comp in g.components():
            order.extend(_tree_centroid_order(g, comp))
        candidates.append(order)
    candidates.append(_decomposition_centroid_order(g, min_fill_decomposition(g)))
    best: Optional[SeparatorSequence] = None
    for cand in candidates:
        seq = SeparatorSequence.from_ordering(g, cand)
        if best is None or seq.value < best.value:
            best = seq
    return best


def ordering_for(g: Graph) -> SeparatorSequence:
    """Exact separator ordering when the graph is small, heuristic otherwise."""
    if g.n <= PATHWIDTH_EXACT_LIMIT:
        return pathwidth_exact(g)[1]
    return heuristic_ordering(g)


def load_graph(path: str) -> Graph:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read graph file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"graph file {path} is not valid JSON: {exc}") from exc
    return Graph.from_json(data)
