"""Immutable DAG with dense integer ids and both adjacency directions."""

import heapq
import operator
from collections import deque


class GraphError(ValueError):
    pass


class Dag:
    """A directed acyclic graph on vertices 0..n-1.

    ``preds[v]`` and ``succs[v]`` are sorted tuples. ``meta`` carries
    generator metadata (family name, layers, coordinates) and is never
    used for equality.
    """

    def __init__(self, n, edges=(), meta=None):
        if n < 0:
            raise GraphError("vertex count must be nonnegative")
        preds = [set() for _ in range(n)]
        succs = [set() for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u},{v}) has an id outside 0..{n - 1}")
            if u == v:
                raise GraphError(f"self-loop on {u}")
            if v in succs[u]:
                raise GraphError(f"duplicate edge ({u},{v})")
            succs[u].add(v)
            preds[v].add(u)
        self.n = n
        self.preds = tuple(tuple(sorted(p)) for p in preds)
        self.succs = tuple(tuple(sorted(s)) for s in succs)
        self.meta = dict(meta or {})
        self._topo = None
        self._topo_order()  # raises on cycles

    # basic structure

    @property
    def inputs(self):
        return tuple(v for v in range(self.n) if not self.preds[v])

    @property
    def outputs(self):
        return tuple(v for v in range(self.n) if not self.succs[v])

    def edges(self):
        return [(u, v) for u in range(self.n) for v in self.succs[u]]

    @property
    def num_edges(self):
        return sum(len(s) for s in self.succs)

    @property
    def max_out_degree(self):
        return max((len(s) for s in self.succs), default=0)

    @property
    def max_in_degree(self):
        return max((len(p) for p in self.preds), default=0)

    def check_vertex(self, v):
        try:
            v = operator.index(v)
        except TypeError:
            raise GraphError(f"vertex id must be an integer, got {v!r}") from None
        if not 0 <= v < self.n:
            raise GraphError(f"invalid vertex id {v} for a graph with {self.n} vertices")
        return v

    def _topo_order(self):
        if self._topo is None:
            indeg = [len(p) for p in self.preds]
            heap = [v for v in range(self.n) if indeg[v] == 0]
            heapq.heapify(heap)
            order = []
            while heap:
                u = heapq.heappop(heap)
                order.append(u)
                for w in self.succs[u]:
                    indeg[w] -= 1
                    if indeg[w] == 0:
                        heapq.heappush(heap, w)
            if len(order) != self.n:
                raise GraphError("graph has a cycle")
            self._topo = tuple(order)
        return self._topo

    def topological_order(self):
        """Kahn order, smallest available id first."""
        return self._topo_order()

    def __eq__(self, other):
        return isinstance(other, Dag) and self.n == other.n and self.succs == other.succs

    def __hash__(self):
        return hash((self.n, self.succs))

    def __repr__(self):
        fam = self.meta.get("family")
        tag = f" {fam}" if fam else ""
        return f"<Dag{tag} n={self.n} m={self.num_edges}>"


def reverse(d):
    """Same vertices, every edge flipped."""
    meta = dict(d.meta)
    meta["reversed"] = not d.meta.get("reversed", False)
    return Dag(d.n, [(v, u) for u, v in d.edges()], meta)


def topological_depth(d):
    """Number of edges on a longest directed path."""
    depth = [0] * d.n
    for v in d.topological_order():
        for u in d.preds[v]:
            depth[v] = max(depth[v], depth[u] + 1)
    return max(depth, default=0)


def _reach(adj, start):
    seen = set()
    todo = deque(adj[start])
    while todo:
        x = todo.popleft()
        if x not in seen:
            seen.add(x)
            todo.extend(adj[x])
    return seen


def descendants(d, v):
    """Vertices reachable from v by a nonempty path."""
    return _reach(d.succs, d.check_vertex(v))


def ancestors(d, v):
    """Vertices that reach v by a nonempty path."""
    return _reach(d.preds, d.check_vertex(v))


def descendants_within(d, v, allowed):
    """Descendants of v in the subgraph induced by ``allowed`` (v excluded)."""
    seen = set()
    todo = [w for w in d.succs[v] if w in allowed]
    while todo:
        x = todo.pop()
        if x not in seen:
            seen.add(x)
            todo.extend(w for w in d.succs[x] if w in allowed and w not in seen)
    return seen


def induced_subdag(d, keep):
    """Sub-DAG on ``keep``; returns (sub, old_to_new, new_to_old).

    New ids follow the increasing order of the old ids.
    """
    keep = sorted({d.check_vertex(v) for v in keep})
    new_of = {v: i for i, v in enumerate(keep)}
    edges = [(new_of[u], new_of[v]) for u in keep for v in d.succs[u] if v in new_of]
    meta = {"parent_ids": keep}
    return Dag(len(keep), edges, meta), new_of, keep


def layers_from_sources(d):
    """Longest-path layer of every vertex (inputs on layer 0)."""
    layer = [0] * d.n
    for v in d.topological_order():
        for u in d.preds[v]:
            layer[v] = max(layer[v], layer[u] + 1)
    return layer
