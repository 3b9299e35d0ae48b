"""Vertex cuts and disjoint paths via max-flow on the split graph.

Vertex v becomes v_in = 2v and v_out = 2v + 1 joined by an arc whose
capacity is the vertex capacity; graph edges and terminal arcs get an
effectively infinite capacity (n + 1 suffices since no cut exceeds n).
"""

from typing import NamedTuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from .dag import reverse


class VertexCut(NamedTuple):
    size: int
    vertices: frozenset


class PathSystem(NamedTuple):
    count: int
    paths: tuple


def _network(d, vertex_cap, source_arcs, sink_arcs):
    n = d.n
    src, snk = 2 * n, 2 * n + 1
    rows, cols, caps = [], [], []

    def arc(a, b, c):
        rows.append(a)
        cols.append(b)
        caps.append(c)

    inf = n + 1
    for v in range(n):
        arc(2 * v, 2 * v + 1, vertex_cap(v))
        for w in d.succs[v]:
            arc(2 * v + 1, 2 * w, inf)
    for v, c in source_arcs:
        arc(src, 2 * v, c)
    for v, c in sink_arcs:
        arc(2 * v + 1, snk, c)
    cap = csr_matrix((np.array(caps, dtype=np.int32), (rows, cols)), shape=(2 * n + 2, 2 * n + 2))
    return cap, src, snk


def _solve(cap, src, snk):
    res = maximum_flow(cap, src, snk, method="edmonds_karp")
    return int(res.flow_value), res.flow


def min_post_dominator(d, xs):
    """Smallest vertex set meeting every path from ``xs`` to an output.

    Vertices of ``xs`` may themselves be cut; an output in ``xs`` is
    always part of the cut because of its zero-length path.
    """
    xs = sorted({d.check_vertex(x) for x in xs})
    if not xs:
        return VertexCut(0, frozenset())
    inf = d.n + 1
    cap, src, snk = _network(d, lambda v: 1, [(x, inf) for x in xs],
                             [(o, inf) for o in d.outputs])
    value, flow = _solve(cap, src, snk)
    residual = (cap - flow)
    residual.data[residual.data < 0] = 0
    residual.eliminate_zeros()
    reach = set(breadth_first_order(residual, src, directed=True, return_predecessors=False).tolist())
    cut = frozenset(v for v in range(d.n) if 2 * v in reach and 2 * v + 1 not in reach)
    assert len(cut) == value, "cut extraction disagrees with flow value"
    return VertexCut(value, cut)


def min_dominator(d, xs):
    """Smallest vertex set meeting every path from an input to ``xs``."""
    return min_post_dominator(reverse(d), xs)


def max_disjoint_paths(d, sources, sinks, shared=()):
    """Maximum number of source-to-sink paths, vertex-disjoint outside ``shared``.

    Vertices in ``shared`` have unbounded capacity, so several paths may
    start at, pass through or end at them. A vertex that is both a
    source and a sink forms a path on its own.
    """
    sources = sorted({d.check_vertex(v) for v in sources})
    sinks = sorted({d.check_vertex(v) for v in sinks})
    shared = {d.check_vertex(v) for v in shared}
    if not sources or not sinks:
        raise ValueError("sources and sinks must be nonempty")
    inf = d.n + 1

    def vcap(v):
        return inf if v in shared else 1

    cap, src, snk = _network(d, vcap, [(s, vcap(s)) for s in sources],
                             [(t, vcap(t)) for t in sinks])
    value, flow = _solve(cap, src, snk)
    return PathSystem(value, _decompose(flow, src, snk, value))


def _decompose(flow, src, snk, value):
    f = flow.tocsr()
    remaining = {}
    for a in range(f.shape[0]):
        for k in range(f.indptr[a], f.indptr[a + 1]):
            if f.data[k] > 0:
                remaining[(a, int(f.indices[k]))] = int(f.data[k])
    out = {}
    for (a, b), c in remaining.items():
        out.setdefault(a, []).append(b)
    paths = []
    for _ in range(value):
        node, walk = src, []
        while node != snk:
            nxt = next(b for b in out[node] if remaining[(node, b)] > 0)
            remaining[(node, nxt)] -= 1
            node = nxt
            if node != snk and node % 2 == 0:
                walk.append(node // 2)
        paths.append(tuple(walk))
    return tuple(paths)
