"""Constructive visits with certified boundary upper bounds.

Each builder follows an inductive construction: visit a vertex, then
visit the sub-DAG formed by its enabled reach, so that the boundary
never grows by more than what the vertex itself enabled. All ties go
to the smallest vertex id.
"""

import math
from dataclasses import dataclass, field

from .dag import topological_depth, descendants_within, layers_from_sources
from .rules import (
    RuleError, singleton_rule, top_rule, diamond_blocked_rule,
    boundary_complexity_of_sequence, _check_target,
)

SINGLETON_CONSTANT = 4 * (math.sqrt(2) + 1)
BOTTLENECK_GAMMA = 1 / math.sqrt(2)


@dataclass
class BuiltVisit:
    sequence: tuple
    achieved: int
    guarantee: float | None
    rule: object
    trace: list = field(default_factory=list)

    @property
    def within_guarantee(self):
        return self.guarantee is None or self.achieved <= self.guarantee

    def to_json(self):
        return {"sequence": list(self.sequence), "achieved": self.achieved,
                "guarantee": self.guarantee, "rule": self.rule.kind, "trace": self.trace}


def depth_guarantee(out_degree, depth):
    return 0 if depth == 0 else (out_degree - 1) * depth + 1


def singleton_guarantee(out_degree, n):
    return SINGLETON_CONSTANT * math.sqrt(out_degree * n)


def topological_guarantee(out_degree, n):
    if out_degree == 0:
        return 0
    if out_degree == 1:
        return 1
    return (out_degree - 1) / math.log2(out_degree) * math.log2(n) + 1


def _inputs_of(d, scope):
    return sorted(v for v in scope if not any(p in scope for p in d.preds[v]))


def _reach(d, r, visited, v, scope, rank):
    """Enabled reach of an already visited v inside ``scope``."""
    cand = sorted(descendants_within(d, v, scope) - visited, key=rank.__getitem__)
    reach = set()
    for u in cand:
        if any(all(x in visited or x in reach for x in q) for q in r.families[u]):
            reach.add(u)
    return reach


def _finish(d, r, order, guarantee, trace):
    if len(order) != d.n or len(set(order)) != d.n:
        raise AssertionError("builder did not produce a full visit")
    achieved = boundary_complexity_of_sequence(d, r, order)
    return BuiltVisit(tuple(order), achieved, guarantee, r, trace)


def build_depth_visit(d, r=None):
    """Visit inputs one by one, each followed by its enabled reach.

    The reach is visited recursively (with the restricted rule, which
    here amounts to checking enablers against the global visited set).
    Bound: (d_out - 1) * depth + 1.
    """
    r = r or singleton_rule(d)
    _check_target(d, r)
    rank = {v: i for i, v in enumerate(d.topological_order())}
    visited, order, trace = set(), [], []
    stack = [(_inputs_of(d, set(range(d.n))), 0, set(range(d.n)))]
    while stack:
        ins, i, scope = stack[-1]
        if i == len(ins):
            stack.pop()
            continue
        stack[-1] = (ins, i + 1, scope)
        x = ins[i]
        if x in visited:
            continue
        visited.add(x)
        order.append(x)
        reach = _reach(d, r, visited, x, scope, rank)
        if reach:
            trace.append({"vertex": x, "reach": len(reach), "level": len(stack)})
            stack.append((_inputs_of(d, reach), 0, reach))
    guarantee = depth_guarantee(d.max_out_degree, topological_depth(d))
    return _finish(d, r, order, guarantee, trace)


class _SingletonBuilder:
    def __init__(self, d):
        self.d = d
        self.rank = {v: i for i, v in enumerate(d.topological_order())}
        self.trace = []

    def local_out_degree(self, scope):
        return max((sum(1 for w in self.d.succs[v] if w in scope) for v in scope), default=0)

    def closure(self, v, scope):
        return {v} | descendants_within(self.d, v, scope)

    def count_at_least(self, v, scope, limit):
        """True iff v plus its descendants in scope number >= limit."""
        seen, todo = {v}, [v]
        while todo:
            if len(seen) >= limit:
                return True
            x = todo.pop()
            for w in self.d.succs[x]:
                if w in scope and w not in seen:
                    seen.add(w)
                    todo.append(w)
        return len(seen) >= limit

    def visit(self, scope):
        d = self.d
        scope = set(scope)
        if len(scope) <= 1:
            return sorted(scope)
        dout = self.local_out_degree(scope)
        if dout == 0:
            return sorted(scope)
        order = []
        remaining = scope
        ins = _inputs_of(d, remaining)
        while len(ins) > 1:
            part = self.closure(ins[0], remaining)
            self.trace.append({"case": "1", "input": ins[0], "size": len(part)})
            order += self.visit(part)
            remaining = remaining - part
            ins = _inputs_of(d, remaining)
        if remaining:
            order += self.single_input(remaining, ins[0])
        return order

    def single_input(self, scope, u):
        d = self.d
        n = len(scope)
        if n == 1:
            return [u]
        dout = self.local_out_degree(scope)
        levels, level_of = [[u]], {u: 0}
        while True:
            nxt = sorted({w for x in levels[-1] for w in d.succs[x]
                          if w in scope and w not in level_of})
            if not nxt:
                break
            for w in nxt:
                level_of[w] = len(levels)
            levels.append(nxt)
        threshold = BOTTLENECK_GAMMA * math.sqrt(dout * n)
        cuts = [i for i, lev in enumerate(levels) if len(lev) <= threshold] + [len(levels)]
        order = []
        for a, b in zip(cuts, cuts[1:]):
            block = {x for lev in levels[a:b] for x in lev}
            order += self.block(block, n)
        return order

    def block(self, block, n):
        d = self.d
        if 2 * len(block) <= n:
            self.trace.append({"case": "2.1", "size": len(block)})
            return self.visit(block)
        ins = _inputs_of(d, block)
        half = n / 2
        if not any(self.count_at_least(x, block, math.floor(half) + 1) for x in ins):
            self.trace.append({"case": "2.2.a", "size": len(block)})
            return self.inputs_then_reaches(block)
        # pivot: last vertex in topological order with at least n/2 descendants
        y = max((x for x in block if self.count_at_least(x, block, math.ceil(half))),
                key=self.rank.__getitem__)
        path = self.shortest_path(block, ins, y)
        reach = descendants_within(d, y, block)
        self.trace.append({"case": "2.2.b", "size": len(block), "pivot": y,
                           "path": len(path), "reach": len(reach)})
        order = path + [y] + self.inputs_then_reaches(reach)
        rest = block - set(path) - {y} - reach
        return order + self.visit(rest)

    def inputs_then_reaches(self, scope):
        order, done = [], set()
        for x in _inputs_of(self.d, scope):
            order.append(x)
            part = descendants_within(self.d, x, scope) - done
            done |= part | {x}
            order += self.visit(part)
        return order

    def shortest_path(self, scope, sources, target):
        """Vertices of a shortest path from ``sources`` to target, target excluded."""
        parent = {s: None for s in sources}
        frontier = list(sources)
        while target not in parent:
            nxt = []
            for x in frontier:
                for w in self.d.succs[x]:
                    if w in scope and w not in parent:
                        parent[w] = x
                        nxt.append(w)
            frontier = sorted(nxt)
        path, x = [], parent[target]
        while x is not None:
            path.append(x)
            x = parent[x]
        return path[::-1]


def build_singleton_visit(d):
    """Level/bottleneck construction; bound 4(sqrt 2 + 1) sqrt(d_out n)."""
    builder = _SingletonBuilder(d)
    order = builder.visit(set(range(d.n)))
    guarantee = singleton_guarantee(d.max_out_degree, d.n)
    return _finish(d, singleton_rule(d), order, guarantee, builder.trace)


def build_chain_first_visit(d, chain=None):
    """Singleton visit that walks a chain and eagerly visits what it enables.

    After each chain vertex, every off-chain vertex enabled by some
    visited predecessor is visited at once (smallest id first). The
    chain defaults to ``d.meta["chain"]``; leftover vertices follow in
    the same eager fashion.
    """
    chain = list(d.meta["chain"] if chain is None else chain)
    on_chain = set(chain)
    r = singleton_rule(d)
    visited, order = set(), []

    def enabled(v):
        return v not in visited and (not d.preds[v] or any(p in visited for p in d.preds[v]))

    def drain(allowed):
        while True:
            ready = [v for v in range(d.n) if v not in on_chain or allowed]
            ready = [v for v in ready if enabled(v)]
            if not ready:
                return
            v = min(ready)
            visited.add(v)
            order.append(v)

    for c in chain:
        if not enabled(c):
            raise RuleError(f"chain vertex {c} is not enabled when reached")
        visited.add(c)
        order.append(c)
        drain(False)
    drain(True)
    return _finish(d, r, order, singleton_guarantee(d.max_out_degree, d.n), [])


def _top_reach(d, visited, w, scope, rank):
    cand = sorted(descendants_within(d, w, scope), key=rank.__getitem__)
    reach = set()
    for x in cand:
        if all(p in visited or p == w or p in reach for p in d.preds[x]):
            reach.add(x)
    return reach


def build_topological_visit(d):
    """Recursive smallest-reach-first topological visit.

    From the smallest-id available input u, the successors enabled by u
    alone are handled one at a time, always picking the one whose
    enabled reach is smallest and recursing on it together with its
    reach; the untouched remainder is handled last.
    """
    rank = {v: i for i, v in enumerate(d.topological_order())}
    visited, order, trace = set(), [], []

    def ready(v):
        return all(p in visited for p in d.preds[v])

    def topv(task):
        rem = set(task)
        while rem:
            u = min(v for v in rem if ready(v))
            visited.add(u)
            order.append(u)
            rem.discard(u)
            cands = sorted(w for w in d.succs[u] if w in rem and ready(w))
            while cands:
                sizes = {w: _top_reach(d, visited, w, rem, rank) for w in cands}
                best = min(cands, key=lambda w: (len(sizes[w]), w))
                sub = {best} | sizes[best]
                trace.append({"from": u, "choice": best, "size": len(sub), "options": len(cands)})
                rem -= sub
                cands.remove(best)
                yield sub

    stack = [topv(range(d.n))]
    while stack:
        try:
            stack.append(topv(next(stack[-1])))
        except StopIteration:
            stack.pop()
    guarantee = topological_guarantee(d.max_out_degree, d.n)
    return _finish(d, top_rule(d), order, guarantee, trace)


def blocked_side(q, M):
    """Sub-diamond side used by the blocked rule: ceil((2M+q-2)/(q-1))."""
    return -(-(2 * M + q - 2) // (q - 1))


def block_diagonal(d, side, v, blocks=None):
    """True iff v lies on the middle layer of its block."""
    q = d.meta["q"]
    step = (q - 1) * side
    u, w = d.meta["coords"][v]
    return (u % step) + (w % step) == (q - 1) * (side - 1)


def full_block(d, side, block):
    b = d.meta["b"]
    return (block[0] + 1) * side <= b and (block[1] + 1) * side <= b


def build_diamond_blocked_visit(d_r, M):
    """Block-by-block visit of a reversed diamond under the blocked rule.

    The trace lists, for every block in visiting order, whether it is a
    full sub-diamond and the 1-based step at which its first diagonal
    vertex is visited.
    """
    if d_r.meta.get("family") != "diamond":
        raise RuleError("blocked visit needs a (reversed) generated diamond")
    if M < 1:
        raise RuleError("cache size must be positive")
    q = d_r.meta["q"]
    side = blocked_side(q, M)
    r = diamond_blocked_rule(d_r, side)
    blocks = r.blocks
    depth = layers_from_sources(d_r)
    members = {}
    for v in sorted(range(d_r.n), key=lambda v: (depth[v], v)):
        members.setdefault(blocks[v], []).append(v)
    # dependency order of blocks in d_r, smallest block key first on ties
    deps = {k: set() for k in members}
    for u, v in d_r.edges():
        if blocks[u] != blocks[v]:
            deps[blocks[v]].add(blocks[u])
    block_order, placed = [], set()
    while len(block_order) < len(members):
        k = min(k for k in members if k not in placed and deps[k] <= placed)
        block_order.append(k)
        placed.add(k)
    order, trace = [], []
    for k in block_order:
        first = None
        for v in members[k]:
            order.append(v)
            if first is None and block_diagonal(d_r, side, v):
                first = len(order)
        trace.append({"block": list(k), "full": full_block(d_r, side, k),
                      "first_diagonal_step": first, "size": len(members[k])})
    return _finish(d_r, r, order, None, trace)
