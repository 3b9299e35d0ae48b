"""Exact solvers for tiny graphs.

Everything here is exponential in n and guarded by OracleLimits. The
subset searches key states on bitmasks of visited or pebbled vertices.
"""

import heapq
import os
import time
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

from .flows import min_dominator, min_post_dominator
from .rules import _check_target


class SizeLimitError(ValueError):
    pass


class OracleTimeout(RuntimeError):
    pass


LIMITS_ENV = "DAGVISITS_LIMITS"


@dataclass(frozen=True)
class OracleLimits:
    max_n_subset_dp: int = 22
    max_n_pebbling: int = 10
    max_n_visit_partition: int = 12
    time_budget: float | None = None   # seconds per call

    def __post_init__(self):
        for name in ("max_n_subset_dp", "max_n_pebbling", "max_n_visit_partition"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.time_budget is not None and self.time_budget <= 0:
            raise ValueError("time_budget must be positive")

    @classmethod
    def parse(cls, text, base=None):
        """Override fields from ``subset_dp=24,pebbling=11,visit_partition=14,time=30``."""
        keys = {"subset_dp": "max_n_subset_dp", "pebbling": "max_n_pebbling",
                "visit_partition": "max_n_visit_partition", "time": "time_budget"}
        values = dict((base or cls()).__dict__)
        for item in filter(None, (p.strip() for p in (text or "").split(","))):
            key, _, val = item.partition("=")
            field_name = keys.get(key.strip(), key.strip())
            if field_name not in values:
                raise ValueError(f"unknown oracle limit {key!r}")
            values[field_name] = float(val) if field_name == "time_budget" else int(val)
        return cls(**values)

    @classmethod
    def from_env(cls):
        return cls.parse(os.environ.get(LIMITS_ENV, ""))


def _limits(limits):
    return limits if limits is not None else OracleLimits.from_env()


def _need_size(n, cap, what):
    if n > cap:
        raise SizeLimitError(f"{what} is limited to n <= {cap}, got n = {n}")


class _Clock:
    def __init__(self, budget):
        self.deadline = None if budget is None else time.monotonic() + budget
        self.ticks = 0

    def check(self):
        self.ticks += 1
        if self.deadline is not None and self.ticks % 1024 == 0 and time.monotonic() > self.deadline:
            raise OracleTimeout("oracle time budget exhausted")


def _boundary_size(masks, n, mask):
    size = 0
    for v in range(n):
        if not (mask >> v) & 1:
            for q in masks[v]:
                if q and q & mask == q:
                    size += 1
                    break
    return size


class ExactBoundary(NamedTuple):
    value: int
    visit: tuple


def exact_boundary_complexity(d, r, limits=None):
    """Minimum over r-visits of the largest prefix boundary.

    Bottleneck shortest path on the subset lattice: a state is the set
    of visited vertices, and the cost of a path is the largest boundary
    along it. Dijkstra on the max-cost pops states in nondecreasing
    cost, so the first time the full set is popped its cost is optimal.
    """
    _check_target(d, r)
    limits = _limits(limits)
    _need_size(d.n, limits.max_n_subset_dp, "exact boundary complexity")
    clock = _Clock(limits.time_budget)
    n, masks = d.n, r.masks
    full = (1 << n) - 1
    best = {0: 0}
    parent = {0: None}
    heap = [(0, 0)]
    done = set()
    while heap:
        cost, mask = heapq.heappop(heap)
        if mask in done:
            continue
        done.add(mask)
        clock.check()
        if mask == full:
            break
        for v in range(n):
            if (mask >> v) & 1:
                continue
            if not any(q & mask == q for q in masks[v]):
                continue
            nxt = mask | (1 << v)
            c = max(cost, _boundary_size(masks, n, nxt))
            if c < best.get(nxt, n + 1):
                best[nxt] = c
                parent[nxt] = (mask, v)
                heapq.heappush(heap, (c, nxt))
    order, mask = [], full
    while parent[mask] is not None:
        mask, v = parent[mask]
        order.append(v)
    return ExactBoundary(best[full], tuple(reversed(order)))


class ExactPebbling(NamedTuple):
    value: int
    schedule: object   # machine.PebbleSchedule


def exact_pebbling_number(d, limits=None):
    """Fewest pebbles for a complete black pebbling (no sliding).

    Breadth-first search for each budget p = 1, 2, ... over states
    (pebbled set, outputs pebbled so far). An output never needs to
    keep its pebble, so placing one is immediately followed by its
    removal; this keeps the state space small without losing moves.
    """
    from .machine import PebbleSchedule, Place, Remove

    limits = _limits(limits)
    _need_size(d.n, limits.max_n_pebbling, "exact pebbling")
    clock = _Clock(limits.time_budget)
    n = d.n
    if n == 0:
        return ExactPebbling(0, PebbleSchedule((), 0))
    pred_mask = [sum(1 << u for u in d.preds[v]) for v in range(n)]
    is_out = [not d.succs[v] for v in range(n)]
    out_bit = {v: i for i, v in enumerate(d.outputs)}
    goal = (1 << len(out_bit)) - 1
    for budget in range(1, n + 1):
        start = (0, 0)
        parent = {start: None}
        todo = deque([start])
        found = None
        while todo and found is None:
            state = todo.popleft()
            clock.check()
            peb, got = state
            used = bin(peb).count("1")
            for v in range(n):
                if (peb >> v) & 1:
                    nxt = (peb & ~(1 << v), got)
                    move = ((Remove, v),)
                elif pred_mask[v] & peb == pred_mask[v] and used + 1 <= budget:
                    if is_out[v]:
                        nxt = (peb, got | (1 << out_bit[v]))
                        move = ((Place, v), (Remove, v))
                    else:
                        nxt = (peb | (1 << v), got)
                        move = ((Place, v),)
                else:
                    continue
                if nxt in parent:
                    continue
                parent[nxt] = (state, move)
                if nxt[1] == goal:
                    found = nxt
                    break
                todo.append(nxt)
        if found is not None:
            steps, state = [], found
            while parent[state] is not None:
                state, move = parent[state]
                steps.extend(reversed(move))
            steps.reverse()
            return ExactPebbling(budget, PebbleSchedule(tuple(kind(v) for kind, v in steps), budget))
    raise AssertionError("n pebbles always suffice")


def minimum_set(d, xs):
    """Vertices of ``xs`` with no successor inside ``xs``."""
    xs = {d.check_vertex(x) for x in xs}
    return frozenset(v for v in xs if not any(w in xs for w in d.succs[v]))


def _entry_vertices(d, xs):
    """Vertices of xs that are inputs or have a predecessor outside xs; always a dominator."""
    return [v for v in xs if not d.preds[v] or any(u not in xs for u in d.preds[v])]


class SPartition(NamedTuple):
    k: int
    sets: tuple


def min_s_partition_k(d, S, limits=None):
    """Fewest sets in an S-partition of d, with a witness sequence.

    Unions of the first j sets are exactly the predecessor-closed sets,
    so this is a breadth-first search over closed sets in which a move
    adds any set whose dominator and minimum set are both at most S.
    """
    limits = _limits(limits)
    _need_size(d.n, limits.max_n_visit_partition, "S-partition search")
    if S < 1:
        raise ValueError("S must be positive")
    clock = _Clock(limits.time_budget)
    n = d.n
    full = (1 << n) - 1
    if n == 0:
        return SPartition(0, ())
    pred_mask = [sum(1 << u for u in d.preds[v]) for v in range(n)]
    closed = _closed_sets(n, pred_mask)
    feasible = {}

    def ok(part):
        if part not in feasible:
            xs = {v for v in range(n) if (part >> v) & 1}
            good = len(minimum_set(d, xs)) <= S
            if good and len(_entry_vertices(d, xs)) > S:
                good = min_dominator(d, xs).size <= S
            feasible[part] = good
        return feasible[part]

    parent = {0: None}
    frontier = [0]
    while full not in parent:
        nxt = []
        for base in frontier:
            for w in closed:
                clock.check()
                if w in parent or w & base != base:
                    continue
                if ok(w & ~base):
                    parent[w] = base
                    nxt.append(w)
        if not nxt:
            raise AssertionError("singletons always form an S-partition for S >= 1")
        frontier = nxt
    sets, mask = [], full
    while parent[mask] is not None:
        prev = parent[mask]
        sets.append(frozenset(v for v in range(n) if ((mask & ~prev) >> v) & 1))
        mask = prev
    sets.reverse()
    return SPartition(len(sets), tuple(sets))


def _closed_sets(n, pred_mask):
    """All predecessor-closed vertex sets, largest first."""
    seen = {0}
    todo = [0]
    while todo:
        m = todo.pop()
        for v in range(n):
            if not (m >> v) & 1 and pred_mask[v] & m == pred_mask[v]:
                w = m | (1 << v)
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
    return sorted(seen, key=lambda m: (-bin(m).count("1"), m))


class VisitPartitionOpt(NamedTuple):
    value: int
    visit: tuple
    write: int
    read: int


def exact_visit_partition_bound(d, r, M, metric="write", limits=None, top_only=False):
    """Minimum over r-visits of reverse(d) of the best-partition value.

    ``r`` must be a rule on reverse(d). For one visit, the best write
    value is a longest path over cut positions: pi[i] is the best sum
    over partitions of the first i vertices whose last cut is at i. Each
    open cut h is tracked as (pi[h], entering count so far, pending
    entering vertices still unvisited); these give a lower bound on any
    completion that drives a branch and bound over r-sequences. The
    read value works the same way with (pi[h], segment set) and segment
    post-dominator minima. ``total`` is W + max(R, W + |I| - |O|) with
    W and R maximized independently. ``top_only`` restricts the search
    to topological orders of reverse(d).
    """
    if metric not in ("write", "read", "total"):
        raise ValueError(f"unknown metric {metric!r}")
    d_r = r.dag
    if d_r.n != d.n or set(d_r.edges()) != {(v, u) for u, v in d.edges()}:
        raise ValueError("rule must target the reverse of d")
    if M < 0:
        raise ValueError("M must be nonnegative")
    limits = _limits(limits)
    _need_size(d.n, limits.max_n_visit_partition, "visit-partition search")
    if d.n == 0:
        return VisitPartitionOpt(0, (), 0, 0)
    search = _VisitPartitionSearch(d, d_r, r, M, metric, top_only, _Clock(limits.time_budget))
    return search.run()


class _VisitPartitionSearch:
    def __init__(self, d, d_r, r, M, metric, top_only, clock):
        self.n = d.n
        self.d_r = d_r
        self.M = M
        self.metric = metric
        self.clock = clock
        self.masks = r.masks
        self.top_pred = [sum(1 << u for u in d_r.preds[v]) for v in range(d.n)]
        self.top_only = top_only
        self.io_shift = len(d.inputs) - len(d.outputs)
        self.inputs_r = sum(1 << v for v in d_r.inputs)
        self.want_w = metric in ("write", "total")
        self.want_r = metric in ("read", "total")
        self.pd_cache = {}
        self.seen = {}
        self.best = None
        self.best_visit = None

    def pd(self, mask):
        val = self.pd_cache.get(mask)
        if val is None:
            xs = [v for v in range(self.n) if (mask >> v) & 1]
            val = min_post_dominator(self.d_r, xs).size
            self.pd_cache[mask] = val
        return val

    def boundary(self, mask):
        out = 0
        for v in range(self.n):
            if not (mask >> v) & 1:
                for q in self.masks[v]:
                    if q and q & mask == q:
                        out |= 1 << v
                        break
        return out

    def combine(self, w, r):
        if self.metric == "write":
            return w
        if self.metric == "read":
            return r
        return w + max(r, w + self.io_shift)

    # write entries: (pi, count, pending mask); read entries: (pi, segment mask)

    def step_write(self, entries, v, visited):
        bit = 1 << v
        moved = [(p, c + 1, e & ~bit) if e & bit else (p, c, e) for p, c, e in entries]
        pi = max(p + max(0, c - self.M) for p, c, _ in moved)
        pending = (self.inputs_r | self.boundary(visited)) & ~visited
        return _prune_write(moved + [(pi, 0, pending)]), pi

    def step_read(self, entries, v):
        bit = 1 << v
        moved = [(p, s | bit) for p, s in entries]
        pi = max(p + max(0, self.pd(s) - self.M) for p, s in moved)
        return _prune_read(moved + [(pi, 0)]), pi

    def lower_write(self, entries, unvisited):
        return max(p + max(0, c + bin(e & unvisited).count("1") - self.M) for p, c, e in entries)

    def lower_read(self, entries, unvisited):
        # the last segment from h can absorb every unvisited vertex
        return max(p + max(0, self.pd(s | unvisited) - self.M) for p, s in entries)

    def dominated(self, visited, went, rent):
        key = frozenset(went), frozenset(rent)
        for old_w, old_r in self.seen.get(visited, ()):
            if _covers_write(went, old_w) and _covers_read(rent, old_r):
                return True
        self.seen.setdefault(visited, []).append(key)
        return False

    def run(self):
        n = self.n
        full = (1 << n) - 1
        went = [(0, 0, self.inputs_r)] if self.want_w else []
        rent = [(0, 0)] if self.want_r else []
        stack = [(0, went, rent, 0, 0, [])]
        while stack:
            visited, went, rent, w_pi, r_pi, seq = stack.pop()
            self.clock.check()
            if visited == full:
                val = self.combine(w_pi, r_pi)
                if self.best is None or val < self.best[0]:
                    self.best = (val, w_pi, r_pi)
                    self.best_visit = tuple(seq)
                continue
            unvisited = full & ~visited
            lw = self.lower_write(went, unvisited) if self.want_w else 0
            lr = self.lower_read(rent, unvisited) if self.want_r else 0
            if self.best is not None and self.combine(lw, lr) >= self.best[0]:
                continue
            if self.dominated(visited, went, rent):
                continue
            children = []
            for v in range(n):
                if (visited >> v) & 1:
                    continue
                if not any(q & visited == q for q in self.masks[v]):
                    continue
                if self.top_only and self.top_pred[v] & visited != self.top_pred[v]:
                    continue
                nv = visited | (1 << v)
                nw, wp = self.step_write(went, v, nv) if self.want_w else ([], 0)
                nr, rp = self.step_read(rent, v) if self.want_r else ([], 0)
                children.append((self.combine(wp, rp), v, nv, nw, nr, wp, rp))
            # explore the child with the smallest partial value first
            children.sort(key=lambda c: (c[0], c[1]), reverse=True)
            for _, v, nv, nw, nr, wp, rp in children:
                stack.append((nv, nw, nr, wp, rp, seq + [v]))
        val, w, r = self.best
        return VisitPartitionOpt(val, self.best_visit, w, r)


def _dominates_write(a, b):
    return a[0] >= b[0] and a[0] + a[1] >= b[0] + b[1] and a[2] & b[2] == b[2]


def _prune_write(entries):
    keep = []
    for i, e in enumerate(entries):
        if not any(j != i and _dominates_write(f, e) and (f != e or j < i) for j, f in enumerate(entries)):
            keep.append(e)
    return keep


def _dominates_read(a, b):
    return a[0] >= b[0] and a[1] & b[1] == b[1]


def _prune_read(entries):
    keep = []
    for i, e in enumerate(entries):
        if not any(j != i and _dominates_read(f, e) and (f != e or j < i) for j, f in enumerate(entries)):
            keep.append(e)
    return keep


def _covers_write(new, old):
    """Every entry of ``old`` is dominated by some entry of ``new``."""
    return all(any(_dominates_write(a, b) for a in new) for b in old)


def _covers_read(new, old):
    return all(any(_dominates_read(a, b) for a in new) for b in old)

