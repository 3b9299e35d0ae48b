"""Two-level memory machine, black pebble game, and the converters
between computations, pebblings and visits.

Traces hold only Compute, Read and Write steps; eviction is implicit.
A value that enters the cache at step e (by Read or Compute) stays
resident until its last use (an operand use or a Write) before it next
enters the cache. The capacity check counts, for every step, the
values resident just before it and just after it; an operand whose
last use is the current step is gone afterwards, so a result may take
the place of one of its operands.
"""

from dataclasses import dataclass
from typing import ClassVar, NamedTuple

import numpy as np

from .dag import Dag
from .families import diamond
from .rules import RuleError, VisitRule, diamond_blocks


class ComputationError(ValueError):
    pass


@dataclass(frozen=True)
class Compute:
    v: int
    op: ClassVar[str] = "compute"


@dataclass(frozen=True)
class Read:
    v: int
    op: ClassVar[str] = "read"


@dataclass(frozen=True)
class Write:
    v: int
    op: ClassVar[str] = "write"


@dataclass(frozen=True)
class Place:
    v: int
    op: ClassVar[str] = "place"


@dataclass(frozen=True)
class Remove:
    v: int
    op: ClassVar[str] = "remove"


STEP_TYPES = {cls.op: cls for cls in (Compute, Read, Write, Place, Remove)}


def step_from_json(obj):
    try:
        return STEP_TYPES[obj["op"]](int(obj["v"]))
    except (KeyError, TypeError, ValueError):
        raise ComputationError(f"bad step {obj!r}") from None


@dataclass(frozen=True)
class IoComputation:
    steps: tuple
    M: int

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True)
class PebbleSchedule:
    steps: tuple
    budget: int


class Violation(NamedTuple):
    kind: str
    step: int | None     # 0-based step index, None for end-of-trace checks
    v: int | None
    message: str


class Report(NamedTuple):
    ok: bool
    violations: tuple

    def __bool__(self):
        return self.ok

    def kinds(self):
        return {x.kind for x in self.violations}


class IoCounts(NamedTuple):
    reads: int
    writes: int
    total: int


def io_counts(c):
    reads = sum(1 for s in c.steps if isinstance(s, Read))
    writes = sum(1 for s in c.steps if isinstance(s, Write))
    return IoCounts(reads, writes, reads + writes)


def validate_computation(d, c):
    """Check a trace against the machine model; every violation is listed."""
    bad = []
    n, M = d.n, c.M
    inputs = set(d.inputs)
    if M < 1:
        bad.append(Violation("capacity", None, None, f"cache size {M} must be positive"))
    slow = set(inputs)
    last_entry = {}
    uses_of_entry = {}       # entry step -> last use step
    entries = []             # (vertex, entry step)
    evaluated = set()
    for t, s in enumerate(c.steps):
        if not isinstance(s, (Compute, Read, Write)) or not 0 <= s.v < n:
            bad.append(Violation("bad_step", t, getattr(s, "v", None), f"step {s!r} is not a machine step"))
            continue
        v = s.v
        if isinstance(s, Read):
            if v not in slow:
                bad.append(Violation("cold_read", t, v, f"read of {v}, which is not in slow memory"))
            last_entry[v] = t
            uses_of_entry[t] = t
            entries.append((v, t))
            if v in inputs:
                evaluated.add(v)
        elif isinstance(s, Write):
            if v not in last_entry:
                bad.append(Violation("write_not_resident", t, v, f"write of {v}, never in cache"))
                continue
            uses_of_entry[last_entry[v]] = t
            slow.add(v)
        else:
            if v in inputs:
                bad.append(Violation("compute_input", t, v, f"input {v} cannot be computed"))
                continue
            for u in d.preds[v]:
                if u not in last_entry:
                    bad.append(Violation("missing_operand", t, v,
                                         f"operand {u} of {v} was never in cache"))
                else:
                    uses_of_entry[last_entry[u]] = t
            last_entry[v] = t
            uses_of_entry[t] = t
            entries.append((v, t))
            evaluated.add(v)
    if M >= 1 and c.steps:
        T = len(c.steps)
        before = np.zeros(T + 1, dtype=np.int64)
        after = np.zeros(T + 1, dtype=np.int64)
        for _, e in entries:
            last = uses_of_entry[e]
            if last > e:
                before[e + 1] += 1          # e < t <= last
                before[last + 1] -= 1
                after[e] += 1               # e <= t < last
                after[last] -= 1
            else:
                after[e] += 1               # enters and is never used
                after[e + 1] -= 1
        before = np.cumsum(before)[:T]
        after = np.cumsum(after)[:T]
        for t in np.flatnonzero((before > M) | (after > M)).tolist():
            bad.append(Violation("capacity", t, c.steps[t].v,
                                 f"{max(before[t], after[t])} values resident, cache holds {M}"))
    for o in d.outputs:
        if o not in slow or (o in inputs and o not in evaluated):
            if o not in slow:
                bad.append(Violation("missing_output", None, o, f"output {o} never written"))
    for v in range(n):
        if v not in evaluated:
            what = "read" if v in inputs else "computed"
            bad.append(Violation("never_evaluated", None, v, f"vertex {v} never {what}"))
    return Report(not bad, tuple(bad))


def validate_pebbling(d, s):
    bad = []
    peb = set()
    placed = set()
    peak = 0
    for t, st in enumerate(s.steps):
        if not isinstance(st, (Place, Remove)) or not 0 <= st.v < d.n:
            bad.append(Violation("bad_step", t, getattr(st, "v", None), f"step {st!r} is not a pebble move"))
            continue
        v = st.v
        if isinstance(st, Place):
            if v in peb:
                bad.append(Violation("already_pebbled", t, v, f"{v} already carries a pebble"))
                continue
            missing = [u for u in d.preds[v] if u not in peb]
            if missing:
                bad.append(Violation("missing_operand", t, v, f"predecessors {missing} of {v} lack pebbles"))
                continue
            peb.add(v)
            placed.add(v)
            peak = max(peak, len(peb))
            if len(peb) > s.budget:
                bad.append(Violation("capacity", t, v, f"{len(peb)} pebbles exceed the budget {s.budget}"))
        else:
            if v not in peb:
                bad.append(Violation("not_pebbled", t, v, f"{v} carries no pebble"))
                continue
            peb.discard(v)
    for o in d.outputs:
        if o not in placed:
            bad.append(Violation("missing_output", None, o, f"output {o} never pebbled"))
    return Report(not bad, tuple(bad))


def pebble_peak(s):
    peb, peak = set(), 0
    for st in s.steps:
        if isinstance(st, Place):
            peb.add(st.v)
            peak = max(peak, len(peb))
        else:
            peb.discard(st.v)
    return peak


# converters


class DerivedVisit(NamedTuple):
    sequence: tuple
    tau: tuple    # tau[i] = step index that added sequence[i]


def _check_reverse_rule(d, r):
    if not isinstance(r, VisitRule):
        raise RuleError("expected a VisitRule")
    d_r = r.dag
    if d_r.n != d.n or any(set(d_r.preds[v]) != set(d.succs[v]) for v in range(d.n)):
        raise RuleError("rule must target the reverse of the computed graph")


def _backward_visit(d, r, triggers):
    """Scan (step index, vertex) triggers from last to first."""
    visited = set()
    seq, tau = [], []
    fams = r.families
    for t, v in reversed(triggers):
        if v in visited:
            continue
        if any(visited.issuperset(q) for q in fams[v]):
            visited.add(v)
            seq.append(v)
            tau.append(t)
    return DerivedVisit(tuple(seq), tuple(tau))


def computation_to_visit(d, r, c):
    """r-visit of reverse(d) read off a valid computation, back to front."""
    _check_reverse_rule(d, r)
    report = validate_computation(d, c)
    if not report:
        raise ComputationError(f"invalid computation: {report.violations[0].message}")
    inputs = set(d.inputs)
    triggers = [(t, s.v) for t, s in enumerate(c.steps)
                if (isinstance(s, Compute) and s.v not in inputs)
                or (isinstance(s, Read) and s.v in inputs)]
    out = _backward_visit(d, r, triggers)
    if len(out.sequence) != d.n:
        raise AssertionError("derived visit is incomplete")
    return out


def pebbling_to_visit(d, r, s):
    _check_reverse_rule(d, r)
    report = validate_pebbling(d, s)
    if not report:
        raise ComputationError(f"invalid pebbling: {report.violations[0].message}")
    triggers = [(t, st.v) for t, st in enumerate(s.steps) if isinstance(st, Place)]
    out = _backward_visit(d, r, triggers)
    if len(out.sequence) != d.n:
        raise AssertionError("derived visit is incomplete")
    return out


def visit_to_pebbling(d, r, visit):
    """Pebbling whose last placements, read backwards, give ``visit``.

    Visit entries are handled from last to first. Each one is pebbled
    together with the ancestors it still needs (vertices already handled
    keep their pebble for good), then the temporary pebbles go away.
    """
    from .rules import is_r_visit

    _check_reverse_rule(d, r)
    check = is_r_visit(r.dag, r, visit)
    if not check:
        raise RuleError(f"not an r-visit at position {check.position}: {check.reason}")
    rank = {v: i for i, v in enumerate(d.topological_order())}
    final = set()
    steps, peb, peak = [], set(), 0
    for target in reversed(visit):
        need, todo = {target}, [target]
        while todo:
            x = todo.pop()
            for u in d.preds[x]:
                if u not in final and u not in need:
                    need.add(u)
                    todo.append(u)
        for x in sorted(need, key=rank.__getitem__):
            steps.append(Place(x))
            peb.add(x)
            peak = max(peak, len(peb))
        for x in sorted(need - {target}, key=rank.__getitem__):
            steps.append(Remove(x))
            peb.discard(x)
        final.add(target)
    return PebbleSchedule(tuple(steps), peak)


# schedulers


class _Engine:
    """Cache bookkeeping shared by the greedy, random and blocked schedulers.

    ``uses[v]`` lists the order positions at which v is an operand.
    Values with no use before ``horizon`` are dropped right away (after
    being written if they are still needed beyond it).
    """

    def __init__(self, d, M, order, policy="furthest", rng=None, prefer_clean=False, may_drop=None):
        self.d, self.M = d, M
        self.policy, self.rng = policy, rng
        self.prefer_clean = prefer_clean
        self.may_drop = may_drop
        self.cache = {}                       # vertex -> last touch
        self.slow = set(d.inputs)
        self.steps = []
        self.clock = 0
        self.t = -1
        self.horizon = len(order)
        pos = {v: i for i, v in enumerate(order)}
        self.uses = [sorted(pos[w] for w in d.succs[v]) for v in range(d.n)]
        self.outputs = set(d.outputs)

    def next_use(self, v, limit=None, after=None):
        limit = self.horizon if limit is None else limit
        after = self.t if after is None else after
        for p in self.uses[v]:
            if p > after:
                return p if p < limit else None
        return None

    def needed_later(self, v):
        return self.next_use(v, limit=float("inf")) is not None or (v in self.outputs and v not in self.slow)

    def emit(self, step):
        self.steps.append(step)

    def touch(self, v):
        self.clock += 1
        self.cache[v] = self.clock

    def write(self, v):
        self.emit(Write(v))
        self.slow.add(v)

    def evict(self, v):
        if self.needed_later(v) and v not in self.slow:
            if self.may_drop is not None and self.may_drop(self, v):
                del self.cache[v]
                return
            self.write(v)
        del self.cache[v]

    def choose(self, pool):
        pool = sorted(pool)
        if self.prefer_clean:
            clean = [v for v in pool if v in self.slow]
            pool = clean or pool
        if self.policy == "random":
            return pool[int(self.rng.integers(len(pool)))]
        if self.policy == "lru":
            return min(pool, key=lambda v: (self.cache[v], v))
        far = float("inf")
        return max(pool, key=lambda v: (self.next_use(v, limit=far) or far, -v))

    def make_room(self, protected):
        while len(self.cache) >= self.M:
            pool = [v for v in self.cache if v not in protected]
            if not pool:
                raise ComputationError("cache too small for the operands in use")
            self.evict(self.choose(pool))

    def ensure(self, v, protected):
        if v in self.cache:
            self.touch(v)
            return
        if v not in self.slow:
            self.recompute(v, protected)
            return
        self.make_room(protected)
        self.emit(Read(v))
        self.touch(v)

    def recompute(self, v, protected):
        ops = self.d.preds[v]
        guard = set(protected) | set(ops)
        for u in ops:
            self.ensure(u, guard)
        self.make_room(guard)
        self.emit(Compute(v))
        self.touch(v)

    def drop_dead(self):
        for v in sorted(self.cache):
            if self.next_use(v) is None and not (v in self.outputs and v not in self.slow):
                if self.needed_later(v) and v not in self.slow:
                    self.write(v)
                del self.cache[v]

    def visit_input(self, x):
        if x not in self.cache:
            self.make_room(set())
            self.emit(Read(x))
            self.touch(x)

    def compute(self, x, write_now=False):
        ops = self.d.preds[x]
        guard = set(ops)
        for u in ops:
            self.ensure(u, guard)
        now = self.t + 1
        dying = [u for u in ops if self.next_use(u, after=now) is None
                 and not (u in self.outputs and u not in self.slow)]
        overwrite = None
        if not dying and len(self.cache) >= self.M:
            pool = [v for v in self.cache if v not in guard]
            if pool:
                self.evict(self.choose(pool))
            else:
                overwrite = self.choose(list(ops))
                if self.needed_later(overwrite) and overwrite not in self.slow:
                    self.write(overwrite)
        self.emit(Compute(x))
        if overwrite is not None:
            del self.cache[overwrite]
        self.touch(x)
        if x in self.outputs or write_now:
            self.write(x)

    def run(self, order, write_now=lambda v: False, horizon_of=None):
        inputs = set(self.d.inputs)
        for t, x in enumerate(order):
            self.t = t - 1
            if horizon_of is not None:
                self.horizon = horizon_of(t)
            if x in inputs:
                self.visit_input(x)
            else:
                self.compute(x, write_now(x))
            self.t = t
            self.drop_dead()
        return IoComputation(tuple(self.steps), self.M)


def _check_order(d, order):
    order = [d.check_vertex(v) for v in order]
    pos = {v: i for i, v in enumerate(order)}
    if len(order) != d.n or len(pos) != d.n:
        raise ComputationError("order must list every vertex exactly once")
    for u, v in d.edges():
        if pos[u] > pos[v]:
            raise ComputationError(f"order is not topological: {u} after {v}")
    return order


def greedy_computation(d, order=None, M=2, policy="furthest"):
    """Compute vertices in a fixed topological order, reading on miss.

    Victims are chosen by furthest next use (``furthest``) or least
    recent use (``lru``); a victim still needed later is written first.
    Requires M >= max(1, max in-degree).
    """
    order = _check_order(d, d.topological_order() if order is None else order)
    if policy not in ("furthest", "lru"):
        raise ValueError(f"unknown eviction policy {policy!r}")
    if M < max(1, d.max_in_degree):
        raise ComputationError(f"M = {M} is below the largest in-degree {d.max_in_degree}")
    comp = _Engine(d, M, order, policy).run(order)
    _assert_valid(d, comp)
    return comp


def random_topological_order(d, rng):
    indeg = [len(p) for p in d.preds]
    ready = [v for v in range(d.n) if indeg[v] == 0]
    order = []
    while ready:
        v = ready.pop(int(rng.integers(len(ready))))
        order.append(v)
        for w in d.succs[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    return order


def random_computation(d, M, seed=0, recompute=True):
    """A valid but unplanned computation: random order, random victims.

    With ``recompute`` and M >= 2 * max in-degree + 1, some evicted
    values are dropped without a write when their operands are all in
    slow memory, and recomputed when needed again.
    """
    rng = np.random.default_rng(seed)
    if M < max(1, d.max_in_degree):
        raise ComputationError(f"M = {M} is below the largest in-degree {d.max_in_degree}")
    order = random_topological_order(d, rng)
    may_drop = None
    if recompute and M >= 2 * d.max_in_degree + 1:
        def may_drop(engine, v):
            return (v not in engine.outputs and d.preds[v]
                    and all(u in engine.slow for u in d.preds[v])
                    and rng.random() < 0.5)
    comp = _Engine(d, M, order, "random", rng=rng, may_drop=may_drop).run(order)
    _assert_valid(d, comp)
    return comp


def _assert_valid(d, comp):
    report = validate_computation(d, comp)
    if not report:
        raise AssertionError(f"scheduler produced an invalid trace: {report.violations[:3]}")


def astar_side(q, M):
    """Largest block side b* with (b*-1)(q-1)+1 <= M."""
    return (M - 1) // (q - 1) + 1


class AstarRun(NamedTuple):
    computation: IoComputation
    dag: Dag
    side: int
    blocks: int


def run_diamond_astar(q, b, M):
    """Blocked evaluation of the q-diamond of side b with cache size M.

    Blocks of side b* are evaluated in order of their anti-diagonal
    index, each one layer by layer. Operands from other blocks are read
    when needed and dropped after their last use inside the block; a
    value is written as soon as it is computed if it feeds another
    block or is the output. When the cache is full, a value that is
    already in slow memory is evicted first.
    """
    if q < 2 or b < 2:
        raise ValueError("need q >= 2 and b >= 2")
    if M < max(2, q):
        raise ValueError(f"A* needs M >= max(2, q) so that all operands fit, got M = {M}")
    d = diamond(q, b)
    side = astar_side(q, M)
    blocks = diamond_blocks(d, side)
    layer = d.meta["layer"]
    coords = d.meta["coords"]
    keys = sorted(set(blocks), key=lambda k: (k[0] + k[1], k[0]))
    rank = {k: i for i, k in enumerate(keys)}
    order = sorted(range(d.n), key=lambda v: (rank[blocks[v]], layer[v], coords[v][0]))
    ends, count = [], 0
    for k in keys:
        count += sum(1 for v in range(d.n) if blocks[v] == k)
        ends.append(count)
    block_end = [ends[rank[blocks[v]]] for v in order]

    def crosses(v):
        return any(blocks[w] != blocks[v] for w in d.succs[v])

    engine = _Engine(d, M, order, "furthest", prefer_clean=True)
    comp = engine.run(order, write_now=crosses, horizon_of=block_end.__getitem__)
    _assert_valid(d, comp)
    return AstarRun(comp, d, side, len(keys))


def astar_upper_bound(q, b, M):
    """4M times the number of blocks, ceil(b / b*)^2."""
    return 4 * M * (-(-b // astar_side(q, M))) ** 2
