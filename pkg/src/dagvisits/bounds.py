"""Visit-partition I/O lower bounds and the closed forms they are compared with."""

import math
from dataclasses import dataclass, field

from .builders import (
    blocked_side, build_topological_visit, depth_guarantee, singleton_guarantee,
    topological_guarantee,
)
from .dag import reverse
from .flows import min_post_dominator
from .machine import astar_side, astar_upper_bound
from .oracles import minimum_set
from .rules import BoundaryTracker, RuleError, is_r_visit, _check_target


@dataclass(frozen=True)
class SegmentPartition:
    cuts: tuple

    def __post_init__(self):
        cuts = tuple(int(c) for c in self.cuts)
        object.__setattr__(self, "cuts", cuts)
        if not cuts or any(b <= a for a, b in zip(cuts, cuts[1:])) or cuts[0] < 1:
            raise ValueError(f"cuts must be strictly increasing and start at 1 or more: {cuts}")

    def check(self, n):
        if self.cuts[-1] != n:
            raise ValueError(f"last cut must equal n = {n}, got {self.cuts[-1]}")
        return self

    def segments(self):
        prev = 0
        for c in self.cuts:
            yield prev, c
            prev = c

    def __len__(self):
        return len(self.cuts)


@dataclass
class BoundReport:
    metric: str
    value: int
    M: int
    L: int = 1
    variant: str = "standard"
    witness: dict = field(default_factory=dict)

    def to_json(self):
        return {"metric": self.metric, "value": self.value, "M": self.M, "L": self.L,
                "variant": self.variant, "witness": self.witness}


def _check_visit(d_r, r, visit):
    _check_target(d_r, r)
    check = is_r_visit(d_r, r, visit)
    if not check:
        raise RuleError(f"not an r-visit at position {check.position}: {check.reason}")


def _pending_masks(d_r, r, visit):
    """Bitmask of (inputs of d_r) | boundary, after each prefix length 0..n-1."""
    tracker = BoundaryTracker(r)
    base = sum(1 << v for v in d_r.inputs)
    out = [base]
    for v in visit[:-1]:
        tracker.add(v)
        out.append(base | sum(1 << u for u in tracker.current))
    return out


def write_bound_for_partition(d_r, r, visit, partition, M):
    """Sum over segments of max(0, entering boundary - M), with per-segment terms."""
    _check_visit(d_r, r, visit)
    partition = _as_partition(partition).check(d_r.n)
    pending = _pending_masks(d_r, r, visit)
    terms = []
    for a, b in partition.segments():
        ent = sum(1 for v in visit[a:b] if (pending[a] >> v) & 1)
        terms.append({"start": a, "end": b, "entering": ent, "term": max(0, ent - M)})
    return sum(t["term"] for t in terms), terms


def read_bound_for_partition(d_r, visit, partition, M, cache=None):
    """Sum over segments of max(0, smallest post-dominator in d_r - M).

    ``cache`` may be a dict reused across calls on the same visit; it
    maps (start, end) to the post-dominator size of that segment.
    """
    partition = _as_partition(partition).check(d_r.n)
    if sorted(visit) != list(range(d_r.n)):
        raise RuleError("visit must be a permutation of the vertices")
    cache = {} if cache is None else cache
    terms = []
    for a, b in partition.segments():
        if (a, b) not in cache:
            cache[(a, b)] = min_post_dominator(d_r, visit[a:b]).size
        pd = cache[(a, b)]
        terms.append({"start": a, "end": b, "post_dominator": pd, "term": max(0, pd - M)})
    return sum(t["term"] for t in terms), terms


def _as_partition(p):
    return p if isinstance(p, SegmentPartition) else SegmentPartition(tuple(p))


def _entering_table(d_r, r, visit):
    """ent[h][i] for 0 <= h < i <= n as a list of lists (row h, index i - h - 1)."""
    pending = _pending_masks(d_r, r, visit)
    n = len(visit)
    table = []
    for h in range(n):
        row, cnt, mask = [], 0, pending[h]
        for i in range(h, n):
            if (mask >> visit[i]) & 1:
                cnt += 1
            row.append(cnt)
        table.append(row)
    return table


def _longest(n, score):
    """Best partition of positions 0..n with additive segment scores."""
    best = [0] + [None] * n
    back = [None] * (n + 1)
    for i in range(1, n + 1):
        for h in range(i):
            val = best[h] + score(h, i)
            if best[i] is None or val > best[i]:
                best[i], back[i] = val, h
    cuts, i = [], n
    while i > 0:
        cuts.append(i)
        i = back[i]
    return best[n], SegmentPartition(tuple(reversed(cuts)))


class _Scores:
    def __init__(self, d_r, r, visit, M):
        self.d_r, self.visit, self.M = d_r, visit, M
        self.ent = _entering_table(d_r, r, visit)
        self.pd_cache = {}

    def write(self, h, i):
        return max(0, self.ent[h][i - h - 1] - self.M)

    def read(self, h, i):
        key = (h, i)
        if key not in self.pd_cache:
            self.pd_cache[key] = min_post_dominator(self.d_r, self.visit[h:i]).size
        return max(0, self.pd_cache[key] - self.M)


def best_partition(d_r, r, visit, M, metric="write"):
    """Partition maximizing the chosen metric for one fixed visit.

    Returns (partition, value, details). For ``total`` the value is the
    single-partition expression max over i of W(i) + max(R(i), W(i) + |I| - |O|)
    (I and O of the forward graph); ``details`` also carries the value
    obtained when W and R are maximized separately.
    """
    _check_visit(d_r, r, visit)
    visit = tuple(visit)
    n = d_r.n
    if n == 0:
        return None, 0, {}
    sc = _Scores(d_r, r, visit, M)
    if metric == "write":
        val, part = _longest(n, sc.write)
        return part, val, {"write": val}
    if metric == "read":
        val, part = _longest(n, sc.read)
        return part, val, {"read": val}
    if metric != "total":
        raise ValueError(f"unknown metric {metric!r}")
    # forward graph inputs are the outputs of d_r and vice versa
    shift = len(d_r.outputs) - len(d_r.inputs)
    w_best, w_part = _longest(n, sc.write)
    r_best, r_part = _longest(n, sc.read)
    wr_best, wr_part = _longest(n, lambda h, i: sc.write(h, i) + sc.read(h, i))
    shared = max(wr_best, 2 * w_best + shift)
    part = wr_part if wr_best >= 2 * w_best + shift else w_part
    independent = w_best + max(r_best, w_best + shift)
    return part, shared, {"write": w_best, "read": r_best, "shared": shared,
                          "independent": independent,
                          "write_cuts": list(w_part.cuts), "read_cuts": list(r_part.cuts)}


def diamond_lower_bound(q, b, M, L=1):
    """floor(b / ceil((2M+q-2)/(q-1)))^2 * M, divided by L with floor."""
    if q < 2 or b < 1 or M < 1 or L < 1:
        raise ValueError("need q >= 2 and positive b, M, L")
    return (b // blocked_side(q, M)) ** 2 * M // L


def diamond_witness_partition(d_r, built, M):
    """Cut just before the first diagonal vertex of every full block.

    ``built`` is the result of build_diamond_blocked_visit(d_r, M).
    """
    if built.rule.kind != "diamond_blocked" or built.rule.block_side != blocked_side(d_r.meta["q"], M):
        raise RuleError("visit is not a blocked diamond visit for this cache size")
    if len(built.sequence) != d_r.n:
        raise RuleError("visit does not cover the graph")
    cuts = set()
    for entry in built.trace:
        if entry["full"]:
            step = entry.get("first_diagonal_step")
            if step is None:
                raise RuleError(f"full block {entry['block']} has no diagonal visit")
            if step > 1:
                cuts.add(step - 1)
    cuts.add(d_r.n)
    return SegmentPartition(tuple(sorted(cuts)))


@dataclass
class HongKung:
    k: int
    bound: int
    sets: tuple
    visit: tuple
    properties: dict


def hong_kung_bound(d, M):
    """2M-partition read off a topological visit of reverse(d); bound M(k - 1).

    Segments are closed greedily once the smallest post-dominator (in
    the reverse graph) or the minimum set (in d) reaches 2M; the
    segments taken back to front form the partition.
    """
    if M < 1:
        raise ValueError("M must be positive")
    d_r = reverse(d)
    visit = build_topological_visit(d_r).sequence
    limit = 2 * M
    segments, current = [], []
    for v in visit:
        current.append(v)
        if (len(minimum_set(d, current)) >= limit
                or min_post_dominator(d_r, current).size >= limit):
            segments.append(current)
            current = []
    if current:
        segments.append(current)
    sets = tuple(frozenset(s) for s in reversed(segments))
    props = check_s_partition(d, sets, limit)
    if not all(props.values()):
        raise AssertionError(f"constructed sets violate the partition properties: {props}")
    k = len(sets)
    return HongKung(k, M * (k - 1), sets, tuple(visit), props)


def check_s_partition(d, sets, S):
    """Properties (a)-(d) of an S-partition, each as a boolean."""
    from .flows import min_dominator

    seen, union = set(), set()
    disjoint = True
    for part in sets:
        if seen & part:
            disjoint = False
        seen |= part
    a = disjoint and seen == set(range(d.n))
    b = all(min_dominator(d, part).size <= S for part in sets)
    c = all(len(minimum_set(d, part)) <= S for part in sets)
    dd = True
    for part in sets:
        if any(w in union for v in part for w in d.succs[v]):
            dd = False
        union |= part
    return {"a": a, "b": b, "c": c, "d": dd}


@dataclass
class VariantBounds:
    write: BoundReport
    read: BoundReport
    total: BoundReport


def variant_bound(write, read, n_inputs, n_outputs, variant="standard", M=0, L=1, witness=None):
    """Combine visit write/read values into the three cost metrics.

    standard and no-recompute: reads >= max(R, W + |I| - |O|), total = W + reads.
    free-input: reads >= W - |O| and total >= 2W - |O|, both clamped at 0.
    For no-recompute, W and R must come from topological visits.
    """
    if variant not in ("standard", "free-input", "no-recompute"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "free-input":
        rd = max(0, write - n_outputs)
        tot = max(0, 2 * write - n_outputs)
    else:
        rd = max(read, write + n_inputs - n_outputs)
        tot = write + rd
    rd = max(0, rd)

    def rep(metric, value):
        return BoundReport(metric, value // L, M, L, variant, dict(witness or {}))

    return VariantBounds(rep("write", write), rep("read", rd), rep("total", tot))


def closed_form_catalog(family, **params):
    """Closed-form bounds for a family, as a name -> value dict."""
    family = family.lower().replace("-", "_")
    if family == "pyramid":
        q, b = params["q"], params["b"]
        n = b + (q - 1) * b * (b - 1) // 2
        return {"n": n, "pebbling_lower": (q - 1) * (b - 1),
                "singleton_boundary_lower": (q - 1) * (b - 1),
                "depth_upper": depth_guarantee(q if b >= 2 else 0, b - 1),
                "singleton_upper": singleton_guarantee(q if b >= 2 else 0, n),
                "disjoint_paths": (b - 1) * (q - 1) + 1}
    if family == "tree":
        q, i = params["q"], params["i"]
        n = (q ** (i + 1) - 1) // (q - 1)
        return {"n": n, "pebbling_lower": (q - 1) * i,
                "top_boundary_lower": (q - 1) * i,
                "topological_upper": topological_guarantee(q if i >= 1 else 0, n)}
    if family == "diamond":
        q, b, M = params["q"], params["b"], params["M"]
        L = params.get("L", 1)
        side = astar_side(q, M)
        return {"n": (b - 1) * (2 + (q - 1) * (b - 1)) + 1,
                "io_lower": diamond_lower_bound(q, b, M, L),
                "lower_block_side": blocked_side(q, M),
                "astar_block_side": side,
                "astar_blocks": (-(-b // side)) ** 2,
                "io_upper": astar_upper_bound(q, b, M),
                "io_upper_order": b * b * q * q / (M + q)}
    if family == "chain_arborescence":
        h = params["h"]
        n = 2 * (2 ** (h + 1) - 1)
        return {"n": n, "top_boundary": math.log2(n + 2) - 1, "singleton_boundary": 2}
    if family == "universal":
        n, dout, depth = params["n"], params["dout"], params.get("depth", 0)
        return {"depth_upper": depth_guarantee(dout, depth),
                "singleton_upper": singleton_guarantee(dout, n),
                "topological_upper": topological_guarantee(dout, n)}
    raise ValueError(f"no closed forms for family {family!r}")
