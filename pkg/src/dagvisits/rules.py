"""Visit rules, r-sequences, boundaries and enabled reach."""

from typing import NamedTuple

from .dag import GraphError, induced_subdag, descendants_within


class RuleError(ValueError):
    pass


class VisitRule:
    """Per-vertex family of enabler sets for one Dag.

    ``families[v]`` is a tuple of sorted vertex tuples. The empty tuple
    stands for the empty enabler.
    """

    def __init__(self, dag, kind, families, block_side=None, blocks=None):
        self.dag = dag
        self.kind = kind
        self.block_side = block_side
        self.blocks = blocks
        if len(families) != dag.n:
            raise RuleError(f"rule covers {len(families)} vertices, graph has {dag.n}")
        fams = []
        for v, fam in enumerate(families):
            fam = tuple(sorted({tuple(sorted(set(q))) for q in fam}))
            if not fam:
                raise RuleError(f"vertex {v} has an empty enabler family")
            allowed = set(dag.preds[v])
            for q in fam:
                if not set(q) <= allowed:
                    raise RuleError(f"enabler {list(q)} of vertex {v} is not within its predecessors")
            fams.append(fam)
        self.families = tuple(fams)
        self._masks = None

    def __call__(self, v):
        return self.families[v]

    @property
    def masks(self):
        """Enabler families as integer bitmasks."""
        if self._masks is None:
            self._masks = tuple(tuple(sum(1 << u for u in q) for q in fam) for fam in self.families)
        return self._masks

    def to_json(self):
        return {str(v): [list(q) for q in fam] for v, fam in enumerate(self.families)}

    def __repr__(self):
        extra = f" s={self.block_side}" if self.block_side else ""
        return f"<VisitRule {self.kind}{extra} n={self.dag.n}>"


def top_rule(d):
    return VisitRule(d, "top", [(d.preds[v],) for v in range(d.n)])


def singleton_rule(d):
    fams = [tuple((u,) for u in d.preds[v]) or ((),) for v in range(d.n)]
    return VisitRule(d, "singleton", fams)


def explicit_rule(d, mapping):
    """Rule from ``{vertex: [[enabler ids], ...]}``; keys may be strings."""
    fams = [None] * d.n
    for key, fam in mapping.items():
        try:
            v = d.check_vertex(int(key))
        except (GraphError, ValueError) as exc:
            raise RuleError(f"bad vertex key {key!r}: {exc}") from None
        fams[v] = [tuple(int(x) for x in q) for q in fam]
    missing = [v for v, f in enumerate(fams) if f is None]
    if missing:
        raise RuleError(f"explicit rule lacks vertices {missing[:10]}")
    return VisitRule(d, "explicit", fams)


def diamond_blocks(d, side):
    """Block coordinates of every vertex of a (possibly reversed) diamond.

    Blocks are anchored at the input corner of the original diamond,
    which is the output corner when ``d`` is a reversed diamond.
    """
    if d.meta.get("family") != "diamond" or "coords" not in d.meta:
        raise RuleError("diamond-blocked rule needs a generated diamond (or its reverse)")
    if side < 1:
        raise RuleError("block side must be positive")
    step = (d.meta["q"] - 1) * side
    return [(u // step, w // step) for u, w in d.meta["coords"]]


def diamond_blocked_rule(d, side):
    blocks = diamond_blocks(d, side)
    fams = []
    for v in range(d.n):
        same = tuple((u,) for u in d.preds[v] if blocks[u] == blocks[v])
        fams.append(same or ((),))
    return VisitRule(d, "diamond_blocked", fams, block_side=side, blocks=blocks)


def make_rule(d, name, side=None):
    name = name.lower().replace("-", "_")
    if name in ("top", "topological"):
        return top_rule(d)
    if name in ("singleton", "sin"):
        return singleton_rule(d)
    if name in ("diamond_blocked", "blocked"):
        if side is None:
            raise RuleError("diamond-blocked rule needs a block side")
        return diamond_blocked_rule(d, side)
    raise RuleError(f"unknown rule {name!r}")


def _check_target(d, r):
    if r.dag is not d and r.dag != d:
        raise RuleError("rule was built for a different graph")


class SequenceCheck(NamedTuple):
    ok: bool
    position: int | None = None   # 1-based position of the first bad element
    reason: str = ""

    def __bool__(self):
        return self.ok


def is_r_sequence(d, r, seq):
    """Check that every element has an enabler inside the prefix before it."""
    _check_target(d, r)
    seen = set()
    for pos, v in enumerate(seq, start=1):
        if isinstance(v, bool) or not hasattr(v, "__index__") or not 0 <= v < d.n:
            return SequenceCheck(False, pos, f"invalid vertex {v!r}")
        if v in seen:
            return SequenceCheck(False, pos, f"vertex {v} repeated")
        if not any(seen.issuperset(q) for q in r.families[v]):
            return SequenceCheck(False, pos, f"vertex {v} has no enabler in the prefix")
        seen.add(v)
    return SequenceCheck(True)


def is_r_visit(d, r, seq):
    check = is_r_sequence(d, r, seq)
    if check and len(seq) != d.n:
        return SequenceCheck(False, len(seq) + 1, "sequence does not cover every vertex")
    return check


def boundary(d, r, visited):
    """Unvisited vertices with a nonempty enabler inside ``visited``."""
    _check_target(d, r)
    visited = set(visited)
    return frozenset(
        v for v in range(d.n)
        if v not in visited and any(q and visited.issuperset(q) for q in r.families[v])
    )


def boundary_mask(r, mask):
    """Boundary of a visited bitmask, as a bitmask."""
    out = 0
    for v, fam in enumerate(r.masks):
        if not (mask >> v) & 1:
            for q in fam:
                if q and q & mask == q:
                    out |= 1 << v
                    break
    return out


class BoundaryTracker:
    """Incremental boundary of a growing visited set."""

    def __init__(self, r, visited=()):
        self.r = r
        n = r.dag.n
        self.visited = [False] * n
        self.missing = [[len(q) for q in fam] for fam in r.families]
        self.satisfied = [0] * n
        self.members = [[] for _ in range(n)]
        for v, fam in enumerate(r.families):
            for i, q in enumerate(fam):
                for x in q:
                    self.members[x].append((v, i))
        self.current = set()
        for v in visited:
            self.add(v)

    def add(self, x):
        self.visited[x] = True
        self.current.discard(x)
        for v, i in self.members[x]:
            self.missing[v][i] -= 1
            if self.missing[v][i] == 0:
                self.satisfied[v] += 1
                if not self.visited[v]:
                    self.current.add(v)

    def enabled(self, v):
        return any(m == 0 for m in self.missing[v])

    def __len__(self):
        return len(self.current)


def boundary_profile(d, r, seq):
    """Boundary size after each prefix (prefix lengths 0..len(seq))."""
    _check_target(d, r)
    tracker = BoundaryTracker(r)
    sizes = [0]
    for v in seq:
        tracker.add(v)
        sizes.append(len(tracker))
    return sizes


def boundary_complexity_of_sequence(d, r, seq):
    """Largest boundary over all prefixes of an r-sequence."""
    check = is_r_sequence(d, r, seq)
    if not check:
        raise RuleError(f"not an r-sequence at position {check.position}: {check.reason}")
    return max(boundary_profile(d, r, seq))


def enabled_reach(d, r, seq, v, allowed=None):
    """Descendants of v that can follow seq using only descendants of v.

    A single pass in topological order saturates the set, since every
    enabler consists of predecessors. ``allowed`` restricts the search
    to an induced subgraph.
    """
    _check_target(d, r)
    visited = set(seq)
    if v not in visited:
        raise RuleError(f"vertex {v} is not in the sequence")
    scope = set(range(d.n)) if allowed is None else set(allowed)
    cand = descendants_within(d, v, scope) - visited
    reach = set()
    covered = visited
    for u in d.topological_order():
        if u in cand and any(all(x in covered or x in reach for x in q) for q in r.families[u]):
            reach.add(u)
    return reach


def restrict_rule(d, r, seq, reach):
    """Rule on the sub-DAG induced by ``reach``.

    Each enabler Q of u becomes Q minus the visited prefix, kept only
    when the remainder lies in ``reach``. Returns (sub_dag, sub_rule,
    old_to_new, new_to_old).
    """
    _check_target(d, r)
    visited = set(seq)
    reach = set(reach)
    if reach & visited:
        raise RuleError("reach overlaps the visited prefix")
    sub, new_of, old_ids = induced_subdag(d, reach)
    fams = []
    for u in old_ids:
        fam = []
        for q in r.families[u]:
            rest = [x for x in q if x not in visited]
            if all(x in reach for x in rest):
                fam.append(tuple(new_of[x] for x in rest))
        if not fam:
            raise RuleError(f"vertex {u} of the reach has no usable enabler")
        fams.append(fam)
    return sub, VisitRule(sub, "restricted", fams), new_of, old_ids


def entering_boundary(d_r, r, seq, cut_prev, cut):
    """(inputs of d_r  union  boundary of seq[:cut_prev]) within seq[cut_prev:cut]."""
    _check_target(d_r, r)
    if not 0 <= cut_prev < cut <= len(seq):
        raise RuleError(f"bad segment ({cut_prev}, {cut}] for a sequence of length {len(seq)}")
    pending = set(boundary(d_r, r, seq[:cut_prev])) | set(d_r.inputs)
    return {v for v in seq[cut_prev:cut] if v in pending}
