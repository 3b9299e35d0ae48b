"""Slow reference implementations used to cross-check the library.

Everything here follows the definitions literally (enumerate and test)
and shares no code with the package beyond the Dag container.
"""

import itertools

from hypothesis import strategies as st

from dagvisits.dag import Dag


def literal_boundary(d, fams, visited):
    visited = set(visited)
    return {v for v in range(d.n) if v not in visited
            and any(q and set(q) <= visited for q in fams[v])}


def literal_is_sequence(fams, seq):
    seen = set()
    for v in seq:
        if v in seen or not any(set(q) <= seen for q in fams[v]):
            return False
        seen.add(v)
    return True


def sequence_complexity(d, fams, seq):
    return max(len(literal_boundary(d, fams, seq[:i])) for i in range(len(seq) + 1))


def all_visits(d, fams):
    for perm in itertools.permutations(range(d.n)):
        if literal_is_sequence(fams, perm):
            yield perm


def min_boundary_by_enumeration(d, fams):
    return min(sequence_complexity(d, fams, p) for p in all_visits(d, fams))


def singleton_families(d):
    return [[(u,) for u in d.preds[v]] or [()] for v in range(d.n)]


def top_families(d):
    return [[tuple(d.preds[v])] for v in range(d.n)]


def _hits_all_paths(succs, starts, targets, cut):
    seen, todo = set(), [s for s in starts if s not in cut]
    while todo:
        x = todo.pop()
        if x in seen:
            continue
        seen.add(x)
        if x in targets:
            return False
        todo.extend(w for w in succs[x] if w not in cut)
    return True


def min_cut_by_subsets(d, xs, toward="outputs"):
    """Smallest set meeting every xs-to-output (or input-to-xs) path."""
    if toward == "outputs":
        succs, targets = d.succs, set(d.outputs)
    else:
        succs, targets = d.preds, set(d.inputs)
    for k in range(d.n + 1):
        for cut in itertools.combinations(range(d.n), k):
            if _hits_all_paths(succs, xs, targets, set(cut)):
                return k
    raise AssertionError("the full vertex set is always a cut")


def all_partitions(n):
    """Every cut tuple ending at n."""
    for k in range(n):
        for inner in itertools.combinations(range(1, n), k):
            yield inner + (n,)


def entering_by_definition(d_r, fams, visit, a, b):
    pending = literal_boundary(d_r, fams, visit[:a]) | set(d_r.inputs)
    return [v for v in visit[a:b] if v in pending]


def descendants_by_search(d, v):
    out, todo = set(), list(d.succs[v])
    while todo:
        x = todo.pop()
        if x not in out:
            out.add(x)
            todo.extend(d.succs[x])
    return out


def reach_by_extension(d, fams, seq, v):
    """Union of all vertices reachable by r-extensions of seq inside descendants(v)."""
    allowed = descendants_by_search(d, v) - set(seq)
    start = frozenset(seq)
    seen, todo, reach = {start}, [start], set()
    while todo:
        cur = todo.pop()
        for u in allowed - cur:
            if any(set(q) <= cur for q in fams[u]):
                nxt = cur | {u}
                reach.add(u)
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
    return reach


@st.composite
def dags(draw, min_n=0, max_n=8, density=0.4, max_out=None):
    """Random DAG: edges only from lower to higher ids, ids then shuffled."""
    n = draw(st.integers(min_n, max_n))
    perm = draw(st.permutations(range(n)))
    edges, outdeg = [], [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if max_out is not None and outdeg[i] >= max_out:
                break
            if draw(st.floats(0, 1)) < density:
                edges.append((perm[i], perm[j]))
                outdeg[i] += 1
    return Dag(n, edges)


def pebbling_by_search(d):
    """Smallest budget admitting a complete black pebbling, literal game moves."""
    from collections import deque

    outputs = frozenset(d.outputs)
    for p in range(1, d.n + 1):
        start = (frozenset(), frozenset())
        seen, todo = {start}, deque([start])
        while todo:
            peb, done = todo.popleft()
            if done == outputs:
                return p
            moves = []
            for v in range(d.n):
                if v in peb:
                    moves.append((peb - {v}, done))
                elif len(peb) < p and all(u in peb for u in d.preds[v]):
                    moves.append((peb | {v}, done | ({v} & outputs)))
            for m in moves:
                if m not in seen:
                    seen.add(m)
                    todo.append(m)
    return 0


def s_partition_k_by_labels(d, S):
    """Fewest labelled sets satisfying the four S-partition properties."""
    def minimum(xs):
        return [v for v in xs if not any(w in xs for w in d.succs[v])]

    for k in range(1, d.n + 1):
        for labels in itertools.product(range(k), repeat=d.n):
            sets = [{v for v in range(d.n) if labels[v] == j} for j in range(k)]
            if any(not s for s in sets):
                continue
            if any(labels[w] < labels[v] for v, w in d.edges()):
                continue
            if all(len(minimum(s)) <= S and min_cut_by_subsets(d, s, "inputs") <= S for s in sets):
                return k
    return 0


def best_write_by_enumeration(d_r, fams, visit, M):
    best = 0
    for cuts in all_partitions(len(visit)):
        total, prev = 0, 0
        for c in cuts:
            total += max(0, len(entering_by_definition(d_r, fams, visit, prev, c)) - M)
            prev = c
        best = max(best, total)
    return best


def best_read_by_enumeration(d_r, visit, M):
    best = 0
    for cuts in all_partitions(len(visit)):
        total, prev = 0, 0
        for c in cuts:
            total += max(0, min_cut_by_subsets(d_r, visit[prev:c]) - M)
            prev = c
        best = max(best, total)
    return best
