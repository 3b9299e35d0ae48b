"""Check suites behind ``dagvisits verify``.

Each suite returns a list of Check rows. Cells are independent, so a
suite may fan them out to a process pool; rows come back in cell order
either way.
"""

from concurrent.futures import ProcessPoolExecutor
from typing import NamedTuple

import numpy as np

from .bounds import (
    diamond_lower_bound, diamond_witness_partition, hong_kung_bound,
    read_bound_for_partition, write_bound_for_partition,
)
from .builders import (
    build_depth_visit, build_diamond_blocked_visit, build_singleton_visit,
    build_topological_visit,
)
from .dag import reverse
from .families import diamond, random_dag
from .machine import (
    computation_to_visit, io_counts, pebbling_to_visit, random_computation,
    run_diamond_astar, astar_upper_bound, visit_to_pebbling,
)
from .oracles import min_s_partition_k
from .rules import is_r_visit, singleton_rule, top_rule

CSV_FIELDS = ("check", "expected", "observed", "pass")


class Check(NamedTuple):
    check: str
    expected: str
    observed: str
    passed: bool

    def row(self):
        return [self.check, self.expected, self.observed, "true" if self.passed else "false"]


def _le(name, value, limit):
    return Check(name, f"<= {limit:g}", f"{value:g}", value <= limit)


def _ge(name, value, limit):
    return Check(name, f">= {limit:g}", f"{value:g}", value >= limit)


def _eq(name, value, want):
    return Check(name, f"{want}", f"{value}", value == want)


def _fan_out(fn, cells, jobs):
    if jobs <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, cells))


DIAMOND_GRID = ((8, 2), (8, 4), (16, 2), (16, 4), (32, 2), (32, 4))


def _diamond_cell(cell):
    q, b, M = cell
    tag = f"q={q} b={b} M={M}"
    lower = diamond_lower_bound(q, b, M)
    d_r = reverse(diamond(q, b))
    built = build_diamond_blocked_visit(d_r, M)
    part = diamond_witness_partition(d_r, built, M)
    witness, _ = write_bound_for_partition(d_r, built.rule, built.sequence, part, M)
    io = io_counts(run_diamond_astar(q, b, M).computation).total
    upper = astar_upper_bound(q, b, M)
    return [
        _ge(f"witness >= lower ({tag})", witness, lower),
        _ge(f"astar io >= witness ({tag})", io, witness),
        _le(f"astar io <= 4M*blocks ({tag})", io, upper),
        _le(f"upper/lower ratio ({tag})", upper / lower, 16),
    ]


def _separation_cell(M):
    d = diamond(2, 3)
    rows = [
        _eq(f"k(Diamond(2,3), {2 * M})", min_s_partition_k(d, 2 * M).k, 1),
        _eq(f"hong-kung bound Diamond(2,3) M={M}", hong_kung_bound(d, M).bound, 0),
    ]
    b = 4 * M
    d_r = reverse(diamond(2, b))
    built = build_diamond_blocked_visit(d_r, M)
    part = diamond_witness_partition(d_r, built, M)
    witness, _ = write_bound_for_partition(d_r, built.rule, built.sequence, part, M)
    rows.append(_ge(f"visit-partition witness Diamond(2,{b}) M={M}", witness,
                    max(1, M * (b // (2 * M)) ** 2)))
    return rows


def diamond_io_suite(grid=DIAMOND_GRID, q=2, separation_ms=(1, 2, 3, 4), jobs=1):
    cells = [(q, b, M) for b, M in grid]
    rows = [r for block in _fan_out(_diamond_cell, cells, jobs) for r in block]
    rows += [r for block in _fan_out(_separation_cell, list(separation_ms), jobs) for r in block]
    return rows


def universal_dag(n, seed):
    """Random DAG used by the universal-bound checks; out-degree cap cycles 1..5."""
    rng = np.random.default_rng([seed, n])
    size = int(rng.integers(2, n + 1))
    return random_dag(size, seed=seed, din=1 + seed % 3, dout=1 + seed % 5)


def _universal_cell(cell):
    n, seed = cell
    d = universal_dag(n, seed)
    tag = f"seed={seed} n={d.n} dout={d.max_out_degree}"
    rows = []
    for name, build in (("depth", build_depth_visit), ("singleton", build_singleton_visit),
                        ("topological", build_topological_visit)):
        got = build(d)
        rows.append(_le(f"{name} boundary ({tag})", got.achieved, got.guarantee))
    return rows


def universal_bounds_suite(n=200, seeds=20, jobs=1):
    cells = [(n, s) for s in range(seeds)]
    return [r for block in _fan_out(_universal_cell, cells, jobs) for r in block]


def _converter_cell(cell):
    seed, n, partitions = cell
    rng = np.random.default_rng(seed)
    d = random_dag(n, seed=seed, din=2, dout=3)
    M = max(1, d.max_in_degree) + int(rng.integers(0, 4))
    comp = random_computation(d, M, seed=seed)
    d_r = reverse(d)
    r = singleton_rule(d_r) if seed % 2 == 0 else top_rule(d_r)
    derived = computation_to_visit(d, r, comp)
    visit = derived.sequence
    io = io_counts(comp)
    tag = f"seed={seed} M={M} rule={r.kind}"
    rows = [Check(f"derived visit valid ({tag})", "valid", "valid" if is_r_visit(d_r, r, visit) else "invalid",
                  bool(is_r_visit(d_r, r, visit)))]
    bad_w = bad_r = bad_shift = 0
    pd_cache = {}
    shift = len(d.inputs) - len(d.outputs)
    for _ in range(partitions):
        k = int(rng.integers(0, n))
        inner = sorted(rng.choice(np.arange(1, n), size=min(k, n - 1), replace=False).tolist()) if n > 1 else []
        cuts = tuple(inner) + (n,)
        w, _ = write_bound_for_partition(d_r, r, visit, cuts, M)
        rd, _ = read_bound_for_partition(d_r, visit, cuts, M, pd_cache)
        bad_w += io.writes < w
        bad_r += io.reads < rd
        bad_shift += io.reads < w + shift
    rows.append(_eq(f"writes >= write bound, {partitions} partitions ({tag})", bad_w, 0))
    rows.append(_eq(f"reads >= read bound, {partitions} partitions ({tag})", bad_r, 0))
    rows.append(_eq(f"reads >= W + |I| - |O|, {partitions} partitions ({tag})", bad_shift, 0))
    again = pebbling_to_visit(d, r, visit_to_pebbling(d, r, visit)).sequence
    rows.append(Check(f"pebbling round trip ({tag})", "identical",
                      "identical" if again == visit else "different", again == visit))
    return rows


def converters_suite(seeds=200, n=10, partitions=50, jobs=1):
    cells = [(s, n, partitions) for s in range(seeds)]
    return [r for block in _fan_out(_converter_cell, cells, jobs) for r in block]


SUITES = {
    "diamond-io": diamond_io_suite,
    "universal-bounds": universal_bounds_suite,
    "converters": converters_suite,
}
