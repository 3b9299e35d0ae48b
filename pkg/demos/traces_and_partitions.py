"""
From traces to visits to bounds
===============================

Read a valid two-level-memory trace backwards and it yields a visit of
the reversed graph. Any segment partition of that visit bounds the
trace's writes from below (entering boundaries) and its reads (post
dominators of each segment). This script checks both on random traces
and shows the best partition for one of them.
"""

import numpy as np

from dagvisits import reverse, singleton_rule
from dagvisits.bounds import best_partition, read_bound_for_partition, write_bound_for_partition
from dagvisits.families import random_dag
from dagvisits.formats import steps_to_jsonl
from dagvisits.machine import computation_to_visit, io_counts, random_computation

d = random_dag(12, seed=7, din=2, dout=3)
M = 3
comp = random_computation(d, M, seed=1)
print(f"graph: n={d.n}, inputs {list(d.inputs)}, outputs {list(d.outputs)}")
print("trace (JSON lines, first 4):")
print("".join(steps_to_jsonl(comp.steps[:4])), end="")
counts = io_counts(comp)
print("reads/writes:", counts.reads, counts.writes)

r = singleton_rule(reverse(d))
visit = computation_to_visit(d, r, comp).sequence
print("derived visit of reverse(G):", visit)

rng = np.random.default_rng(0)
worst_w = worst_r = 0
for _ in range(200):
    inner = rng.choice(np.arange(1, d.n), size=int(rng.integers(0, d.n)), replace=False)
    cuts = tuple(sorted(inner.tolist())) + (d.n,)
    worst_w = max(worst_w, write_bound_for_partition(r.dag, r, visit, cuts, M)[0])
    worst_r = max(worst_r, read_bound_for_partition(r.dag, visit, cuts, M)[0])
print(f"largest write bound over 200 partitions: {worst_w} (trace wrote {counts.writes})")
print(f"largest read bound over 200 partitions:  {worst_r} (trace read {counts.reads})")

part, value, details = best_partition(r.dag, r, visit, M, "total")
print("best shared partition:", part.cuts, "total", value,
      "| write", details["write"], "read", details["read"])
