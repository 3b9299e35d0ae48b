"""
Visits and their boundaries
===========================

A visit orders every vertex of a DAG; a visit rule says which already
visited predecessors are enough to enable a vertex. The boundary of a
prefix holds the vertices that are enabled but not yet visited. This
script builds visits with each constructive strategy and compares
them against the exact minimum on small graphs.
"""

from dagvisits import (
    ChainArborescence, Diamond, ReversePyramid, build_chain_first_visit, build_depth_visit,
    build_singleton_visit, build_topological_visit, exact_boundary_complexity, generate,
    singleton_rule, top_rule,
)
from dagvisits.families import random_dag
from dagvisits.rules import boundary_profile

# A diamond of side 4 and its boundary profile under the singleton rule:
# one visited predecessor enables a vertex.
d = generate(Diamond(2, 4))
built = build_singleton_visit(d)
print("diamond(2,4) singleton visit:", built.sequence)
print("boundary after each prefix:  ", boundary_profile(d, singleton_rule(d), built.sequence))

# Under the topological rule all predecessors must be visited first.
print("topological builder:", build_topological_visit(d).achieved,
      " exact:", exact_boundary_complexity(d, top_rule(d)).value)

# Builders against the exact minimum on small graphs.
print()
print(f"{'graph':26s} {'depth':>6s} {'single':>6s} {'topo':>6s} {'exact-s':>8s} {'exact-t':>8s}")
graphs = [("reverse pyramid (2,5)", generate(ReversePyramid(2, 5))),
          ("chain arborescence h=2", generate(ChainArborescence(2)))]
graphs += [(f"random n=14 seed={s}", random_dag(14, seed=s)) for s in range(3)]
for name, g in graphs:
    row = [build_depth_visit(g).achieved, build_singleton_visit(g).achieved,
           build_topological_visit(g).achieved,
           exact_boundary_complexity(g, singleton_rule(g)).value,
           exact_boundary_complexity(g, top_rule(g)).value]
    print(f"{name:26s} " + " ".join(f"{x:>6}" for x in row[:3]) + f" {row[3]:>8} {row[4]:>8}")

# Walking the chain first keeps the singleton boundary at two.
g = generate(ChainArborescence(3))
print()
print(f"chain-first on n={g.n}:", build_chain_first_visit(g).achieved)
