"""
I/O cost of the diamond
=======================

The q-diamond is a square stencil: every interior vertex depends on its
lower and left neighbours. A blocked visit of the reversed diamond,
cut at each block's first diagonal step, certifies a lower bound on
the reads and writes of any schedule with cache size M. The blocked
schedule A* comes within a constant factor of it.
"""

from dagvisits import Diamond, build_diamond_blocked_visit, generate, reverse
from dagvisits.bounds import diamond_lower_bound, diamond_witness_partition, write_bound_for_partition
from dagvisits.machine import astar_upper_bound, greedy_computation, io_counts, run_diamond_astar

print(f"{'b':>3s} {'M':>2s} {'lower':>6s} {'witness':>8s} {'A*':>6s} {'greedy':>7s} {'A* bound':>9s}")
for b in (8, 16, 32):
    for M in (2, 4):
        d_r = reverse(generate(Diamond(2, b)))
        built = build_diamond_blocked_visit(d_r, M)
        cuts = diamond_witness_partition(d_r, built, M)
        witness, _ = write_bound_for_partition(d_r, built.rule, built.sequence, cuts, M)
        run = run_diamond_astar(2, b, M)
        astar = io_counts(run.computation).total
        greedy = io_counts(greedy_computation(run.dag, M=M)).total
        print(f"{b:>3} {M:>2} {diamond_lower_bound(2, b, M):>6} {witness:>8} {astar:>6} "
              f"{greedy:>7} {astar_upper_bound(2, b, M):>9}")

# A look at one A* trace.
run = run_diamond_astar(2, 8, 2)
head = " ".join(f"{s.op[0]}{s.v}" for s in run.computation.steps[:24])
print()
print(f"A* on diamond(2,8), M=2: {run.blocks} blocks of side {run.side}")
print("first steps:", head, "...")
