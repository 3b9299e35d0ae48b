"""
Pebbling numbers from visit boundaries
======================================

Any black pebbling of G, read backwards, yields a visit of the reversed
graph whose boundary never exceeds the number of pebbles. So the
boundary complexity of reverse(G) is a lower bound on the pebbling
number. Here both sides are computed exactly.
"""

from dagvisits import (
    Pyramid, Tree, exact_boundary_complexity, exact_pebbling_number, generate, reverse,
    singleton_rule, top_rule,
)
from dagvisits.machine import pebbling_to_visit
from dagvisits.rules import boundary_complexity_of_sequence

print(f"{'graph':14s} {'n':>3s} {'pebbles':>8s} {'b_single':>9s} {'b_top':>6s} {'closed form':>12s}")
cases = [(f"pyramid({q},{b})", Pyramid(q, b), (q - 1) * (b - 1)) for q, b in ((2, 3), (2, 4), (3, 3))]
cases += [(f"tree({q},{i})", Tree(q, i), (q - 1) * i) for q, i in ((2, 2), (3, 1), (2, 3))]
for name, spec, closed in cases:
    d = generate(spec)
    if d.n > 10:
        continue
    d_r = reverse(d)
    p = exact_pebbling_number(d).value
    bs = exact_boundary_complexity(d_r, singleton_rule(d_r)).value
    bt = exact_boundary_complexity(d_r, top_rule(d_r)).value
    print(f"{name:14s} {d.n:>3} {p:>8} {bs:>9} {bt:>6} {closed:>12}")

# The conversion itself: an optimal schedule becomes a visit of the reverse.
d = generate(Pyramid(2, 4))
p, schedule = exact_pebbling_number(d)
r = top_rule(reverse(d))
visit = pebbling_to_visit(d, r, schedule).sequence
print()
print(f"pyramid(2,4): {len(schedule.steps)} moves with {p} pebbles")
print("derived visit:", visit, " boundary", boundary_complexity_of_sequence(r.dag, r, visit))
