"""
Hong-Kung partitions against visit partitions
=============================================

The classic argument splits G into sets with small dominators and small
minimum sets; k such sets give M(k - 1) I/O. On the diamond a single set
already qualifies, so the bound is zero, while the visit-partition
witness grows like b^2 / M.
"""

from dagvisits import Diamond, build_diamond_blocked_visit, generate, min_s_partition_k, reverse
from dagvisits.bounds import diamond_witness_partition, hong_kung_bound, write_bound_for_partition

print("exact k(diamond(2,3), 2M):", [min_s_partition_k(generate(Diamond(2, 3)), 2 * M).k for M in (1, 2, 3)])
print()
print(f"{'b':>3s} {'M':>2s} {'HK sets':>8s} {'HK bound':>9s} {'visit witness':>14s}")
for M in (1, 2, 3):
    for b in (4 * M, 8 * M):
        d = generate(Diamond(2, b))
        hk = hong_kung_bound(d, M)
        d_r = reverse(d)
        built = build_diamond_blocked_visit(d_r, M)
        cuts = diamond_witness_partition(d_r, built, M)
        w, _ = write_bound_for_partition(d_r, built.rule, built.sequence, cuts, M)
        print(f"{b:>3} {M:>2} {hk.k:>8} {hk.bound:>9} {w:>14}")
