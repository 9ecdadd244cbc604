"""The lower-bound construction: one hidden placement is slightly better than all others.

Run with ``python demos/hard_instance.py``.
"""
import itertools

from posmnl import Placement, brute_force_optimize, expected_revenue, hard_instance

inst = hard_instance(N=8, K=2, T=1000)
eps = inst.meta["epsilon"]
print(f"epsilon = {eps:.8f}")
print("hidden target (1-based):", inst.meta["target"])

best = brute_force_optimize(inst.revenues, inst.V)
print("optimum", best.revenue, "vs (1+eps)/(2+eps) =", (1 + eps) / (2 + eps))

# Every full placement earns between 1/2 and the optimum, depending on overlap with the target.
target = set(Placement.from_one_based(inst.meta["target"]).pairs)
revenue_by_overlap = {}
for S in itertools.permutations(range(inst.N), inst.K):
    pairs = tuple(zip(S, range(inst.K)))
    overlap = len(target.intersection(pairs))
    revenue_by_overlap.setdefault(overlap, set()).add(round(expected_revenue(inst, Placement(pairs)), 12))
for overlap, revs in sorted(revenue_by_overlap.items()):
    print(f"  {overlap} target pairs matched -> revenue {sorted(revs)}")

# The gap is tiny, which is why learning the target takes many rounds.
print("gap between best and worst full placement:", best.revenue - 0.5)
