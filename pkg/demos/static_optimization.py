"""Static assortment-and-position optimization on the small synthetic examples.

Run with ``python demos/static_optimization.py``.
"""
import numpy as np

from posmnl import brute_force_optimize, choice_distribution, dinkelbach_optimize, example_instance
from posmnl.model import OUTSIDE

# Example 1: three products, two slots, and a top slot twice as attractive.
inst = example_instance(1)
print("revenues", inst.revenues)
print("attraction matrix v_i * theta_k:")
print(inst.V)

# Dinkelbach turns max num/den into a short sequence of matching problems.
res = dinkelbach_optimize(inst.revenues, inst.V)
print("\noptimal placement (product, slot), 1-based:", res.placement.to_one_based())
print("expected revenue", res.revenue)
print("lambda trace", np.round(res.lambda_trace, 6), f"({res.iterations} matchings)")

# Enumeration agrees on this tiny instance.
print("brute force      ", brute_force_optimize(inst.revenues, inst.V).revenue)

# What the customer sees: choice probabilities of the optimal display.
for item, p in choice_distribution(inst, res.placement).items():
    label = "no purchase" if item == OUTSIDE else f"product {item + 1}"
    print(f"  P({label}) = {p:.4f}")

# The larger examples converge just as quickly.
for i in range(2, 7):
    inst = example_instance(i)
    res = dinkelbach_optimize(inst.revenues, inst.V)
    print(f"example {i}: N={inst.N} K={inst.K} revenue={res.revenue:.6f} iterations={res.iterations}")
