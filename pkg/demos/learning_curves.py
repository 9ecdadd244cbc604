"""Short regret comparison of the round-based policies and the epoch baselines.

Run with ``python demos/learning_curves.py``.  A few replications at a modest
horizon keep this under a minute; the CLI ``simulate`` command runs the full
experiments and writes CSV.
"""
from posmnl import SimConfig, run_replications

T, REPS = 3000, 4
runs = [
    ("ex1", "p2mle"), ("ex1", "epoch-ucb-v"), ("ex1", "ep2mle"),
    ("ex4", "gp2"), ("ex4", "epoch-ucb-gen"),
]

print(f"mean cumulative pseudo-regret over {REPS} replications")
print(f"{'instance':8} {'policy':14} {'t=750':>9} {'t=1500':>9} {'t=3000':>9}")
for instance, policy in runs:
    table = run_replications(SimConfig(instance, policy, T, reps=REPS, seed=1))
    cols = [table.at(t) for t in (750, 1500, 3000)]
    print(f"{instance:8} {policy:14} " + " ".join(f"{c:9.2f}" for c in cols))

# Per-round detail is available for plotting:
table = run_replications(SimConfig("ex1", "p2mle", 200, reps=2, seed=1, stride=50))
print()
print(table.to_csv(), end="")
