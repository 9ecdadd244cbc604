"""From a click log to a simulation instance.

A synthetic log stands in for the real hotel-search data: impressions on
randomized result pages with a known position bias.  Calibration recovers
position effects, item attractions and capped revenues, and the result feeds
straight into the optimizer.

Run with ``python demos/click_log_calibration.py``.
"""
import csv
import tempfile
from pathlib import Path

import numpy as np

from posmnl import build_instance, dinkelbach_optimize, extract_parameters, load_impressions

rng = np.random.default_rng(0)
true_theta = np.array([1.0, 0.7, 0.5, 0.35])
n_items = 40
base_ctr = rng.uniform(0.02, 0.2, n_items)
price = rng.lognormal(5, 0.5, n_items)

path = Path(tempfile.mkdtemp()) / "impressions.csv"
with open(path, "w", newline="") as f:
    out = csv.writer(f)
    out.writerow(["srch_id", "prop_id", "position", "click_bool", "random_bool", "price_usd"])
    for search in range(20_000):
        randomized = int(rng.random() < 0.3)
        items = rng.choice(n_items, size=4, replace=False)
        for k, item in enumerate(items):
            click = int(rng.random() < base_ctr[item] * true_theta[k])
            out.writerow([search, f"hotel{item:03d}", k + 1, click, randomized, f"{price[item]:.2f}"])
    out.writerow([0, "hotel000", 1, 0, 1, "n/a"])  # a malformed row gets skipped

log = load_impressions(path)
print(len(log), "impressions loaded; skipped (line, reason):", log.skipped)
params = extract_parameters(log, min_position_obs=1000)
print("estimated theta", np.round(params.theta, 3), "true", true_theta)
print(f"price cap {params.price_cap:.2f}")

inst = build_instance(params, N=12, K=4, min_v=0.1, seed=3)
res = dinkelbach_optimize(inst.revenues, inst.V)
print("items in the instance:", inst.meta["items"])
print("best display (item, slot):", [(inst.meta["items"][i], k + 1) for i, k in res.placement])
print(f"expected revenue {res.revenue:.4f}")
