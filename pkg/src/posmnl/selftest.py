"""Quick built-in checks: optimizer oracle equivalence and model invariants."""

from __future__ import annotations

import itertools

import numpy as np

from .instances import example_instance, hard_instance, random_instance
from .model import GENERAL, MULTIPLICATIVE, Placement, choice_distribution, expected_revenue
from .optimize import brute_force_optimize, dinkelbach_optimize


def check_oracle_equivalence(n_instances: int = 200, seed: int = 0) -> str | None:
    rng = np.random.default_rng(seed)
    for j in range(n_instances):
        N = int(rng.integers(1, 7))
        K = int(rng.integers(1, min(N, 3) + 1))
        kind = MULTIPLICATIVE if j % 2 else GENERAL
        inst = random_instance(N, K, kind, seed=seed * 100_000 + j)
        d = dinkelbach_optimize(inst.revenues, inst.V)
        b = brute_force_optimize(inst.revenues, inst.V)
        if abs(d.revenue - b.revenue) > 1e-9:
            return f"{inst.name}: dinkelbach {d.revenue!r} vs brute force {b.revenue!r}"
        if abs(expected_revenue(inst, d.placement) - b.revenue) > 1e-9:
            return f"{inst.name}: returned placement does not attain the optimum"
    return None


def check_convergence() -> str | None:
    corpus = [example_instance(i) for i in range(1, 7)]
    corpus += [hard_instance(8, 2, 1000), hard_instance(12, 3, 5000, seed=3)]
    for inst in corpus:
        res = dinkelbach_optimize(inst.revenues, inst.V)
        if res.iterations > 10:
            return f"{inst.name}: {res.iterations} Dinkelbach iterations"
        if any(b < a for a, b in zip(res.lambda_trace, res.lambda_trace[1:])):
            return f"{inst.name}: lambda trace decreases"
    return None


def check_probabilities(n_instances: int = 50, seed: int = 1) -> str | None:
    for j in range(n_instances):
        inst = random_instance(5, 3, MULTIPLICATIVE if j % 2 else GENERAL, seed=seed * 1000 + j)
        for S in itertools.combinations(range(inst.N), 2):
            for pos in itertools.permutations(range(inst.K), 2):
                p = choice_distribution(inst, Placement(tuple(zip(S, pos))))
                if abs(sum(p.values()) - 1.0) > 1e-12 or min(p.values()) <= 0:
                    return f"{inst.name}: bad choice distribution {p}"
    return None


CHECKS = {
    "optimizer oracle equivalence (200 random instances)": check_oracle_equivalence,
    "Dinkelbach iterations <= 10 and monotone lambda": check_convergence,
    "choice probabilities sum to 1": check_probabilities,
}


def run(out=print) -> bool:
    ok = True
    for name, check in CHECKS.items():
        problem = check()
        out(f"{'PASS' if problem is None else 'FAIL'}  {name}" + (f": {problem}" if problem else ""))
        ok = ok and problem is None
    return ok
