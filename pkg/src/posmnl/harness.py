"""Regret simulation and multi-replication aggregation.

Regret is *pseudo*-regret: each round contributes ``R* - R(S_t, sigma_t)``
computed from expected revenues, so plots carry no extra Monte Carlo noise
from realized revenues.  Policies still only ever see sampled choices.

Randomness: replication ``j`` of a run with master seed ``s`` owns the
streams ``SeedSequence(s, spawn_key=(j, 0))`` (customer choices, exactly one
uniform per round, so round ``t`` always uses the ``t``-th draw) and
``SeedSequence(s, spawn_key=(j, 1))`` (policy-internal randomization).  Both
are PCG64.  Nothing depends on scheduling, so replications can run in any
order or in parallel.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from .instances import example_instance, hard_instance
from .model import OUTSIDE, Instance, Placement, load_instance
from .optimize import (
    ENUMERATION_BUDGET,
    OptimizationResult,
    brute_force_optimize,
    dinkelbach_optimize,
    enumeration_size,
)
from .policies import POLICY_IDS, Policy, make_policy

CSV_HEADER = "round,mean_cum_regret,std_cum_regret,reps"
CROSS_CHECK_BUDGET = 10**5


class OracleMismatch(AssertionError):
    pass


def oracle_optimum(instance: Instance, epsilon: float = 0.0, cross_check: bool = True) -> OptimizationResult:
    """Offline optimum; verified by enumeration when that is cheap enough."""
    res = dinkelbach_optimize(instance.revenues, instance.V, epsilon)
    if cross_check and enumeration_size(instance.N, instance.K) <= CROSS_CHECK_BUDGET:
        bf = brute_force_optimize(instance.revenues, instance.V)
        if abs(bf.revenue - res.revenue) > 1e-9 + epsilon:
            raise OracleMismatch(
                f"{instance.name}: Dinkelbach revenue {res.revenue!r} != brute force {bf.revenue!r}"
            )
    return res


@dataclass
class RegretTrace:
    instantaneous: np.ndarray
    optimum: OptimizationResult

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.instantaneous)

    @property
    def total(self) -> float:
        return float(self.instantaneous.sum())


def run_simulation(instance: Instance, policy: Policy, T: int, rng: np.random.Generator,
                   optimum: OptimizationResult | None = None,
                   on_round: Callable[[int, Policy, Placement, int], None] | None = None) -> RegretTrace:
    """Play ``T`` rounds of ``policy`` against ``instance``."""
    if T < 1:
        raise ValueError(f"horizon must be >= 1, got {T}")
    if optimum is None:
        optimum = oracle_optimum(instance)
    best = optimum.revenue
    uniforms = rng.random(T)
    V = instance.V
    r = instance.revenues
    cache: dict[Placement, tuple[list, list, float]] = {}
    regret = np.empty(T)
    for t in range(T):
        placement = policy.select(t + 1)
        entry = cache.get(placement)
        if entry is None:
            items = [i for i, _ in placement.pairs]
            att = [float(V[i, k]) for i, k in placement.pairs]
            bounds = list(np.cumsum([1.0] + att))
            total = bounds[-1]
            rev = float(sum(r[i] * a for i, a in zip(items, att)) / total)
            entry = (items, [b / total for b in bounds], rev)
            cache[placement] = entry
        items, bounds, rev = entry
        u = uniforms[t]
        outcome = OUTSIDE
        if u >= bounds[0]:
            outcome = items[-1]
            for j in range(len(items)):
                if u < bounds[j + 1]:
                    outcome = items[j]
                    break
        policy.observe(placement, outcome)
        regret[t] = best - rev
        if on_round is not None:
            on_round(t + 1, policy, placement, outcome)
    return RegretTrace(regret, optimum)


def resolve_instance(source: str, horizon: int | None = None) -> Instance:
    """``ex1``..``ex6``, ``hard:N:K[:seed]`` (needs the horizon) or a JSON path."""
    s = source.strip()
    if s.lower().startswith("ex") and s[2:].isdigit():
        return example_instance(int(s[2:]))
    if s.lower().startswith("hard:"):
        parts = [int(x) for x in s.split(":")[1:]]
        if len(parts) not in (2, 3) or horizon is None:
            raise ValueError("hard instances are written hard:N:K[:seed] and need a horizon")
        seed = parts[2] if len(parts) == 3 else None
        return hard_instance(parts[0], parts[1], horizon, seed=seed)
    return load_instance(s)


@dataclass
class SimConfig:
    instance: str
    policy: str
    horizon: int
    reps: int = 1
    seed: int = 0
    out: str | None = None
    epsilon: float = 0.0
    stride: int | None = None
    explore_c: float = 0.1
    workers: int = 1
    same_stream: bool = False

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if self.policy not in POLICY_IDS:
            raise ValueError(f"unknown policy {self.policy!r}; choose from {', '.join(POLICY_IDS)}")
        if self.stride is not None and self.stride < 1:
            raise ValueError("stride must be >= 1")

    @classmethod
    def from_json(cls, path) -> "SimConfig":
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**doc)

    def to_dict(self) -> dict:
        return asdict(self)


def replication_streams(seed: int, rep: int) -> tuple[np.random.Generator, np.random.Generator]:
    choice = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(rep, 0))))
    internal = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(rep, 1))))
    return choice, internal


def _run_one(args) -> np.ndarray:
    config, rep = args
    instance = resolve_instance(config.instance, config.horizon)
    optimum = oracle_optimum(instance, cross_check=False)
    choice_rng, policy_rng = replication_streams(config.seed, 0 if config.same_stream else rep)
    policy = make_policy(config.policy, instance, config.horizon, policy_rng,
                         config.epsilon, config.explore_c)
    return run_simulation(instance, policy, config.horizon, choice_rng, optimum).cumulative


def default_stride(T: int) -> int:
    return 1 if T <= 10**4 else math.ceil(T / 10**4)


@dataclass
class RegretTable:
    rounds: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    reps: int
    traces: np.ndarray = field(repr=False, default=None)

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for t, m, s in zip(self.rounds.tolist(), self.mean.tolist(), self.std.tolist()):
            lines.append(f"{t},{m!r},{s!r},{self.reps}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        Path(path).write_bytes(self.to_csv().encode("utf-8"))

    def at(self, round_: int) -> float:
        idx = np.searchsorted(self.rounds, round_)
        if idx == len(self.rounds) or self.rounds[idx] != round_:
            raise KeyError(f"round {round_} not in the table")
        return float(self.mean[idx])


def run_replications(config: SimConfig) -> RegretTable:
    """Mean and (population) standard deviation of cumulative regret."""
    resolve_instance(config.instance, config.horizon)  # fail fast on a bad source
    jobs = [(config, j) for j in range(config.reps)]
    if config.workers > 1 and config.reps > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as ex:
            traces = list(ex.map(_run_one, jobs))
    else:
        traces = [_run_one(job) for job in jobs]
    traces = np.vstack(traces)
    stride = config.stride or default_stride(config.horizon)
    idx = np.arange(stride - 1, config.horizon, stride)
    if idx.size == 0 or idx[-1] != config.horizon - 1:
        idx = np.append(idx, config.horizon - 1)
    sub = traces[:, idx]
    # Centering on replication 0 keeps the std exactly 0 for identical traces.
    dev = sub - sub[0]
    table = RegretTable(idx + 1, sub[0] + dev.mean(axis=0), dev.std(axis=0), config.reps, traces)
    if config.out:
        table.write_csv(config.out)
    return table
