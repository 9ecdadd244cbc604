"""Instance generators: the fixed synthetic examples, random instances and
the lower-bound hard instances with a hidden target placement."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import GENERAL, MULTIPLICATIVE, Instance, InstanceError, Placement

# (N, K) shapes of the data-calibrated examples; ids 7-9 are used with known
# position effects, 10-12 with unknown ones.
EXPEDIA_SHAPES = {7: (30, 8), 8: (50, 15), 9: (70, 20), 10: (20, 5), 11: (30, 8), 12: (50, 15)}

_EX4_V = [
    [0.4, 0.1, 0.1],
    [0.1, 0.5, 0.1],
    [0.2, 0.2, 0.6],
    [0.3, 0.1, 0.4],
    [0.1, 0.1, 0.1],
]
_EX5_V = [
    [0.8, 0.6, 0.5, 0.2],
    [0.1, 0.5, 0.9, 0.3],
    [0.6, 0.2, 0.6, 0.1],
    [0.3, 0.1, 0.4, 0.5],
    [0.7, 0.1, 0.1, 0.8],
    [0.2, 0.5, 0.4, 0.6],
    [0.4, 0.3, 0.8, 0.2],
    [0.1, 0.1, 0.1, 0.1],
]
_EX6_V = [
    [0.8, 0.6, 0.5, 0.2, 0.1],
    [0.4, 0.5, 0.9, 0.3, 0.2],
    [0.6, 0.3, 0.6, 0.1, 0.3],
    [0.3, 0.7, 0.4, 0.5, 0.4],
    [0.7, 0.1, 0.2, 0.8, 0.5],
    [0.3, 0.5, 0.4, 0.6, 0.4],
    [0.4, 0.4, 0.8, 0.2, 0.3],
    [0.6, 0.1, 0.2, 0.1, 0.1],
    [0.2, 0.3, 0.1, 0.4, 0.2],
    [0.5, 0.4, 0.3, 0.1, 0.1],
]


def example_instance(id: int) -> Instance:
    """Synthetic Examples 1-3 (multiplicative) and 4-6 (general)."""
    name = f"example-{id}"
    if id == 1:
        return Instance.multiplicative(name, [4 / 5, 3 / 4, 1 / 2], [1 / 4, 2 / 5, 4 / 5], [1, 1 / 2])
    if id == 2:
        return Instance.multiplicative(
            name,
            [2 / 5, 1 / 5, 4 / 5, 3 / 5, 1 / 5],
            [1, 4 / 5, 3 / 5, 2 / 5, 1 / 5],
            [1, 1 / 2, 1 / 3],
        )
    if id == 3:
        i = np.arange(1, 31)
        k = np.arange(1, 11)
        return Instance.multiplicative(name, (i + 9) / 40, (31 - i) / 30, (11 - k) / 10)
    if id == 4:
        return Instance.general(name, [0.9, 0.8, 0.9, 0.6, 0.5], _EX4_V)
    if id == 5:
        return Instance.general(name, [0.9, 0.8, 0.9, 0.6, 0.5, 0.7, 0.4, 0.3], _EX5_V)
    if id == 6:
        return Instance.general(name, [0.9, 0.8, 0.9, 0.7, 0.6, 0.5, 0.7, 0.4, 0.6, 0.3], _EX6_V)
    raise ValueError(f"unknown example id {id!r}; expected 1..6")


@dataclass(frozen=True)
class HardInstanceSpec:
    N: int
    K: int
    T: int
    target: Placement

    def __post_init__(self):
        if not 1 <= self.K <= self.N:
            raise InstanceError(f"need 1 <= K <= N, got K={self.K}, N={self.N}")
        if 243 * self.T < 4 * self.K * self.N:
            raise InstanceError(
                f"T={self.T} violates T >= 4KN/243 = {4 * self.K * self.N / 243:.4g}; "
                "the perturbation would exceed 1/2"
            )
        if len(self.target) != self.K:
            raise InstanceError(f"target must place exactly K={self.K} products")
        self.target.check(self.N, self.K)

    @property
    def epsilon(self) -> float:
        return math.sqrt(self.K * self.N / (243.0 * self.T))

    def build(self) -> Instance:
        eps = self.epsilon
        V = np.full((self.N, self.K), 1.0 / self.K)
        for i, k in self.target:
            V[i, k] = (1.0 + eps) / self.K
        meta = {"epsilon": eps, "T": self.T, "target": self.target.to_one_based()}
        return Instance.general(f"hard-N{self.N}-K{self.K}-T{self.T}", np.ones(self.N), V, meta)


def hard_instance(N: int, K: int, T: int, target: Placement | None = None,
                  seed: int | None = None) -> Instance:
    """Unit revenues; ``(1+eps)/K`` on the target pairs, ``1/K`` elsewhere.

    Without ``target`` or ``seed`` the target is ``{(0,0), ..., (K-1,K-1)}``;
    with a seed it is a uniformly random full placement.
    """
    if target is None:
        if seed is None:
            target = Placement(tuple((j, j) for j in range(K)))
        else:
            if not 1 <= K <= N:
                raise InstanceError(f"need 1 <= K <= N, got K={K}, N={N}")
            rng = np.random.default_rng(seed)
            products = rng.choice(N, size=K, replace=False)
            target = Placement(tuple((int(i), k) for k, i in enumerate(products)))
    return HardInstanceSpec(N, K, T, target).build()


def random_instance(N: int, K: int, kind: str = GENERAL, seed: int = 0) -> Instance:
    if not 1 <= K <= N:
        raise InstanceError(f"need 1 <= K <= N, got K={K}, N={N}")
    rng = np.random.default_rng(seed)
    r = rng.random(N)
    name = f"random-{kind}-N{N}-K{K}-seed{seed}"
    if kind == MULTIPLICATIVE:
        v = 1.0 - rng.random(N)
        theta = 1.0 - rng.random(K)
        theta = theta / theta.max()
        return Instance.multiplicative(name, r, v, theta)
    if kind == GENERAL:
        return Instance.general(name, r, 1.0 - rng.random((N, K)))
    raise ValueError(f"unknown model kind {kind!r}")
