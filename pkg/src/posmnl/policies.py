"""Bandit policies sharing a ``select`` / ``observe`` protocol.

Round-based policies (:class:`P2MLEUCB`, :class:`GP2UCB`) refresh estimates
after every customer; :class:`EpochUCB` repeats a placement until a
no-purchase ends the epoch.  All of them hand an optimistic attraction matrix
to :func:`~posmnl.optimize.dinkelbach_optimize`.

Every policy accepts ``attraction_override``: a fixed ``N x K`` matrix used
in place of the optimistic estimates.  Passing the true attractions turns any
policy into the offline oracle, which is handy for debugging.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .estimation import (
    PairwiseStats,
    confidence_params,
    solve_clipped_mle,
    ucb_general,
    ucb_multiplicative,
)
from .model import GENERAL, MULTIPLICATIVE, OUTSIDE, Instance, Placement, revenue_under
from .optimize import dinkelbach_optimize

POLICY_IDS = ("p2mle", "gp2", "ep2mle", "epoch-ucb-v", "epoch-ucb-gen")
THETA_FLOOR = 0.01
EPOCH_UCB_CONST = 48.0


class ProtocolError(RuntimeError):
    """``select`` and ``observe`` were not called in strict alternation."""


class Policy:
    def __init__(self, N: int, K: int, revenues, epsilon: float = 0.0, attraction_override=None):
        if not 1 <= K <= N:
            raise ValueError(f"need 1 <= K <= N, got K={K}, N={N}")
        self.N = N
        self.K = K
        self.revenues = np.asarray(revenues, dtype=np.float64)
        self.epsilon = epsilon
        self.override = None if attraction_override is None else np.asarray(attraction_override, dtype=np.float64)
        self._pending: Placement | None = None
        self._previous: Placement | None = None

    def select(self, t: int) -> Placement:
        if self._pending is not None:
            raise ProtocolError("select called twice without observe")
        placement = self._select(t)
        self._pending = placement
        return placement

    def observe(self, placement: Placement, outcome: int) -> None:
        if self._pending is None:
            raise ProtocolError("observe called before select")
        if placement is not self._pending and placement != self._pending:
            raise ProtocolError("observe got a placement that select did not return")
        self._pending = None
        self._observe(placement, outcome)

    def _optimize(self, M: np.ndarray) -> Placement:
        # The previous placement's revenue under M is a valid Dinkelbach start.
        lam0 = revenue_under(self.revenues, M, self._previous) if self._previous else 0.0
        placement = dinkelbach_optimize(self.revenues, M, self.epsilon, lambda_init=lam0).placement
        self._previous = placement
        return placement

    def _select(self, t: int) -> Placement:
        raise NotImplementedError

    def _observe(self, placement: Placement, outcome: int) -> None:
        raise NotImplementedError


class P2MLEUCB(Policy):
    """Pairwise clipped-MLE UCB for the multiplicative model with known theta."""

    def __init__(self, N, K, theta, revenues, T, epsilon=0.0, attraction_override=None):
        super().__init__(N, K, revenues, epsilon, attraction_override)
        self.theta = np.asarray(theta, dtype=np.float64)
        if self.theta.shape != (K,) or not ((self.theta > 0) & (self.theta <= 1)).all():
            raise ValueError("theta must have K entries in (0, 1]")
        self.params = confidence_params(T, N, K, float(self.theta.min()), MULTIPLICATIVE)
        self.stats = PairwiseStats(N, K)
        self.D = np.zeros(N)
        self.vhat = np.zeros(N)
        self.v_ucb = np.ones(N)
        self._theta_list = self.theta.tolist()
        self._dirty: set[int] = set()

    def _refresh(self) -> None:
        ell = self.params.ell
        for i in self._dirty:
            n_row = self.stats.n[i].tolist()
            D = sum(n * t for n, t in zip(n_row, self._theta_list))
            self.D[i] = D
            if D > 0:
                v = solve_clipped_mle(n_row, self.stats.w[i].tolist(), self._theta_list,
                                      guess=self.vhat[i] or None)
                self.vhat[i] = v
                self.v_ucb[i] = ucb_multiplicative(v, D, ell)
        self._dirty.clear()

    def _select(self, t):
        self._refresh()
        M = self.override if self.override is not None else np.outer(self.v_ucb, self.theta)
        return self._optimize(M)

    def _observe(self, placement, outcome):
        self.stats.update(placement, outcome)
        if outcome == OUTSIDE:
            self._dirty.update(placement.products)
        else:
            self._dirty.add(outcome)


class GP2UCB(Policy):
    """Per product-position pairwise UCB for the general model."""

    def __init__(self, N, K, revenues, T, epsilon=0.0, attraction_override=None):
        super().__init__(N, K, revenues, epsilon, attraction_override)
        self.params = confidence_params(T, N, K, kind=GENERAL)
        self.stats = PairwiseStats(N, K)
        self.v_ucb = np.ones((N, K))
        self._dirty: set[tuple[int, int]] = set()

    def _select(self, t):
        L = self.params.L
        n, w = self.stats.n, self.stats.w
        for i, k in self._dirty:
            self.v_ucb[i, k] = ucb_general(int(n[i, k]), int(w[i, k]), L)[1]
        self._dirty.clear()
        return self._optimize(self.override if self.override is not None else self.v_ucb)

    def _observe(self, placement, outcome):
        self.stats.update(placement, outcome)
        if outcome == OUTSIDE:
            self._dirty.update(placement.pairs)
        else:
            self._dirty.add((outcome, placement.position_of(outcome)))


def exploration_rounds(T: int, c: float = 0.1) -> int:
    # round() guards against 0.1 * 100 landing just above an integer
    return max(1, math.ceil(round(c * math.sqrt(T), 9)))


def estimate_theta(stats: PairwiseStats) -> np.ndarray:
    """Position effects from exploration statistics, max-normalized to 1.

    Per pair the win odds ``p/(1-p)`` (with ``p`` clipped to ``[0, 1/2]``)
    estimate ``v_i * theta_k``; averaging over products within a position
    gives a vector proportional to theta.  Positions without data get 1 and
    the estimate is floored at ``THETA_FLOOR``.
    """
    n = stats.n.astype(np.float64)
    seen = n > 0
    p = np.clip(np.divide(stats.w, n, out=np.zeros_like(n), where=seen), 0.0, 0.5)
    odds = np.minimum(p / (1.0 - p), 1.0)
    K = n.shape[1]
    theta = np.ones(K)
    has_data = seen.any(axis=0)
    if not has_data.any():
        warnings.warn("no exploration data; falling back to theta = 1", RuntimeWarning, stacklevel=2)
        return theta
    col = np.array([odds[seen[:, k], k].mean() if has_data[k] else np.nan for k in range(K)])
    top = np.nanmax(col)
    if not top > 0:
        warnings.warn("no wins during exploration; falling back to theta = 1", RuntimeWarning, stacklevel=2)
        return theta
    theta[has_data] = col[has_data] / top
    return np.clip(theta, THETA_FLOOR, 1.0)


class EP2MLEUCB(Policy):
    """Explore uniformly for ``ceil(c*sqrt(T))`` rounds, then P2MLE-UCB on the
    estimated theta with fresh statistics."""

    def __init__(self, N, K, revenues, T, rng: np.random.Generator, explore_c=0.1,
                 epsilon=0.0, attraction_override=None):
        super().__init__(N, K, revenues, epsilon, attraction_override)
        self.T = T
        self.rng = rng
        self.J0 = exploration_rounds(T, explore_c)
        self.explore_stats = PairwiseStats(N, K)
        self.rounds = 0
        self.theta_hat: np.ndarray | None = None
        self.inner: P2MLEUCB | None = None

    @property
    def exploring(self) -> bool:
        return self.rounds < self.J0

    def _select(self, t):
        if self.exploring:
            products = self.rng.choice(self.N, size=self.K, replace=False)
            return Placement(tuple((int(i), k) for k, i in enumerate(products)))
        if self.inner is None:
            self.theta_hat = estimate_theta(self.explore_stats)
            self.inner = P2MLEUCB(self.N, self.K, self.theta_hat, self.revenues, self.T,
                                  self.epsilon, self.override)
        placement = self.inner.select(t)
        return placement

    def _observe(self, placement, outcome):
        if self.exploring:
            self.explore_stats.update(placement, outcome)
        else:
            self.inner.observe(placement, outcome)
        self.rounds += 1


class EpochUCB(Policy):
    """Epoch-based MNL-UCB baseline.

    ``variant="multiplicative"`` learns one attraction per product, dividing
    each epoch's pick count by the known theta of the slot it was shown in.
    ``variant="general"`` treats every product-position pair as its own item.
    """

    def __init__(self, N, K, revenues, T, variant=GENERAL, theta=None, epsilon=0.0,
                 attraction_override=None):
        super().__init__(N, K, revenues, epsilon, attraction_override)
        if variant == MULTIPLICATIVE:
            if theta is None:
                raise ValueError("the multiplicative epoch baseline needs theta")
            self.theta = np.asarray(theta, dtype=np.float64)
            shape = (N,)
        elif variant == GENERAL:
            self.theta = None
            shape = (N, K)
        else:
            raise ValueError(f"unknown variant {variant!r}")
        self.variant = variant
        self.T = T
        self.epochs_offered = np.zeros(shape, dtype=np.int64)
        self.picks = np.zeros(shape)
        self.epoch = 0
        self.current: Placement | None = None
        self._epoch_picks: dict = {}
        self.ucb = np.ones(shape)

    def _item(self, i, k):
        return i if self.variant == MULTIPLICATIVE else (i, k)

    def estimates(self) -> np.ndarray:
        T = np.maximum(self.epochs_offered, 1)
        return np.where(self.epochs_offered > 0, self.picks / T, 0.0)

    def _compute_ucb(self) -> np.ndarray:
        T = np.maximum(self.epochs_offered, 1).astype(np.float64)
        v = self.picks / T
        lg = EPOCH_UCB_CONST * math.log(math.sqrt(self.N * self.K) * self.epoch + 1.0)
        ucb = v + np.sqrt(v * lg / T) + lg / T
        ucb = np.clip(ucb, 0.0, 1.0)
        ucb[self.epochs_offered == 0] = 1.0
        return ucb

    def _select(self, t):
        if self.current is None:
            self.epoch += 1
            self.ucb = self._compute_ucb()
            if self.override is not None:
                M = self.override
            elif self.variant == MULTIPLICATIVE:
                M = np.outer(self.ucb, self.theta)
            else:
                M = self.ucb
            self.current = self._optimize(M)
            self._epoch_picks = {}
        return self.current

    def _observe(self, placement, outcome):
        if outcome != OUTSIDE:
            k = placement.position_of(outcome)
            weight = 1.0 / self.theta[k] if self.variant == MULTIPLICATIVE else 1.0
            item = self._item(outcome, k)
            self._epoch_picks[item] = self._epoch_picks.get(item, 0.0) + weight
            return
        for i, k in placement.pairs:
            item = self._item(i, k)
            self.epochs_offered[item] += 1
            self.picks[item] += self._epoch_picks.get(item, 0.0)
        self.current = None


def make_policy(policy_id: str, instance: Instance, T: int, rng: np.random.Generator | None = None,
                epsilon: float = 0.0, explore_c: float = 0.1, attraction_override=None) -> Policy:
    N, K, r = instance.N, instance.K, instance.revenues
    if policy_id == "p2mle":
        if instance.kind != MULTIPLICATIVE:
            raise ValueError("p2mle needs a multiplicative instance (known theta)")
        return P2MLEUCB(N, K, instance.theta, r, T, epsilon, attraction_override)
    if policy_id == "gp2":
        return GP2UCB(N, K, r, T, epsilon, attraction_override)
    if policy_id == "ep2mle":
        if rng is None:
            raise ValueError("ep2mle needs an rng for its exploration phase")
        return EP2MLEUCB(N, K, r, T, rng, explore_c, epsilon, attraction_override)
    if policy_id == "epoch-ucb-v":
        if instance.kind != MULTIPLICATIVE:
            raise ValueError("epoch-ucb-v needs a multiplicative instance (known theta)")
        return EpochUCB(N, K, r, T, MULTIPLICATIVE, instance.theta, epsilon, attraction_override)
    if policy_id == "epoch-ucb-gen":
        return EpochUCB(N, K, r, T, GENERAL, None, epsilon, attraction_override)
    raise ValueError(f"unknown policy {policy_id!r}; choose from {', '.join(POLICY_IDS)}")
