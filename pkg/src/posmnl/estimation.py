"""Pairwise (item vs. outside option) statistics, clipped MLE and UCBs.

Every customer choice that lands on a displayed product ``i`` or on the
outside option is a Bernoulli trial for ``i`` with success probability
``a / (1 + a)``, ``a`` being the attraction of ``i`` at its current position.
:class:`PairwiseStats` counts those trials (``n``) and successes (``w``) per
product-position pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import OUTSIDE, MULTIPLICATIVE, GENERAL, Placement

C1 = 8.0
C2 = 8.0 / 3.0
C3 = 56.0 / 3.0
C4 = 2.0 * C1
C5 = (200.0 + 32.0 * math.sqrt(6.0)) / 3.0
C6 = 8.0 + 16.0 * math.sqrt(2.0)
C7 = (208.0 + 32.0 * math.sqrt(6.0) + 32.0 * math.sqrt(42.0)) / 3.0

MLE_TOL = 1e-10
BRACKET_CAP = 2.0**60


class PairwiseStats:
    """Counters ``n[i, k]`` (pairwise trials) and ``w[i, k]`` (wins)."""

    def __init__(self, N: int, K: int):
        self.n = np.zeros((N, K), dtype=np.int64)
        self.w = np.zeros((N, K), dtype=np.int64)

    @property
    def shape(self) -> tuple[int, int]:
        return self.n.shape

    def update(self, placement: Placement, outcome: int) -> "PairwiseStats":
        """Record one round.  Returns ``self`` for chaining."""
        if outcome == OUTSIDE:
            for i, k in placement.pairs:
                self.n[i, k] += 1
            return self
        for i, k in placement.pairs:
            if i == outcome:
                self.n[i, k] += 1
                self.w[i, k] += 1
                return self
        raise ValueError(f"outcome {outcome} is neither displayed nor the outside option")

    def copy(self) -> "PairwiseStats":
        out = PairwiseStats(*self.shape)
        out.n[...] = self.n
        out.w[...] = self.w
        return out


def update_stats(stats: PairwiseStats, placement: Placement, outcome: int) -> PairwiseStats:
    return stats.update(placement, outcome)


def effective_exposure(n_row, theta) -> float:
    n_row = np.asarray(n_row, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    if n_row.shape != theta.shape:
        raise ValueError(f"shape mismatch: {n_row.shape} vs {theta.shape}")
    return float(n_row @ theta)


def score(v: float, n_row, w_row, theta) -> float:
    """Derivative of the pairwise log-likelihood in ``v``."""
    if v < 0:
        raise ValueError(f"v must be >= 0, got {v}")
    s = 0.0
    for n, w, th in zip(np.asarray(n_row).tolist(), np.asarray(w_row).tolist(), np.asarray(theta).tolist()):
        x = v * th
        s += w - n * x / (1.0 + x)
    return s


def _as_list(x):
    return x if isinstance(x, list) else np.asarray(x, dtype=np.float64).tolist()


def _terms(n_row, w_row, theta):
    ns, ths = [], []
    for nk, tk in zip(_as_list(n_row), _as_list(theta)):
        if nk:
            ns.append(float(nk))
            ths.append(tk)
    return ns, ths, float(sum(_as_list(w_row)))


def _root(ns, ths, W, lo, hi, guess=None) -> float:
    """Root of ``W - sum n*v*th/(1+v*th)`` on a bracket with S(lo) > 0 > S(hi).

    Newton steps, falling back to bisection whenever a step leaves the
    bracket.
    """
    x = guess if guess is not None and lo < guess < hi else 0.5 * (lo + hi)
    for _ in range(400):
        s = W
        ds = 0.0
        for n, t in zip(ns, ths):
            d = 1.0 + x * t
            s -= n * x * t / d
            ds -= n * t / (d * d)
        if s == 0.0:
            return x
        if s > 0.0:
            lo = x
        else:
            hi = x
        step = s / ds
        nxt = x - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
            if hi - lo <= MLE_TOL:
                return nxt
        elif abs(step) <= 1e-13:
            return nxt
        x = nxt
    return x


def solve_pairwise_mle(n_row, w_row, theta) -> float:
    """Unclipped pairwise MLE; ``inf`` when every trial was a win."""
    ns, ths, W = _terms(n_row, w_row, theta)
    if not ns:
        raise ValueError("effective exposure is zero; the MLE is undefined")
    if W == 0.0:
        return 0.0
    if W == sum(ns):
        return math.inf
    hi = 1.0
    while _score(ns, ths, W, hi) >= 0.0:
        hi *= 2.0
        if hi > BRACKET_CAP:
            return math.inf
    return _root(ns, ths, W, 0.0, hi)


def _score(ns, ths, W, v):
    s = W
    for n, t in zip(ns, ths):
        x = v * t
        s -= n * x / (1.0 + x)
    return s


def solve_clipped_mle(n_row, w_row, theta, guess: float | None = None) -> float:
    """``min(root of score, 1)``.  ``guess`` only seeds the root search."""
    ns, ths, W = _terms(n_row, w_row, theta)
    if not ns:
        raise ValueError("effective exposure is zero; route the product to the unexplored branch")
    if W == 0.0:
        return 0.0
    if W == sum(ns) or _score(ns, ths, W, 1.0) >= 0.0:
        return 1.0
    return _root(ns, ths, W, 0.0, 1.0, guess)


def ucb_multiplicative(vhat: float, D: float, ell: float) -> float:
    if D <= 0:
        raise ValueError("effective exposure must be positive")
    return vhat + C4 * math.sqrt(vhat * ell / D) + C5 * ell / D


def ucb_general(n: int, w: int, L: float) -> tuple[float, float]:
    """Bernstein-style UCB on ``p = v/(1+v)``, returned with the implied UCB on ``v``."""
    if n <= 0:
        raise ValueError("n must be positive; unexplored pairs get v_ucb = 1")
    if not 0 <= w <= n:
        raise ValueError(f"need 0 <= w <= n, got w={w}, n={n}")
    p = w / n
    p_ucb = min(p + 2.0 * math.sqrt(p * (1.0 - p) * L / n) + 6.0 * L / n, 0.5)
    return p_ucb, p_ucb / (1.0 - p_ucb)


def ucb_general_matrix(n: np.ndarray, w: np.ndarray, L: float) -> np.ndarray:
    """Vectorized :func:`ucb_general` with ``v_ucb = 1`` wherever ``n == 0``."""
    nn = np.maximum(n, 1).astype(np.float64)
    p = w / nn
    p_ucb = np.minimum(p + 2.0 * np.sqrt(p * (1.0 - p) * L / nn) + 6.0 * L / nn, 0.5)
    v = p_ucb / (1.0 - p_ucb)
    v[n == 0] = 1.0
    return v


def _ceil_log2(x: float) -> int:
    m = max(0, math.ceil(math.log2(x))) if x > 1 else 0
    while m > 0 and 2.0 ** (m - 1) >= x:
        m -= 1
    while 2.0**m < x:
        m += 1
    return m


@dataclass(frozen=True)
class ConfidenceParams:
    delta: float
    c: float | None = None
    ell: float | None = None
    L: float | None = None

    C1 = C1
    C2 = C2
    C3 = C3
    C4 = C4
    C5 = C5
    C6 = C6
    C7 = C7


def confidence_params(T: int, N: int, K: int, theta_min: float | None = None,
                      kind: str = MULTIPLICATIVE) -> ConfidenceParams:
    """Confidence level and log terms, fixed once per run from the horizon."""
    if T < 1:
        raise ValueError(f"horizon must be >= 1, got {T}")
    if kind == MULTIPLICATIVE:
        if theta_min is None or not 0 < theta_min <= 1:
            raise ValueError(f"theta_min must lie in (0, 1], got {theta_min}")
        delta = 2.0 / (3.0 * N * T)
        c = 2.0 * (_ceil_log2(T / theta_min) + 1)
        return ConfidenceParams(delta=delta, c=c, ell=math.log(c / delta))
    if kind == GENERAL:
        delta = 2.0 / (3.0 * K * N * T)
        return ConfidenceParams(delta=delta, L=math.log(2.0 * (_ceil_log2(T) + 1) / delta))
    raise ValueError(f"unknown model kind {kind!r}")
