"""Exact joint assortment-and-positioning optimization.

Maximizes ``sum_i r_i v_{i,s(i)} / (1 + sum_i v_{i,s(i)})`` over partial
matchings of products to positions.  :func:`dinkelbach_optimize` reduces the
fractional objective to a sequence of maximum-weight bipartite matchings with
edge weights ``(r_i - lam) * v_{i,k}``; :func:`brute_force_optimize` enumerates
every feasible placement and is kept as an independent oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import linear_sum_assignment

from .model import Placement

ZERO_TOL = 1e-12
MAX_ITER = 100
ENUMERATION_BUDGET = 10**7


class ConvergenceError(RuntimeError):
    def __init__(self, message, lambda_trace):
        super().__init__(message)
        self.lambda_trace = list(lambda_trace)


class EnumerationBudgetError(ValueError):
    pass


@dataclass(frozen=True)
class OptimizationResult:
    placement: Placement
    revenue: float
    iterations: int
    lambda_trace: tuple[float, ...]


def _positive_matching(W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Clamping non-positive weights to 0 and dropping zero edges afterwards is
    # the same as padding with zero-weight dummies.
    rows, cols = linear_sum_assignment(np.maximum(W, 0.0), maximize=True)
    keep = W[rows, cols] > 0.0
    return rows[keep], cols[keep]


def _canonicalize(W: np.ndarray, pairs: list[list[int]], tol: float) -> list[list[int]]:
    """Move to a lexicographically smaller matching of equal weight.

    Applies single-product substitutions, single moves to a lower free
    position and 2-swaps, each only when the total weight is unchanged within
    ``tol``.  Every move makes the sorted pair list strictly smaller, so the
    loop terminates.
    """
    W = W.tolist()
    changed = True
    while changed:
        changed = False
        pairs.sort()
        used_products = {i for i, _ in pairs}
        used_positions = {k for _, k in pairs}
        for idx, (i, k) in enumerate(pairs):
            for j in range(i):
                if j not in used_products and W[j][k] > 0.0 and abs(W[j][k] - W[i][k]) <= tol:
                    pairs[idx] = [j, k]
                    changed = True
                    break
            if changed:
                break
            for l in range(k):
                if l not in used_positions and abs(W[i][l] - W[i][k]) <= tol:
                    pairs[idx] = [i, l]
                    changed = True
                    break
            if changed:
                break
        if changed:
            continue
        for a in range(len(pairs)):
            i, k = pairs[a]
            for b in range(a + 1, len(pairs)):
                j, l = pairs[b]
                if k > l and W[i][l] > 0.0 and W[j][k] > 0.0:
                    if abs(W[i][l] + W[j][k] - W[i][k] - W[j][l]) <= tol:
                        pairs[a], pairs[b] = [i, l], [j, k]
                        changed = True
                        break
            if changed:
                break
    return pairs


def max_weight_matching(weights: ArrayLike) -> tuple[Placement, float]:
    """Maximum-weight partial matching using strictly positive edges only.

    Among equal-weight matchings the result is pushed toward the
    lexicographically smallest (product, position) list.
    """
    W = np.asarray(weights, dtype=np.float64)
    if W.ndim != 2 or W.shape[0] < 1 or W.shape[1] < 1:
        raise ValueError(f"weights must be a non-empty 2-d matrix, got shape {W.shape}")
    if not np.isfinite(W).all():
        raise ValueError("weights must be finite")
    rows, cols = _positive_matching(W)
    pairs = [[int(i), int(k)] for i, k in zip(rows, cols)]
    tol = ZERO_TOL * max(1.0, float(np.abs(W).max()))
    pairs = _canonicalize(W, pairs, tol)
    total = math.fsum(W[i, k] for i, k in pairs)
    return Placement(tuple(map(tuple, pairs))), total


def dinkelbach_optimize(
    revenues: ArrayLike,
    V: ArrayLike,
    epsilon: float = 0.0,
    lambda_init: float = 0.0,
    max_iter: int = MAX_ITER,
) -> OptimizationResult:
    """Dinkelbach root-finding over maximum-weight matchings.

    ``lambda_init`` must be a lower bound on the optimal revenue (0 always
    is, as is the revenue of any feasible placement).  Stops when
    ``|F(lam)| <= max(epsilon, 1e-12)``, or when the update fails to raise
    ``lam``, which on badly scaled matrices happens before ``|F|`` drops
    below the absolute threshold.
    """
    r = np.asarray(revenues, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if lambda_init < 0:
        raise ValueError("lambda_init must be >= 0")
    stop = max(epsilon, ZERO_TOL)
    lam = float(lambda_init)
    trace = [lam]
    for it in range(1, max_iter + 1):
        W = (r - lam)[:, None] * V
        rows, cols = _positive_matching(W)
        F = float(W[rows, cols].sum()) - lam
        a = V[rows, cols]
        nxt = float((r[rows] * a).sum() / (1.0 + a.sum()))
        # lambda rises strictly until optimal; a stall means F is only rounding noise
        if abs(F) <= stop or nxt <= lam:
            pairs = _canonicalize(W, [[int(i), int(k)] for i, k in zip(rows, cols)], ZERO_TOL)
            placement = Placement(tuple(map(tuple, pairs)))
            return OptimizationResult(placement, _objective(r, V, pairs), it, tuple(trace))
        lam = nxt
        trace.append(lam)
    raise ConvergenceError(f"Dinkelbach did not converge in {max_iter} iterations", trace)


def _objective(r, V, pairs) -> float:
    num = 0.0
    den = 1.0
    for i, k in pairs:
        num += r[i] * V[i, k]
        den += V[i, k]
    return float(num / den)


def enumeration_size(N: int, K: int) -> int:
    return sum(math.comb(N, m) * math.perm(K, m) for m in range(min(N, K) + 1))


def brute_force_optimize(revenues: ArrayLike, V: ArrayLike) -> OptimizationResult:
    """Enumerate every placement; ties go to the lexicographically smallest."""
    r = np.asarray(revenues, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    N, K = V.shape
    size = enumeration_size(N, K)
    if size > ENUMERATION_BUDGET:
        raise EnumerationBudgetError(
            f"{size} placements for N={N}, K={K} exceeds the budget of {ENUMERATION_BUDGET}"
        )
    rl = r.tolist()
    Vl = V.tolist()
    best_pairs: tuple = ()
    best = 0.0
    for m in range(1, min(N, K) + 1):
        for S in itertools.combinations(range(N), m):
            for pos in itertools.permutations(range(K), m):
                num = 0.0
                den = 1.0
                for i, k in zip(S, pos):
                    a = Vl[i][k]
                    num += rl[i] * a
                    den += a
                rev = num / den
                if rev > best + ZERO_TOL:
                    best, best_pairs = rev, tuple(zip(S, pos))
                elif rev >= best - ZERO_TOL:
                    cand = tuple(zip(S, pos))
                    if cand < best_pairs:
                        best, best_pairs = rev, cand
    return OptimizationResult(Placement(best_pairs), float(best), 1, (float(best),))
