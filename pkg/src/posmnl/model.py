"""Instances, placements and MNL choice probabilities with position effects.

Products and positions are 0-based inside the library.  The outside
(no-purchase) option is the sentinel :data:`OUTSIDE`, which can never collide
with a product index.  External formats (JSON files, CLI output) are 1-based
with ``0`` standing for the outside option.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

OUTSIDE = -1

MULTIPLICATIVE = "multiplicative"
GENERAL = "general"


class InstanceError(ValueError):
    """Raised for instances or placements that violate their invariants."""


def _frozen(a: ArrayLike, ndim: int) -> NDArray[np.float64]:
    arr = np.array(a, dtype=np.float64)
    if arr.ndim != ndim:
        raise InstanceError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Placement:
    """An assortment plus positioning: distinct products on distinct positions.

    ``pairs`` is stored sorted by product index, so two placements describing
    the same decision compare (and hash) equal.
    """

    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple(sorted((int(i), int(k)) for i, k in self.pairs))
        products = [i for i, _ in pairs]
        positions = [k for _, k in pairs]
        if len(set(products)) != len(products):
            raise InstanceError(f"placement repeats a product: {pairs}")
        if len(set(positions)) != len(positions):
            raise InstanceError(f"placement repeats a position: {pairs}")
        if any(i < 0 for i in products) or any(k < 0 for k in positions):
            raise InstanceError(f"negative index in placement: {pairs}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_one_based(cls, pairs: Iterable[Sequence[int]]) -> "Placement":
        return cls(tuple((int(i) - 1, int(k) - 1) for i, k in pairs))

    def to_one_based(self) -> list[list[int]]:
        return [[i + 1, k + 1] for i, k in self.pairs]

    @property
    def products(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.pairs)

    def position_of(self, product: int) -> int:
        for i, k in self.pairs:
            if i == product:
                return k
        raise KeyError(product)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def check(self, N: int, K: int) -> None:
        if len(self.pairs) > K:
            raise InstanceError(f"placement has {len(self.pairs)} pairs but only {K} positions")
        for i, k in self.pairs:
            if not (0 <= i < N and 0 <= k < K):
                raise InstanceError(f"pair ({i}, {k}) out of range for N={N}, K={K}")


EMPTY = Placement()


@dataclass(frozen=True, eq=False)
class Instance:
    """A position-aware MNL instance.

    Always carries the full ``N x K`` attraction matrix ``V``.  Multiplicative
    instances also keep the factors ``v`` (products) and ``theta`` (positions),
    with ``V = outer(v, theta)``.  Build instances through
    :meth:`multiplicative` or :meth:`general`, which validate everything.
    """

    name: str
    revenues: NDArray[np.float64]
    V: NDArray[np.float64]
    v: NDArray[np.float64] | None = None
    theta: NDArray[np.float64] | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def multiplicative(cls, name, revenues, v, theta, meta=None) -> "Instance":
        r = _frozen(revenues, 1)
        v = _frozen(v, 1)
        theta = _frozen(theta, 1)
        _check_revenues(r)
        if v.shape[0] != r.shape[0]:
            raise InstanceError(f"model.v: length {v.shape[0]} does not match N={r.shape[0]}")
        _check_unit_interval(v, "model.v")
        _check_unit_interval(theta, "model.theta")
        if theta.shape[0] > r.shape[0]:
            raise InstanceError(f"K={theta.shape[0]} exceeds N={r.shape[0]}")
        if abs(theta.max() - 1.0) > 1e-12:
            raise InstanceError(f"model.theta: max must equal 1, got {theta.max()!r}")
        V = _frozen(np.outer(v, theta), 2)
        return cls(str(name), r, V, v, theta, dict(meta or {}))

    @classmethod
    def general(cls, name, revenues, V, meta=None) -> "Instance":
        r = _frozen(revenues, 1)
        V = _frozen(V, 2)
        _check_revenues(r)
        if V.shape[0] != r.shape[0]:
            raise InstanceError(f"model.V: {V.shape[0]} rows but N={r.shape[0]}")
        if V.shape[1] < 1 or V.shape[1] > V.shape[0]:
            raise InstanceError(f"model.V: need 1 <= K <= N, got K={V.shape[1]}, N={V.shape[0]}")
        _check_unit_interval(V, "model.V")
        return cls(str(name), r, V, None, None, dict(meta or {}))

    @property
    def N(self) -> int:
        return self.V.shape[0]

    @property
    def K(self) -> int:
        return self.V.shape[1]

    @property
    def kind(self) -> str:
        return MULTIPLICATIVE if self.theta is not None else GENERAL

    @property
    def theta_min(self) -> float | None:
        return None if self.theta is None else float(self.theta.min())

    def to_dict(self) -> dict[str, Any]:
        if self.kind == MULTIPLICATIVE:
            model = {"type": MULTIPLICATIVE, "v": self.v.tolist(), "theta": self.theta.tolist()}
        else:
            model = {"type": GENERAL, "V": self.V.tolist()}
        d = {
            "name": self.name,
            "N": self.N,
            "K": self.K,
            "revenues": self.revenues.tolist(),
            "model": model,
        }
        if self.meta:
            d["meta"] = self.meta
        return d


def _check_revenues(r: NDArray) -> None:
    if r.shape[0] < 1:
        raise InstanceError("revenues: need at least one product")
    for j, x in enumerate(r):
        if not (math.isfinite(x) and 0.0 <= x <= 1.0):
            raise InstanceError(f"revenues[{j}]: must lie in [0, 1], got {x!r}")


def _check_unit_interval(a: NDArray, where: str) -> None:
    bad = ~(np.isfinite(a) & (a > 0.0) & (a <= 1.0))
    if bad.any():
        idx = tuple(int(x) for x in np.argwhere(bad)[0])
        loc = "".join(f"[{x}]" for x in idx)
        raise InstanceError(f"{where}{loc}: must lie in (0, 1], got {a[idx]!r}")


def instance_from_dict(d: dict[str, Any]) -> Instance:
    """Parse the JSON instance document, naming the offending field on error."""
    if not isinstance(d, dict):
        raise InstanceError("instance document must be a JSON object")
    for key in ("name", "N", "K", "revenues", "model"):
        if key not in d:
            raise InstanceError(f"{key}: missing field")
    N, K = d["N"], d["K"]
    if not isinstance(N, int) or N < 1:
        raise InstanceError(f"N: must be a positive integer, got {N!r}")
    if not isinstance(K, int) or not 1 <= K <= N:
        raise InstanceError(f"K: must be an integer in [1, N], got {K!r}")
    revenues = _number_list(d["revenues"], "revenues", N)
    model = d["model"]
    if not isinstance(model, dict) or "type" not in model:
        raise InstanceError("model.type: missing field")
    if model["type"] == MULTIPLICATIVE:
        v = _number_list(model.get("v"), "model.v", N)
        theta = _number_list(model.get("theta"), "model.theta", K)
        return Instance.multiplicative(d["name"], revenues, v, theta, d.get("meta"))
    if model["type"] == GENERAL:
        rows = model.get("V")
        if not isinstance(rows, list) or len(rows) != N:
            raise InstanceError(f"model.V: must be a list of {N} rows")
        V = [_number_list(row, f"model.V[{j}]", K) for j, row in enumerate(rows)]
        return Instance.general(d["name"], revenues, V, d.get("meta"))
    raise InstanceError(f"model.type: must be 'multiplicative' or 'general', got {model['type']!r}")


def _number_list(x: Any, where: str, length: int) -> list[float]:
    if not isinstance(x, list):
        raise InstanceError(f"{where}: must be an array")
    if len(x) != length:
        raise InstanceError(f"{where}: expected {length} entries, got {len(x)}")
    for j, e in enumerate(x):
        if isinstance(e, bool) or not isinstance(e, (int, float)):
            raise InstanceError(f"{where}[{j}]: not a number: {e!r}")
    return [float(e) for e in x]


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as f:
        text = f.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None
    try:
        return instance_from_dict(doc)
    except InstanceError as e:
        raise InstanceError(f"{path}: {e}") from None


def dump_instance(instance: Instance, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(instance.to_dict(), f, indent=2)
        f.write("\n")


def attraction(instance: Instance, i: int, k: int) -> float:
    if not (0 <= i < instance.N and 0 <= k < instance.K):
        raise InstanceError(f"index ({i}, {k}) out of range for N={instance.N}, K={instance.K}")
    if instance.kind == MULTIPLICATIVE:
        return float(instance.v[i] * instance.theta[k])
    return float(instance.V[i, k])


def choice_distribution(instance: Instance, placement: Placement) -> dict[int, float]:
    """Return ``{OUTSIDE: P0, i: P(i), ...}`` for the displayed products."""
    placement.check(instance.N, instance.K)
    att = {i: float(instance.V[i, k]) for i, k in placement}
    denom = 1.0 + math.fsum(att.values())
    probs = {OUTSIDE: 1.0 / denom}
    for i, a in att.items():
        probs[i] = a / denom
    return probs


def expected_revenue(instance: Instance, placement: Placement) -> float:
    placement.check(instance.N, instance.K)
    return revenue_under(instance.revenues, instance.V, placement)


def revenue_under(revenues, V, placement: Placement) -> float:
    """Expected revenue of ``placement`` under an arbitrary attraction matrix."""
    num = 0.0
    den = 1.0
    for i, k in placement.pairs:
        a = V[i, k]
        num += revenues[i] * a
        den += a
    return float(num / den)


def sample_choice(instance: Instance, placement: Placement, rng: np.random.Generator) -> int:
    """Draw one customer choice; consumes exactly one uniform from ``rng``."""
    placement.check(instance.N, instance.K)
    return choice_from_uniform(instance.V, placement, rng.random())


def choice_from_uniform(V, placement: Placement, u: float) -> int:
    total = 1.0
    for i, k in placement.pairs:
        total += V[i, k]
    x = u * total
    acc = 1.0
    if x < acc:
        return OUTSIDE
    for i, k in placement.pairs:
        acc += V[i, k]
        if x < acc:
            return i
    # u*total can round up to total
    return placement.pairs[-1][0] if placement.pairs else OUTSIDE
