"""Calibrate multiplicative instances from randomized-display click logs.

Only impressions from randomized result pages are used, so click-through
rates by display rank reflect position bias rather than the ranker.  Position
effects are per-position CTRs relative to rank 1; item attractions are
per-item CTRs relative to the best item (floored); revenues are item mean
prices capped at a quantile and scaled to ``[0, 1]``.  Aggregation is per
impression.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .model import Instance

log = logging.getLogger(__name__)

DEFAULT_COLUMNS = {
    "prop_id": "prop_id",
    "position": "position",
    "click": "click_bool",
    "randomized": "random_bool",
    "price": "price_usd",
}
THETA_FLOOR = 0.01


class SchemaError(ValueError):
    pass


class ExtractionError(ValueError):
    pass


@dataclass(frozen=True)
class ImpressionRecord:
    prop_id: str
    position: int
    click: int
    randomized: int
    price: float


@dataclass
class ImpressionLog:
    records: list[ImpressionRecord]
    skipped: list[tuple[int, str]] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def summary(self) -> str:
        return f"{len(self.records)} records, {len(self.skipped)} malformed rows skipped"


def _parse_row(row, idx) -> ImpressionRecord:
    prop_id = row[idx["prop_id"]].strip()
    if not prop_id:
        raise ValueError("empty prop_id")
    position = int(row[idx["position"]])
    if position < 1:
        raise ValueError(f"position {position} < 1")
    click = int(row[idx["click"]])
    randomized = int(row[idx["randomized"]])
    if click not in (0, 1) or randomized not in (0, 1):
        raise ValueError("click and randomized flags must be 0 or 1")
    price = float(row[idx["price"]])
    if not math.isfinite(price) or price < 0:
        raise ValueError(f"bad price {price!r}")
    return ImpressionRecord(prop_id, position, click, randomized, price)


def load_impressions(path, columns: dict[str, str] | None = None) -> ImpressionLog:
    """Read a comma-separated log with a header row; malformed rows are skipped."""
    names = {**DEFAULT_COLUMNS, **(columns or {})}
    records: list[ImpressionRecord] = []
    skipped: list[tuple[int, str]] = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file, no header row") from None
        idx = {}
        for key, col in names.items():
            if col not in header:
                raise SchemaError(f"{path}: missing required column {col!r}")
            idx[key] = header.index(col)
        for line_no, row in enumerate(reader, start=2):
            try:
                records.append(_parse_row(row, idx))
            except (ValueError, IndexError) as e:
                skipped.append((line_no, str(e)))
    result = ImpressionLog(records, skipped)
    if skipped:
        log.warning("%s: %s", path, result.summary())
    return result


@dataclass
class ExtractedParams:
    theta: list[float]
    positions: list[int]
    item_v: dict[str, float]
    item_r: dict[str, float]
    position_counts: dict[int, int]
    item_counts: dict[str, int]
    price_cap: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["position_counts"] = {str(k): v for k, v in self.position_counts.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExtractedParams":
        d = dict(d)
        d["position_counts"] = {int(k): int(v) for k, v in d["position_counts"].items()}
        return cls(**d)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "ExtractedParams":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


def extract_parameters(
    records,
    min_position_obs: int = 1000,
    min_item_obs: int = 1,
    price_quantile: float = 0.95,
    v_floor: float = 0.01,
    K: int | None = None,
) -> ExtractedParams:
    if isinstance(records, ImpressionLog):
        records = records.records
    rand = [rec for rec in records if rec.randomized == 1]
    if not rand:
        raise ExtractionError("no randomized impressions to calibrate from")

    pos = np.array([rec.position for rec in rand])
    clicks = np.array([rec.click for rec in rand])
    ids, item_idx = np.unique(np.array([rec.prop_id for rec in rand]), return_inverse=True)
    prices = np.array([rec.price for rec in rand])

    position_counts = {}
    theta_raw = {}
    for k in np.unique(pos).tolist():
        mask = pos == k
        position_counts[k] = int(mask.sum())
        if position_counts[k] >= min_position_obs:
            theta_raw[k] = clicks[mask].sum() / position_counts[k]
    if 1 not in theta_raw:
        raise ExtractionError("position 1 is missing or below the observation threshold; cannot normalize")
    if theta_raw[1] == 0:
        raise ExtractionError("position 1 has no clicks; cannot normalize")
    positions = sorted(theta_raw)[:K] if K else sorted(theta_raw)
    theta = [min(max(theta_raw[k] / theta_raw[1], THETA_FLOOR), 1.0) for k in positions]

    counts = np.bincount(item_idx, minlength=len(ids))
    item_clicks = np.bincount(item_idx, weights=clicks, minlength=len(ids))
    # Sum prices in a canonical order so the result does not depend on row order.
    order = np.lexsort((prices, item_idx))
    starts = np.searchsorted(item_idx[order], np.arange(len(ids)))
    price_sums = np.add.reduceat(prices[order], starts)
    keep = counts >= min_item_obs
    if not keep.any():
        raise ExtractionError("no item reaches the observation threshold")
    ctr = item_clicks[keep] / counts[keep]
    if ctr.max() <= 0:
        raise ExtractionError("no clicks on any retained item")
    v = np.maximum(ctr / ctr.max(), v_floor)
    mean_price = price_sums[keep] / counts[keep]
    cap = float(np.quantile(mean_price, price_quantile))
    if cap <= 0:
        raise ExtractionError("price cap is zero; revenues cannot be normalized")
    r = np.minimum(mean_price, cap) / cap
    kept_ids = ids[keep].tolist()
    return ExtractedParams(
        theta=[float(x) for x in theta],
        positions=[int(k) for k in positions],
        item_v={i: float(x) for i, x in zip(kept_ids, v)},
        item_r={i: float(x) for i, x in zip(kept_ids, r)},
        position_counts=position_counts,
        item_counts={i: int(c) for i, c in zip(kept_ids, counts[keep])},
        price_cap=cap,
    )


def build_instance(params: ExtractedParams, N: int, K: int, min_v: float = 0.1, seed: int = 0) -> Instance:
    """Seeded draw of ``N`` items with ``v >= min_v``; theta cut to ``K`` positions."""
    pool = sorted(i for i, v in params.item_v.items() if v >= min_v)
    if len(pool) < N:
        raise ValueError(f"only {len(pool)} items have v >= {min_v}; need N={N}")
    if K > len(params.theta):
        raise ValueError(f"K={K} exceeds the {len(params.theta)} retained positions")
    perm = np.random.default_rng(seed).permutation(len(pool))
    chosen = sorted(pool[j] for j in perm[:N])
    return Instance.multiplicative(
        f"expedia-N{N}-K{K}-seed{seed}",
        [params.item_r[i] for i in chosen],
        [params.item_v[i] for i in chosen],
        params.theta[:K],
        meta={"items": chosen, "positions": params.positions[:K]},
    )
