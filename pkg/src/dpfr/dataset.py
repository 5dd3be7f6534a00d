"""Interaction ingestion, preprocessing (dedup, rating threshold, k-core) and global splits."""

from __future__ import annotations

import json
import logging
import math
import os
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class Interaction:
    user_id: str
    item_id: str
    rating: float | None = None
    timestamp: int | None = None

    def __post_init__(self):
        if not self.user_id or not self.item_id:
            raise DatasetError("user_id and item_id must be non-empty")


@dataclass(frozen=True)
class PreprocessConfig:
    rating_threshold: float | None = None
    max_user_interactions: int | None = None
    core: int = 5


@dataclass
class InteractionDataset:
    interactions: list[Interaction]
    user_ids: list[str]
    item_ids: list[str]
    user_index: dict[str, int] = field(repr=False)
    item_index: dict[str, int] = field(repr=False)

    @classmethod
    def from_interactions(cls, interactions) -> "InteractionDataset":
        interactions = list(interactions)
        users = sorted({x.user_id for x in interactions})
        items = sorted({x.item_id for x in interactions})
        return cls(interactions, users, items,
                   {u: j for j, u in enumerate(users)},
                   {i: j for j, i in enumerate(items)})

    @property
    def m(self) -> int:
        return len(self.user_ids)

    @property
    def n(self) -> int:
        return len(self.item_ids)

    @property
    def has_timestamps(self) -> bool:
        return all(x.timestamp is not None for x in self.interactions)


def read_interactions(path) -> list[Interaction]:
    """Parse ``user<TAB>item[<TAB>rating][<TAB>timestamp]`` lines.

    A first line whose third field is non-numeric is taken as a header. Two
    numeric extra columns are (rating, timestamp); a lone extra column is a
    rating.
    """
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip("\n").split("\t")
            if len(parts) == 1 and not parts[0].strip():
                continue
            if len(parts) < 2:
                raise DatasetError(f"{path}:{lineno}: expected at least user and item")
            if lineno == 1 and len(parts) > 2 and not _is_number(parts[2]):
                continue
            if lineno == 1 and len(parts) == 2 and parts[0].lower() in ("user", "user_id", "userid"):
                continue
            rating = float(parts[2]) if len(parts) > 2 and parts[2] != "" else None
            ts = int(float(parts[3])) if len(parts) > 3 and parts[3] != "" else None
            out.append(Interaction(parts[0], parts[1], rating, ts))
    return out


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def deduplicate(raw) -> list[Interaction]:
    """Collapse repeated (user, item) pairs, keeping the most recent one.

    Equal or missing timestamps fall back to the last occurrence in input order.
    """
    best: dict[tuple[str, str], tuple[float, int]] = {}
    for pos, x in enumerate(raw):
        key = (x.user_id, x.item_id)
        rank = (-math.inf if x.timestamp is None else x.timestamp, pos)
        if key not in best or rank >= best[key]:
            best[key] = rank
    keep = sorted(pos for _, pos in best.values())
    return [raw[p] for p in keep]


def k_core(interactions, core: int) -> list[Interaction]:
    """Iteratively drop users and items with fewer than ``core`` interactions until a fixpoint."""
    cur = list(interactions)
    while True:
        ucount = Counter(x.user_id for x in cur)
        icount = Counter(x.item_id for x in cur)
        nxt = [x for x in cur if ucount[x.user_id] >= core and icount[x.item_id] >= core]
        if len(nxt) == len(cur):
            return nxt
        cur = nxt


def preprocess(raw, config: PreprocessConfig = PreprocessConfig()) -> InteractionDataset:
    raw = list(raw)
    data = deduplicate(raw)
    if config.rating_threshold is not None:
        missing = sum(x.rating is None for x in data)
        if missing:
            raise DatasetError(f"rating threshold set but {missing} interactions have no rating")
        data = [x for x in data if x.rating >= config.rating_threshold]
    if config.max_user_interactions is not None:
        counts = Counter(x.user_id for x in data)
        data = [x for x in data if counts[x.user_id] <= config.max_user_interactions]
    data = k_core(data, config.core)
    if not data:
        raise DatasetError("dataset degenerate: no interactions left after preprocessing")
    logger.info("preprocess: %d raw -> %d interactions", len(raw), len(data))
    return InteractionDataset.from_interactions(data)


@dataclass
class SplitDataset:
    """Train/val/test item sets per dense user index.

    ``test[u]`` is the relevant set R*_u; ``history(u)`` is H_u = train ∪ val.
    Only users with at least one test item appear in ``test``.
    """

    train: dict[int, frozenset]
    val: dict[int, frozenset]
    test: dict[int, frozenset]
    user_ids: list[str]
    item_ids: list[str]

    def __post_init__(self):
        self.user_index = {u: j for j, u in enumerate(self.user_ids)}
        self.item_index = {i: j for j, i in enumerate(self.item_ids)}
        self._hist: dict[int, frozenset] = {}

    @property
    def n_items(self) -> int:
        return len(self.item_ids)

    @property
    def test_users(self) -> list[int]:
        return sorted(self.test)

    def history(self, u: int) -> frozenset:
        h = self._hist.get(u)
        if h is None:
            h = self.train.get(u, frozenset()) | self.val.get(u, frozenset())
            self._hist[u] = h
        return h

    def relevant(self, u: int) -> frozenset:
        return self.test.get(u, frozenset())


def _cut_points(total: int, ratio) -> tuple[int, int]:
    c1 = math.floor(total * ratio[0] + 1e-9)
    c2 = math.floor(total * (ratio[0] + ratio[1]) + 1e-9)
    return c1, c2


def split(ds: InteractionDataset, ratio=(0.6, 0.2, 0.2), mode: str = "temporal",
          seed: int = 0, min_train: int = 5) -> SplitDataset:
    """Global temporal or random split, then drop users with < ``min_train`` train interactions."""
    if len(ratio) != 3 or abs(sum(ratio) - 1.0) > 1e-9 or min(ratio) < 0:
        raise DatasetError(f"split ratios must be three non-negative values summing to 1, got {ratio}")
    inter = ds.interactions
    if mode == "temporal":
        if not ds.has_timestamps:
            raise DatasetError("temporal split requires a timestamp on every interaction")
        order = sorted(range(len(inter)), key=lambda j: inter[j].timestamp)
    elif mode == "random":
        order = list(np.random.default_rng(seed).permutation(len(inter)))
    else:
        raise DatasetError(f"unknown split mode {mode!r}")
    c1, c2 = _cut_points(len(order), ratio)
    parts = ({}, {}, {})
    for pos, j in enumerate(order):
        x = inter[j]
        which = 0 if pos < c1 else (1 if pos < c2 else 2)
        parts[which].setdefault(ds.user_index[x.user_id], set()).add(ds.item_index[x.item_id])
    train, val, test = parts
    keep = {u for u, items in train.items() if len(items) >= min_train}
    removed = len(set(train) | set(val) | set(test)) - len(keep)
    if removed:
        logger.info("split: removed %d users with < %d train interactions", removed, min_train)

    def freeze(d):
        return {u: frozenset(v) for u, v in sorted(d.items()) if u in keep and v}

    return SplitDataset(freeze(train), freeze(val), freeze(test), list(ds.user_ids), list(ds.item_ids))


# -- stats and manifests -------------------------------------------------------

def dataset_stats(ds: InteractionDataset) -> dict:
    n_inter = len(ds.interactions)
    return {
        "users": ds.m,
        "items": ds.n,
        "interactions": n_inter,
        "sparsity": 1.0 - n_inter / (ds.m * ds.n),
    }


def split_stats(sp: SplitDataset) -> dict:
    out = {}
    for name in ("train", "val", "test"):
        part = getattr(sp, name)
        items = set().union(*part.values()) if part else set()
        out[name] = {"users": len(part), "items": len(items),
                     "interactions": sum(len(v) for v in part.values())}
    sizes = np.array([len(v) for v in sp.test.values()]) if sp.test else np.zeros(1)
    out["relevant_per_user"] = {
        "mean": float(sizes.mean()), "min": int(sizes.min()),
        "median": float(np.median(sizes)), "max": int(sizes.max()),
    }
    return out


SPLIT_FILES = ("train", "val", "test")


def write_split(sp: SplitDataset, out_dir) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name in SPLIT_FILES:
        path = os.path.join(out_dir, f"{name}.tsv")
        part = getattr(sp, name)
        with open(path, "w", encoding="utf-8") as fh:
            for u in sorted(part):
                for i in sorted(part[u]):
                    fh.write(f"{sp.user_ids[u]}\t{sp.item_ids[i]}\n")
        written.append(path)
    for name, ids in (("users", sp.user_ids), ("items", sp.item_ids)):
        path = os.path.join(out_dir, f"{name}.tsv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.writelines(f"{x}\n" for x in ids)
        written.append(path)
    path = os.path.join(out_dir, "stats.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(split_stats(sp), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(path)
    return written


def read_split(in_dir) -> SplitDataset:
    def ids(name):
        with open(os.path.join(in_dir, f"{name}.tsv"), encoding="utf-8") as fh:
            return [line.rstrip("\n") for line in fh if line.strip()]

    user_ids, item_ids = ids("users"), ids("items")
    uidx = {u: j for j, u in enumerate(user_ids)}
    iidx = {i: j for j, i in enumerate(item_ids)}
    parts = []
    for name in SPLIT_FILES:
        d: dict[int, set] = {}
        with open(os.path.join(in_dir, f"{name}.tsv"), encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                u, i = line.rstrip("\n").split("\t")[:2]
                d.setdefault(uidx[u], set()).add(iidx[i])
        parts.append({u: frozenset(v) for u, v in sorted(d.items())})
    return SplitDataset(*parts, user_ids, item_ids)
