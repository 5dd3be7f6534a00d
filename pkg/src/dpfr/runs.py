"""Ranked recommendation lists (runs) and item exposure counts."""

from __future__ import annotations

import gzip
import io
import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)


class RunValidationError(ValueError):
    pass


@dataclass(frozen=True)
class ExposureVector:
    counts: np.ndarray
    k: int
    m: int

    @property
    def n(self) -> int:
        return len(self.counts)


@dataclass
class RunTable:
    """Per-user ranked lists over dense item indices, with predicted scores.

    ``lists[u]`` is the ranked item list of user ``u`` (best first) and
    ``scores[u]`` the matching non-increasing predicted scores.
    """

    lists: dict[int, list[int]]
    scores: dict[int, list[float]] = field(default_factory=dict)
    name: str = "run"

    def users(self) -> list[int]:
        return sorted(self.lists)

    @property
    def depth(self) -> int:
        """Shortest list length across users (the usable cutoff)."""
        return min((len(v) for v in self.lists.values()), default=0)

    def restrict(self, users) -> "RunTable":
        users = list(users)
        return RunTable(
            {u: self.lists[u] for u in users},
            {u: self.scores[u] for u in users if u in self.scores},
            self.name,
        )

    def validate(self, split=None) -> None:
        bad = []
        for u, items in self.lists.items():
            if len(set(items)) != len(items):
                raise RunValidationError(f"duplicate item in list of user {u}")
            sc = self.scores.get(u)
            if sc is not None:
                if len(sc) != len(items):
                    raise RunValidationError(f"score/item length mismatch for user {u}")
                if any(b > a for a, b in zip(sc, sc[1:])):
                    raise RunValidationError(f"scores of user {u} are not non-increasing")
            if split is not None:
                hist = split.history(u)
                bad.extend((u, i) for i in items if i in hist)
        if bad:
            shown = ", ".join(f"({u},{i})" for u, i in bad[:10])
            raise RunValidationError(
                f"{len(bad)} recommended items belong to the user's train/val history: {shown}")


def exposure(run: RunTable, k: int, n_items: int) -> ExposureVector:
    counts = np.zeros(n_items, dtype=np.int64)
    for u in run.users():
        items = run.lists[u]
        if len(items) < k:
            raise RunValidationError(f"list of user {u} has {len(items)} < k={k} items")
        np.add.at(counts, items[:k], 1)
    return ExposureVector(counts=counts, k=k, m=len(run.lists))


def _open_text(path, mode="rt"):
    path = str(path)
    if path.endswith(".gz"):
        if "w" in mode:
            # mtime=0 keeps compressed output byte-identical across runs
            raw = gzip.GzipFile(path, "wb", mtime=0)
            return io.TextIOWrapper(raw, encoding="utf-8")
        return gzip.open(path, mode, encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def read_run_file(path) -> dict[str, list[tuple[str, float]]]:
    """Raw ``user<TAB>item<TAB>score`` lines grouped per external user id, in file order."""
    out: dict[str, list[tuple[str, float]]] = {}
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) < 3:
                raise RunValidationError(f"{path}:{lineno}: expected user, item, score")
            try:
                score = float(parts[2])
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise RunValidationError(f"{path}:{lineno}: bad score {parts[2]!r}")
            out.setdefault(parts[0], []).append((parts[1], score))
    return out


def load_run(path, split, name: str | None = None) -> RunTable:
    """Load and validate a run file against a split.

    Ranks come from score order (stable on file order). Users outside the test
    split are dropped with a warning; unknown items are an error.
    """
    raw = read_run_file(path)
    lists, scores = {}, {}
    dropped = 0
    for uid, rows in raw.items():
        u = split.user_index.get(uid)
        if u is None or u not in split.test:
            dropped += 1
            continue
        order = sorted(range(len(rows)), key=lambda j: -rows[j][1])
        items, sc = [], []
        for j in order:
            iid, s = rows[j]
            i = split.item_index.get(iid)
            if i is None:
                raise RunValidationError(f"unknown item {iid!r} for user {uid!r}")
            items.append(i)
            sc.append(s)
        lists[u] = items
        scores[u] = sc
    if dropped:
        logger.warning("dropped %d run users not present in the test split", dropped)
    run = RunTable(lists, scores, name or _stem(path))
    run.validate(split)
    return run


def write_run(run: RunTable, path, split) -> None:
    with _open_text(path, "wt") as fh:
        for u in run.users():
            uid = split.user_ids[u]
            sc = run.scores.get(u)
            for pos, i in enumerate(run.lists[u]):
                s = sc[pos] if sc is not None else float(len(run.lists[u]) - pos)
                fh.write(f"{uid}\t{split.item_ids[i]}\t{float(s)!r}\n")


def _stem(path) -> str:
    name = str(path).rsplit("/", 1)[-1]
    for ext in (".gz", ".tsv", ".txt", ".run"):
        if name.endswith(ext):
            name = name[: -len(ext)]
    return name
