"""Fairness re-rankers over each user's top-k' list: greedy substitution, CombMNZ, Borda count."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .runs import RunTable, RunValidationError

logger = logging.getLogger(__name__)


def _check_depth(run: RunTable, kprime: int) -> None:
    for u in run.users():
        if len(run.lists[u]) < kprime:
            raise RunValidationError(f"list of user {u} has {len(run.lists[u])} < k'={kprime} items")


def _n_items(run: RunTable, n_items: int | None) -> int:
    if n_items is not None:
        return n_items
    return 1 + max((max(v) for v in run.lists.values() if v), default=-1)


def coverage(run: RunTable, k: int, n_items: int | None = None) -> np.ndarray:
    """Number of users whose top-k contains each item."""
    counts = np.zeros(_n_items(run, n_items), dtype=np.int64)
    for u in run.users():
        np.add.at(counts, run.lists[u][:k], 1)
    return counts


def _minmax(x: np.ndarray, degenerate: float) -> np.ndarray:
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.full(len(x), degenerate, dtype=float)
    return (x - lo) / (hi - lo)


def _rank_scores(n: int) -> list[float]:
    return [float(n - j) for j in range(n)]


def _fused_order(points: np.ndarray) -> list[int]:
    # descending points, ties by original position
    return sorted(range(len(points)), key=lambda j: (-points[j], j))


@dataclass(frozen=True)
class SwapCandidate:
    popular_item: int
    replacement_item: int
    user: int
    loss: float


def popularity_sets(counts: np.ndarray, beta: float) -> tuple[list[int], list[int]]:
    """Top and bottom ceil(beta * n_active) items by count among the items recommended at all."""
    active = np.flatnonzero(counts > 0)
    size = math.ceil(beta * len(active))
    if size == 0:
        return [], []
    by_count = sorted(active.tolist(), key=lambda i: (-counts[i], i))
    popular = by_count[:size]
    rest = [i for i in reversed(by_count) if i not in set(popular)]
    least = sorted(rest, key=lambda i: (counts[i], i))[:size]
    return popular, least


def swap_candidates(run: RunTable, k: int, kprime: int, popular, least) -> list[SwapCandidate]:
    popular, least = set(popular), set(least)
    out = []
    for u in run.users():
        items = run.lists[u][:kprime]
        sc = run.scores[u]
        head = [(p, i) for p, i in enumerate(items[:k]) if i in popular]
        tail = [(p, i) for p, i in enumerate(items[k:], k) if i in least]
        for p, i in head:
            for q, j in tail:
                out.append(SwapCandidate(i, j, u, float(sc[p]) - float(sc[q])))
    out.sort(key=lambda c: (c.loss, c.user, c.popular_item, c.replacement_item))
    return out


def greedy_substitution(run: RunTable, k: int = 10, kprime: int = 25, beta: float = 0.05,
                        replace_frac: float = 0.25, n_items: int | None = None,
                        stats: dict | None = None) -> RunTable:
    """Swap popular items out of the top-k in favour of unpopular ones from the same user's top-k'.

    Popularity is the top-k' appearance count. Every (popular i in u's top-k,
    unpopular i' in u's positions k..k'-1) triple is scored by the predicted
    score loss s_u(i) - s_u(i'), candidates are sorted by ascending loss and
    the first floor(replace_frac * k' * m) are attempted. A swap exchanges the
    two positions; it is skipped if i already left u's top-k or i' already
    entered it.
    """
    if any(u not in run.scores for u in run.lists):
        raise RunValidationError("greedy substitution needs predicted scores for every user")
    _check_depth(run, kprime)
    counts = coverage(run, kprime, n_items)
    popular, least = popularity_sets(counts, beta)
    cands = swap_candidates(run, k, kprime, popular, least)
    budget = math.floor(replace_frac * kprime * len(run.lists))
    lists = {u: list(run.lists[u][:kprime]) for u in run.users()}
    pos = {u: {i: p for p, i in enumerate(lst)} for u, lst in lists.items()}
    applied = 0
    for c in cands[:budget]:
        where = pos[c.user]
        p, q = where[c.popular_item], where[c.replacement_item]
        if p >= k or q < k:
            continue
        lst = lists[c.user]
        lst[p], lst[q] = lst[q], lst[p]
        where[c.popular_item], where[c.replacement_item] = q, p
        applied += 1
    logger.info("GS: %d candidates, budget %d, %d swaps applied", len(cands), budget, applied)
    if stats is not None:
        stats.update(candidates=len(cands), budget=budget, applied=applied)
    return RunTable(lists, {u: _rank_scores(kprime) for u in lists}, run.name + "-GS")


def combmnz(run: RunTable, k: int = 10, kprime: int = 25, n_items: int | None = None) -> RunTable:
    """Fuse predicted relevance with inverse top-k coverage, CombMNZ style.

    Per user, score1 is min-max normalised predicted score over the top-k'
    (0.5 when constant) and score2 is 1 minus the min-max normalised top-k
    coverage over all items (an all-equal coverage normalises to 0). The
    fused score (score1 + score2) * mnz counts in mnz how many of the two
    rankings place the item in their top-k.
    """
    _check_depth(run, kprime)
    if any(u not in run.scores for u in run.lists):
        raise RunValidationError("CombMNZ needs predicted scores for every user")
    cov = coverage(run, k, n_items)
    score2_all = 1.0 - _minmax(cov.astype(float), 0.0)
    lists, scores = {}, {}
    for u in run.users():
        items = run.lists[u][:kprime]
        s1 = _minmax(np.asarray(run.scores[u][:kprime], dtype=float), 0.5)
        s2 = score2_all[items]
        by_cov = sorted(range(kprime), key=lambda j: (-s2[j], j))
        mnz = np.zeros(kprime)
        mnz[:k] += 1
        mnz[by_cov[:k]] += 1
        fused = (s1 + s2) * mnz
        order = _fused_order(fused)
        lists[u] = [items[j] for j in order]
        scores[u] = [float(fused[j]) for j in order]
    return RunTable(lists, scores, run.name + "-CM")


def borda_count(run: RunTable, k: int = 10, kprime: int = 25, n_items: int | None = None) -> RunTable:
    """Borda fusion of the original top-k' order and the ascending-coverage order.

    An item at 0-based position p of a ranking earns k' - p points.
    """
    _check_depth(run, kprime)
    cov = coverage(run, k, n_items)
    lists, scores = {}, {}
    for u in run.users():
        items = run.lists[u][:kprime]
        points = np.array(_rank_scores(kprime))
        by_cov = sorted(range(kprime), key=lambda j: (cov[items[j]], j))
        for p, j in enumerate(by_cov):
            points[j] += kprime - p
        order = _fused_order(points)
        lists[u] = [items[j] for j in order]
        scores[u] = [float(points[j]) for j in order]
    return RunTable(lists, scores, run.name + "-BC")


RERANKERS = {"gs": greedy_substitution, "cm": combmnz, "bc": borda_count}


def rerank(method: str, run: RunTable, k: int = 10, kprime: int = 25, n_items: int | None = None,
           **kw) -> RunTable:
    try:
        fn = RERANKERS[method.lower()]
    except KeyError:
        raise ValueError(f"unknown re-ranker {method!r}; choose from {sorted(RERANKERS)}")
    return fn(run, k, kprime, n_items=n_items, **kw)
