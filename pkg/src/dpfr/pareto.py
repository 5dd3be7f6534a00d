"""Empirical Pareto frontier of (relevance, fairness) built from test-split ground truth.

The frontier is traced in two stages. ``oracle`` builds maximally relevant
top-k lists that already spread exposure as evenly as the relevance
constraint allows. ``oracle_to_fair`` then repeatedly moves one
recommendation slot from the most exposed item to an unexposed (later: the
least exposed) item until no item is recommended more than ceil(k*m/n)
times, recording the measures along the way.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .measures import (
    FAIR_MEASURES,
    REL_MEASURES,
    MeasureId,
    ScorePoint,
    fair_scores,
    parse_measures,
    position_weights,
    rel_column,
    user_rel_vector,
)
from .runs import ExposureVector, RunTable

logger = logging.getLogger(__name__)


class EdgeCaseError(RuntimeError):
    """Train/val histories leave too few candidate items to fill or rebalance the lists."""


def ceil_share(k: int, m: int, n: int) -> int:
    """Upper bound on per-item exposure under the most uniform allocation of k*m slots."""
    return -(-k * m // n)


@dataclass
class RecState:
    users: list[int]
    rec: dict[int, list[int]]
    counts: np.ndarray
    k: int

    @property
    def item_not_in_rec(self) -> set[int]:
        return set(np.flatnonzero(self.counts == 0).tolist())

    def exposure(self) -> ExposureVector:
        return ExposureVector(self.counts.copy(), self.k, len(self.users))

    def as_run(self, name: str = "oracle") -> RunTable:
        return RunTable({u: list(self.rec[u]) for u in self.users}, name=name)


def _check_feasible(split, users, k: int) -> None:
    n = split.n_items
    short = [u for u in users if n - len(split.history(u)) < k]
    if short:
        raise EdgeCaseError(
            f"edge case: cannot fill list: {len(short)} users have fewer than k={k} "
            f"items outside their train/val history (first: user {split.user_ids[short[0]]})")


def oracle(split, k: int) -> RecState:
    """Most relevant top-k lists, spreading exposure where relevance allows it.

    1. users with exactly k relevant items get them;
    2. users with more than k relevant items, grouped by |R*_u| ascending and
       within a group by the current exposure of their already-recommended
       relevant items, get the k least exposed of their relevant items;
    3. users with fewer than k relevant items get them at the top, padded
       first with unexposed items and then with the least exposed
       recommended items, never from their history.
    """
    users = split.test_users
    if not users:
        raise ValueError("split has no test users")
    _check_feasible(split, users, k)
    n = split.n_items
    counts = np.zeros(n, dtype=np.int64)
    rec: dict[int, list[int]] = {}
    size = {u: len(split.test[u]) for u in users}

    for u in users:
        if size[u] == k:
            rec[u] = sorted(split.test[u])
            counts[rec[u]] += 1

    for K in range(k + 1, max(size.values()) + 1):
        group = [u for u in users if size[u] == K]
        if not group:
            continue
        weight = {u: int(sum(counts[i] for i in split.test[u])) for u in group}
        for u in sorted(group, key=lambda v: (weight[v], v)):
            # not-yet-recommended items first, then the least exposed taken ones
            chosen = sorted(split.test[u], key=lambda i: (counts[i], i))[:k]
            rec[u] = chosen
            counts[chosen] += 1

    remain = [u for u in users if size[u] < k]
    for u in remain:
        rec[u] = sorted(split.test[u])
        counts[rec[u]] += 1
    not_in_rec = np.flatnonzero(counts == 0).tolist()
    for u in remain:
        hist = split.history(u)
        lst = rec[u]
        if not_in_rec:
            left = []
            for item in not_in_rec:
                if len(lst) < k and item not in hist:
                    lst.append(item)
                    counts[item] += 1
                else:
                    left.append(item)
            not_in_rec = left
        while len(lst) < k:
            mask = counts >= 1
            blocked = list(hist | split.test[u]) + lst
            mask[blocked] = False
            if not mask.any():
                raise EdgeCaseError(
                    f"edge case: cannot fill list of user {split.user_ids[u]} to k={k}")
            masked = np.where(mask, counts, np.iinfo(np.int64).max)
            cand = int(np.argmin(masked))
            lst.append(cand)
            counts[cand] += 1
    return RecState(users, rec, counts, k)


@dataclass(frozen=True)
class CheckpointPlan:
    """Replacement indices at which measures are recorded.

    ``stride=1, limit=None`` records every replacement (full frontier).
    """

    num_rep: int
    stride: int = 1
    limit: int | None = None

    def __contains__(self, step: int) -> bool:
        if step % self.stride:
            return False
        return self.limit is None or step // self.stride < self.limit

    def indices(self) -> list[int]:
        if self.limit is None:
            return list(range(0, self.num_rep + 1, self.stride))
        return [j * self.stride for j in range(self.limit)]


def plan_checkpoints(initial_exposure, k: int, m: int, n: int, p: int | None) -> CheckpointPlan:
    """Spread ``p`` recording points evenly over the expected number of replacements.

    The expected replacement count is the total exposure in excess of the
    uniform bound ceil(k*m/n). ``p=None`` plans the full frontier.
    """
    counts = getattr(initial_exposure, "counts", initial_exposure)
    cap = ceil_share(k, m, n)
    num_rep = int(np.maximum(np.asarray(counts) - cap, 0).sum())
    if p is None:
        return CheckpointPlan(num_rep)
    if p < 2:
        raise ValueError("an estimated frontier needs p >= 2 points")
    if num_rep == 0:
        return CheckpointPlan(0, 1, 1)
    return CheckpointPlan(num_rep, max(1, num_rep // (p - 1)), p)


@dataclass
class StepRecord:
    step: int
    phase: int
    scores: dict


class _Replacer:
    """Mutable recommendation state with incremental measure bookkeeping."""

    def __init__(self, split, state: RecState, measures):
        self.split = split
        self.k = state.k
        self.users = list(state.users)
        self.row = {u: r for r, u in enumerate(self.users)}
        self.rec = [list(state.rec[u]) for u in self.users]
        self.rel = [split.test[u] for u in self.users]
        self.hist = [split.history(u) for u in self.users]
        self.counts = state.counts.copy()
        self.n = len(self.counts)
        self.m = len(self.users)
        self.weights = position_weights(self.k)
        self.holders = [set() for _ in range(self.n)]
        for r, lst in enumerate(self.rec):
            for i in lst:
                self.holders[i].add(r)
        self.rel_measures = [x for x in measures if x.kind == "rel"]
        self.fair_measures = [x for x in measures if x.kind == "fair"]
        self.per_user = np.array([user_rel_vector(lst, rel, self.k, self.weights)
                                  for lst, rel in zip(self.rec, self.rel)])

    def scores(self) -> dict:
        out = {}
        if self.rel_measures:
            means = self.per_user.mean(axis=0)
            for x in self.rel_measures:
                out[x] = float(means[rel_column(x)])
        if self.fair_measures:
            out.update(fair_scores(self.counts, self.k, self.m, self.fair_measures))
        return out

    def pick_user(self, popular: int, item: int):
        """Holder of ``popular`` that should receive ``item``, or None.

        Users for whom ``item`` is relevant come first; otherwise (and among
        them) the user with ``popular`` lowest in the list, ties to the lowest
        user index.
        """
        best = None
        best_key = None
        taken = self.holders[item]
        for r in self.holders[popular]:
            if r in taken or item in self.hist[r]:
                continue
            key = (item in self.rel[r], self.rec[r].index(popular), -r)
            if best_key is None or key > best_key:
                best, best_key = r, key
        return best

    def replace(self, r: int, old: int, new: int) -> None:
        lst = self.rec[r]
        lst[lst.index(old)] = new
        rel = self.rel[r]
        self.rec[r] = [i for i in lst if i in rel] + [i for i in lst if i not in rel]
        self.counts[old] -= 1
        self.counts[new] += 1
        self.holders[old].discard(r)
        self.holders[new].add(r)
        self.per_user[r] = user_rel_vector(self.rec[r], rel, self.k, self.weights)

    def check(self) -> None:
        """Debug-mode consistency of the cached exposure with the lists."""
        counts = np.zeros(self.n, dtype=np.int64)
        for r, lst in enumerate(self.rec):
            if len(lst) != self.k or len(set(lst)) != self.k:
                raise AssertionError(f"list of row {r} is not {self.k} unique items")
            if self.hist[r] & set(lst):
                raise AssertionError(f"list of row {r} intersects its history")
            counts[lst] += 1
        if not np.array_equal(counts, self.counts):
            raise AssertionError("exposure cache out of sync with lists")

    def most_popular(self) -> list[int]:
        top = self.counts.max()
        return np.flatnonzero(self.counts == top).tolist()

    def state(self) -> RecState:
        return RecState(self.users, {u: list(self.rec[r]) for u, r in self.row.items()},
                        self.counts.copy(), self.k)


@dataclass
class FairTrace:
    records: list[StepRecord]
    final: RecState
    num_rep: int
    replacements: int
    plan: CheckpointPlan
    seconds: float = 0.0

    def points(self, pair) -> list[ScorePoint]:
        rel, fair = pair
        return [ScorePoint(rec.scores[rel], rec.scores[fair], tag=str(rec.step)) for rec in self.records]


def oracle_to_fair(split, k: int, checkpoints: CheckpointPlan | int | None = None,
                   measures=None, initial: RecState | None = None, debug: bool = False) -> FairTrace:
    """Trace recommendation states from the oracle to the fairest reachable state.

    ``checkpoints`` is a plan, an integer ``p`` (estimated frontier with p
    points) or None (record after every replacement). ``debug`` re-checks
    the state invariants after every replacement.
    """
    start = time.perf_counter()
    measures = list(REL_MEASURES + FAIR_MEASURES) if measures is None else parse_measures(measures)
    state = initial if initial is not None else oracle(split, k)
    m, n = len(state.users), len(state.counts)
    cap = ceil_share(k, m, n)
    if checkpoints is None or isinstance(checkpoints, int):
        checkpoints = plan_checkpoints(state.counts, k, m, n, checkpoints)
    plan = checkpoints

    rs = _Replacer(split, state, measures)
    if debug:
        rs.check()
    records = [StepRecord(0, 0, rs.scores())]
    step = 0

    def done_step(phase):
        nonlocal step
        step += 1
        if debug:
            rs.check()
        if step in plan:
            records.append(StepRecord(step, phase, rs.scores()))

    # phase 1: hand unexposed items to holders of the most exposed item
    for item in np.flatnonzero(rs.counts == 0).tolist():
        if rs.counts.max() <= cap:
            break
        for popular in rs.most_popular():
            r = rs.pick_user(popular, item)
            if r is not None:
                rs.replace(r, popular, item)
                done_step(1)
                break

    # phase 2: move slots from the most to the least exposed items
    while rs.counts.max() > cap:
        order = np.argsort(rs.counts, kind="stable")
        targets = [int(i) for i in order if rs.counts[i] < cap]
        moved = False
        for popular in rs.most_popular():
            for item in targets:
                r = rs.pick_user(popular, item)
                if r is not None:
                    rs.replace(r, popular, item)
                    moved = True
                    break
            if moved:
                break
        if not moved:
            raise EdgeCaseError(
                f"edge case: no admissible replacement left with max exposure "
                f"{int(rs.counts.max())} > {cap} after {step} replacements")
        done_step(2)

    seconds = time.perf_counter() - start
    logger.info("oracle_to_fair: %d replacements (estimated %d), %d records, %.2fs",
                step, plan.num_rep, len(records), seconds)
    return FairTrace(records, rs.state(), plan.num_rep, step, plan, seconds)


@dataclass
class ParetoFrontier:
    points: list[ScorePoint]
    pair: tuple
    gradient: float | None
    fit: bool
    meta: dict = field(default_factory=dict)

    def as_array(self) -> np.ndarray:
        return np.array([p.as_tuple() for p in self.points], dtype=float).reshape(-1, 2)


def _fair_better(pair, a: float, b: float) -> bool:
    return a > b if pair[1].higher_better else a < b


def build_frontier(points, pair) -> ParetoFrontier:
    """Deduplicate by relevance (keeping the best fairness), sort and drop dominated points.

    The gradient is taken between the first and last point after
    deduplication; it is undefined for a single point. A pair is fit when the
    gradient is defined and nonzero.
    """
    points = list(points)
    if not points:
        raise ValueError("cannot build a frontier from no points")
    best: dict[float, ScorePoint] = {}
    for p in points:
        cur = best.get(p.rel)
        if cur is None or _fair_better(pair, p.fair, cur.fair):
            best[p.rel] = p
    ordered = sorted(best.values(), key=lambda p: -p.rel)
    gradient = None
    if len(ordered) > 1:
        first, last = ordered[0], ordered[-1]
        gradient = (last.fair - first.fair) / (last.rel - first.rel)
    kept: list[ScorePoint] = []
    for p in ordered:
        if not kept or _fair_better(pair, p.fair, kept[-1].fair):
            kept.append(p)
    fit = gradient is not None and gradient != 0.0
    return ParetoFrontier(kept, tuple(pair), gradient, fit)


def dominates(a, b, pair) -> bool:
    """Whether score pair ``a`` Pareto-dominates ``b`` (orientation-aware)."""
    ar, af = a
    br, bf = b
    if not pair[1].higher_better:
        af, bf = -af, -bf
    return ar >= br and af >= bf and (ar > br or af > bf)


def generate_frontiers(split, k: int, pairs, p: int | None = None):
    """Frontiers for every requested (rel, fair) pair from one Oracle2Fair pass."""
    pairs = [tuple(MeasureId.parse(x) if isinstance(x, str) else x for x in pr) for pr in pairs]
    needed = []
    for pr in pairs:
        for x in pr:
            if x not in needed:
                needed.append(x)
    trace = oracle_to_fair(split, k, p, needed)
    out = {}
    for pr in pairs:
        fr = build_frontier(trace.points(pr), pr)
        fr.meta = {"num_rep": trace.num_rep, "replacements": trace.replacements,
                   "records": len(trace.records), "seconds": trace.seconds}
        out[pr] = fr
    return out, trace
