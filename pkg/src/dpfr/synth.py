"""Seeded synthetic datasets and runs for property tests and desk-scale experiments.

Item popularity follows a power law: the item at popularity rank r (1-based,
over a seeded permutation of the items) is drawn with probability
proportional to r**(-skew). skew=0 is uniform; larger values concentrate
interactions on a few head items. Each user's items are sampled without
replacement by inverse-CDF draws over the remaining probability mass.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dataset import SplitDataset
from .rerank import borda_count, combmnz, greedy_substitution
from .runs import RunTable


class InfeasibleSpecError(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    m: int = 200
    n: int = 300
    k: int = 10
    kprime: int = 25
    skew: float = 1.0
    relevant: tuple = (1, 5, 25)  # (min, median, max) test items per user
    history: tuple = (5, 15)  # (min, max) train items per user
    val: tuple = (0, 3)  # (min, max) val items per user
    seed: int = 0

    @property
    def max_history(self) -> int:
        return self.history[1] + self.val[1]

    def check(self) -> None:
        lo, med, hi = self.relevant
        if not 1 <= lo <= med <= hi:
            raise InfeasibleSpecError(f"relevant distribution must satisfy 1 <= min <= median <= max, got {self.relevant}")
        if self.history[0] > self.history[1] or self.val[0] > self.val[1] or min(self.history + self.val) < 0:
            raise InfeasibleSpecError("history and val ranges must be non-negative (min, max) pairs")
        if self.kprime < self.k:
            raise InfeasibleSpecError(f"k'={self.kprime} must be >= k={self.k}")
        if self.n < self.kprime + self.max_history:
            raise InfeasibleSpecError(
                f"infeasible spec: n={self.n} < k'={self.kprime} + max history {self.max_history}")
        if self.n < hi + self.max_history:
            raise InfeasibleSpecError(
                f"infeasible spec: n={self.n} cannot hold {hi} relevant items plus {self.max_history} history items")
        if self.m < 1 or self.skew < 0:
            raise InfeasibleSpecError("m must be positive and skew non-negative")


PRESETS = {
    "tiny": SynthSpec(m=4, n=6, k=3, kprime=4, skew=0.5, relevant=(1, 2, 4), history=(0, 2), val=(0, 0)),
    "mid": SynthSpec(),
}


def preset(name: str, **overrides) -> SynthSpec:
    try:
        spec = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return replace(spec, **overrides)


def popularity(n: int, skew: float, rng: np.random.Generator) -> np.ndarray:
    """Item sampling probabilities; rank order is a seeded permutation of item indices."""
    ranks = np.empty(n)
    ranks[rng.permutation(n)] = np.arange(1, n + 1)
    w = ranks ** (-skew)
    return w / w.sum()


def _sample_without_replacement(prob: np.ndarray, size: int, rng: np.random.Generator) -> list[int]:
    p = prob.copy()
    out = []
    for _ in range(size):
        cdf = np.cumsum(p)
        j = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        j = min(j, len(p) - 1)
        while p[j] == 0.0:  # guard against landing on an exhausted item at the cdf edge
            j -= 1
        out.append(j)
        p[j] = 0.0
    return out


def _draw_count(lo: int, med: int, hi: int, rng: np.random.Generator) -> int:
    # half the mass below the median, half above
    if rng.random() < 0.5:
        return int(rng.integers(lo, med + 1))
    return int(rng.integers(med, hi + 1))


def generate_split(spec: SynthSpec) -> tuple[SplitDataset, np.ndarray]:
    """Synthetic split plus the item sampling probabilities used to build it."""
    spec.check()
    rng = np.random.default_rng(spec.seed)
    prob = popularity(spec.n, spec.skew, rng)
    train, val, test = {}, {}, {}
    for u in range(spec.m):
        n_train = int(rng.integers(spec.history[0], spec.history[1] + 1))
        n_val = int(rng.integers(spec.val[0], spec.val[1] + 1))
        n_test = _draw_count(*spec.relevant, rng)
        items = _sample_without_replacement(prob, n_train + n_val + n_test, rng)
        if n_train:
            train[u] = frozenset(items[:n_train])
        if n_val:
            val[u] = frozenset(items[n_train:n_train + n_val])
        test[u] = frozenset(items[n_train + n_val:])
    width = max(4, len(str(max(spec.m, spec.n))))
    users = [f"u{j:0{width}d}" for j in range(spec.m)]
    items = [f"i{j:0{width}d}" for j in range(spec.n)]
    return SplitDataset(train, val, test, users, items), prob


def _run_from_scores(split, scores: np.ndarray, depth: int, name: str) -> RunTable:
    lists, out = {}, {}
    for u in split.test_users:
        s = scores[u].copy()
        hist = list(split.history(u))
        s[hist] = -np.inf
        order = np.lexsort((np.arange(len(s)), -s))[:depth]
        lists[u] = order.tolist()
        out[u] = [float(x) for x in s[order]]
    return RunTable(lists, out, name)


def relevance_matrix(split) -> np.ndarray:
    rel = np.zeros((len(split.user_ids), split.n_items))
    for u, items in split.test.items():
        rel[u, list(items)] = 1.0
    return rel


def base_runs(spec: SynthSpec, split, prob: np.ndarray) -> list[RunTable]:
    """Four scoring models from relevance-maximal to fairness-maximal.

    ``relmax`` ranks every relevant item first (ties broken by popularity),
    ``pop`` ranks by popularity plus noise, ``mixed`` blends a noisy
    relevance signal with popularity, ``rr`` deals items round-robin so
    exposure is as even as possible.
    """
    rng = np.random.default_rng([spec.seed, 1])
    m, n = len(split.user_ids), split.n_items
    rel = relevance_matrix(split)
    pop = prob / prob.max()
    runs = [_run_from_scores(split, 2.0 * rel + pop[None, :], spec.kprime, "relmax")]
    runs.append(_run_from_scores(split, pop[None, :] + 0.05 * rng.random((m, n)), spec.kprime, "pop"))
    runs.append(_run_from_scores(split, 0.6 * rel + 0.5 * pop[None, :] + 0.4 * rng.random((m, n)),
                                 spec.kprime, "mixed"))
    rr = np.zeros((m, n))
    for u in range(m):
        rr[u] = -((np.arange(n) - u * spec.k) % n)  # item u*k first, then cyclically onwards
    runs.append(_run_from_scores(split, rr, spec.kprime, "rr"))
    return runs


def generate(spec: SynthSpec, rerank: bool = True) -> tuple[SplitDataset, list[RunTable]]:
    """Split plus runs: 4 base models, each also re-ranked by BC, CM and GS (16 runs)."""
    split, prob = generate_split(spec)
    runs = []
    for base in base_runs(spec, split, prob):
        runs.append(base)
        if rerank:
            runs.append(borda_count(base, spec.k, spec.kprime, n_items=spec.n))
            runs.append(combmnz(base, spec.k, spec.kprime, n_items=spec.n))
            runs.append(greedy_substitution(base, spec.k, spec.kprime, n_items=spec.n))
    return split, runs
