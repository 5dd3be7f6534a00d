"""Rank agreement between evaluators: Kendall tau-b, the averaging baseline, best-model disagreement."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import MeasureId

EQUIVALENCE_TAU = 0.9

SET_BASED = (MeasureId.P, MeasureId.R)
RANK_BASED = (MeasureId.MAP, MeasureId.NDCG)
PAIR_GROUPS = {"set-based": SET_BASED, "rank-based": RANK_BASED}


def kendall_tau(a, b) -> float:
    """Tie-corrected Kendall tau-b; NaN when either vector is fully tied."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("kendall_tau needs two 1-d vectors of equal length")
    if len(a) < 2:
        raise ValueError("kendall_tau needs at least two elements")
    iu = np.triu_indices(len(a), 1)
    da = np.sign(a[:, None] - a[None, :])[iu].astype(np.int64)
    db = np.sign(b[:, None] - b[None, :])[iu].astype(np.int64)
    s = int((da * db).sum())  # concordant - discordant
    na = int(np.count_nonzero(da))  # pairs untied in a
    nb = int(np.count_nonzero(db))
    if na == 0 or nb == 0:
        return math.nan
    return s / math.sqrt(na * nb)


def is_undefined(tau: float) -> bool:
    return tau is None or math.isnan(tau)


def oriented(scores, higher_better: bool) -> np.ndarray:
    """Scores as 'goodness': lower-better evaluators are negated."""
    x = np.asarray(scores, dtype=float)
    return x if higher_better else -x


def evaluator_tau(a, a_higher_better: bool, b, b_higher_better: bool) -> float:
    return kendall_tau(oriented(a, a_higher_better), oriented(b, b_higher_better))


def equivalence_flag(tau: float) -> bool:
    if is_undefined(tau):
        return False
    return tau >= EQUIVALENCE_TAU


def avg_baseline(rel: float, fair: float, fair_measure) -> float:
    """Mean of relevance and fairness, with Gini flipped to 1 - Gini."""
    fm = MeasureId.parse(fair_measure) if isinstance(fair_measure, str) else fair_measure
    f = fair if fm.higher_better else 1.0 - fair
    return (rel + f) / 2.0


@dataclass
class RunRanking:
    evaluator: str
    tags: list[str]
    scores: list[float]


def rank_runs(scores: dict, evaluator: str, higher_better: bool) -> RunRanking:
    """Runs from best to worst; ties keep the tag order."""
    tags = sorted(scores, key=lambda t: -scores[t] if higher_better else scores[t])
    return RunRanking(evaluator, tags, [scores[t] for t in tags])


def best_set(scores: dict, higher_better: bool, tol: float = 0.0) -> set:
    vals = np.array(list(scores.values()), dtype=float)
    best = vals.max() if higher_better else vals.min()
    return {t for t, v in scores.items() if abs(v - best) <= tol}


def _group_of(pair, groups) -> str | None:
    for name, rels in groups.items():
        if pair[0] in rels:
            return name
    return None


def best_model_disagreement(dpfr_scores: dict, avg_scores: dict, pair_groups=None) -> dict:
    """Percentage of measure pairs whose best run differs between DPFR (min) and avg (max).

    ``dpfr_scores`` and ``avg_scores`` map pair -> {run tag: score}. Tied
    best runs agree when the two best sets intersect. Returns the percentage
    per group, "overall", and the per-pair 0/1 flags under "pairs".
    """
    groups = PAIR_GROUPS if pair_groups is None else pair_groups
    flags = {}
    for pair, ds in dpfr_scores.items():
        av = avg_scores[pair]
        if set(ds) != set(av):
            raise ValueError(f"run sets differ for pair {pair}")
        flags[pair] = 0 if best_set(ds, False) & best_set(av, True) else 1
    out: dict = {"pairs": flags}
    for name in groups:
        sel = [f for p, f in flags.items() if _group_of(p, groups) == name]
        out[name] = 100.0 * sum(sel) / len(sel) if sel else math.nan
    out["overall"] = 100.0 * sum(flags.values()) / len(flags) if flags else math.nan
    return out
