"""Relevance, individual item fairness and joint fairness-relevance measures at cutoff k.

All relevance measures are macro-averaged over the users that are both in the
run and in the test split. Fairness measures only look at item exposure, i.e.
how many users have an item in their top-k.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import sparse

from .runs import ExposureVector, RunTable, exposure

logger = logging.getLogger(__name__)

# Relative uplift over the uniform-policy impact for an item to count as better off.
BETTER_OFF_MARGIN = 1.10


class MeasureId(str, Enum):
    HR = "HR"
    MRR = "MRR"
    P = "P"
    R = "R"
    MAP = "MAP"
    NDCG = "NDCG"
    JAIN = "Jain"
    QF = "QF"
    ENT = "Ent"
    FSAT = "FSat"
    GINI = "Gini"
    IBO = "IBO"
    MME = "MME"
    IAA = "IAA"
    IIF = "IIF"
    AIF = "AIF"

    @property
    def kind(self) -> str:
        if self in REL_MEASURES:
            return "rel"
        if self in FAIR_MEASURES:
            return "fair"
        return "joint"

    @property
    def higher_better(self) -> bool:
        return self not in _LOWER_BETTER

    @classmethod
    def parse(cls, name: str) -> "MeasureId":
        key = name.strip().replace("-", "").lower()
        for m in cls:
            if m.value.lower() == key:
                return m
        raise ValueError(f"unknown measure {name!r}")


REL_MEASURES = (MeasureId.HR, MeasureId.MRR, MeasureId.P, MeasureId.R, MeasureId.MAP, MeasureId.NDCG)
FAIR_MEASURES = (MeasureId.JAIN, MeasureId.QF, MeasureId.ENT, MeasureId.FSAT, MeasureId.GINI)
JOINT_MEASURES = (MeasureId.IBO, MeasureId.MME, MeasureId.IAA, MeasureId.IIF, MeasureId.AIF)
_LOWER_BETTER = frozenset({MeasureId.GINI, MeasureId.MME, MeasureId.IAA, MeasureId.IIF, MeasureId.AIF})

# Measure pairs with a defined, nonzero frontier gradient across all datasets studied.
FIT_REL = (MeasureId.P, MeasureId.MAP, MeasureId.R, MeasureId.NDCG)
FIT_FAIR = (MeasureId.JAIN, MeasureId.ENT, MeasureId.GINI)
FIT_PAIRS = tuple((r, f) for r in FIT_REL for f in FIT_FAIR)


def parse_measures(names) -> list[MeasureId]:
    if isinstance(names, str):
        names = [s for s in names.split(",") if s.strip()]
    return [n if isinstance(n, MeasureId) else MeasureId.parse(n) for n in names]


def pair_name(pair) -> str:
    rel, fair = pair
    return f"{rel.value}-{fair.value}"


@dataclass(frozen=True)
class ScorePoint:
    rel: float
    fair: float
    tag: str | None = None

    def __post_init__(self):
        for v in (self.rel, self.fair):
            if not math.isfinite(v) or v < 0.0 or v > 1.0:
                raise ValueError(f"score components must be finite and in [0, 1], got ({self.rel}, {self.fair})")

    def as_tuple(self) -> tuple[float, float]:
        return (self.rel, self.fair)


# -- relevance -------------------------------------------------------------

def position_weights(k: int) -> np.ndarray:
    """Logarithmic discount 1/log2(1 + rank) for ranks 1..k."""
    return 1.0 / np.log2(np.arange(2, k + 2))


def user_rel_vector(ranked, relevant, k: int, weights: np.ndarray | None = None) -> np.ndarray:
    """Per-user (HR, MRR, P, R, MAP, NDCG) at k for one ranked list.

    MAP and NDCG are normalised by min(|relevant|, k) so a user with fewer than
    k relevant items can still reach 1.
    """
    if weights is None:
        weights = position_weights(k)
    n_rel = len(relevant)
    if n_rel == 0:
        return np.zeros(6)
    hits = 0
    first = 0
    ap = 0.0
    dcg = 0.0
    for pos, item in enumerate(ranked[:k]):
        if item in relevant:
            hits += 1
            if not first:
                first = pos + 1
            ap += hits / (pos + 1)
            dcg += weights[pos]
    ideal = min(n_rel, k)
    idcg = float(np.sum(weights[:ideal]))
    return np.array([
        1.0 if hits else 0.0,
        1.0 / first if first else 0.0,
        hits / k,
        hits / n_rel,
        ap / ideal,
        dcg / idcg,
    ])


_REL_COLUMN = {m: j for j, m in enumerate(REL_MEASURES)}


def rel_column(measure: MeasureId) -> int:
    return _REL_COLUMN[measure]


def evaluated_users(run: RunTable, split) -> list[int]:
    users = [u for u in run.users() if u in split.test]
    skipped = len(run.lists) - len(users)
    if skipped:
        logger.warning("%d run users are not in the test split and are skipped", skipped)
    missing = len(split.test) - len(users)
    if missing:
        logger.warning("%d test users have no list in the run and are excluded", missing)
    return users


def rel_matrix(run: RunTable, split, k: int) -> np.ndarray:
    """(m, 6) array of per-user relevance scores, rows in evaluated-user order."""
    users = evaluated_users(run, split)
    weights = position_weights(k)
    out = np.zeros((len(users), len(REL_MEASURES)))
    for row, u in enumerate(users):
        out[row] = user_rel_vector(run.lists[u], split.test[u], k, weights)
    return out


def rel_score(measure, run: RunTable, split, k: int) -> float:
    measure = MeasureId.parse(measure) if isinstance(measure, str) else measure
    if measure.kind != "rel":
        raise ValueError(f"{measure.value} is not a relevance measure")
    mat = rel_matrix(run, split, k)
    if len(mat) == 0:
        raise ValueError("no evaluable users in run")
    return float(mat[:, rel_column(measure)].mean())


# -- fairness --------------------------------------------------------------

def jain(counts: np.ndarray) -> float:
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    return float(total * total / (len(counts) * np.dot(counts, counts)))


def qf(counts: np.ndarray) -> float:
    counts = np.asarray(counts)
    return float(np.count_nonzero(counts) / len(counts))


def entropy(counts: np.ndarray) -> float:
    counts = np.asarray(counts, dtype=float)
    n = len(counts)
    if n < 2:
        raise ValueError("entropy needs at least 2 items (log n = 0)")
    nz = counts[counts > 0]
    if nz.min() == nz.max():
        # equal shares: closed form keeps the uniform case exactly 1
        h = math.log(len(nz))
    else:
        p = nz / nz.sum()
        h = -float(np.sum(p * np.log(p)))
    return max(h / math.log(n), 0.0)


def fsat(counts: np.ndarray, k: int, m: int) -> float:
    counts = np.asarray(counts)
    n = len(counts)
    threshold = (k * m) // n
    return float(np.count_nonzero(counts >= threshold) / n)


def gini(counts: np.ndarray) -> float:
    x = np.sort(np.asarray(counts, dtype=float))
    n = len(x)
    coef = 2 * np.arange(1, n + 1) - n - 1
    return float(np.dot(coef, x) / (n * x.sum()))


def fair_score(measure, exp: ExposureVector) -> float:
    measure = MeasureId.parse(measure) if isinstance(measure, str) else measure
    counts = exp.counts
    if counts.sum() <= 0:
        raise ValueError("exposure vector is empty")
    if measure is MeasureId.JAIN:
        return jain(counts)
    if measure is MeasureId.QF:
        return qf(counts)
    if measure is MeasureId.ENT:
        return entropy(counts)
    if measure is MeasureId.FSAT:
        return fsat(counts, exp.k, exp.m)
    if measure is MeasureId.GINI:
        return gini(counts)
    raise ValueError(f"{measure.value} is not a fairness measure")


def fair_scores(counts: np.ndarray, k: int, m: int, measures=FAIR_MEASURES) -> dict:
    exp = ExposureVector(counts=counts, k=k, m=m)
    return {f: fair_score(f, exp) for f in measures}


# -- joint fairness + relevance ----------------------------------------------

@dataclass
class _JointInputs:
    exposure: sparse.csr_matrix   # (m, n) position weight of each top-k item
    relevance: sparse.csr_matrix  # (m, n) binary test relevance
    hist_sizes: np.ndarray        # |H_u|
    rel_sizes: np.ndarray         # |R*_u|
    users: list
    n: int
    k: int


def _joint_inputs(run: RunTable, split, k: int) -> _JointInputs:
    users = evaluated_users(run, split)
    if not users:
        raise ValueError("no evaluable users in run")
    n = split.n_items
    w = position_weights(k)
    rows, cols, vals = [], [], []
    rrows, rcols = [], []
    for row, u in enumerate(users):
        top = run.lists[u][:k]
        rows.extend([row] * len(top))
        cols.extend(top)
        vals.extend(w[: len(top)])
        rel = sorted(split.test[u])
        rrows.extend([row] * len(rel))
        rcols.extend(rel)
    m = len(users)
    E = sparse.csr_matrix((vals, (rows, cols)), shape=(m, n))
    R = sparse.csr_matrix((np.ones(len(rrows)), (rrows, rcols)), shape=(m, n))
    hist = np.array([len(split.history(u)) for u in users])
    nrel = np.array([len(split.test[u]) for u in users])
    return _JointInputs(E, R, hist, nrel, users, n, k)


def item_better_off(run: RunTable, split, k: int) -> float:
    """IBO: share of items whose impact beats 1.1x their uniform-policy impact.

    Saito & Joachims (2022), fair ranking as fair division: the impact of item
    i is Imp_i = (1/m) sum_u r_ui e_u(i). Under the uniform policy each
    candidate item (not in H_u) of user u receives expected exposure
    sum_{j<=k} w_j / (n - |H_u|). Items with zero impact under both policies
    are not better off.
    """
    J = _joint_inputs(run, split, k)
    m = len(J.users)
    impact = np.asarray(J.relevance.multiply(J.exposure).sum(axis=0)).ravel() / m
    uniform_expo = position_weights(k).sum() / (J.n - J.hist_sizes)
    uniform = np.asarray(J.relevance.multiply(uniform_expo[:, None]).sum(axis=0)).ravel() / m
    better = (uniform > 0) & (impact > BETTER_OFF_MARGIN * uniform)
    return float(np.count_nonzero(better) / J.n)


def mean_max_envy(run: RunTable, split, k: int) -> float:
    """MME: mean over items of the largest impact gain from taking another item's exposure.

    Saito & Joachims (2022): envy(i, j) = (1/m) sum_u r_ui (e_u(j) - e_u(i)),
    MME = (1/n) sum_i max_j envy(i, j). j = i is included so envy is >= 0.
    """
    J = _joint_inputs(run, split, k)
    m = len(J.users)
    swap = (J.relevance.T @ J.exposure).tocsr()   # [i, j] = sum_u r_ui e_uj
    row_max = np.asarray(swap.max(axis=1).todense()).ravel()
    own = swap.diagonal()
    envy = np.maximum(row_max - own, 0.0) / m
    return float(envy.mean())


def inequity_amortized_attention(run: RunTable, split, k: int) -> float:
    """IAA: mean absolute gap between received attention and relevance.

    Biega et al. (2018), equity of attention, as applied to recommendation by
    Borges & Stefanidis (2019): IAA = (1/(m n)) sum_u sum_i |a_ui - r_ui| with
    attention a_ui = 1/log2(1 + rank) inside the top-k (0 elsewhere) and
    binary relevance r_ui.
    """
    J = _joint_inputs(run, split, k)
    m = len(J.users)
    diff = abs(J.exposure - J.relevance)
    return float(diff.sum() / (m * J.n))


def _target_exposure(J: _JointInputs):
    """Per-user expected exposure of relevant / other candidate items under the ideal policy.

    The ideal stochastic policy ranks the relevant items uniformly at random
    above all remaining candidate items (not in H_u), which are themselves
    shuffled uniformly (Diaz et al. 2020).
    """
    w = position_weights(J.k)
    cum = np.concatenate([[0.0], np.cumsum(w)])
    top = np.minimum(J.rel_sizes, J.k)
    rel_target = cum[top] / J.rel_sizes
    others = J.n - J.hist_sizes - J.rel_sizes
    rest = cum[J.k] - cum[top]
    other_target = np.divide(rest, others, out=np.zeros(len(others)), where=others > 0)
    return rel_target, other_target


def ii_fairness(run: RunTable, split, k: int) -> float:
    """II-F: mean squared gap between system and target exposure per (user, item).

    Diaz et al. (2020) expected exposure; Wu et al. (2022) individual-user to
    individual-item form: II-F = (1/(m n)) sum_u sum_i (E_ui - E*_ui)^2 with E*
    from the ideal policy of ``_target_exposure``. A deterministic run is a
    policy with all mass on one ranking.
    """
    J = _joint_inputs(run, split, k)
    rel_t, oth_t = _target_exposure(J)
    others = J.n - J.hist_sizes - J.rel_sizes
    total = 0.0
    E, R = J.exposure, J.relevance
    for row in range(len(J.users)):
        e = E.getrow(row)
        cols, vals = e.indices, e.data
        is_rel = np.asarray(R[row, cols].todense()).ravel() > 0
        target = np.where(is_rel, rel_t[row], oth_t[row])
        cross = float(np.dot(vals, target))
        total += (float(np.dot(vals, vals)) - 2.0 * cross
                  + J.rel_sizes[row] * rel_t[row] ** 2 + others[row] * oth_t[row] ** 2)
    return float(total / (len(J.users) * J.n))


def ai_fairness(run: RunTable, split, k: int) -> float:
    """AI-F: squared gap between the user-averaged system and target exposure per item.

    Diaz et al. (2020) / Wu et al. (2022): AI-F = (1/n) sum_i ((1/m) sum_u (E_ui - E*_ui))^2.
    """
    J = _joint_inputs(run, split, k)
    m = len(J.users)
    rel_t, oth_t = _target_exposure(J)
    system = np.asarray(J.exposure.sum(axis=0)).ravel()
    target = np.full(J.n, oth_t.sum())
    H = _history_matrix(run, split, J)
    target -= np.asarray(H.T @ oth_t).ravel()
    target += np.asarray(J.relevance.T @ (rel_t - oth_t)).ravel()
    gap = (system - target) / m
    return float(np.dot(gap, gap) / J.n)


def _history_matrix(run, split, J: _JointInputs) -> sparse.csr_matrix:
    rows, cols = [], []
    for row, u in enumerate(J.users):
        h = sorted(split.history(u))
        rows.extend([row] * len(h))
        cols.extend(h)
    return sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(J.users), J.n))


_JOINT_FUNCS = {
    MeasureId.IBO: item_better_off,
    MeasureId.MME: mean_max_envy,
    MeasureId.IAA: inequity_amortized_attention,
    MeasureId.IIF: ii_fairness,
    MeasureId.AIF: ai_fairness,
}


def joint_score(measure, run: RunTable, split, k: int) -> float:
    measure = MeasureId.parse(measure) if isinstance(measure, str) else measure
    if measure.kind != "joint":
        raise ValueError(f"{measure.value} is not a joint measure")
    return _JOINT_FUNCS[measure](run, split, k)


def evaluate(run: RunTable, split, k: int, measures=None) -> dict:
    """All requested measures for one run, keyed by MeasureId."""
    measures = list(MeasureId) if measures is None else parse_measures(measures)
    out = {}
    if any(m.kind == "rel" for m in measures):
        mat = rel_matrix(run, split, k)
        for m in measures:
            if m.kind == "rel":
                out[m] = float(mat[:, rel_column(m)].mean())
    if any(m.kind == "fair" for m in measures):
        users = evaluated_users(run, split)
        exp = exposure(run.restrict(users), k, split.n_items)
        for m in measures:
            if m.kind == "fair":
                out[m] = fair_score(m, exp)
    for m in measures:
        if m.kind == "joint":
            out[m] = joint_score(m, run, split, k)
    return {m: out[m] for m in measures}
