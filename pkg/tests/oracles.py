"""Independent reference implementations used only by the tests.

These are deliberately literal (loops over definitions, exhaustive search)
and share no code with the package.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter

import numpy as np


def peel_k_core(pairs, core):
    """Repeatedly delete one under-degree node at a time until none is left."""
    edges = set(pairs)
    while True:
        ud = Counter(u for u, _ in edges)
        idg = Counter(i for _, i in edges)
        low_u = sorted(u for u, d in ud.items() if d < core)
        low_i = sorted(i for i, d in idg.items() if d < core)
        if low_u:
            edges = {e for e in edges if e[0] != low_u[0]}
        elif low_i:
            edges = {e for e in edges if e[1] != low_i[0]}
        else:
            return edges


def user_measures(ranked, relevant, k):
    """HR, MRR, P, R, MAP, NDCG for one user, straight from the definitions."""
    top = list(ranked)[:k]
    rel = [1 if i in relevant else 0 for i in top]
    hits = sum(rel)
    hr = 1.0 if hits else 0.0
    mrr = 0.0
    for pos, r in enumerate(rel, 1):
        if r:
            mrr = 1.0 / pos
            break
    p = hits / k
    r = hits / len(relevant)
    norm = min(len(relevant), k)
    ap = 0.0
    seen = 0
    for pos, x in enumerate(rel, 1):
        if x:
            seen += 1
            ap += seen / pos
    ap /= norm
    dcg = sum(x / math.log2(pos + 1) for pos, x in enumerate(rel, 1))
    idcg = sum(1 / math.log2(pos + 1) for pos in range(1, norm + 1))
    return {"HR": hr, "MRR": mrr, "P": p, "R": r, "MAP": ap, "NDCG": dcg / idcg}


def jain(e):
    e = [float(x) for x in e]
    return sum(e) ** 2 / (len(e) * sum(x * x for x in e))


def entropy(e):
    tot = sum(e)
    h = 0.0
    for x in e:
        if x > 0:
            p = x / tot
            h -= p * math.log(p)
    return h / math.log(len(e))


def gini_mad(e):
    """Gini via mean absolute difference over all ordered pairs."""
    n = len(e)
    tot = sum(e)
    return sum(abs(a - b) for a in e for b in e) / (2 * n * tot)


def tally(lists, k, n):
    c = [0] * n
    for lst in lists:
        for i in lst[:k]:
            c[i] += 1
    return c


def kendall_pairs(a, b):
    """tau-b by enumerating all pairs."""
    n = len(a)
    conc = disc = ta = tb = 0
    for i in range(n):
        for j in range(i + 1, n):
            x = a[i] - a[j]
            y = b[i] - b[j]
            if x == 0 and y == 0:
                continue
            if x == 0:
                ta += 1
            elif y == 0:
                tb += 1
            elif (x > 0) == (y > 0):
                conc += 1
            else:
                disc += 1
    den = math.sqrt((conc + disc + ta) * (conc + disc + tb))
    return (conc - disc) / den if den else math.nan


# -- exhaustive enumeration for tiny instances ---------------------------------

REL_KEYS = ("P", "R", "MAP", "NDCG")


def user_options(split, u, k):
    """Every feasible top-k set for user u, each ordered relevant-first.

    Relevant-first is the best ordering of a fixed set for every measure, so
    it is enough for both optimality and dominance checks.
    """
    n = split.n_items
    allowed = [i for i in range(n) if i not in split.history(u)]
    rel = split.test[u]
    opts = []
    for combo in itertools.combinations(allowed, k):
        lst = [i for i in combo if i in rel] + [i for i in combo if i not in rel]
        opts.append((lst, user_measures(lst, rel, k)))
    return opts


def enumerate_scores(split, k):
    """Score table over every feasible joint assignment.

    Returns (rel, counts): rel[key] is a vector with one mean per assignment,
    counts is (assignments, n) exposure.
    """
    users = sorted(split.test)
    n = split.n_items
    per_user = [user_options(split, u, k) for u in users]
    sizes = [len(o) for o in per_user]
    grids = np.indices(sizes).reshape(len(users), -1).T  # (A, m) option index per user
    rel = {}
    for key in REL_KEYS:
        vals = np.zeros(len(grids))
        for col, opts in enumerate(per_user):
            table = np.array([o[1][key] for o in opts])
            vals = vals + table[grids[:, col]]
        rel[key] = vals / len(users)
    counts = np.zeros((len(grids), n), dtype=np.int64)
    for col, opts in enumerate(per_user):
        inc = np.zeros((len(opts), n), dtype=np.int64)
        for r, (lst, _) in enumerate(opts):
            inc[r, lst] = 1
        counts += inc[grids[:, col]]
    return rel, counts


def fair_rows(counts):
    """Jain, Ent and Gini for each row of an exposure matrix (vectorised literal formulas)."""
    c = counts.astype(float)
    n = c.shape[1]
    tot = c.sum(axis=1)
    out = {"Jain": tot ** 2 / (n * (c ** 2).sum(axis=1))}
    p = c / tot[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(p > 0, p * np.log(p), 0.0)
    out["Ent"] = -plogp.sum(axis=1) / math.log(n)
    mad = np.abs(c[:, :, None] - c[:, None, :]).sum(axis=(1, 2))
    out["Gini"] = mad / (2 * n * tot)
    return out


def best_user_values(split, k):
    """Per-user maximum of each relevance measure over feasible lists."""
    out = {key: [] for key in REL_KEYS}
    for u in sorted(split.test):
        opts = user_options(split, u, k)
        for key in REL_KEYS:
            out[key].append(max(o[1][key] for o in opts))
    return out
