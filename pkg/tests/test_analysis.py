import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from dpfr.analysis import (
    avg_baseline,
    best_model_disagreement,
    equivalence_flag,
    evaluator_tau,
    kendall_tau,
    rank_runs,
)
from dpfr.measures import FIT_PAIRS, MeasureId

from oracles import kendall_pairs

P_JAIN = (MeasureId.P, MeasureId.JAIN)


def weak_orders(n):
    """Every score vector over n elements with at most one tie group (values 0..)."""
    seen = set()
    for perm in itertools.permutations(range(n)):
        seen.add(perm)
        for lo in range(n):
            for hi in range(lo + 1, n):
                # values lo..hi collapse into one tie group
                seen.add(tuple(lo if lo <= x <= hi else x for x in perm))
    return sorted(seen)


def canonical(n):
    """Sorted vectors with at most one tie group; any pair can be relabelled to have one of these first."""
    out = [tuple(range(n))]
    for lo in range(n):
        for hi in range(lo + 1, n):
            out.append(tuple(lo if lo <= x <= hi else x for x in range(n)))
    return out


def test_identical_and_reversed():
    assert kendall_tau([1, 2, 3, 4], [1, 2, 3, 4]) == 1.0
    assert kendall_tau([1, 2, 3, 4], [4, 3, 2, 1]) == -1.0


def test_all_tied_is_undefined():
    assert math.isnan(kendall_tau([1, 1, 1], [1, 2, 3]))
    assert not equivalence_flag(kendall_tau([1, 1, 1], [1, 2, 3]))


def test_six_elements_one_tie_group():
    a = [1, 2, 2, 2, 5, 6]
    b = [3, 1, 2, 6, 5, 4]
    assert kendall_tau(a, b) == kendall_pairs(a, b)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_tau_matches_pair_enumeration(n):
    vecs = weak_orders(n)
    for a in canonical(n):
        for b in vecs:
            want = kendall_pairs(a, b)
            got = kendall_tau(a, b)
            assert (math.isnan(got) and math.isnan(want)) or got == want


def test_tau_matches_scipy():
    rng = random.Random(3)
    for _ in range(200):
        n = rng.randint(2, 12)
        a = [rng.randint(0, 4) for _ in range(n)]
        b = [rng.randint(0, 4) for _ in range(n)]
        want = stats.kendalltau(a, b).statistic
        got = kendall_tau(a, b)
        assert (math.isnan(got) and math.isnan(want)) or got == pytest.approx(want, abs=1e-12)


@given(st.lists(st.integers(0, 5), min_size=2, max_size=10), st.randoms(use_true_random=False))
@settings(max_examples=200, deadline=None)
def test_tau_symmetric_and_self(a, rnd):
    b = a[:]
    rnd.shuffle(b)
    t1, t2 = kendall_tau(a, b), kendall_tau(b, a)
    assert (math.isnan(t1) and math.isnan(t2)) or t1 == pytest.approx(t2)
    if len(set(a)) > 1:
        assert kendall_tau(a, a) == pytest.approx(1.0)


def test_direction_awareness():
    dp = [0.1, 0.2, 0.3]      # lower is better
    ndcg = [0.9, 0.8, 0.7]    # higher is better
    assert evaluator_tau(dp, False, ndcg, True) == 1.0
    assert evaluator_tau(dp, False, [0.1, 0.2, 0.3], False) == 1.0


def test_avg_baseline():
    assert avg_baseline(0.2, 0.9, MeasureId.JAIN) == pytest.approx(0.55)
    assert avg_baseline(0.5, 0.5, "Jain") == 0.5
    assert avg_baseline(0.65, 0.2, MeasureId.JAIN) == pytest.approx(0.425)
    assert avg_baseline(0.6, 0.3, MeasureId.GINI) == pytest.approx(0.65)


def test_equivalence_threshold():
    assert equivalence_flag(0.9)
    assert not equivalence_flag(0.89)
    assert equivalence_flag(1.0)


def test_rank_runs():
    r = rank_runs({"a": 0.3, "b": 0.1, "c": 0.2}, "DPFR", higher_better=False)
    assert r.tags == ["b", "c", "a"]


FIG1 = {"A": (0.2, 0.9), "B": (0.65, 0.2), "C": (0.5, 0.5)}
FIG1_DPFR = {"A": 0.582, "B": 0.578, "C": 0.376}


def test_disagreement_fig1():
    avg = {t: avg_baseline(r, f, MeasureId.JAIN) for t, (r, f) in FIG1.items()}
    out = best_model_disagreement({P_JAIN: FIG1_DPFR}, {P_JAIN: avg})
    assert out["pairs"][P_JAIN] == 1
    assert out["overall"] == 100.0 and out["set-based"] == 100.0
    assert math.isnan(out["rank-based"])


def test_disagreement_none_and_half():
    same_d = {p: {"x": 0.1, "y": 0.5} for p in FIT_PAIRS}
    same_a = {p: {"x": 0.9, "y": 0.2} for p in FIT_PAIRS}
    assert best_model_disagreement(same_d, same_a)["overall"] == 0.0
    mixed_a = {p: ({"x": 0.1, "y": 0.9} if j % 2 else {"x": 0.9, "y": 0.1}) for j, p in enumerate(FIT_PAIRS)}
    out = best_model_disagreement(same_d, mixed_a)
    assert out["overall"] == 50.0
    # groups have equal size here, so overall is their plain mean
    assert out["overall"] == pytest.approx((out["set-based"] + out["rank-based"]) / 2)


def test_disagreement_ties_agree_if_sets_intersect():
    d = {P_JAIN: {"x": 0.1, "y": 0.1, "z": 0.5}}
    a = {P_JAIN: {"x": 0.2, "y": 0.7, "z": 0.7}}
    assert best_model_disagreement(d, a)["overall"] == 0.0
