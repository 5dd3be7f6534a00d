import random

import numpy as np
import pytest

from dpfr.dataset import SplitDataset
from dpfr.runs import RunTable, RunValidationError, exposure, load_run, write_run

from oracles import tally


def small_split(m=3, n=8):
    train = {u: frozenset({u}) for u in range(m)}
    test = {u: frozenset({(u + 3) % n}) for u in range(m)}
    return SplitDataset(train, {}, test, [f"u{u}" for u in range(m)], [f"i{i}" for i in range(n)])


def test_load_two_users(tmp_path):
    sp = small_split()
    p = tmp_path / "run.tsv"
    p.write_text("u0\ti3\t0.9\nu0\ti4\t0.5\nu1\ti5\t0.2\nu1\ti6\t0.8\n")
    run = load_run(p, sp)
    assert run.users() == [0, 1]
    assert run.lists[1] == [6, 5]  # re-sorted by score
    assert run.name == "run"


def test_history_violation_lists_pairs(tmp_path):
    sp = small_split()
    p = tmp_path / "bad.tsv"
    p.write_text("u0\ti0\t0.9\nu0\ti4\t0.5\n")
    with pytest.raises(RunValidationError, match=r"\(0,0\)"):
        load_run(p, sp)


def test_duplicate_item_rejected(tmp_path):
    p = tmp_path / "dup.tsv"
    p.write_text("u0\ti3\t0.9\nu0\ti3\t0.5\n")
    with pytest.raises(RunValidationError, match="duplicate"):
        load_run(p, small_split())


def test_unknown_users_dropped_with_warning(tmp_path, caplog):
    p = tmp_path / "r.tsv"
    p.write_text("u0\ti3\t0.9\nzz\ti3\t0.9\n")
    run = load_run(p, small_split())
    assert run.users() == [0]
    assert "dropped 1" in caplog.text


def test_score_ties_keep_file_order(tmp_path):
    p = tmp_path / "r.tsv"
    p.write_text("u0\ti5\t1.0\nu0\ti3\t1.0\nu0\ti4\t2.0\n")
    assert load_run(p, small_split()).lists[0] == [4, 5, 3]


def test_gzip_roundtrip(tmp_path):
    sp = small_split()
    run = RunTable({0: [3, 4], 1: [5, 2]}, {0: [0.5, 0.25], 1: [1.0, 1.0]})
    write_run(run, tmp_path / "r.tsv.gz", sp)
    back = load_run(tmp_path / "r.tsv.gz", sp)
    assert back.lists == run.lists and back.scores == run.scores
    first = (tmp_path / "r.tsv.gz").read_bytes()
    write_run(run, tmp_path / "r.tsv.gz", sp)
    assert (tmp_path / "r.tsv.gz").read_bytes() == first


def test_validate_non_increasing_scores():
    with pytest.raises(RunValidationError):
        RunTable({0: [1, 2]}, {0: [0.1, 0.2]}).validate()


def test_exposure_extremes():
    m, n, k = 5, 8, 3
    same = RunTable({u: [0, 1, 2, 3] for u in range(m)})
    assert exposure(same, k, n).counts.tolist() == [m, m, m, 0, 0, 0, 0, 0]
    # k*m = 16 slots over n = 8 items, two each
    rr = RunTable({u: [(2 * u + j) % n for j in range(2)] for u in range(8)})
    assert exposure(rr, 2, n).counts.tolist() == [2] * n


def test_exposure_short_list_names_user():
    with pytest.raises(RunValidationError, match="user 1"):
        exposure(RunTable({0: [1, 2], 1: [3]}), 2, 5)


def test_exposure_matches_tally_and_sums():
    rng = random.Random(5)
    n, k = 40, 10
    lists = {u: rng.sample(range(n), 12) for u in range(100)}
    exp = exposure(RunTable(lists), k, n)
    assert exp.counts.tolist() == tally([lists[u] for u in range(100)], k, n)
    assert exp.counts.sum() == k * 100
    assert exp.counts.max() <= exp.m


def test_exposure_permutation_invariant_within_topk():
    rng = random.Random(2)
    lists = {u: rng.sample(range(20), 6) for u in range(10)}
    shuffled = {u: rng.sample(v[:4], 4) + v[4:] for u, v in lists.items()}
    a = exposure(RunTable(lists), 4, 20).counts
    b = exposure(RunTable(shuffled), 4, 20).counts
    assert np.array_equal(a, b)
