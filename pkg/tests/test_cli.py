import csv
import json
import random

import pytest

from dpfr.cli import main, parse_config, run_pipeline

TINY = "synth = tiny\nk = 3\nkprime = 4\n"


def csv_hashes(manifest):
    out = {}
    for st in manifest["stages"]:
        out.update({p: h for p, h in st["outputs"].items() if p.endswith(".csv")})
    return out


def test_parse_config_and_overrides():
    cfg = parse_config("synth = mid  # comment\npf_points = full\nrerankers = gs, cm\n", ["alpha=0.25"])
    assert cfg.pf_points is None and cfg.rerankers == ["gs", "cm"] and cfg.alpha == 0.25
    with pytest.raises(ValueError, match="unknown key"):
        parse_config("synth = mid\nbogus = 1\n")
    with pytest.raises(ValueError):
        parse_config("synth = mid\nk = 30\n")
    with pytest.raises(ValueError):
        parse_config("k = 3\n")


def test_tiny_pipeline_manifest(tmp_path):
    cfg = parse_config(TINY + f"out = {tmp_path}\n")
    status, man = run_pipeline(cfg)
    assert status == 0 and man["status"] == "ok"
    files = set(csv_hashes(man))
    assert "eval.csv" in files and "dpfr.csv" in files
    assert any(f.startswith("pf/") for st in man["stages"] for f in st["outputs"])
    assert {"analysis/tau.csv", "analysis/disagreement.csv", "analysis/equivalence.csv"} <= files
    assert man["version"]
    assert all("seconds" in st for st in man["stages"])


def test_pipeline_deterministic(tmp_path):
    a = run_pipeline(parse_config(TINY + f"out = {tmp_path / 'a'}\n"))[1]
    b = run_pipeline(parse_config(TINY + f"out = {tmp_path / 'b'}\n"))[1]
    assert csv_hashes(a) == csv_hashes(b)


def test_resume_skips_unchanged(tmp_path):
    cfg = parse_config(TINY + f"out = {tmp_path}\n")
    first = run_pipeline(cfg)[1]
    second = run_pipeline(cfg, resume=True)[1]
    assert all(st["skipped"] for st in second["stages"])
    assert csv_hashes(first) == csv_hashes(second)
    (tmp_path / "dpfr.csv").unlink()
    third = run_pipeline(cfg, resume=True)[1]
    skipped = {st["name"]: st["skipped"] for st in third["stages"]}
    assert not skipped["dpfr"] and skipped["eval"] and skipped["pf"]


def test_estimated_pf_rows(tmp_path):
    out = tmp_path / "pf"
    assert main(["synth", "--preset", "mid", "--out", str(tmp_path / "s")]) == 0
    assert main(["pf", "--split", str(tmp_path / "s"), "--out", str(out), "--points", "6"]) == 0
    for path in out.glob("*.csv"):
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["step", "rel", "fair"] and len(rows) == 7


def test_failed_stage_keeps_partial_manifest(tmp_path):
    cfg = parse_config(f"dataset = {tmp_path / 'missing.tsv'}\nruns = x.tsv\nout = {tmp_path / 'o'}\n")
    status, man = run_pipeline(cfg)
    assert status == 1 and man["status"] == "failed"
    saved = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert saved["stages"][0]["status"] == "failed"


def test_stage_commands_on_raw_data(tmp_path, capsys):
    rng = random.Random(0)
    raw = tmp_path / "raw.tsv"
    with raw.open("w") as fh:
        fh.write("user\titem\trating\ttimestamp\n")
        for t in range(3000):
            fh.write(f"u{rng.randrange(60)}\ti{rng.randrange(80)}\t{rng.randint(1, 5)}\t{t}\n")
    pre = tmp_path / "pre.tsv"
    assert main(["--json", "preprocess", "--input", str(raw), "--out", str(pre), "--rating-threshold", "3"]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["users"] > 0 and 0 < stats["sparsity"] < 1
    sp = tmp_path / "split"
    assert main(["split", "--input", str(pre), "--out", str(sp)]) == 0
    assert (sp / "test.tsv").exists() and (sp / "stats.json").exists()

    # a popularity run over items outside each user's history
    from dpfr.dataset import read_split
    s = read_split(sp)
    run = tmp_path / "pop.tsv"
    with run.open("w") as fh:
        for u in s.test_users:
            items = [i for i in range(s.n_items) if i not in s.history(u)][:25]
            for j, i in enumerate(items):
                fh.write(f"{s.user_ids[u]}\t{s.item_ids[i]}\t{25 - j}\n")
    cm = tmp_path / "pop-cm.tsv"
    assert main(["rerank", "--split", str(sp), "--run", str(run), "--method", "cm", "--out", str(cm)]) == 0
    ev = tmp_path / "eval.csv"
    assert main(["eval", "--split", str(sp), "--runs", str(run), str(cm), "--out", str(ev), "--threads", "2"]) == 0
    rows = list(csv.reader(ev.open()))
    assert rows[0][0] == "run" and len(rows) == 3 and len(rows[0]) == 17
    pf = tmp_path / "pf"
    assert main(["pf", "--split", str(sp), "--out", str(pf), "--points", "full", "--measures", "P,NDCG,Jain,Gini"]) == 0
    assert sorted(p.name for p in pf.glob("*.csv")) == ["NDCG-Gini.csv", "NDCG-Jain.csv", "P-Gini.csv", "P-Jain.csv"]
    dp = tmp_path / "dpfr.csv"
    assert main(["dpfr", "--pf", str(pf), "--eval", str(ev), "--out", str(dp)]) == 0
    assert (tmp_path / "dpfr_best.csv").exists()
    assert main(["analyze", "--eval", str(ev), "--dpfr", str(dp), "--out", str(tmp_path / "an")]) == 0


def test_bad_input_exit_code(tmp_path):
    assert main(["eval", "--split", str(tmp_path), "--runs", "nope.tsv", "--out", str(tmp_path / "e.csv")]) == 1
