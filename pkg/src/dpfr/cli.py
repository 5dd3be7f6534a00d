"""Command-line entry point: individual stages plus a config-driven pipeline."""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

from . import __version__
from .analysis import (
    PAIR_GROUPS,
    avg_baseline,
    best_model_disagreement,
    equivalence_flag,
    evaluator_tau,
    is_undefined,
)
from .dataset import (
    PreprocessConfig,
    dataset_stats,
    preprocess,
    read_interactions,
    read_split,
    split,
    split_stats,
    write_split,
)
from .distance import dpfr, reference_point
from .measures import FAIR_MEASURES, REL_MEASURES, MeasureId, ScorePoint, evaluate, pair_name, parse_measures
from .pareto import build_frontier, oracle_to_fair
from .rerank import RERANKERS, rerank
from .runs import RunTable, load_run, write_run
from .synth import generate, preset

logger = logging.getLogger("dpfr")


class StageError(RuntimeError):
    pass


# -- small io helpers ------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path, header, rows) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _pair_from_name(name: str):
    rel, fair = name.split("-", 1)
    return MeasureId.parse(rel), MeasureId.parse(fair)


def _emit(args, summary: dict) -> None:
    if getattr(args, "json", False):
        print(json.dumps(summary, sort_keys=True, default=str))
    else:
        for key, val in summary.items():
            print(f"{key}: {val}")


# -- stages ------------------------------------------------------------------------

def stage_preprocess(inp, out, threshold=None, cap=None, core=5) -> dict:
    raw = read_interactions(inp)
    ds = preprocess(raw, PreprocessConfig(threshold, cap, core))
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("user\titem\trating\ttimestamp\n")
        for x in ds.interactions:
            r = "" if x.rating is None else repr(float(x.rating))
            t = "" if x.timestamp is None else str(x.timestamp)
            fh.write(f"{x.user_id}\t{x.item_id}\t{r}\t{t}\n")
    return dataset_stats(ds)


def stage_split(inp, out_dir, mode="temporal", seed=0, ratio=(0.6, 0.2, 0.2), min_train=5) -> dict:
    ds = preprocess(read_interactions(inp), PreprocessConfig(core=1))
    sp = split(ds, ratio, mode, seed, min_train)
    write_split(sp, out_dir)
    return split_stats(sp)


def stage_synth(out_dir, name="mid", **overrides) -> list[str]:
    spec = preset(name, **{k: v for k, v in overrides.items() if v is not None})
    sp, runs = generate(spec, rerank=False)
    write_split(sp, out_dir)
    run_dir = os.path.join(out_dir, "runs")
    os.makedirs(run_dir, exist_ok=True)
    paths = []
    for run in runs:
        path = os.path.join(run_dir, f"{run.name}.tsv")
        write_run(run, path, sp)
        paths.append(path)
    return paths


def stage_rerank(split_dir, run_path, method, out, k=10, kprime=25, beta=0.05, replace_frac=0.25) -> str:
    sp = read_split(split_dir)
    run = load_run(run_path, sp)
    kw = {"beta": beta, "replace_frac": replace_frac} if method == "gs" else {}
    out_run = rerank(method, run, k, kprime, n_items=sp.n_items, **kw)
    out_run.validate(sp)
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    write_run(out_run, out, sp)
    return out


def evaluate_runs(sp, runs: list[RunTable], k: int, measures, threads: int = 1) -> list[dict]:
    def one(run):
        return evaluate(run, sp, k, measures)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(one, runs))
    return [one(r) for r in runs]


def stage_eval(split_dir, run_paths, out, k=10, measures=None, threads=1) -> int:
    sp = read_split(split_dir)
    measures = list(MeasureId) if measures is None else parse_measures(measures)
    runs = [load_run(p, sp) for p in run_paths]
    results = evaluate_runs(sp, runs, k, measures, threads)
    write_csv(out, ["run"] + [m.value for m in measures],
              [[r.name] + [res[m] for m in measures] for r, res in zip(runs, results)])
    return len(runs)


def stage_pf(split_dir, out_dir, k=10, points=None, measures=None) -> dict:
    """One CSV of recorded (step, rel, fair) per Rel x Fair pair, plus meta.json."""
    sp = read_split(split_dir)
    measures = list(REL_MEASURES + FAIR_MEASURES) if measures is None else parse_measures(measures)
    rels = [m for m in measures if m.kind == "rel"]
    fairs = [m for m in measures if m.kind == "fair"]
    if not rels or not fairs:
        raise StageError("pf needs at least one relevance and one fairness measure")
    trace = oracle_to_fair(sp, k, points, rels + fairs)
    os.makedirs(out_dir, exist_ok=True)
    meta = {"k": k, "points": "full" if points is None else points, "num_rep": trace.num_rep,
            "replacements": trace.replacements, "records": len(trace.records),
            "seconds": round(trace.seconds, 6), "pairs": {}}
    for rel in rels:
        for fair in fairs:
            pair = (rel, fair)
            pts = trace.points(pair)
            write_csv(os.path.join(out_dir, f"{pair_name(pair)}.csv"), ["step", "rel", "fair"],
                      [[int(p.tag), p.rel, p.fair] for p in pts])
            fr = build_frontier(pts, pair)
            meta["pairs"][pair_name(pair)] = {"gradient": fr.gradient, "fit": fr.fit,
                                              "frontier_points": len(fr.points)}
    write_json(os.path.join(out_dir, "meta.json"), meta)
    return meta


def load_frontiers(pf_dir) -> dict:
    with open(os.path.join(pf_dir, "meta.json"), encoding="utf-8") as fh:
        meta = json.load(fh)
    out = {}
    for name in sorted(meta["pairs"]):
        pair = _pair_from_name(name)
        _, rows = read_csv(os.path.join(pf_dir, f"{name}.csv"))
        pts = [ScorePoint(float(r[1]), float(r[2]), r[0]) for r in rows]
        out[pair] = build_frontier(pts, pair)
    return out


def read_eval(path) -> tuple[list[MeasureId], dict[str, dict]]:
    header, rows = read_csv(path)
    measures = [MeasureId.parse(h) for h in header[1:]]
    return measures, {r[0]: {m: float(v) for m, v in zip(measures, r[1:])} for r in rows}


def stage_dpfr(pf_dir, eval_path, out, alpha=0.5) -> dict:
    frontiers = load_frontiers(pf_dir)
    _, scores = read_eval(eval_path)
    runs = list(scores)
    pairs = [p for p, fr in frontiers.items()
             if fr.fit and p[0] in scores[runs[0]] and p[1] in scores[runs[0]]]
    skipped = [pair_name(p) for p, fr in frontiers.items() if not fr.fit]
    refs = {p: reference_point(frontiers[p], alpha) for p in pairs}
    table = {r: [dpfr(ScorePoint(scores[r][p[0]], scores[r][p[1]]), refs[p]).value for p in pairs] for r in runs}
    write_csv(out, ["run"] + [pair_name(p) for p in pairs], [[r] + table[r] for r in runs])
    best_rows = []
    for j, p in enumerate(pairs):
        best = min(runs, key=lambda r: (table[r][j], runs.index(r)))
        ref = refs[p].point
        best_rows.append([pair_name(p), best, table[best][j], ref.rel, ref.fair])
    base = os.path.splitext(out)[0]
    write_csv(base + "_best.csv", ["pair", "best_run", "dpfr", "ref_rel", "ref_fair"], best_rows)
    return {"runs": len(runs), "pairs": len(pairs), "unfit_pairs": skipped}


def stage_analyze(eval_path, dpfr_path, out_dir) -> dict:
    measures, scores = read_eval(eval_path)
    header, rows = read_csv(dpfr_path)
    pairs = [_pair_from_name(h) for h in header[1:]]
    runs = [r[0] for r in rows]
    dp = {p: {r[0]: float(r[j + 1]) for r in rows} for j, p in enumerate(pairs)}
    avg = {p: {r: avg_baseline(scores[r][p[0]], scores[r][p[1]], p[1]) for r in runs} for p in pairs}
    evaluators = [m.value for m in measures] + ["avg"]
    tau_rows, eq_rows = [], []
    for p in pairs:
        d = [dp[p][r] for r in runs]
        taus = []
        for m in measures:
            taus.append(evaluator_tau(d, False, [scores[r][m] for r in runs], m.higher_better))
        taus.append(evaluator_tau(d, False, [avg[p][r] for r in runs], True))
        tau_rows.append([pair_name(p)] + ["undefined" if is_undefined(t) else t for t in taus])
        eq_rows.append([pair_name(p)] + [int(equivalence_flag(t)) for t in taus])
    os.makedirs(out_dir, exist_ok=True)
    write_csv(os.path.join(out_dir, "tau.csv"), ["pair"] + evaluators, tau_rows)
    write_csv(os.path.join(out_dir, "equivalence.csv"), ["pair"] + evaluators, eq_rows)
    dis = best_model_disagreement(dp, avg, PAIR_GROUPS)
    write_csv(os.path.join(out_dir, "disagreement.csv"), ["group", "percent"],
              [[g, dis[g]] for g in list(PAIR_GROUPS) + ["overall"]])
    write_csv(os.path.join(out_dir, "disagreement_pairs.csv"), ["pair", "disagree"],
              [[pair_name(p), f] for p, f in dis["pairs"].items()])
    return {g: dis[g] for g in list(PAIR_GROUPS) + ["overall"]}


# -- pipeline ----------------------------------------------------------------------

@dataclass
class PipelineConfig:
    out: str = "out"
    dataset: str | None = None
    synth: str | None = None
    synth_seed: int = 0
    runs: list = field(default_factory=list)
    rating_threshold: float | None = None
    max_user_interactions: int | None = None
    core: int = 5
    split_mode: str = "temporal"
    split_seed: int = 0
    ratio: tuple = (0.6, 0.2, 0.2)
    min_train: int = 5
    k: int = 10
    kprime: int = 25
    alpha: float = 0.5
    measures: list | None = None
    pf_points: int | None = None
    rerankers: list = field(default_factory=lambda: ["bc", "cm", "gs"])
    beta: float = 0.05
    replace_frac: float = 0.25

    def validate(self) -> None:
        if (self.dataset is None) == (self.synth is None):
            raise ValueError("config needs exactly one of 'dataset' or 'synth'")
        if self.dataset is not None and not self.runs:
            raise ValueError("a real dataset needs precomputed 'runs'")
        if self.k > self.kprime:
            raise ValueError(f"k={self.k} must not exceed k'={self.kprime}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.pf_points is not None and self.pf_points < 2:
            raise ValueError("pf_points must be >= 2 (or 'full')")
        bad = [r for r in self.rerankers if r not in RERANKERS]
        if bad:
            raise ValueError(f"unknown re-rankers {bad}")


def _coerce(name: str, raw: str):
    raw = raw.strip()
    if name in ("runs", "rerankers", "measures"):
        vals = [s.strip() for s in raw.split(",") if s.strip() and s.strip().lower() != "none"]
        return vals if vals or name != "measures" else None
    if name == "ratio":
        return tuple(float(x) for x in raw.replace(":", ",").split(","))
    if raw.lower() in ("", "none"):
        return None
    if name == "pf_points":
        return None if raw.lower() == "full" else int(raw)
    if name in ("synth_seed", "core", "split_seed", "min_train", "k", "kprime", "max_user_interactions"):
        return int(raw)
    if name in ("rating_threshold", "alpha", "beta", "replace_frac"):
        return float(raw)
    return raw


def parse_config(text: str, overrides=()) -> PipelineConfig:
    """Flat ``key = value`` lines (``#`` comments); ``overrides`` are ``key=value`` strings."""
    known = {f.name for f in fields(PipelineConfig)}
    values = {}
    lines = [(n, line) for n, line in enumerate(text.splitlines(), 1)]
    lines += [(f"override {j}", o) for j, o in enumerate(overrides, 1)]
    for where, line in lines:
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {where}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ValueError(f"config line {where}: unknown key {key!r}")
        values[key] = _coerce(key, val)
    cfg = PipelineConfig(**values)
    cfg.validate()
    return cfg


class Manifest:
    def __init__(self, path, config: PipelineConfig, previous: dict | None = None):
        self.path = path
        self.previous = previous or {}
        self.data = {"version": __version__, "config": asdict(config), "status": "running", "stages": []}

    def files(self, paths) -> dict:
        return {os.path.relpath(p, os.path.dirname(self.path)): sha256(p) for p in sorted(paths)}

    def can_skip(self, name, inputs, outputs) -> bool:
        for st in self.previous.get("stages", []):
            if st.get("name") != name or st.get("status") != "ok":
                continue
            if not all(os.path.exists(p) for p in outputs):
                return False
            return st.get("inputs") == self.files(inputs) and st.get("outputs") == self.files(outputs)
        return False

    def record(self, name, status, inputs, outputs, seconds, skipped=False, error=None):
        entry = {"name": name, "status": status, "seconds": round(seconds, 6), "skipped": skipped,
                 "inputs": self.files([p for p in inputs if os.path.exists(p)]),
                 "outputs": self.files([p for p in outputs if os.path.exists(p)])}
        if error:
            entry["error"] = error
        self.data["stages"].append(entry)
        self.save()

    def save(self):
        write_json(self.path, self.data)


def run_pipeline(cfg: PipelineConfig, resume: bool = False, threads: int = 1) -> tuple[int, dict]:
    out = cfg.out
    os.makedirs(out, exist_ok=True)
    mpath = os.path.join(out, "manifest.json")
    previous = None
    if resume and os.path.exists(mpath):
        with open(mpath, encoding="utf-8") as fh:
            previous = json.load(fh)
    man = Manifest(mpath, cfg, previous)
    split_dir = os.path.join(out, "split")
    split_files = [os.path.join(split_dir, f"{n}.tsv") for n in ("train", "val", "test", "users", "items")]

    def stage(name, fn, inputs, outputs):
        if resume and man.can_skip(name, inputs, outputs):
            man.record(name, "ok", inputs, outputs, 0.0, skipped=True)
            logger.info("stage %s: up to date, skipped", name)
            return
        t = time.perf_counter()
        try:
            fn()
        except Exception as exc:
            man.record(name, "failed", inputs, outputs, time.perf_counter() - t, error=str(exc))
            raise StageError(f"stage {name} failed: {exc}") from exc
        man.record(name, "ok", inputs, outputs, time.perf_counter() - t)

    try:
        if cfg.synth is not None:
            base_runs = [os.path.join(split_dir, "runs", f"{n}.tsv") for n in ("relmax", "pop", "mixed", "rr")]
            stage("synth", lambda: stage_synth(split_dir, cfg.synth, seed=cfg.synth_seed,
                                               k=cfg.k, kprime=cfg.kprime),
                  [], split_files + base_runs)
        else:
            pre = os.path.join(out, "interactions.tsv")
            stage("preprocess", lambda: stage_preprocess(cfg.dataset, pre, cfg.rating_threshold,
                                                         cfg.max_user_interactions, cfg.core),
                  [cfg.dataset], [pre])
            stage("split", lambda: stage_split(pre, split_dir, cfg.split_mode, cfg.split_seed,
                                               cfg.ratio, cfg.min_train),
                  [pre], split_files)
            base_runs = list(cfg.runs)

        run_paths = []
        rr_dir = os.path.join(out, "runs")
        for path in base_runs:
            run_paths.append(path)
            stem = os.path.basename(path).split(".")[0]
            for method in cfg.rerankers:
                target = os.path.join(rr_dir, f"{stem}-{method.upper()}.tsv")
                stage(f"rerank:{stem}:{method}",
                      lambda p=path, m=method, t=target: stage_rerank(split_dir, p, m, t, cfg.k, cfg.kprime,
                                                                      cfg.beta, cfg.replace_frac),
                      split_files + [path], [target])
                run_paths.append(target)

        eval_csv = os.path.join(out, "eval.csv")
        stage("eval", lambda: stage_eval(split_dir, run_paths, eval_csv, cfg.k, cfg.measures, threads),
              split_files + run_paths, [eval_csv])
        pf_dir = os.path.join(out, "pf")
        pf_measures = None
        if cfg.measures is not None:
            pf_measures = [m for m in parse_measures(cfg.measures) if m.kind != "joint"]
        stage("pf", lambda: stage_pf(split_dir, pf_dir, cfg.k, cfg.pf_points, pf_measures),
              split_files, [os.path.join(pf_dir, "meta.json")])
        pf_files = sorted(os.path.join(pf_dir, f) for f in os.listdir(pf_dir))
        dpfr_csv = os.path.join(out, "dpfr.csv")
        stage("dpfr", lambda: stage_dpfr(pf_dir, eval_csv, dpfr_csv, cfg.alpha),
              pf_files + [eval_csv], [dpfr_csv, os.path.join(out, "dpfr_best.csv")])
        an_dir = os.path.join(out, "analysis")
        an_files = [os.path.join(an_dir, f) for f in
                    ("tau.csv", "equivalence.csv", "disagreement.csv", "disagreement_pairs.csv")]
        stage("analyze", lambda: stage_analyze(eval_csv, dpfr_csv, an_dir), [eval_csv, dpfr_csv], an_files)
    except StageError as exc:
        man.data["status"] = "failed"
        man.data["error"] = str(exc)
        man.save()
        logger.error("%s", exc)
        return 1, man.data
    man.data["status"] = "ok"
    man.save()
    return 0, man.data


# -- argument parsing --------------------------------------------------------------

def _points(val: str):
    return None if val == "full" else int(val)


def _ratio(val: str):
    return tuple(float(x) for x in val.replace(":", ",").split(","))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dpfr", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    ap.add_argument("--json", action="store_true", help="print summaries as JSON")
    ap.add_argument("--threads", type=int, default=1, help="worker cap for parallel stages")
    # same flags after the subcommand; SUPPRESS keeps the top-level value when absent
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="cmd", required=True)

    def cmd(name, help):
        return sub.add_parser(name, help=help, parents=[common])

    p = cmd("preprocess", "dedup, rating threshold, user cap and k-core filtering")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rating-threshold", type=float)
    p.add_argument("--max-user-interactions", type=int)
    p.add_argument("--core", type=int, default=5)

    p = cmd("split", "global temporal or random train/val/test split")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["temporal", "random"], default="temporal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratio", type=_ratio, default=(0.6, 0.2, 0.2))
    p.add_argument("--min-train", type=int, default=5)

    p = cmd("synth", "write a synthetic split and base runs")
    p.add_argument("--preset", default="mid")
    p.add_argument("--out", required=True)
    for name, typ in (("m", int), ("n", int), ("k", int), ("kprime", int), ("skew", float), ("seed", int)):
        p.add_argument(f"--{name}", type=typ)

    p = cmd("rerank", "re-rank a run's top-k' lists")
    p.add_argument("--split", required=True)
    p.add_argument("--run", required=True)
    p.add_argument("--method", choices=sorted(RERANKERS), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--kprime", type=int, default=25)
    p.add_argument("--beta", type=float, default=0.05)
    p.add_argument("--replace-frac", type=float, default=0.25)

    p = cmd("eval", "measure-by-run CSV")
    p.add_argument("--split", required=True)
    p.add_argument("--runs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--measures")

    p = cmd("pf", "Pareto frontier per Rel x Fair pair")
    p.add_argument("--split", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--points", type=_points, default=None, help="p (estimated) or 'full'")
    p.add_argument("--measures")

    p = cmd("dpfr", "distance of each run to the frontier reference points")
    p.add_argument("--pf", required=True)
    p.add_argument("--eval", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--alpha", type=float, default=0.5)

    p = cmd("analyze", "Kendall tau, equivalence and best-model disagreement")
    p.add_argument("--eval", required=True)
    p.add_argument("--dpfr", required=True)
    p.add_argument("--out", required=True)

    p = cmd("pipeline", "run every stage from a key = value config file")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--resume", action="store_true", help="skip stages whose inputs and outputs are unchanged")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.cmd == "preprocess":
            _emit(args, stage_preprocess(args.input, args.out, args.rating_threshold,
                                         args.max_user_interactions, args.core))
        elif args.cmd == "split":
            stats = stage_split(args.input, args.out, args.mode, args.seed, args.ratio, args.min_train)
            _emit(args, {name: stats[name] for name in ("train", "val", "test", "relevant_per_user")})
        elif args.cmd == "synth":
            paths = stage_synth(args.out, args.preset, m=args.m, n=args.n, k=args.k,
                                kprime=args.kprime, skew=args.skew, seed=args.seed)
            _emit(args, {"split": args.out, "runs": len(paths)})
        elif args.cmd == "rerank":
            _emit(args, {"written": stage_rerank(args.split, args.run, args.method, args.out, args.k,
                                                 args.kprime, args.beta, args.replace_frac)})
        elif args.cmd == "eval":
            n = stage_eval(args.split, args.runs, args.out, args.k, args.measures, args.threads)
            _emit(args, {"runs": n, "written": args.out})
        elif args.cmd == "pf":
            meta = stage_pf(args.split, args.out, args.k, args.points, args.measures)
            fit = sorted(n for n, v in meta["pairs"].items() if v["fit"])
            _emit(args, {"num_rep": meta["num_rep"], "replacements": meta["replacements"],
                         "records": meta["records"], "fit_pairs": fit})
        elif args.cmd == "dpfr":
            _emit(args, stage_dpfr(args.pf, args.eval, args.out, args.alpha))
        elif args.cmd == "analyze":
            _emit(args, stage_analyze(args.eval, args.dpfr, args.out))
        elif args.cmd == "pipeline":
            with open(args.config, encoding="utf-8") as fh:
                cfg = parse_config(fh.read(), args.set)
            status, data = run_pipeline(cfg, args.resume, args.threads)
            _emit(args, {"status": data["status"], "stages": len(data["stages"]),
                         "manifest": os.path.join(cfg.out, "manifest.json")})
            return status
    except (OSError, ValueError, RuntimeError) as exc:
        logger.error("%s", exc)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
