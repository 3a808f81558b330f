"""Batch command line: ``summarize``, ``evaluate``, ``profile`` and ``synth``.

Exit codes: 0 success, 1 invalid input (missing files, malformed corpus,
config or arguments), 2 optimization failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .cascade import CascadeConfig, Mode, SummaryResult, summarize, tradeoff_profile
from .ce_opt import CEParams, OptimizationError, write_trace
from .corpus import AnalyzerConfig, CorpusError, load_corpus
from .rouge import RougeError, evaluate as rouge_evaluate

EXIT_OK, EXIT_INVALID, EXIT_OPTIMIZATION = 0, 1, 2
THREADS_ENV = "CE_SUMM_THREADS"


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    topic_id: str
    mode: str
    metric: str
    per_seed: dict[int, float]
    runtime_ms: float = 0.0

    @property
    def mean(self) -> float:
        return statistics.fmean(self.per_seed.values())

    @property
    def ci95_halfwidth(self) -> float | None:
        return ci95_halfwidth(list(self.per_seed.values()))

    def to_json(self) -> dict:
        return {
            "topic_id": self.topic_id,
            "mode": self.mode,
            "metric": self.metric,
            "per_seed": {str(k): v for k, v in sorted(self.per_seed.items())},
            "mean": self.mean,
            "ci95_halfwidth": self.ci95_halfwidth,
            "runtime_ms": self.runtime_ms,
        }


def ci95_halfwidth(values: list[float]) -> float | None:
    """Normal-approximation 95% half-width, ``1.96 * s / sqrt(n)``; None below two runs."""
    if len(values) < 2:
        return None
    return 1.96 * statistics.stdev(values) / math.sqrt(len(values))


def worker_count() -> int:
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            return max(1, int(cap))
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {cap!r}") from None
    return os.cpu_count() or 1


def _build(cls, data: dict, where: str):
    names = {f.name for f in fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise UsageError(f"{where}: unknown field(s) {sorted(unknown)}")
    return cls(**data)


def load_config(path) -> CascadeConfig:
    if path is None:
        return CascadeConfig()
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise UsageError(f"{path}: config must be a JSON object")
    data = dict(data)
    try:
        if "ce_params" in data:
            data["ce_params"] = _build(CEParams, data["ce_params"], f"{path}: ce_params")
        if "analyzer" in data:
            an = dict(data["analyzer"])
            if "stopwords" in an:
                an["stopwords"] = frozenset(an["stopwords"])
            data["analyzer"] = _build(AnalyzerConfig, an, f"{path}: analyzer")
        return _build(CascadeConfig, data, str(path))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _json_files(path: Path, what: str) -> list[Path]:
    if path.is_dir():
        files = sorted(path.glob("*.json"))
        if not files:
            raise UsageError(f"no {what} files in {path}")
        return files
    if path.is_file():
        return [path]
    raise UsageError(f"{what} path not found: {path}")


def load_corpora(path, config: CascadeConfig):
    return [load_corpus(p, config.analyzer) for p in _json_files(Path(path), "corpus")]


def load_references(path) -> dict[str, list[str]]:
    refs = {}
    for p in _json_files(Path(path), "reference"):
        try:
            data = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"{p}: invalid JSON ({exc})") from None
        entries = data if isinstance(data, list) else [data]
        for entry in entries:
            if not isinstance(entry, dict) or "topic_id" not in entry or "references" not in entry:
                raise UsageError(f"{p}: reference entries need 'topic_id' and 'references'")
            refs[str(entry["topic_id"])] = list(entry["references"])
    return refs


def _dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, ensure_ascii=False, sort_keys=False) + "\n", encoding="utf-8")


def summary_json(result: SummaryResult, traces_path: str) -> dict:
    return {
        "topic_id": result.topic_id,
        "mode": result.mode.value,
        "seed": result.seed,
        "summary": [{"doc_id": s.doc_id, "sentence_id": s.id, "text": s.raw_text} for s in result.sentences],
        "word_count": result.total_words,
        "step1_word_count": result.step1.summary.total_words if result.step1 else None,
        "distillate_terms": sorted(result.distillate.salient_terms) if result.distillate else [],
        "objective": result.final.ce.score,
        "traces_path": traces_path,
    }


def cmd_summarize(args) -> int:
    config = load_config(args.config)
    corpora = load_corpora(args.corpus, config)
    mode = Mode(args.mode)
    if args.runs < 1:
        raise UsageError("--runs must be at least 1")
    references = load_references(args.references) if args.references else None
    out = Path(args.out)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    seeds = [args.seed_base + i for i in range(args.runs)]
    tasks = [(topic, docs, seed) for topic, docs in corpora for seed in seeds]

    def work(task):
        topic, docs, seed = task
        start = time.perf_counter()
        result = summarize(topic, docs, config.with_seed(seed), mode, record_time=args.timing)
        elapsed = (time.perf_counter() - start) * 1000 if args.timing else 0.0
        return task, result, elapsed

    workers = min(worker_count(), len(tasks))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            done = list(pool.map(work, tasks))
    else:
        done = [work(t) for t in tasks]

    reports: dict[tuple[str, str], RunReport] = {}
    for (topic, _docs, seed), result, elapsed in done:
        stem = f"{topic.topic_id}.{mode.value}.seed{seed}"
        trace_dir = out / "traces" / stem
        trace_dir.mkdir(parents=True, exist_ok=True)
        for step, rows in result.traces.items():
            write_trace(rows, trace_dir / f"{step}.csv")
        _dump(summary_json(result, f"traces/{stem}"), out / f"{stem}.json")

        scores = {"objective": result.final.ce.score}
        if references is not None:
            if topic.topic_id not in references:
                raise UsageError(f"no references for topic {topic.topic_id}")
            text = " ".join(result.summary_text)
            for metric, score in rouge_evaluate(text, references[topic.topic_id]).items():
                scores[f"{metric}-R"] = score.recall
                scores[f"{metric}-F"] = score.f
        for metric, value in scores.items():
            rep = reports.setdefault((topic.topic_id, metric), RunReport(topic.topic_id, mode.value, metric, {}))
            rep.per_seed[seed] = value
            rep.runtime_ms += elapsed

    report = [r.to_json() for r in reports.values()]
    _dump(report, out / "report.json")
    with open(out / "report.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["topic_id", "mode", "metric", "runs", "mean", "ci95_halfwidth", "runtime_ms"])
        for r in report:
            ci = "" if r["ci95_halfwidth"] is None else repr(r["ci95_halfwidth"])
            writer.writerow([r["topic_id"], r["mode"], r["metric"], len(r["per_seed"]), repr(r["mean"]), ci,
                             f"{r['runtime_ms']:.1f}"])
    for r in report:
        if r["metric"] in ("objective", "ROUGE-2-R"):
            ci = "" if r["ci95_halfwidth"] is None else f" +/- {r['ci95_halfwidth']:.5f}"
            print(f"{r['topic_id']}\t{r['metric']}\t{r['mean']:.5f}{ci}")
    return EXIT_OK


def read_summary_text(path: Path) -> tuple[str, str]:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        return str(data["topic_id"]), " ".join(item["text"] for item in data["summary"])
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"{path}: not a summary file ({exc})") from None


def cmd_evaluate(args) -> int:
    summaries_dir = Path(args.summaries)
    if not summaries_dir.is_dir():
        raise UsageError(f"summaries directory not found: {summaries_dir}")
    files = sorted(p for p in summaries_dir.glob("*.json") if p.name != "report.json")
    if not files:
        raise UsageError(f"no summary files in {summaries_dir}")
    references = load_references(args.references)
    by_topic: dict[str, list[str]] = {}
    for p in files:
        topic_id, text = read_summary_text(p)
        by_topic.setdefault(topic_id, []).append(text)

    rows = []
    for topic_id in sorted(by_topic):
        if topic_id not in references:
            raise UsageError(f"no references for topic {topic_id}")
        per_metric: dict[str, list] = {}
        for text in by_topic[topic_id]:
            for metric, score in rouge_evaluate(text, references[topic_id]).items():
                per_metric.setdefault(metric, []).append(score)
        for metric, scores in per_metric.items():
            rows.append([topic_id, metric,
                         statistics.fmean(s.recall for s in scores),
                         statistics.fmean(s.precision for s in scores),
                         statistics.fmean(s.f for s in scores)])

    out = Path(args.out) if args.out else summaries_dir / "scores.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["topic_id", "metric", "recall", "precision", "f"])
        for row in rows:
            writer.writerow(row[:2] + [repr(v) for v in row[2:]])
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def parse_budgets(text: str) -> list[int]:
    try:
        budgets = [int(b) for b in text.split(",") if b.strip()]
    except ValueError:
        raise UsageError(f"--budgets must be comma-separated integers, got {text!r}") from None
    if not budgets:
        raise UsageError("--budgets is empty")
    if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise UsageError(f"--budgets must be strictly ascending, got {budgets}")
    return budgets


def cmd_profile(args) -> int:
    budgets = parse_budgets(args.budgets)
    config = load_config(args.config).with_seed(args.seed_base)
    corpora = load_corpora(args.corpus, config)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["topic_id", "budget", "saliency", "focus", "word_count", "status"])
        for topic, docs in corpora:
            for row in tradeoff_profile(topic, docs, config, budgets):
                writer.writerow([topic.topic_id, row.budget, repr(row.saliency), repr(row.focus),
                                 row.word_count, row.status])
    print(f"wrote profile for {len(corpora)} topic(s) to {out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    from .synthetic import SyntheticSpec, write_benchmark

    paths = write_benchmark(args.out, replace(SyntheticSpec(), n_topics=args.topics))
    print(f"wrote {len(paths)} topics under {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualces", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("summarize", help="summarize topics over several seeds")
    p.add_argument("--corpus", required=True, help="corpus JSON file or directory of them")
    p.add_argument("--config", help="JSON config mirroring CascadeConfig / CEParams")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.DUAL.value)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--references", help="reference JSON file or directory; adds ROUGE to the report")
    p.add_argument("--timing", action="store_true", help="record wall-clock times (outputs stop being reproducible)")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("evaluate", help="score summary files with ROUGE")
    p.add_argument("--summaries", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--config", help="accepted for symmetry; ROUGE settings are fixed")
    p.add_argument("--out", help="score CSV (default: <summaries>/scores.csv)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("profile", help="saliency/focus tradeoff across budgets")
    p.add_argument("--corpus", required=True)
    p.add_argument("--budgets", default="250,500,1000,1500")
    p.add_argument("--config")
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("synth", help="write the synthetic benchmark")
    p.add_argument("--out", required=True)
    p.add_argument("--topics", type=int, default=20)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, CorpusError, RougeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OptimizationError as exc:
        print(f"optimization failed: {exc}", file=sys.stderr)
        return EXIT_OPTIMIZATION


if __name__ == "__main__":
    sys.exit(main())
