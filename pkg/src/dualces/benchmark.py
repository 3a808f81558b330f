"""Desk-scale experiments on the synthetic benchmark.

Full-scale runs (10,000 samples per iteration, hundreds of topics) are out
of reach on a laptop, so these use ``DESK_PARAMS``. Each experiment returns
plain numbers; thresholds live with the callers.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy import stats

from . import predictors as P
from .cascade import CascadeConfig, Mode, run_ces_baseline, run_dual_ces, tradeoff_profile
from .ce_opt import CEParams, run
from .corpus import DocumentSet, Sentence, Topic, parse_corpus
from .rouge import rouge_n
from .synthetic import SyntheticSpec, make_benchmark

DESK_PARAMS = CEParams(sample_count=500, elite_fraction=0.02, max_iterations=60)
PROFILE_BUDGETS = (250, 500, 1000, 1500)
LBAR_SWEEP = (500, 750, 1000, 1250, 1500, 1750, 2000)


@dataclass(frozen=True)
class BenchTopic:
    topic: Topic
    docs: DocumentSet
    references: tuple[str, ...]


@lru_cache(maxsize=4)
def load_benchmark(spec: SyntheticSpec = SyntheticSpec()) -> tuple[BenchTopic, ...]:
    out = []
    for t in make_benchmark(spec):
        topic, docs = parse_corpus(t.corpus)
        out.append(BenchTopic(topic, docs, tuple(t.references)))
    return tuple(out)


def desk_config(**overrides) -> CascadeConfig:
    return replace(CascadeConfig(ce_params=DESK_PARAMS), **overrides)


def rouge2_recall(sentences, references) -> float:
    return rouge_n(" ".join(s.raw_text for s in sentences), list(references), 2).recall


def sign_test(signs: list[int], alternative: str = "greater") -> float:
    """One-sided binomial sign test over the non-zero signs."""
    pos = sum(1 for s in signs if s > 0)
    neg = sum(1 for s in signs if s < 0)
    if pos + neg == 0:
        return 1.0
    k = pos if alternative == "greater" else neg
    return stats.binomtest(k, pos + neg, 0.5, alternative="greater").pvalue


@dataclass
class CascadeBenefit:
    dual_rouge2: list[float] = field(default_factory=list)
    ces_plus_rouge2: list[float] = field(default_factory=list)
    dual_feedback_cov: list[int] = field(default_factory=list)
    ces_plus_feedback_cov: list[int] = field(default_factory=list)


def cascade_benefit(seeds=range(30), bench=None, config=None) -> CascadeBenefit:
    """Dual-CES vs CES+ on every topic and seed; coverage uses the Dual-CES distillate."""
    bench = bench or load_benchmark()
    config = config or desk_config()
    out = CascadeBenefit()
    for bt in bench:
        for seed in seeds:
            cfg = config.with_seed(seed)
            dual = run_dual_ces(bt.topic, bt.docs, cfg, Mode.DUAL)
            plus = run_ces_baseline(bt.topic, bt.docs, cfg, Mode.CES_PLUS)
            out.dual_rouge2.append(rouge2_recall(dual.sentences, bt.references))
            out.ces_plus_rouge2.append(rouge2_recall(plus.sentences, bt.references))
            out.dual_feedback_cov.append(P.q_cov_feedback(dual.final.summary, dual.distillate))
            out.ces_plus_feedback_cov.append(P.q_cov_feedback(plus.final.summary, dual.distillate))
    return out


@dataclass
class TradeoffShape:
    budgets: tuple[int, ...]
    saliency: list[list[float]]  # per topic, per budget
    focus: list[list[float]]

    def spearman(self, which: str) -> list[float]:
        rows = self.saliency if which == "saliency" else self.focus
        return [stats.spearmanr(self.budgets, r)[0] for r in rows]

    def mean_curve(self, which: str) -> list[float]:
        rows = self.saliency if which == "saliency" else self.focus
        return [statistics.fmean(col) for col in zip(*rows)]

    @property
    def saliency_p(self) -> float:
        return sign_test([1 if r > 0 else -1 if r < 0 else 0 for r in self.spearman("saliency")], "greater")

    @property
    def focus_p(self) -> float:
        return sign_test([1 if r > 0 else -1 if r < 0 else 0 for r in self.spearman("focus")], "less")


def tradeoff_shape(budgets=PROFILE_BUDGETS, bench=None, config=None, seed: int = 0) -> TradeoffShape:
    bench = bench or load_benchmark()
    config = (config or desk_config()).with_seed(seed)
    sal, foc = [], []
    for bt in bench:
        rows = tradeoff_profile(bt.topic, bt.docs, config, budgets)
        sal.append([r.saliency for r in rows])
        foc.append([r.focus for r in rows])
    return TradeoffShape(tuple(budgets), sal, foc)


@dataclass
class LbarSweep:
    lbars: tuple[int, ...]
    rouge2: dict[int, list[float]]
    step1_objective: dict[int, list[float]]  # per L-bar, per (topic, seed)

    def means(self) -> dict[int, float]:
        return {lb: statistics.fmean(v) for lb, v in self.rouge2.items()}

    @property
    def relative_spread(self) -> float:
        m = self.means().values()
        return (max(m) - min(m)) / max(m)


def lbar_sweep(lbars=LBAR_SWEEP, seeds=range(3), bench=None, config=None) -> LbarSweep:
    bench = bench or load_benchmark()
    config = config or desk_config()
    rouge2 = {lb: [] for lb in lbars}
    objective = {lb: [] for lb in lbars}
    for bt in bench:
        for seed in seeds:
            for lb in lbars:
                res = run_dual_ces(bt.topic, bt.docs, replace(config, l_bar=lb).with_seed(seed), Mode.DUAL)
                rouge2[lb].append(rouge2_recall(res.sentences, bt.references))
                objective[lb].append(res.step1.ce.score)
    return LbarSweep(tuple(lbars), rouge2, objective)


@dataclass
class AdaptiveRun:
    topic_id: str
    seed: int
    length_trace: list[float]
    objective: float
    best_fixed: float
    best_lbar: int

    @property
    def final_relative_change(self) -> float:
        """Largest relative L_t step over the last five iterations."""
        tail = self.length_trace[-6:]
        return max(abs(b - a) / a for a, b in zip(tail, tail[1:]))

    @property
    def ratio(self) -> float:
        return self.objective / self.best_fixed


def adaptive_convergence(sweep: LbarSweep, seeds=range(3), bench=None, config=None) -> list[AdaptiveRun]:
    """Dual-CES-A's saliency-step objective against the best fixed L-bar of ``sweep``.

    ``sweep`` must have been run on the same topics and seeds.
    """
    bench = bench or load_benchmark()
    config = config or desk_config()
    runs = []
    i = 0
    for bt in bench:
        for seed in seeds:
            res = run_dual_ces(bt.topic, bt.docs, config.with_seed(seed), Mode.DUAL_ADAPTIVE)
            fixed = {lb: sweep.step1_objective[lb][i] for lb in sweep.lbars}
            best_lbar = max(fixed, key=fixed.get)
            runs.append(AdaptiveRun(bt.topic.topic_id, seed, [r.length_limit for r in res.step1.trace],
                                    res.step1.ce.score, fixed[best_lbar], best_lbar))
            i += 1
    return runs


class CoverageInstance:
    """Random budgeted weighted max-coverage problem over ``k`` candidates.

    Candidates are word-less sentences whose ``word_count`` is their cost;
    calling the instance scores selection masks like a batch objective.
    """

    def __init__(self, rng: np.random.Generator, k: int = 15, n_elements: int = 40, budget_frac: float = 0.35):
        self.weights = rng.uniform(0.5, 3.0, n_elements)
        self.cover = rng.random((k, n_elements)) < rng.uniform(0.08, 0.25)
        self.lengths = rng.integers(5, 30, k)
        self.budget = int(max(self.lengths.min(), budget_frac * self.lengths.sum()))
        self.candidates = [Sentence(f"c#{i}", "c", "", i, int(n)) for i, n in enumerate(self.lengths)]

    def __call__(self, masks: np.ndarray) -> np.ndarray:
        covered = (masks.astype(np.int64) @ self.cover.astype(np.int64)) > 0
        scores = covered @ self.weights
        over = masks @ self.lengths > self.budget
        return np.where(over | ~masks.any(axis=1), -np.inf, scores)

    def optimum(self) -> float:
        """Exhaustive maximum over all subsets."""
        k = len(self.lengths)
        every = ((np.arange(2 ** k)[:, None] >> np.arange(k)) & 1).astype(bool)
        return float(self(every).max())


def optimizer_quality(seed_base: int = 2024, n_instances: int = 50, seeds=range(2),
                      params: CEParams = CEParams(sample_count=2000, elite_fraction=0.05)) -> list[float]:
    """CE objective over exhaustive optimum for each (instance, seed) run."""
    ratios = []
    for i in range(n_instances):
        inst = CoverageInstance(np.random.default_rng([seed_base, i]))
        best = inst.optimum()
        for seed in seeds:
            res = run(inst, inst.candidates, inst.budget, replace(params, seed=seed))
            ratios.append(res.score / best)
    return ratios
