"""End-to-end summarizers: CES, CES+, Dual-CES and its adaptive-length variant."""

from __future__ import annotations

import enum
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field, replace

from . import predictors as P
from .ce_opt import AdaptiveLengthState, CEParams, CEResult, TraceRow, run
from .corpus import (
    DEFAULT_ANALYZER,
    AnalyzerConfig,
    CorpusError,
    DocumentSet,
    Sentence,
    Topic,
    prune_candidates,
    subquery_terms,
)
from .predictors import BatchObjective, CandidateSummary, FeedbackDistillate, ObjectiveSpec, SubQuery

STEP1_STREAM = 1
STEP2_STREAM = 0


class Mode(str, enum.Enum):
    CES = "ces"
    CES_PLUS = "ces-plus"
    DUAL = "dual"
    DUAL_ADAPTIVE = "dual-adaptive"


@dataclass(frozen=True)
class CascadeConfig:
    l_max: int = 250
    l_bar: int = 1500
    adaptive_l0: int = 3000
    prune_k: int = 150
    feedback_top_k: int = 100
    position_bias_b: float = 2.0
    use_feedback: bool = True
    adaptive_b: bool = True
    expand_saliency_query: bool = True
    ce_params: CEParams = field(default_factory=CEParams)
    analyzer: AnalyzerConfig = DEFAULT_ANALYZER

    def __post_init__(self):
        if self.l_bar < self.l_max:
            raise ValueError(f"l_bar ({self.l_bar}) must be >= l_max ({self.l_max})")
        if min(self.l_max, self.prune_k, self.feedback_top_k, self.adaptive_l0) < 1:
            raise ValueError("lengths and counts in the cascade config must be positive")

    def with_seed(self, seed: int) -> CascadeConfig:
        return replace(self, ce_params=replace(self.ce_params, seed=seed))


@dataclass
class StepResult:
    summary: CandidateSummary
    objective: ObjectiveSpec
    ce: CEResult

    @property
    def trace(self) -> list[TraceRow]:
        return self.ce.trace


@dataclass
class SummaryResult:
    topic_id: str
    mode: Mode
    seed: int
    final: StepResult
    step1: StepResult | None = None
    distillate: FeedbackDistillate | None = None
    pool: tuple[Sentence, ...] = ()

    @property
    def sentences(self) -> tuple[Sentence, ...]:
        return tuple(sorted(self.final.summary.sentences, key=lambda s: s.sort_key))

    @property
    def summary_text(self) -> list[str]:
        return [s.raw_text for s in self.sentences]

    @property
    def total_words(self) -> int:
        return self.final.summary.total_words

    @property
    def traces(self) -> dict[str, list[TraceRow]]:
        out = {"final": self.final.trace}
        if self.step1 is not None:
            out["step1"] = self.step1.trace
        return out


def prepare_subqueries(topic: Topic, analyzer: AnalyzerConfig = DEFAULT_ANALYZER,
                       expand: bool = True) -> tuple[SubQuery, ...]:
    if not expand:
        topic = replace(topic, expansion_terms=tuple(() for _ in topic.questions))
    return tuple(SubQuery(tuple(terms)) for terms in subquery_terms(topic, analyzer))


def distill(step1: CandidateSummary, top_k: int = 100) -> FeedbackDistillate:
    """Most frequent unigrams (ties lexicographic) and mean start offset of a pseudo-reference."""
    if not step1.sentences:
        raise ValueError("cannot distill feedback from an empty summary")
    counts = Counter(t for s in step1.sentences for t in s.tokens)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    avg = sum(s.char_offset for s in step1.sentences) / len(step1.sentences)
    return FeedbackDistillate(frozenset(t for t, _ in ranked), avg)


def candidate_pool(topic: Topic, docs: DocumentSet, config: CascadeConfig) -> list[Sentence]:
    pool = prune_candidates(docs, topic, config.prune_k, config.analyzer)
    if not pool:
        raise CorpusError(f"topic {topic.topic_id!r}: no candidates after pruning")
    return pool


def optimize(spec: ObjectiveSpec, pool: Sequence[Sentence], docs: DocumentSet, budget: int,
             params: CEParams, adaptive: AdaptiveLengthState | None = None, stream: int = 0,
             record_time: bool = False) -> StepResult:
    hard = adaptive.cap if adaptive else budget
    objective = BatchObjective(spec, pool, docs, hard)
    ce = run(objective, pool, hard, params, adaptive, stream, record_time)
    return StepResult(ce.summary(pool), spec, ce)


def run_ces_baseline(topic: Topic, docs: DocumentSet, config: CascadeConfig,
                     variant: Mode = Mode.CES_PLUS, record_time: bool = False) -> SummaryResult:
    variant = Mode(variant)
    if variant not in (Mode.CES, Mode.CES_PLUS):
        raise ValueError(f"{variant} is not a single-step variant")
    pool = candidate_pool(topic, docs, config)
    subqueries = prepare_subqueries(topic, config.analyzer)
    names = P.CES if variant is Mode.CES else P.CES_PLUS
    spec = ObjectiveSpec(names, config.position_bias_b, subqueries)
    step = optimize(spec, pool, docs, config.l_max, config.ce_params, stream=STEP2_STREAM,
                    record_time=record_time)
    return SummaryResult(topic.topic_id, variant, config.ce_params.seed, step, pool=tuple(pool))


def run_dual_ces(topic: Topic, docs: DocumentSet, config: CascadeConfig,
                 mode: Mode = Mode.DUAL, record_time: bool = False) -> SummaryResult:
    """Saliency step at the relaxed budget, distillation, then the focus step at ``l_max``."""
    mode = Mode(mode)
    if mode not in (Mode.DUAL, Mode.DUAL_ADAPTIVE):
        raise ValueError(f"{mode} is not a cascade mode")
    pool = candidate_pool(topic, docs, config)
    subqueries = prepare_subqueries(topic, config.analyzer)
    sal_queries = subqueries if config.expand_saliency_query else prepare_subqueries(
        topic, config.analyzer, expand=False)

    sal_spec = ObjectiveSpec(P.SALIENCY, config.position_bias_b, sal_queries)
    if mode is Mode.DUAL_ADAPTIVE:
        adaptive = AdaptiveLengthState(config.adaptive_l0, config.adaptive_l0)
        step1 = optimize(sal_spec, pool, docs, config.adaptive_l0, config.ce_params, adaptive,
                         STEP1_STREAM, record_time)
    else:
        step1 = optimize(sal_spec, pool, docs, config.l_bar, config.ce_params, stream=STEP1_STREAM,
                         record_time=record_time)

    fb = distill(step1.summary, config.feedback_top_k)
    b = fb.avg_position if config.adaptive_b else config.position_bias_b
    b = max(b, 1e-6)
    if config.use_feedback:
        foc_spec = ObjectiveSpec(P.FOCUS, b, subqueries, fb)
    else:
        foc_spec = ObjectiveSpec(P.CES_PLUS, b, subqueries)
    step2 = optimize(foc_spec, pool, docs, config.l_max, config.ce_params, stream=STEP2_STREAM,
                     record_time=record_time)
    return SummaryResult(topic.topic_id, mode, config.ce_params.seed, step2, step1, fb, tuple(pool))


def summarize(topic: Topic, docs: DocumentSet, config: CascadeConfig, mode: Mode,
              record_time: bool = False) -> SummaryResult:
    mode = Mode(mode)
    if mode in (Mode.CES, Mode.CES_PLUS):
        return run_ces_baseline(topic, docs, config, mode, record_time)
    return run_dual_ces(topic, docs, config, mode, record_time)


@dataclass(frozen=True)
class ProfileRow:
    budget: int
    saliency: float
    focus: float
    word_count: int
    status: str = "ok"


def tradeoff_profile(topic: Topic, docs: DocumentSet, config: CascadeConfig,
                     budgets: Sequence[int]) -> list[ProfileRow]:
    """Saliency (bigram cosine to the documents) and focus (query LM mass) of
    saliency-objective summaries at each budget."""
    budgets = list(budgets)
    if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise ValueError("budgets must be strictly ascending")
    pool = candidate_pool(topic, docs, config)
    subqueries = prepare_subqueries(topic, config.analyzer)
    spec = ObjectiveSpec(P.SALIENCY, config.position_bias_b, subqueries)
    shortest = min(s.word_count for s in pool)
    rows = []
    for budget in budgets:
        if budget < shortest:
            rows.append(ProfileRow(budget, float("nan"), float("nan"), 0, "infeasible"))
            continue
        step = optimize(spec, pool, docs, budget, config.ce_params, stream=STEP1_STREAM)
        S = step.summary
        rows.append(ProfileRow(budget, P.q_cov(S, docs), P.q_qf(S, subqueries), S.total_words))
    return rows
