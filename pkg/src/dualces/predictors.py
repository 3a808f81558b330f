"""Summary-quality predictors and their product objectives.

Each predictor exists twice: a readable scalar form over a single
:class:`CandidateSummary`, and a vectorized form inside
:class:`BatchObjective` that scores many sampled subsets of a fixed
candidate pool at once. Tests hold the two to 1e-9 of each other.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

from .corpus import DocumentSet, Sentence
from .lm import TermVector, UnigramLM, bhattacharyya, cosine, kl_similarity

INFEASIBLE = float("-inf")
EPSILON = 1e-12
POSITION_FLOOR = 1 + 1e-6

COV, POS, LEN, KL, QF, SIM, COV_FB = "cov", "pos", "len", "kl", "qf", "sim", "cov_fb"
ALL_PREDICTORS = (COV, POS, LEN, KL, QF, SIM, COV_FB)

SALIENCY = (COV, POS, LEN, KL, QF)
FOCUS = (COV, POS, LEN, KL, QF, SIM, COV_FB)
CES = (COV, POS, LEN, QF, SIM)
CES_PLUS = (COV, POS, LEN, KL, QF, SIM)


@dataclass(frozen=True)
class SubQuery:
    """One analyzed (and possibly expanded) sub-query."""

    terms: tuple[str, ...]

    @cached_property
    def unique_terms(self) -> frozenset[str]:
        return frozenset(self.terms)

    @cached_property
    def vector(self) -> TermVector:
        return TermVector.from_terms(self.terms, 1)

    @cached_property
    def lm(self) -> UnigramLM:
        return UnigramLM.from_vector(self.vector)


@dataclass(frozen=True)
class FeedbackDistillate:
    salient_terms: frozenset[str]
    avg_position: float


@dataclass(frozen=True)
class CandidateSummary:
    sentences: tuple[Sentence, ...]

    @classmethod
    def of(cls, sentences: Sequence[Sentence]) -> CandidateSummary:
        return cls(tuple(sentences))

    @property
    def sentence_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.sentences)

    @property
    def total_words(self) -> int:
        return sum(s.word_count for s in self.sentences)

    @cached_property
    def term_vector_uni(self) -> TermVector:
        return TermVector.from_terms((t for s in self.sentences for t in s.tokens), 1)

    @cached_property
    def term_vector_bi(self) -> TermVector:
        return TermVector.from_terms((b for s in self.sentences for b in s.bigrams), 2)

    @cached_property
    def lm(self) -> UnigramLM:
        return UnigramLM.from_vector(self.term_vector_uni)

    def __len__(self):
        return len(self.sentences)


@dataclass(frozen=True)
class ObjectiveSpec:
    predictors: tuple[str, ...]
    position_bias_b: float = 2.0
    subqueries: tuple[SubQuery, ...] = ()
    feedback: FeedbackDistillate | None = None

    def __post_init__(self):
        if not self.predictors:
            raise ValueError("objective needs at least one predictor")
        if len(set(self.predictors)) != len(self.predictors):
            raise ValueError(f"duplicate predictor in {self.predictors}")
        unknown = set(self.predictors) - set(ALL_PREDICTORS)
        if unknown:
            raise ValueError(f"unknown predictors {sorted(unknown)}")
        if COV_FB in self.predictors and self.feedback is None:
            raise ValueError("the feedback-coverage predictor needs a distillate")
        if self.position_bias_b <= 0:
            raise ValueError("position bias b must be positive")


def position_factor(pos: float, b: float) -> float:
    return 1.0 + 1.0 / math.log(max(b + pos, POSITION_FLOOR))


def q_cov(S: CandidateSummary, D: DocumentSet) -> float:
    return cosine(S.term_vector_bi, D.centroid_bigrams)


def q_pos(S: CandidateSummary, b: float = 2.0) -> float:
    factors = [position_factor(s.char_offset, b) for s in S.sentences]
    return math.prod(factors) ** (1.0 / len(factors))


def q_len(S: CandidateSummary) -> float:
    return S.total_words / len(S)


def q_kl(S: CandidateSummary, D: DocumentSet) -> float:
    return kl_similarity(S.lm, D.lm)


def q_qf(S: CandidateSummary, subqueries: Sequence[SubQuery]) -> float:
    return sum(sum(S.lm[w] for w in q.unique_terms) for q in subqueries)


def q_sim(S: CandidateSummary, subqueries: Sequence[SubQuery]) -> float:
    total = 0.0
    for q in subqueries:
        total += math.sqrt(bhattacharyya(q.lm, S.lm) * cosine(q.vector, S.term_vector_uni))
    return total


def q_cov_feedback(S: CandidateSummary, fb: FeedbackDistillate) -> int:
    support = S.term_vector_uni.counts
    return sum(1 for w in fb.salient_terms if w in support)


def predictor_value(name: str, spec: ObjectiveSpec, S: CandidateSummary, D: DocumentSet) -> float:
    if name == COV:
        return q_cov(S, D)
    if name == POS:
        return q_pos(S, spec.position_bias_b)
    if name == LEN:
        return q_len(S)
    if name == KL:
        return q_kl(S, D)
    if name == QF:
        return q_qf(S, spec.subqueries)
    if name == SIM:
        return q_sim(S, spec.subqueries)
    if name == COV_FB:
        return float(q_cov_feedback(S, spec.feedback))
    raise ValueError(name)


def evaluate_objective(spec: ObjectiveSpec, S: CandidateSummary, D: DocumentSet, budget: float) -> float:
    """Product of the objective's predictors, each floored at ``EPSILON``.

    Empty and over-budget summaries are :data:`INFEASIBLE`.
    """
    if not S.sentences or S.total_words > budget:
        return INFEASIBLE
    value = 1.0
    for name in spec.predictors:
        value *= max(predictor_value(name, spec, S, D), EPSILON)
    return value


class BatchObjective:
    """Scores boolean selection masks over a fixed candidate pool.

    ``masks`` has shape ``(n_samples, len(pool))``; the result holds one
    objective value per row, :data:`INFEASIBLE` for empty or over-budget rows.
    Linear pieces of every predictor are folded into per-sentence vectors up
    front, so scoring is a handful of small dense matrix products.
    """

    def __init__(self, spec: ObjectiveSpec, pool: Sequence[Sentence], docs: DocumentSet, budget: float):
        self.spec = spec
        self.pool = tuple(pool)
        self.budget = budget
        self.lengths = np.array([s.word_count for s in self.pool], dtype=np.float64)
        self._n_tokens = np.array([len(s.tokens) for s in self.pool], dtype=np.float64)
        names = set(spec.predictors)

        uni_index: dict[str, int] = {}
        for s in self.pool:
            for t in s.tokens:
                uni_index.setdefault(t, len(uni_index))
        uni = _count_matrix([s.tokens for s in self.pool], uni_index)

        def columns(terms) -> np.ndarray:
            cols = [uni_index[w] for w in terms if w in uni_index]
            return uni[:, cols].toarray()

        if COV in names:
            bi_index: dict[str, int] = {}
            for s in self.pool:
                for t in s.bigrams:
                    bi_index.setdefault(t, len(bi_index))
            bi = _count_matrix([s.bigrams for s in self.pool], bi_index)
            d_vec = np.array([docs.centroid_bigrams.counts.get(t, 0) for t in bi_index], dtype=np.float64)
            self._cov_dot = bi @ d_vec
            self._cov_gram = (bi @ bi.T).toarray()
            self._d_bi_norm = docs.centroid_bigrams.norm()
        if POS in names:
            self._log_pos = np.log([position_factor(s.char_offset, spec.position_bias_b) for s in self.pool])
        if KL in names:
            log_pd = np.array([math.log(docs.lm[t]) for t in uni_index], dtype=np.float64)
            self._kl_cross = uni @ log_pd
            # terms seen at most once in the pool always contribute 1*log(1) = 0
            repeated = np.flatnonzero(np.asarray(uni.sum(axis=0)).ravel() > 1)
            self._kl_block = uni[:, repeated].toarray()
        if QF in names:
            weights = np.zeros(len(uni_index))
            for q in spec.subqueries:
                for w in q.unique_terms:
                    if w in uni_index:
                        weights[uni_index[w]] += 1.0
            self._qf = uni @ weights
        if SIM in names:
            self._uni_gram = (uni @ uni.T).toarray()
            self._sim = []
            for q in spec.subqueries:
                terms = [w for w in q.lm.probs if w in uni_index]
                if not terms:
                    continue
                sqrt_pq = np.sqrt([q.lm[w] for w in terms])
                qv = np.array([q.vector.counts[w] for w in terms], dtype=np.float64)
                self._sim.append((columns(terms), sqrt_pq, qv, q.vector.norm()))
        if COV_FB in names:
            self._fb_block = columns(sorted(spec.feedback.salient_terms))

    def __call__(self, masks: np.ndarray) -> np.ndarray:
        values, feasible = self.predictor_values(masks)
        score = np.ones(len(feasible))
        for name in self.spec.predictors:
            score *= np.maximum(values[name], EPSILON)
        return np.where(feasible, score, INFEASIBLE)

    def predictor_values(self, masks: np.ndarray) -> tuple[dict[str, np.ndarray], np.ndarray]:
        """Raw (unfloored) predictor values per row, plus the feasibility mask."""
        x = np.ascontiguousarray(masks, dtype=np.float64)
        n_sel = x.sum(axis=1)
        words = x @ self.lengths
        feasible = (n_sel > 0) & (words <= self.budget)
        safe_n = np.where(n_sel > 0, n_sel, 1.0)
        total = x @ self._n_tokens
        safe_total = np.where(total > 0, total, 1.0)
        names = set(self.spec.predictors)

        values = {}
        if COV in names:
            values[COV] = _cosine_rows(x @ self._cov_dot, ((x @ self._cov_gram) * x).sum(axis=1),
                                       self._d_bi_norm)
        if POS in names:
            values[POS] = np.exp((x @ self._log_pos) / safe_n)
        if LEN in names:
            values[LEN] = words / safe_n
        if KL in names:
            c = x @ self._kl_block
            c_log_c = (c * np.log(np.where(c > 0, c, 1.0))).sum(axis=1)
            kl = c_log_c / safe_total - np.log(safe_total) - (x @ self._kl_cross) / safe_total
            values[KL] = np.where(total > 0, np.exp(-np.maximum(kl, 0.0)), 0.0)
        if QF in names:
            values[QF] = (x @ self._qf) / safe_total
        if SIM in names:
            sq = ((x @ self._uni_gram) * x).sum(axis=1)
            sim = np.zeros(len(x))
            for block, sqrt_pq, qv, q_norm in self._sim:
                sub = x @ block
                bhat = np.minimum(np.sqrt(sub / safe_total[:, None]) @ sqrt_pq, 1.0)
                cos = np.minimum(_cosine_rows(sub @ qv, sq, q_norm), 1.0)
                sim += np.sqrt(bhat * cos)
            values[SIM] = sim
        if COV_FB in names:
            values[COV_FB] = ((x @ self._fb_block) > 0).sum(axis=1).astype(np.float64)

        return values, feasible


def _cosine_rows(dot: np.ndarray, sq_norm: np.ndarray, other_norm: float) -> np.ndarray:
    denom = np.sqrt(sq_norm) * other_norm
    return np.where(denom > 0, dot / np.where(denom > 0, denom, 1.0), 0.0)


def _count_matrix(term_lists, index: dict[str, int]) -> sparse.csr_matrix:
    rows, cols = [], []
    for i, terms in enumerate(term_lists):
        for t in terms:
            rows.append(i)
            cols.append(index[t])
    data = np.ones(len(rows), dtype=np.float64)
    m = sparse.csr_matrix((data, (rows, cols)), shape=(len(term_lists), len(index)))
    m.sum_duplicates()
    return m
