import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualces import predictors as P
from dualces.corpus import Sentence, make_sentence
from dualces.predictors import (
    BatchObjective, CandidateSummary, FeedbackDistillate, ObjectiveSpec, SubQuery,
)
from helpers import docs_from, random_corpus
import oracles


def sent(text, offset=0, doc="d", i=0):
    return make_sentence(f"{doc}#{i}", doc, text, offset)


class TestScalarExamples:
    def test_pos_single_sentence(self):
        S = CandidateSummary.of([sent("alpha", 0)])
        assert P.q_pos(S, 2.0) == pytest.approx(2.44270, abs=1e-5)

    def test_pos_two_sentences(self):
        # b + pos = e^2 gives a factor of exactly 1.5
        a = sent("alpha", 0)
        b = Sentence("d#1", "d", "beta", math.e ** 2 - 2, 1)
        S = CandidateSummary.of([a, b])
        expected = math.sqrt((1 + 1 / math.log(2)) * 1.5)
        assert P.q_pos(S, 2.0) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(1.914169, abs=1e-6)

    def test_pos_floor_for_tiny_b(self):
        S = CandidateSummary.of([sent("alpha", 0)])
        assert math.isfinite(P.q_pos(S, 1e-9))

    def test_len(self):
        S = CandidateSummary.of([sent("a b c", 0), sent("d e f g h", 10, i=1)])
        assert P.q_len(S) == 4.0

    def test_qf_quarter(self):
        S = CandidateSummary.of([sent("alpha beta gamma delta")])
        assert P.q_qf(S, [SubQuery(("alpha", "zeta"))]) == pytest.approx(0.25)

    def test_qf_counts_unique_terms_once(self):
        S = CandidateSummary.of([sent("alpha beta gamma delta")])
        assert P.q_qf(S, [SubQuery(("alpha", "alpha"))]) == pytest.approx(0.25)

    def test_qf_sums_over_subqueries(self):
        S = CandidateSummary.of([sent("alpha beta gamma delta")])
        assert P.q_qf(S, [SubQuery(("alpha",)), SubQuery(("alpha", "beta"))]) == pytest.approx(0.75)

    def test_sim_identical_text(self):
        S = CandidateSummary.of([sent("alpha beta")])
        assert P.q_sim(S, [SubQuery(("alpha", "beta"))]) == pytest.approx(1.0)

    def test_kl_half(self):
        docs = docs_from({"d": ["alpha beta gamma delta"]})
        S = CandidateSummary.of([sent("alpha beta")])
        assert P.q_kl(S, docs) == pytest.approx(0.5)

    def test_cov_feedback(self):
        S = CandidateSummary.of([sent("alpha beta gamma")])
        fb = FeedbackDistillate(frozenset({"alpha", "gamma", "omega"}), 0.0)
        assert P.q_cov_feedback(S, fb) == 2

    def test_cov_full_document(self):
        docs = docs_from({"d": ["alpha beta gamma"]})
        S = CandidateSummary.of(docs.sentences)
        assert P.q_cov(S, docs) == pytest.approx(1.0)


class TestObjective:
    def setup_method(self):
        self.docs = docs_from({"d": ["alpha beta gamma", "delta alpha epsilon zeta", "beta eta"]})
        self.spec = ObjectiveSpec(P.SALIENCY, subqueries=(SubQuery(("alpha",)),))

    def test_empty_is_infeasible(self):
        assert P.evaluate_objective(self.spec, CandidateSummary(()), self.docs, 100) == P.INFEASIBLE

    def test_over_budget_is_infeasible(self):
        S = CandidateSummary.of(self.docs.sentences)
        assert P.evaluate_objective(self.spec, S, self.docs, 5) == P.INFEASIBLE

    def test_product_of_factors(self):
        S = CandidateSummary.of(self.docs.sentences[:1])
        vals = [P.predictor_value(n, self.spec, S, self.docs) for n in self.spec.predictors]
        assert P.evaluate_objective(self.spec, S, self.docs, 100) == pytest.approx(math.prod(vals))

    def test_zero_factor_floored(self):
        spec = ObjectiveSpec((P.LEN, P.QF), subqueries=(SubQuery(("omega",)),))
        S = CandidateSummary.of(self.docs.sentences[:1])
        assert P.evaluate_objective(spec, S, self.docs, 100) == pytest.approx(3 * 1e-12)

    @pytest.mark.parametrize("kwargs", [
        dict(predictors=()),
        dict(predictors=("cov", "cov")),
        dict(predictors=("nope",)),
        dict(predictors=("cov_fb",)),
        dict(predictors=("pos",), position_bias_b=0.0),
    ])
    def test_spec_validation(self, kwargs):
        with pytest.raises(ValueError):
            ObjectiveSpec(**kwargs)

    def test_objective_sets(self):
        assert set(P.SALIENCY) < set(P.FOCUS)
        assert set(P.CES_PLUS) - set(P.CES) == {P.KL}
        assert len(P.FOCUS) == 7


def _random_case(seed):
    rng = np.random.default_rng(seed)
    topic, docs, words = random_corpus(rng)
    subs = tuple(SubQuery(tuple(rng.choice(words, size=int(rng.integers(1, 6))))) for _ in range(2))
    fb = FeedbackDistillate(frozenset(rng.choice(words, size=5)), float(rng.uniform(0, 50)))
    spec = ObjectiveSpec(P.FOCUS, float(rng.uniform(0.1, 5)), subs, fb)
    pool = list(docs.sentences)
    masks = rng.random((20, len(pool))) < 0.4
    return spec, docs, pool, masks


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_scalar_matches_oracle(seed):
    spec, docs, pool, masks = _random_case(seed)
    for mask in masks:
        chosen = [s for s, m in zip(pool, mask) if m]
        if not chosen:
            continue
        S = CandidateSummary.of(chosen)
        ref = oracles.predictors([list(s.tokens) for s in chosen], [s.char_offset for s in chosen],
                                 [list(s.tokens) for s in docs.sentences],
                                 [list(q.terms) for q in spec.subqueries], spec.feedback.salient_terms,
                                 spec.position_bias_b)
        ref["len"] = sum(s.word_count for s in chosen) / len(chosen)
        for name in P.ALL_PREDICTORS:
            assert P.predictor_value(name, spec, S, docs) == pytest.approx(ref[name], abs=1e-9), name


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 60))
def test_batch_matches_scalar(seed, budget):
    spec, docs, pool, masks = _random_case(seed)
    batch = BatchObjective(spec, pool, docs, budget)
    got = batch(masks)
    for row, mask in zip(got, masks):
        S = CandidateSummary.of([s for s, m in zip(pool, mask) if m])
        want = P.evaluate_objective(spec, S, docs, budget)
        if want == P.INFEASIBLE:
            assert row == P.INFEASIBLE
        else:
            assert row == pytest.approx(want, rel=1e-9, abs=1e-300)


def test_batch_rejects_bad_shape():
    spec, docs, pool, _ = _random_case(1)
    with pytest.raises(ValueError):
        BatchObjective(spec, pool, docs, 50)(np.zeros((2, len(pool) + 1), dtype=bool))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_objective_finite_and_positive_when_feasible(seed):
    spec, docs, pool, masks = _random_case(seed)
    scores = BatchObjective(spec, pool, docs, 10**6)(masks)
    for s, m in zip(scores, masks):
        assert (s == P.INFEASIBLE) == (not m.any())
        if m.any():
            assert math.isfinite(s) and s > 0
