"""Small corpus builders shared by the tests."""

import numpy as np

from dualces.benchmark import CoverageInstance
from dualces.corpus import Sentence, Topic, build_document_set


def docs_from(texts_by_doc, topic_id="t"):
    return build_document_set(topic_id, list(texts_by_doc.items()))


def bare_sentences(lengths, doc_id="d"):
    """Token-less sentences with the given word counts, for optimizer tests."""
    out, offset = [], 0
    for i, n in enumerate(lengths):
        text = " ".join(["w"] * int(n))
        out.append(Sentence(f"{doc_id}#{i}", doc_id, text, offset, int(n)))
        offset += len(text) + 1
    return out


def random_corpus(rng: np.random.Generator, n_docs=3, vocab=25, max_sents=6):
    """Random documents over a small pseudo-word vocabulary (stem-stable words)."""
    words = [f"w{i}a" for i in range(vocab)]
    p = 1.0 / np.arange(1, vocab + 1)
    p /= p.sum()
    texts = {}
    for d in range(n_docs):
        n_s = int(rng.integers(1, max_sents + 1))
        texts[f"d{d}"] = [
            " ".join(rng.choice(words, size=int(rng.integers(1, 12)), p=p)) for _ in range(n_s)
        ]
    docs = docs_from(texts)
    n_q = int(rng.integers(1, 4))
    questions = tuple(" ".join(rng.choice(words, size=int(rng.integers(1, 5)))) for _ in range(n_q))
    expansion = tuple(tuple(rng.choice(words, size=int(rng.integers(0, 5)))) for _ in range(n_q))
    topic = Topic("t", str(rng.choice(words)), questions, expansion)
    return topic, docs, words



class WeightedCoverage(CoverageInstance):
    def score_subset(self, subset) -> float:
        covered = set()
        for i in subset:
            covered.update(np.flatnonzero(self.cover[i]).tolist())
        return float(sum(self.weights[e] for e in covered))
