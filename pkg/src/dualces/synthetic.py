"""Seeded synthetic query-focused summarization benchmark.

Every topic plants three kinds of content in its documents:

* core facts: frequent across documents and tied to the query words,
* general facts: frequent but unrelated to the query,
* niche facts: rare, query-worded, but otherwise uninformative,

on top of a shared Zipfian background vocabulary. The reference summaries
are written from the core facts, so a good summarizer has to be both
salient (frequent content) and focused (query-related content).

Words are synthetic consonant-vowel strings that the Porter stemmer leaves
unchanged, so analyzed text stays readable in tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import ENGLISH_STOPWORDS, stem

CONSONANTS = "bdfgklmnprtvz"
VOWELS = "aiou"
FINAL_VOWELS = "ao"
FILLERS = ("the", "of", "and", "in", "to", "a", "was", "is", "for", "with", "on", "that", "by")


@dataclass(frozen=True)
class SyntheticSpec:
    n_topics: int = 20
    n_docs: int = 10
    sentences_per_doc: tuple[int, int] = (14, 22)
    n_questions: tuple[int, int] = (2, 3)
    query_words_per_question: int = 2
    title_words: int = 2
    n_core: int = 8
    n_general: int = 10
    n_niche: int = 8
    fact_len: tuple[int, int] = (4, 7)
    background_vocab: int = 600
    n_references: int = 4
    reference_words: int = 250
    expansion_per_question: int = 12
    seed: int = 2018


@dataclass
class SyntheticTopic:
    corpus: dict
    references: list[str]

    @property
    def topic_id(self) -> str:
        return self.corpus["topic_id"]


class _Words:
    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.used: set[str] = set()

    def fresh(self) -> str:
        while True:
            n_syl = int(self.rng.integers(2, 4))
            parts = []
            for i in range(n_syl):
                vowels = FINAL_VOWELS if i == n_syl - 1 else VOWELS
                parts.append(self.rng.choice(list(CONSONANTS)) + self.rng.choice(list(vowels)))
            word = "".join(parts)
            if word in self.used or word in ENGLISH_STOPWORDS or stem(word) != word:
                continue
            self.used.add(word)
            return word

    def many(self, n: int) -> list[str]:
        return [self.fresh() for _ in range(n)]


def _zipf(n: int, s: float = 1.0) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** s
    return w / w.sum()


def _sentence(rng, facts, background, bg_probs, extra=()) -> str:
    words: list[str] = []
    for fact in facts:
        words.extend(fact)
        words.append(str(rng.choice(FILLERS)))
    words.extend(extra)
    n_bg = int(rng.integers(6, 15))
    for w in rng.choice(background, size=n_bg, p=bg_probs):
        words.insert(int(rng.integers(0, len(words) + 1)), str(w))
    words.insert(0, str(rng.choice(FILLERS)))
    text = " ".join(words)
    return text[0].upper() + text[1:] + "."


def make_topic(spec: SyntheticSpec, index: int, background: list[str], words: _Words) -> SyntheticTopic:
    rng = np.random.default_rng([spec.seed, index])
    bg_probs = _zipf(len(background), 1.05)
    n_q = int(rng.integers(spec.n_questions[0], spec.n_questions[1] + 1))
    title = words.many(spec.title_words)
    q_words = [words.many(spec.query_words_per_question) for _ in range(n_q)]
    all_query = title + [w for ws in q_words for w in ws]
    content = words.many(80)

    def fact(with_query: bool) -> list[str]:
        n = int(rng.integers(spec.fact_len[0], spec.fact_len[1] + 1))
        f = [str(w) for w in rng.choice(content, size=n, replace=False)]
        if with_query:
            f.insert(int(rng.integers(0, n + 1)), str(rng.choice(all_query)))
        return f

    core = [fact(True) for _ in range(spec.n_core)]
    general = [fact(False) for _ in range(spec.n_general)]
    niche = [[str(w) for w in words.many(int(rng.integers(3, 6)))] + [str(rng.choice(all_query))]
             for _ in range(spec.n_niche)]
    core_p = _zipf(len(core), 0.6)
    gen_p = _zipf(len(general), 0.6)

    documents = []
    for d in range(spec.n_docs):
        n_sent = int(rng.integers(spec.sentences_per_doc[0], spec.sentences_per_doc[1] + 1))
        sents = []
        for i in range(n_sent):
            early = 1.0 - i / n_sent
            kind = rng.choice(["core", "general", "niche", "noise"],
                              p=_normalize([0.22 + 0.18 * early, 0.30, 0.18, 0.30 - 0.18 * early]))
            if kind == "core":
                facts = [core[rng.choice(len(core), p=core_p)]]
            elif kind == "general":
                facts = [general[rng.choice(len(general), p=gen_p)]]
            elif kind == "niche":
                facts = [niche[rng.integers(len(niche))]]
            else:
                facts = []
            if facts and rng.random() < 0.25:
                facts.append(general[rng.choice(len(general), p=gen_p)])
            extra = [str(rng.choice(all_query))] if kind == "niche" else []
            sents.append(_sentence(rng, facts, background, bg_probs, extra))
        documents.append({"doc_id": f"T{index:02d}D{d:02d}", "sentences": sents})

    references = []
    for _ in range(spec.n_references):
        ref_words: list[str] = []
        order = rng.permutation(len(core))
        while len(ref_words) < spec.reference_words:
            for j in order:
                facts = [core[j]]
                if rng.random() < 0.3:
                    facts.append(general[rng.choice(len(general), p=gen_p)])
                ref_words.extend(_sentence(rng, facts, background, bg_probs).split())
        references.append(" ".join(ref_words[:spec.reference_words]))

    expansion = {}
    core_words = sorted({w for f in core for w in f if w not in all_query})
    for qi in range(n_q):
        related = [str(w) for w in rng.choice(core_words, size=min(len(core_words), spec.expansion_per_question // 2),
                                              replace=False)]
        noise = [str(w) for w in rng.choice(content, size=spec.expansion_per_question - len(related), replace=False)]
        expansion[str(qi)] = related + noise

    corpus = {
        "topic_id": f"T{index:02d}",
        "title": " ".join(title),
        "questions": [f"What about {' and '.join(ws)}?" for ws in q_words],
        "expansion_terms": expansion,
        "documents": documents,
    }
    return SyntheticTopic(corpus, references)


def _normalize(p):
    p = np.asarray(p, dtype=float)
    return p / p.sum()


def make_benchmark(spec: SyntheticSpec = SyntheticSpec()) -> list[SyntheticTopic]:
    words = _Words(np.random.default_rng([spec.seed, 10**6]))
    background = words.many(spec.background_vocab)
    return [make_topic(spec, i, background, words) for i in range(spec.n_topics)]


def write_benchmark(out_dir, spec: SyntheticSpec = SyntheticSpec()) -> list[Path]:
    """Write ``corpus/<topic>.json`` and ``references/<topic>.json`` files."""
    out_dir = Path(out_dir)
    (out_dir / "corpus").mkdir(parents=True, exist_ok=True)
    (out_dir / "references").mkdir(parents=True, exist_ok=True)
    paths = []
    for topic in make_benchmark(spec):
        path = out_dir / "corpus" / f"{topic.topic_id}.json"
        path.write_text(json.dumps(topic.corpus, indent=1, ensure_ascii=False), encoding="utf-8")
        ref = {"topic_id": topic.topic_id, "references": topic.references}
        (out_dir / "references" / f"{topic.topic_id}.json").write_text(
            json.dumps(ref, indent=1, ensure_ascii=False), encoding="utf-8")
        paths.append(path)
    return paths
