"""Topic/document ingestion, text analysis and candidate pruning."""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path

from nltk.stem.porter import PorterStemmer

from .lm import TermVector, UnigramLM, bhattacharyya

# Lucene's default English stop set.
ENGLISH_STOPWORDS = frozenset(
    "a an and are as at be but by for if in into is it no not of on or such "
    "that the their then there these they this to was will with".split()
)

MAX_EXPANSION_TERMS = 100
DEFAULT_PRUNE_K = 150

_WORD_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)*")
_stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


class CorpusError(ValueError):
    """A corpus file is malformed or describes an unusable document set."""


@lru_cache(maxsize=200_000)
def stem(word: str) -> str:
    return _stemmer.stem(word, to_lowercase=False)


@dataclass(frozen=True)
class AnalyzerConfig:
    stopwords: frozenset[str] = ENGLISH_STOPWORDS
    stemming: bool = True
    lowercase: bool = True


DEFAULT_ANALYZER = AnalyzerConfig()


def analyze(text: str, config: AnalyzerConfig = DEFAULT_ANALYZER) -> list[str]:
    """Tokenize, lowercase, drop stopwords and Porter-stem ``text``."""
    tokens = []
    for word in _WORD_RE.findall(text):
        if config.lowercase:
            word = word.lower()
        if word.endswith(("'s", "'S")):
            word = word[:-2]
        word = word.replace("'", "")
        if not word or word in config.stopwords:
            continue
        tokens.append(stem(word) if config.stemming else word)
    return tokens


def bigrams(tokens: list[str]) -> list[str]:
    return [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]


@dataclass(frozen=True)
class Sentence:
    id: str
    doc_id: str
    raw_text: str
    char_offset: int
    word_count: int
    tokens: tuple[str, ...] = ()
    bigrams: tuple[str, ...] = ()

    @cached_property
    def unigram_vector(self) -> TermVector:
        return TermVector.from_terms(self.tokens, 1)

    @cached_property
    def bigram_vector(self) -> TermVector:
        return TermVector.from_terms(self.bigrams, 2)

    @cached_property
    def lm(self) -> UnigramLM:
        return UnigramLM.from_vector(self.unigram_vector)

    @property
    def sort_key(self) -> tuple[str, int]:
        return (self.doc_id, self.char_offset)


def make_sentence(sentence_id: str, doc_id: str, text: str, offset: int,
                  analyzer: AnalyzerConfig = DEFAULT_ANALYZER) -> Sentence:
    tokens = analyze(text, analyzer)
    return Sentence(
        id=sentence_id,
        doc_id=doc_id,
        raw_text=text,
        char_offset=offset,
        word_count=len(text.split()),
        tokens=tuple(tokens),
        bigrams=tuple(bigrams(tokens)),
    )


@dataclass(frozen=True)
class DocumentSet:
    topic_id: str
    documents: tuple[tuple[str, tuple[Sentence, ...]], ...]

    @cached_property
    def sentences(self) -> tuple[Sentence, ...]:
        return tuple(s for _, sents in self.documents for s in sents)

    @cached_property
    def centroid_tokens(self) -> TermVector:
        return TermVector.from_terms((t for s in self.sentences for t in s.tokens), 1)

    @cached_property
    def centroid_bigrams(self) -> TermVector:
        return TermVector.from_terms((b for s in self.sentences for b in s.bigrams), 2)

    @cached_property
    def lm(self) -> UnigramLM:
        return UnigramLM.from_vector(self.centroid_tokens)

    def __len__(self):
        return len(self.sentences)


@dataclass(frozen=True)
class Topic:
    topic_id: str
    title: str
    questions: tuple[str, ...]
    # one (possibly empty) list per question
    expansion_terms: tuple[tuple[str, ...], ...] = field(default=())

    def __post_init__(self):
        if not self.questions:
            raise CorpusError(f"topic {self.topic_id!r}: 'questions' must be non-empty")
        if not self.expansion_terms:
            object.__setattr__(self, "expansion_terms", tuple(() for _ in self.questions))
        if len(self.expansion_terms) != len(self.questions):
            raise CorpusError(f"topic {self.topic_id!r}: expansion_terms do not match questions")


def subquery_terms(topic: Topic, analyzer: AnalyzerConfig = DEFAULT_ANALYZER) -> list[list[str]]:
    """Analyzed terms of each ``title + question`` sub-query plus its expansion terms."""
    out = []
    for question, expansion in zip(topic.questions, topic.expansion_terms):
        terms = analyze(f"{topic.title} {question}", analyzer)
        for raw in expansion[:MAX_EXPANSION_TERMS]:
            terms.extend(analyze(raw, analyzer))
        out.append(terms)
    return out


def build_document_set(topic_id: str, documents, analyzer: AnalyzerConfig = DEFAULT_ANALYZER) -> DocumentSet:
    """Analyze pre-segmented ``[(doc_id, [sentence text, ...]), ...]``.

    Documents are treated as their sentences joined by single spaces, which
    fixes each sentence's character offset.
    """
    docs = []
    for doc_id, texts in documents:
        sents, offset = [], 0
        for i, text in enumerate(texts):
            if not text.split():
                raise CorpusError(f"document {doc_id!r}: sentence {i} is empty")
            sents.append(make_sentence(f"{doc_id}#{i}", doc_id, text, offset, analyzer))
            offset += len(text) + 1
        if sents:
            docs.append((doc_id, tuple(sents)))
    if not docs:
        raise CorpusError(f"topic {topic_id!r}: document set is empty")
    return DocumentSet(topic_id, tuple(docs))


def _require(obj: dict, key: str, kind, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise CorpusError(f"{where}: missing field '{key}'")
    value = obj[key]
    if not isinstance(value, kind):
        raise CorpusError(f"{where}: field '{key}' has wrong type {type(value).__name__}")
    return value


def parse_corpus(data: dict, analyzer: AnalyzerConfig = DEFAULT_ANALYZER) -> tuple[Topic, DocumentSet]:
    where = "corpus"
    topic_id = str(_require(data, "topic_id", (str, int), where))
    where = f"topic {topic_id}"
    title = _require(data, "title", str, where)
    questions = _require(data, "questions", list, where)
    if not questions or not all(isinstance(q, str) for q in questions):
        raise CorpusError(f"{where}: field 'questions' must be a non-empty list of strings")
    raw_exp = data.get("expansion_terms", {}) or {}
    if not isinstance(raw_exp, (dict, list)):
        raise CorpusError(f"{where}: field 'expansion_terms' must be an object")
    if isinstance(raw_exp, list):
        raw_exp = dict(enumerate(raw_exp))
    expansion = []
    for i in range(len(questions)):
        terms = raw_exp.get(str(i), raw_exp.get(i, []))
        if not isinstance(terms, list) or not all(isinstance(t, str) for t in terms):
            raise CorpusError(f"{where}: field 'expansion_terms.{i}' must be a list of strings")
        expansion.append(tuple(terms[:MAX_EXPANSION_TERMS]))
    docs = _require(data, "documents", list, where)
    documents = []
    for j, doc in enumerate(docs):
        doc_id = str(_require(doc, "doc_id", (str, int), f"{where} documents[{j}]"))
        sents = _require(doc, "sentences", list, f"{where} document {doc_id}")
        if not all(isinstance(s, str) for s in sents):
            raise CorpusError(f"{where} document {doc_id}: field 'sentences' must hold strings")
        documents.append((doc_id, sents))
    topic = Topic(topic_id, title, tuple(questions), tuple(expansion))
    return topic, build_document_set(topic_id, documents, analyzer)


def load_corpus(path, analyzer: AnalyzerConfig = DEFAULT_ANALYZER) -> tuple[Topic, DocumentSet]:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CorpusError(f"corpus file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{path}: invalid JSON ({exc})") from None
    return parse_corpus(data, analyzer)


def query_lm(topic: Topic, analyzer: AnalyzerConfig = DEFAULT_ANALYZER) -> UnigramLM:
    """Combined unigram model over all (expanded) sub-queries of a topic."""
    counts = Counter()
    for terms in subquery_terms(topic, analyzer):
        counts.update(terms)
    return UnigramLM.from_vector(TermVector(1, counts))


def prune_candidates(docs: DocumentSet, topic: Topic, k: int = DEFAULT_PRUNE_K,
                     analyzer: AnalyzerConfig = DEFAULT_ANALYZER) -> list[Sentence]:
    """Top-``k`` sentences by Bhattacharyya similarity to the topic query."""
    if k < 1:
        raise ValueError("k must be positive")
    qlm = query_lm(topic, analyzer)
    ranked = sorted(docs.sentences, key=lambda s: (-bhattacharyya(qlm, s.lm), s.sort_key))
    return ranked[:k]
