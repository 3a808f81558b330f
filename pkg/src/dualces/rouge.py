"""ROUGE-1/2/SU4 recall, precision and F against multiple references.

Settings mirror the usual DUC invocation (Porter stemming, skip distance 4
with unigrams, alpha 0.5, 250-word truncation). Recall and precision are
plain means over references (F is taken from those means), without the
toolkit's jackknifing, so values are comparable only with other scores
produced here.
"""

from __future__ import annotations

import re
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass

from .corpus import stem


class RougeError(ValueError):
    pass


@dataclass(frozen=True)
class RougeConfig:
    stemming: bool = True
    skip_distance: int = 4
    include_unigrams: bool = True
    f_alpha: float = 0.5
    length_limit: int | None = 250


@dataclass(frozen=True)
class RougeScore:
    recall: float
    precision: float
    f: float


DEFAULT_CONFIG = RougeConfig()
_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str, config: RougeConfig = DEFAULT_CONFIG) -> list[str]:
    tokens = _TOKEN_RE.findall(text.lower())
    if config.stemming:
        tokens = [stem(t) for t in tokens]
    return tokens


def _truncate(tokens: Sequence[str], config: RougeConfig) -> Sequence[str]:
    return tokens[:config.length_limit] if config.length_limit else tokens


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def skip_bigrams(tokens: Sequence[str], skip_distance: int, include_unigrams: bool) -> Counter:
    grams = Counter()
    for i, a in enumerate(tokens):
        for b in tokens[i + 1:i + 2 + skip_distance]:
            grams[(a, b)] += 1
    if include_unigrams:
        grams.update((t,) for t in tokens)
    return grams


def f_measure(recall: float, precision: float, alpha: float) -> float:
    if recall <= 0 or precision <= 0:
        return 0.0
    return 1.0 / (alpha / precision + (1 - alpha) / recall)


def _score(candidate: Counter, refs: list[Counter], config: RougeConfig) -> RougeScore:
    cand_total = sum(candidate.values())
    recalls, precisions = [], []
    for ref in refs:
        hits = sum((candidate & ref).values())
        ref_total = sum(ref.values())
        recalls.append(hits / ref_total if ref_total else 0.0)
        precisions.append(hits / cand_total if cand_total else 0.0)
    recall = sum(recalls) / len(refs)
    precision = sum(precisions) / len(refs)
    return RougeScore(recall, precision, f_measure(recall, precision, config.f_alpha))


def _prepare(text, config):
    tokens = tokenize(text, config) if isinstance(text, str) else list(text)
    return _truncate(tokens, config)


def _prepare_refs(references, config):
    """Token lists of the references, dropping those without any token."""
    if not references:
        raise RougeError("at least one reference is required")
    refs = [t for t in (_prepare(r, config) for r in references) if t]
    if not refs:
        raise RougeError("no non-empty reference to score against")
    return refs


def rouge_n(candidate, references, n: int = 1, config: RougeConfig = DEFAULT_CONFIG) -> RougeScore:
    """``candidate`` and each reference are raw strings or token lists."""
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    refs = _prepare_refs(references, config)
    cand = ngrams(_prepare(candidate, config), n)
    return _score(cand, [ngrams(r, n) for r in refs], config)


def rouge_su(candidate, references, config: RougeConfig = DEFAULT_CONFIG) -> RougeScore:
    refs = _prepare_refs(references, config)

    def grams(tokens):
        return skip_bigrams(tokens, config.skip_distance, config.include_unigrams)

    return _score(grams(_prepare(candidate, config)), [grams(r) for r in refs], config)


rouge_su4 = rouge_su


def evaluate(candidate, references, config: RougeConfig = DEFAULT_CONFIG) -> dict[str, RougeScore]:
    return {
        "ROUGE-1": rouge_n(candidate, references, 1, config),
        "ROUGE-2": rouge_n(candidate, references, 2, config),
        "ROUGE-SU4": rouge_su(candidate, references, config),
    }
