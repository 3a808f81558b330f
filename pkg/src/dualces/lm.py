"""Sparse term vectors, maximum-likelihood unigram models and the similarity kernels."""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from types import MappingProxyType


@dataclass(frozen=True)
class TermVector:
    """Sparse n-gram count vector. ``order`` is 1 (unigrams) or 2 (bigrams)."""

    order: int
    counts: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {self.order}")
        clean = {t: c for t, c in self.counts.items() if c}
        if any(c < 0 for c in clean.values()):
            raise ValueError("term counts must be non-negative")
        object.__setattr__(self, "counts", MappingProxyType(clean))

    @classmethod
    def from_terms(cls, terms: Iterable[str], order: int = 1) -> TermVector:
        return cls(order, Counter(terms))

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def norm(self) -> float:
        return math.sqrt(sum(c * c for c in self.counts.values()))

    def __add__(self, other: TermVector) -> TermVector:
        if self.order != other.order:
            raise ValueError("cannot add term vectors of different order")
        merged = Counter(self.counts)
        merged.update(other.counts)
        return TermVector(self.order, merged)

    def __len__(self):
        return len(self.counts)


@dataclass(frozen=True)
class UnigramLM:
    """Unsmoothed maximum-likelihood unigram language model."""

    probs: Mapping[str, float]

    @classmethod
    def from_vector(cls, vector: TermVector) -> UnigramLM:
        total = vector.total
        if total == 0:
            return cls(MappingProxyType({}))
        return cls(MappingProxyType({t: c / total for t, c in vector.counts.items()}))

    @classmethod
    def from_terms(cls, terms: Iterable[str]) -> UnigramLM:
        return cls.from_vector(TermVector.from_terms(terms))

    def __getitem__(self, term: str) -> float:
        return self.probs.get(term, 0.0)

    def __contains__(self, term: str) -> bool:
        return term in self.probs

    def __len__(self):
        return len(self.probs)


def cosine(a: TermVector, b: TermVector) -> float:
    if a.order != b.order:
        raise ValueError(f"cosine over mismatched orders {a.order} and {b.order}")
    if not a.counts or not b.counts:
        return 0.0
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    dot = sum(c * large.counts.get(t, 0) for t, c in small.counts.items())
    if dot == 0:
        return 0.0
    return min(1.0, dot / (a.norm() * b.norm()))


def bhattacharyya(query_lm: UnigramLM, s_lm: UnigramLM) -> float:
    """Bhattacharyya coefficient summed over the query model's support."""
    total = 0.0
    for term, p in query_lm.probs.items():
        ps = s_lm.probs.get(term)
        if ps:
            total += math.sqrt(p * ps)
    return min(1.0, total)


def kl_similarity(s_lm: UnigramLM, d_lm: UnigramLM) -> float:
    """``exp(-KL(s_lm || d_lm))`` with natural logs.

    Requires the support of ``s_lm`` to lie inside that of ``d_lm``; a summary
    drawn from the document set always satisfies this.
    """
    kl = 0.0
    for term, p in s_lm.probs.items():
        q = d_lm.probs.get(term)
        if not q:
            raise AssertionError(f"term {term!r} has mass in the summary model but none in the document model")
        kl += p * math.log(p / q)
    return math.exp(-max(kl, 0.0))
