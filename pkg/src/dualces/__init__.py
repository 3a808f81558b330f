"""Query-focused extractive summarization with dual-cascade Cross-Entropy optimization."""

from .cascade import CascadeConfig, Mode, SummaryResult, run_ces_baseline, run_dual_ces, summarize
from .ce_opt import CEParams
from .corpus import AnalyzerConfig, DocumentSet, Sentence, Topic, analyze, load_corpus, parse_corpus

__all__ = [
    "AnalyzerConfig",
    "CEParams",
    "CascadeConfig",
    "DocumentSet",
    "Mode",
    "Sentence",
    "SummaryResult",
    "Topic",
    "analyze",
    "load_corpus",
    "parse_corpus",
    "run_ces_baseline",
    "run_dual_ces",
    "summarize",
]
