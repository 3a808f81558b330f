"""Cross-Entropy subset selection under a word budget.

The optimizer keeps one inclusion probability per candidate sentence,
draws budget-feasible subsets from it, keeps the top-quantile (elite)
subsets and re-estimates the probabilities from elite membership
frequencies, smoothing against the previous policy.

Objectives are plain callables mapping a boolean ``(n, k)`` mask array to
``n`` scores, with ``-inf`` for infeasible rows.
"""

from __future__ import annotations

import csv
import math
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .corpus import Sentence
from .predictors import INFEASIBLE, CandidateSummary

SCORE_CHUNK = 256
INITIAL_PHI = 0.5
# relative L_t change below which the adaptive length counts as settled
LENGTH_TOLERANCE = 1e-3

Objective = Callable[[np.ndarray], np.ndarray]


class OptimizationError(RuntimeError):
    """The optimizer could not produce a feasible sample."""


@dataclass(frozen=True)
class CEParams:
    sample_count: int = 10_000
    elite_fraction: float = 0.01
    smoothing: float = 0.7
    max_iterations: int = 100
    stability_window: int = 5
    stability_epsilon: float = 1e-6
    seed: int = 0
    workers: int = 1
    final_mode: str = "greedy"  # or "sample"

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be positive")
        if not 0 < self.elite_fraction < 1:
            raise ValueError("elite_fraction must lie in (0, 1)")
        if not 0 <= self.smoothing <= 1:
            raise ValueError("smoothing must lie in [0, 1]")
        if self.max_iterations < 1 or self.stability_window < 1:
            raise ValueError("max_iterations and stability_window must be positive")
        if self.final_mode not in ("greedy", "sample"):
            raise ValueError(f"unknown final_mode {self.final_mode!r}")


@dataclass(frozen=True)
class AdaptiveLengthState:
    """Poisson length-limit learning; ``cap`` bounds every per-sample draw."""

    initial: float = 3000.0
    cap: float = 3000.0

    def __post_init__(self):
        if self.initial <= 0 or self.cap <= 0:
            raise ValueError("adaptive lengths must be positive")


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    gamma: float
    elite_mean: float
    length_limit: float
    wallclock_ms: float


@dataclass
class CEResult:
    selected: tuple[int, ...]
    policy: np.ndarray
    trace: list[TraceRow] = field(default_factory=list)
    score: float = INFEASIBLE
    length_limit: float | None = None

    def summary(self, candidates: Sequence[Sentence]) -> CandidateSummary:
        return CandidateSummary.of(candidates[i] for i in self.selected)


def sample_batch(phi: np.ndarray, lengths: np.ndarray, budgets: np.ndarray,
                 order_keys: np.ndarray, coins: np.ndarray) -> np.ndarray:
    """Truncated sampling of ``len(budgets)`` subsets at once.

    Row ``j`` visits candidates in ``argsort(order_keys[j])`` order and takes
    each with probability ``phi`` (``coins[j] < phi``), skipping any sentence
    that would push the row past ``budgets[j]``.
    """
    n, k = order_keys.shape
    # keys are continuous draws, so ties (where sort stability would matter) do not occur
    order = np.argsort(order_keys, axis=1)
    want = coins < phi[None, :]
    # step-major copies so each visiting step reads one contiguous row
    want_t = np.ascontiguousarray(np.take_along_axis(want, order, axis=1).T)
    len_t = np.ascontiguousarray(lengths[order].T)
    take_t = np.zeros((k, n), dtype=bool)
    used = np.zeros(n, dtype=lengths.dtype)
    for step in range(k):
        take = want_t[step] & (used + len_t[step] <= budgets)
        take_t[step] = take
        used += len_t[step] * take
    masks = np.zeros((n, k), dtype=bool)
    np.put_along_axis(masks, order, take_t.T, axis=1)
    return masks


def sample_subset(policy: np.ndarray, candidates: Sequence[Sentence], budget: float,
                  rng: np.random.Generator) -> CandidateSummary:
    k = len(candidates)
    lengths = np.array([s.word_count for s in candidates], dtype=np.float64)
    keys = rng.random((1, k))
    coins = rng.random((1, k))
    mask = sample_batch(np.asarray(policy, dtype=np.float64), lengths, np.array([budget]), keys, coins)[0]
    return CandidateSummary.of(candidates[i] for i in np.flatnonzero(mask))


def elite_threshold(scores: np.ndarray, rho: float) -> tuple[float, np.ndarray]:
    """``gamma`` is the descending order statistic at rank ceil(rho * N).

    Returns ``(gamma, elite_mask)`` with the elite being every score >= gamma.
    """
    scores = np.asarray(scores, dtype=np.float64)
    finite = np.isfinite(scores)
    if not finite.any():
        raise OptimizationError("every sampled summary is infeasible; increase the word budget")
    rank = max(1, math.ceil(rho * len(scores) - 1e-9))
    ranked = np.sort(np.where(finite, scores, -np.inf))[::-1]
    gamma = ranked[rank - 1]
    if not np.isfinite(gamma):
        gamma = ranked[finite.sum() - 1]
    return float(gamma), finite & (scores >= gamma)


def update_policy(elite_masks: np.ndarray) -> np.ndarray:
    """Fraction of elite subsets containing each candidate."""
    elite_masks = np.asarray(elite_masks, dtype=bool)
    if elite_masks.shape[0] == 0:
        raise ValueError("elite set is empty")
    return elite_masks.sum(axis=0) / elite_masks.shape[0]


def smooth_policy(prev: np.ndarray, new: np.ndarray, alpha: float) -> np.ndarray:
    prev, new = np.asarray(prev, dtype=np.float64), np.asarray(new, dtype=np.float64)
    if prev.shape != new.shape:
        raise ValueError("policies differ in length")
    return alpha * prev + (1 - alpha) * new


def update_length(elite_lengths: Sequence[float], prev: float, alpha: float) -> float:
    if len(elite_lengths) == 0:
        raise ValueError("elite set is empty")
    mean = float(np.mean(elite_lengths))
    return alpha * prev + (1 - alpha) * mean


def extract_summary(policy: np.ndarray, candidates: Sequence[Sentence], budget: float,
                    rng: np.random.Generator | None = None) -> tuple[int, ...]:
    """Realize a single subset from a learned policy.

    Without ``rng``: greedy by descending probability, ties by
    ``(doc_id, char_offset)``, skipping sentences that no longer fit and
    those the policy never picks (probability 0).
    With ``rng``: one truncated sample from the policy.
    """
    if rng is not None:
        lengths = np.array([s.word_count for s in candidates], dtype=np.float64)
        k = len(candidates)
        mask = sample_batch(np.asarray(policy, dtype=np.float64), lengths, np.array([budget]),
                            rng.random((1, k)), rng.random((1, k)))[0]
        return tuple(int(i) for i in np.flatnonzero(mask))
    order = sorted(range(len(candidates)), key=lambda i: (-policy[i], candidates[i].sort_key))
    chosen, used = [], 0
    for i in order:
        if policy[i] <= 0:
            break
        if used + candidates[i].word_count <= budget:
            chosen.append(i)
            used += candidates[i].word_count
    return tuple(sorted(chosen))


def _score(objective: Objective, masks: np.ndarray, workers: int) -> np.ndarray:
    # fixed chunking keeps results bit-identical for any worker count
    chunks = [masks[i:i + SCORE_CHUNK] for i in range(0, len(masks), SCORE_CHUNK)]
    if workers <= 1 or len(chunks) == 1:
        parts = [objective(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(objective, chunks))
    return np.concatenate(parts)


def run(objective: Objective, candidates: Sequence[Sentence], budget: float, params: CEParams,
        adaptive: AdaptiveLengthState | None = None, stream: int = 0,
        record_time: bool = False) -> CEResult:
    """Optimize ``objective`` over subsets of ``candidates`` within ``budget`` words.

    Iteration ``t`` draws all of its randomness from a generator seeded by
    ``(params.seed, stream, t)``; sample ``j`` consumes row ``j`` of each
    draw. With ``adaptive`` set, each sample gets its own Poisson length
    limit whose mean is re-estimated from the elite every iteration, and
    stopping also waits for that mean to settle.
    """
    if not len(candidates):
        raise ValueError("no candidates to select from")
    k, n = len(candidates), params.sample_count
    lengths = np.array([s.word_count for s in candidates], dtype=np.float64)
    if lengths.min() > budget:
        raise OptimizationError(f"no candidate fits within {budget} words")
    cap = min(budget, adaptive.cap) if adaptive else budget
    limit = min(adaptive.initial, cap) if adaptive else None
    phi = np.full(k, INITIAL_PHI)
    trace: list[TraceRow] = []
    stable = 0
    start = time.perf_counter()

    for t in range(1, params.max_iterations + 1):
        rng = np.random.default_rng([params.seed, stream, t])
        keys = rng.random((n, k))
        coins = rng.random((n, k))
        if adaptive:
            budgets = np.minimum(rng.poisson(limit, n), cap).astype(np.float64)
        else:
            budgets = np.full(n, float(budget))
        masks = sample_batch(phi, lengths, budgets, keys, coins)
        scores = _score(objective, masks, params.workers)
        words = masks @ lengths
        # the sampler is feasible by construction; this is the -inf backstop
        scores = np.where(words > budgets, INFEASIBLE, scores)

        gamma, elite = elite_threshold(scores, params.elite_fraction)
        phi = smooth_policy(phi, update_policy(masks[elite]), params.smoothing)
        if adaptive:
            limit = update_length(words[elite], limit, params.smoothing)
        elapsed = (time.perf_counter() - start) * 1000 if record_time else 0.0
        trace.append(TraceRow(t, gamma, float(scores[elite].mean()), limit if adaptive else float(budget), elapsed))

        if len(trace) > 1:
            prev = trace[-2].gamma
            steady = abs(gamma - prev) < params.stability_epsilon * max(1.0, abs(prev))
            if adaptive:
                steady = steady and abs(limit - trace[-2].length_limit) < LENGTH_TOLERANCE * trace[-2].length_limit
            stable = stable + 1 if steady else 0
            if stable >= params.stability_window:
                break

    final_budget = min(cap, math.floor(limit)) if adaptive else budget
    if params.final_mode == "sample":
        selected = extract_summary(phi, candidates, final_budget, np.random.default_rng([params.seed, stream, 0]))
    else:
        selected = extract_summary(phi, candidates, final_budget)
    mask = np.zeros((1, k), dtype=bool)
    mask[0, list(selected)] = True
    score = float(objective(mask)[0]) if selected else INFEASIBLE
    return CEResult(selected, phi, trace, score, limit)


def write_trace(trace: Sequence[TraceRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "gamma", "elite_mean", "L_t", "wallclock_ms"])
        for row in trace:
            writer.writerow([row.iteration, repr(row.gamma), repr(row.elite_mean),
                             repr(row.length_limit), f"{row.wallclock_ms:.3f}"])
