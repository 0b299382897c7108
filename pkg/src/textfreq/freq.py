"""Word and sentence frequency scoring.

Sentence frequency is the geometric mean of the per-token relative
frequencies.  All scoring happens in log space: with tokens ``t_1..t_K`` and
word frequencies ``f(t)`` floored at the smoothing policy's floor,

    log_sfreq = (1/K) * sum(ln f(t_k))

The sum is evaluated with ``math.fsum`` over per-unique-token weighted
terms ``(count/K) * ln f(t)``, which makes the score exactly invariant
under token permutation and under duplicating the whole sentence.
``zipf_sfreq`` rescales to the human-friendly Zipf scale
(``log10(relative) + 9``, so 9 per billion words at relative 1.0).
"""

from __future__ import annotations

import math
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from textfreq.corpus import DEFAULT_TOKENIZER, FrequencyTable, TokenizerConfig, tokenize

_LN10 = math.log(10.0)


class EmptyTableError(ValueError):
    """Frequencies were requested against a table with total == 0."""


class EmptySentenceError(ValueError):
    """A sentence produced no tokens, so it has no frequency."""


@dataclass(frozen=True)
class SmoothingPolicy:
    """Floor applied to word frequencies before taking logs.

    The floor keeps unseen tokens from collapsing the geometric mean to
    zero; it is applied at scoring time only, raw lookups stay unsmoothed.
    """

    floor: float = 1e-9

    def __post_init__(self) -> None:
        if not (self.floor > 0.0) or not math.isfinite(self.floor):
            raise ValueError("smoothing floor must be a positive finite number")


DEFAULT_SMOOTHING = SmoothingPolicy()


@dataclass(frozen=True)
class SentenceScore:
    """A scored sentence; ``zipf_sfreq`` is derived from ``log_sfreq``."""

    text: str
    token_count: int
    log_sfreq: float

    def __post_init__(self) -> None:
        if self.token_count < 1:
            raise ValueError("token_count must be >= 1")
        if not math.isfinite(self.log_sfreq):
            raise ValueError("log_sfreq must be finite")

    @property
    def zipf_sfreq(self) -> float:
        return self.log_sfreq / _LN10 + 9.0


def word_frequency(token: str, table: FrequencyTable) -> float:
    """Relative frequency of ``token``; 0.0 when absent, error on empty table."""
    if table.total == 0:
        raise EmptyTableError(f"table {table.label!r} is empty")
    return table.entries.get(token, 0) / table.total


def zipf_scale(relative: float) -> float:
    """Map a relative frequency in (0, 1] to the Zipf scale."""
    if not (relative > 0.0):
        raise ValueError("relative frequency must be positive")
    return math.log10(relative) + 9.0


def zipf_to_relative(zipf: float) -> float:
    """Inverse of :func:`zipf_scale`."""
    return 10.0 ** (zipf - 9.0)


def log_score_tokens(
    tokens: Sequence[str],
    lookup: Callable[[str], float],
    smoothing: SmoothingPolicy = DEFAULT_SMOOTHING,
) -> float:
    """Geometric-mean log score of ``tokens`` under any word-frequency lookup.

    This is the single scoring kernel; every sentence-level score in the
    package funnels through it so that alternative frequency sources reduce
    to plain table scoring bit for bit when they coincide.
    """
    k = len(tokens)
    if k == 0:
        raise EmptySentenceError("no tokens to score")
    floor = smoothing.floor
    terms = [
        (count / k) * math.log(max(lookup(token), floor))
        for token, count in Counter(tokens).items()
    ]
    return math.fsum(terms)


def sentence_frequency(
    text: str,
    table: FrequencyTable,
    smoothing: SmoothingPolicy = DEFAULT_SMOOTHING,
    config: TokenizerConfig = DEFAULT_TOKENIZER,
) -> SentenceScore:
    """Score ``text`` against ``table``; raises on empty tables or token-free text."""
    if table.total == 0:
        raise EmptyTableError(f"table {table.label!r} is empty")
    tokens = tokenize(text, config)
    if not tokens:
        raise EmptySentenceError(f"no tokens in {text!r}")
    entries = table.entries
    total = table.total
    log_sfreq = log_score_tokens(tokens, lambda t: entries.get(t, 0) / total, smoothing)
    return SentenceScore(text=text, token_count=len(tokens), log_sfreq=log_sfreq)


@dataclass(frozen=True)
class BinCounts:
    """Histogram of Zipf-scale sentence scores over half-open bins."""

    edges: tuple[float, ...]
    counts: tuple[int, ...]
    below: int
    above: int

    @property
    def observations(self) -> int:
        return sum(self.counts) + self.below + self.above


def bin_histogram(
    scores: Iterable[SentenceScore | float],
    edges: Sequence[float],
) -> BinCounts:
    """Count scores into ``[edges[i], edges[i+1])`` bins on the Zipf scale.

    Values under the first edge land in ``below``, values at or over the
    last edge land in ``above``, so every observation is accounted for.
    """
    if len(edges) < 2:
        raise ValueError("need at least two bin edges")
    for lo, hi in zip(edges, edges[1:]):
        if not lo < hi:
            raise ValueError("bin edges must be strictly increasing")
    counts = [0] * (len(edges) - 1)
    below = 0
    above = 0
    first, last = edges[0], edges[-1]
    for score in scores:
        value = score.zipf_sfreq if isinstance(score, SentenceScore) else float(score)
        if value < first:
            below += 1
        elif value >= last:
            above += 1
        else:
            idx = bisect_right(edges, value) - 1
            counts[idx] += 1
    return BinCounts(edges=tuple(edges), counts=tuple(counts), below=below, above=above)
