"""Model-distilled frequency refinement.

A base corpus D gives word frequencies F1; prompting a model to continue
each text of a seed corpus yields a distilled corpus D' with frequencies
F2.  The combined frequency blends the two and boosts words the base corpus
never saw:

    F(w) = alpha * F1(w) + (1 + zeta * [F1(w) == 0]) * beta * F2(w)

The indicator tests the raw, unsmoothed F1; the scoring floor is applied
afterwards by the shared sentence-scoring kernel.  With alpha = 1 and
beta = 0 the combined sentence score reduces bit for bit to plain
base-table scoring, because the distilled term contributes an exact +0.0.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable

from textfreq.corpus import (
    DEFAULT_TOKENIZER,
    FrequencyTable,
    TokenizerConfig,
    build_table,
    tokenize,
)
from textfreq.freq import (
    DEFAULT_SMOOTHING,
    EmptySentenceError,
    SentenceScore,
    SmoothingPolicy,
    log_score_tokens,
)
from textfreq.provider import CompletionRequest, Provider, ProviderError, complete_batch

logger = logging.getLogger(__name__)

STORY_COMPLETION_PROMPT = "Please conduct story completion on the following data: {text}"


class EmptyDistillationError(RuntimeError):
    """Every completion in a distillation run failed."""


@dataclass(frozen=True)
class CombineConfig:
    """Weights of the frequency combination."""

    alpha: float = 0.5
    beta: float = 0.5
    zeta: float = 1.0

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "zeta"):
            value = getattr(self, name)
            if not (value >= 0.0) or not math.isfinite(value):
                raise ValueError(f"{name} must be finite and >= 0")
        if self.alpha == 0.0 and self.beta == 0.0:
            raise ValueError("alpha and beta cannot both be zero")


@dataclass(frozen=True)
class CombinedTable:
    """A base table paired with its distilled refinement."""

    base: FrequencyTable
    distilled: FrequencyTable
    config: CombineConfig = CombineConfig()

    def __post_init__(self) -> None:
        if not self.base.finalized or not self.distilled.finalized:
            raise ValueError("combined tables require finalized inputs")


@dataclass(frozen=True)
class DistillResult:
    table: FrequencyTable
    completions: int
    skipped: int


def distill_corpus(
    texts: Iterable[str],
    provider: Provider,
    completions_per_text: int = 1,
    parallelism: int = 1,
    label: str = "distilled",
    config: TokenizerConfig = DEFAULT_TOKENIZER,
    max_output_tokens: int = 256,
    temperature: float = 1.0,
) -> DistillResult:
    """Prompt story completions for every text and count them into a table.

    Failed completions are logged and skipped; the run only fails when
    nothing at all completed.
    """
    if completions_per_text < 1:
        raise ValueError("completions_per_text must be >= 1")
    requests = [
        CompletionRequest(
            prompt=STORY_COMPLETION_PROMPT.format(text=text),
            max_output_tokens=max_output_tokens,
            temperature=temperature,
        )
        for text in texts
        for _ in range(completions_per_text)
    ]
    if not requests:
        raise EmptyDistillationError("no texts to distill")
    results = complete_batch(requests, provider, parallelism=parallelism)
    completions = [r for r in results if isinstance(r, str)]
    skipped = len(results) - len(completions)
    for request, result in zip(requests, results):
        if isinstance(result, ProviderError):
            logger.warning("skipping failed completion for %r: %s", request.prompt[:60], result)
    if not completions:
        raise EmptyDistillationError("all completions failed")
    table = build_table(completions, config=config, label=label)
    return DistillResult(table=table, completions=len(completions), skipped=skipped)


def _relative(table: FrequencyTable, token: str) -> float:
    # Unlike word_frequency, an empty table here means "no evidence", not an
    # error: an empty distilled corpus must leave the base term untouched.
    if table.total == 0:
        return 0.0
    return table.entries.get(token, 0) / table.total


def combined_word_frequency(token: str, combined: CombinedTable) -> float:
    """Blend base and distilled relative frequencies for one token."""
    cfg = combined.config
    f1 = _relative(combined.base, token)
    f2 = _relative(combined.distilled, token)
    boost = 1.0 + cfg.zeta * (1.0 if f1 == 0.0 else 0.0)
    return cfg.alpha * f1 + boost * cfg.beta * f2


def combined_sentence_frequency(
    text: str,
    combined: CombinedTable,
    smoothing: SmoothingPolicy = DEFAULT_SMOOTHING,
    config: TokenizerConfig = DEFAULT_TOKENIZER,
) -> SentenceScore:
    """Sentence score under the combined word frequency."""
    tokens = tokenize(text, config)
    if not tokens:
        raise EmptySentenceError(f"no tokens in {text!r}")
    log_sfreq = log_score_tokens(
        tokens, lambda t: combined_word_frequency(t, combined), smoothing
    )
    return SentenceScore(text=text, token_count=len(tokens), log_sfreq=log_sfreq)
