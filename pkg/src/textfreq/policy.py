"""Paraphrase selection and curriculum ordering.

Selection picks candidates by sentence frequency: the single most frequent
paraphrase, or the least/most frequent pair for contrastive datasets.
Curriculum ordering sorts training instances by a frequency key (or an
externally supplied key) with a stable sort, so equal keys keep their input
order in both directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Mapping, Sequence

from textfreq.freq import SentenceScore

Scorer = Callable[[str], SentenceScore]


class ScoringError(ValueError):
    """A candidate could not be scored; carries the offending text."""

    def __init__(self, candidate: str, cause: Exception) -> None:
        super().__init__(f"cannot score candidate {candidate!r}: {cause}")
        self.candidate = candidate
        self.cause = cause


class MissingScoreError(LookupError):
    """An instance has no entry in the score mapping."""


@dataclass(frozen=True)
class ParaphraseSet:
    """One source utterance and its candidate rephrasings."""

    id: str
    candidates: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.candidates:
            raise ValueError(f"paraphrase set {self.id!r} has no candidates")
        if any(not c for c in self.candidates):
            raise ValueError(f"paraphrase set {self.id!r} contains an empty candidate")


@dataclass(frozen=True)
class TrainingInstance:
    """An instance to order; ``payload`` is opaque and never inspected."""

    id: str
    input_text: str
    payload: Any = field(default=None, compare=False)


class OrderingMode(Enum):
    ASCENDING_FREQUENCY = "ascending"
    DESCENDING_FREQUENCY = "descending"
    EXTERNAL_KEY = "external"


def _score_all(pset: ParaphraseSet, scorer: Scorer) -> list[SentenceScore]:
    scores = []
    for candidate in pset.candidates:
        try:
            scores.append(scorer(candidate))
        except Exception as exc:
            raise ScoringError(candidate, exc) from exc
    return scores


def select_max(pset: ParaphraseSet, scorer: Scorer) -> tuple[int, SentenceScore]:
    """Most frequent candidate; ties go to the lowest index."""
    scores = _score_all(pset, scorer)
    best = 0
    for i in range(1, len(scores)):
        if scores[i].log_sfreq > scores[best].log_sfreq:
            best = i
    return best, scores[best]


def select_extremes(pset: ParaphraseSet, scorer: Scorer) -> tuple[int, int]:
    """Indices of the least and most frequent candidates.

    Ties go to the lowest index on both sides.  The two indices are always
    distinct: when every candidate scores equally, the pair is (0, 1), which
    requires at least two candidates.
    """
    if len(pset.candidates) < 2:
        raise ValueError(f"paraphrase set {pset.id!r} needs >= 2 candidates for extremes")
    scores = _score_all(pset, scorer)
    low = 0
    high = 0
    for i in range(1, len(scores)):
        if scores[i].log_sfreq < scores[low].log_sfreq:
            low = i
        if scores[i].log_sfreq > scores[high].log_sfreq:
            high = i
    if low == high:
        return 0, 1
    return low, high


def order_curriculum(
    instances: Sequence[TrainingInstance],
    scores: Mapping[str, float] | None = None,
    mode: OrderingMode = OrderingMode.ASCENDING_FREQUENCY,
    external_keys: Mapping[str, float] | None = None,
) -> list[str]:
    """Return instance ids sorted for curriculum training.

    Frequency modes read ``scores`` (id -> log frequency); the external mode
    reads ``external_keys`` and sorts ascending by that key.  Every instance
    must have a key, and NaN keys are rejected because they break the total
    order.  Sorting is stable, so ties preserve input order; the input
    sequence itself is never modified.
    """
    if mode is OrderingMode.EXTERNAL_KEY:
        if external_keys is None:
            raise ValueError("external ordering requires external_keys")
        keys = external_keys
    else:
        if scores is None:
            raise ValueError("frequency ordering requires scores")
        keys = scores

    resolved: list[tuple[str, float]] = []
    for inst in instances:
        try:
            key = keys[inst.id]
        except KeyError:
            raise MissingScoreError(f"no key for instance {inst.id!r}") from None
        key = float(key)
        if math.isnan(key):
            raise ValueError(f"key for instance {inst.id!r} is NaN")
        resolved.append((inst.id, key))

    if mode is OrderingMode.DESCENDING_FREQUENCY:
        ordered = sorted(resolved, key=lambda pair: -pair[1])
    else:
        ordered = sorted(resolved, key=lambda pair: pair[1])
    return [inst_id for inst_id, _ in ordered]
