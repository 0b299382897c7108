"""Paired-paraphrase dataset pipeline.

For each source sentence a provider generates twenty rephrasings; the least
and most frequent ones (by sentence frequency) form a candidate pair that
human annotators then vet for meaning preservation.  A pair enters the
dataset only when every configured annotator votes "Same"; any other
verdict rejects the pair, because the whole point of the dataset is that
the two texts differ only in word frequency.

All state changes go through an append-only JSONL journal that is fsynced
before a write is acknowledged, so a crash never loses an acknowledged
judgment and never corrupts earlier entries.  Job status is derived state:
replaying the journal reproduces it exactly.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Iterator

from textfreq.corpus import DEFAULT_TOKENIZER, TokenizerConfig, tokenize
from textfreq.ioutil import atomic_write_text
from textfreq.policy import ParaphraseSet, Scorer, ScoringError, select_extremes
from textfreq.provider import CompletionRequest, Provider, ProviderError

logger = logging.getLogger(__name__)

JOURNAL_FORMAT = "tfpd-journal/1"

REPHRASE_PROMPT = (
    "My goal is to transform the original sentence into both more common and "
    "less common expressions.\n"
    "Note: Do not omit any words such as verbs, adjectives, nouns, or adverbs.\n"
    "You must generate two types of sentences:\n"
    "(1) ten sentences using less common, more complex words.\n"
    "(2) ten sentences using more common, simpler words.\n"
    "Return all 20 sentences directly, separated by |||| and do not use numbering.\n"
    "Original sentence: {sentence}"
)

CANDIDATE_SEPARATOR = "||||"
EXPECTED_CANDIDATES = 20

DEFAULT_ANNOTATORS = ("annotator-1", "annotator-2", "annotator-3")


class Verdict(str, Enum):
    SAME = "Same"
    MAYBE_SAME = "MaybeSame"
    NOT_SAME = "NotSame"


class JobStatus(str, Enum):
    GENERATED = "Generated"
    IN_ANNOTATION = "InAnnotation"
    ACCEPTED = "Accepted"
    REJECTED = "Rejected"


class JournalError(ValueError):
    """The journal is malformed beyond a torn final line."""


class JobNotFoundError(LookupError):
    pass


class UnknownAnnotatorError(LookupError):
    pass


class FinalizedJobError(RuntimeError):
    """A judgment arrived for a job whose outcome is already decided."""


@dataclass
class ParaphraseJob:
    """One source sentence and its selected extreme-frequency pair."""

    source_id: str
    original: str
    candidates: tuple[str, ...]
    low_text: str | None
    high_text: str | None
    status: JobStatus
    reject_reason: str | None = None
    ground_truth: Any = None


@dataclass(frozen=True)
class Judgment:
    job_id: str
    annotator: str
    verdict: Verdict
    timestamp: float
    permutation: str | None = None


@dataclass(frozen=True)
class AnnotationView:
    """What an annotator needs to judge one pair."""

    job_id: str
    original: str
    low_text: str
    high_text: str


def generate_job(
    source_id: str,
    sentence: str,
    provider: Provider,
    scorer: Scorer,
    ground_truth: Any = None,
) -> ParaphraseJob:
    """Rephrase ``sentence`` and pick the extreme-frequency pair.

    Generation problems never raise: the job comes back ``Rejected`` with a
    machine-readable reason so the pipeline can account for every source
    sentence.
    """
    if not sentence:
        raise ValueError("sentence must be non-empty")

    def rejected(reason: str, candidates: tuple[str, ...] = ()) -> ParaphraseJob:
        logger.warning("source %s rejected at generation: %s", source_id, reason)
        return ParaphraseJob(
            source_id=source_id,
            original=sentence,
            candidates=candidates,
            low_text=None,
            high_text=None,
            status=JobStatus.REJECTED,
            reject_reason=reason,
            ground_truth=ground_truth,
        )

    request = CompletionRequest(prompt=REPHRASE_PROMPT.format(sentence=sentence))
    try:
        completion = provider.complete(request)
    except ProviderError as exc:
        return rejected(f"provider-error: {exc}")

    parts = tuple(part.strip() for part in completion.split(CANDIDATE_SEPARATOR))
    if len(parts) != EXPECTED_CANDIDATES or any(not part for part in parts):
        return rejected(
            f"malformed-generation: expected {EXPECTED_CANDIDATES} candidates, "
            f"got {len(parts)}"
        )

    try:
        low, high = select_extremes(ParaphraseSet(id=source_id, candidates=parts), scorer)
    except ScoringError as exc:
        return rejected(f"unscoreable-candidate: {exc}", parts)

    low_text, high_text = parts[low], parts[high]
    if low_text == high_text:
        # Distinct indices can still carry identical texts when the
        # generator repeats itself; such a pair is useless downstream.
        return rejected("degenerate-candidates", parts)

    return ParaphraseJob(
        source_id=source_id,
        original=sentence,
        candidates=parts,
        low_text=low_text,
        high_text=high_text,
        status=JobStatus.GENERATED,
        ground_truth=ground_truth,
    )


class AnnotationPipeline:
    """Journal-backed store of paraphrase jobs and their judgments.

    A job is finalized once every configured annotator has judged it:
    unanimous "Same" accepts, anything else rejects.  Until then an
    annotator may overwrite their own judgment (last write wins).
    """

    def __init__(
        self,
        journal_path: str | Path,
        annotators: Iterable[str] | None = None,
    ) -> None:
        self.journal_path = Path(journal_path)
        self._lock = threading.Lock()
        self._jobs: dict[str, ParaphraseJob] = {}
        self._order: list[str] = []
        self._judgments: dict[str, dict[str, Judgment]] = {}
        self._fh = None

        requested = tuple(annotators) if annotators is not None else None
        if requested is not None:
            if not requested or len(set(requested)) != len(requested):
                raise ValueError("annotators must be non-empty and unique")

        existing = self.journal_path.exists() and self.journal_path.stat().st_size > 0
        if existing:
            journal_annotators = self._replay()
            if requested is not None and requested != journal_annotators:
                raise JournalError(
                    f"annotator set {requested!r} differs from journal "
                    f"{journal_annotators!r}"
                )
            self.annotators = journal_annotators
        else:
            self.annotators = requested if requested is not None else DEFAULT_ANNOTATORS
            self._append({"event": "init", "format": JOURNAL_FORMAT, "annotators": list(self.annotators)})

    # -- journal ---------------------------------------------------------

    def _append(self, event: dict) -> None:
        if self._fh is None:
            self._fh = open(self.journal_path, "a", encoding="utf-8")
        line = json.dumps(event, ensure_ascii=False, separators=(",", ":"))
        self._fh.write(line + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def _replay(self) -> tuple[str, ...]:
        raw = self.journal_path.read_bytes()
        # A torn final line (crash mid-append) is tolerated and dropped;
        # anything malformed before it means real corruption.
        lines = raw.split(b"\n")
        if lines[-1] == b"":
            lines = lines[:-1]
        else:
            torn = lines[-1]
            lines = lines[:-1]
            logger.warning(
                "%s: dropping torn trailing journal line (%d bytes)",
                self.journal_path,
                len(torn),
            )
        annotators: tuple[str, ...] | None = None
        for lineno, line in enumerate(lines, start=1):
            try:
                event = json.loads(line.decode("utf-8"))
            except (ValueError, UnicodeDecodeError) as exc:
                raise JournalError(f"{self.journal_path}:{lineno}: malformed event: {exc}") from exc
            kind = event.get("event")
            if lineno == 1:
                if kind != "init" or event.get("format") != JOURNAL_FORMAT:
                    raise JournalError(f"{self.journal_path}: missing or bad init event")
                annotators = tuple(event["annotators"])
                if not annotators:
                    raise JournalError(f"{self.journal_path}: empty annotator set")
                self.annotators = annotators
                continue
            if kind == "job":
                job = _job_from_event(event)
                if job.source_id in self._jobs:
                    raise JournalError(
                        f"{self.journal_path}:{lineno}: duplicate job {job.source_id!r}"
                    )
                self._jobs[job.source_id] = job
                self._order.append(job.source_id)
                self._judgments[job.source_id] = {}
            elif kind == "judgment":
                try:
                    judgment = Judgment(
                        job_id=event["job_id"],
                        annotator=event["annotator"],
                        verdict=Verdict(event["verdict"]),
                        timestamp=float(event["ts"]),
                        permutation=event.get("permutation"),
                    )
                    self._apply_judgment(judgment)
                except (KeyError, ValueError, LookupError, FinalizedJobError) as exc:
                    raise JournalError(
                        f"{self.journal_path}:{lineno}: invalid judgment: {exc}"
                    ) from exc
            else:
                raise JournalError(f"{self.journal_path}:{lineno}: unknown event {kind!r}")
        if annotators is None:
            raise JournalError(f"{self.journal_path}: journal has no init event")
        return annotators

    # -- state transitions ------------------------------------------------

    def add_job(self, job: ParaphraseJob) -> None:
        with self._lock:
            if job.source_id in self._jobs:
                raise ValueError(f"duplicate job {job.source_id!r}")
            self._append({"event": "job", **_job_to_event(job)})
            self._jobs[job.source_id] = job
            self._order.append(job.source_id)
            self._judgments[job.source_id] = {}

    def _apply_judgment(self, judgment: Judgment) -> JobStatus:
        if judgment.annotator not in self.annotators:
            raise UnknownAnnotatorError(f"unknown annotator {judgment.annotator!r}")
        job = self._jobs.get(judgment.job_id)
        if job is None:
            raise JobNotFoundError(f"unknown job {judgment.job_id!r}")
        if job.status in (JobStatus.ACCEPTED, JobStatus.REJECTED):
            raise FinalizedJobError(f"job {job.source_id!r} is already {job.status.value}")
        votes = self._judgments[job.source_id]
        votes[judgment.annotator] = judgment
        if len(votes) == len(self.annotators):
            unanimous = all(j.verdict is Verdict.SAME for j in votes.values())
            job.status = JobStatus.ACCEPTED if unanimous else JobStatus.REJECTED
        else:
            job.status = JobStatus.IN_ANNOTATION
        return job.status

    def record_judgment(
        self,
        job_id: str,
        annotator: str,
        verdict: Verdict | str,
        permutation: str | None = None,
    ) -> JobStatus:
        """Durably record one judgment and return the job's new status."""
        verdict = Verdict(verdict)
        with self._lock:
            # Validate against current state before touching the journal so
            # rejected requests leave no trace.
            if annotator not in self.annotators:
                raise UnknownAnnotatorError(f"unknown annotator {annotator!r}")
            job = self._jobs.get(job_id)
            if job is None:
                raise JobNotFoundError(f"unknown job {job_id!r}")
            if job.status in (JobStatus.ACCEPTED, JobStatus.REJECTED):
                raise FinalizedJobError(f"job {job_id!r} is already {job.status.value}")
            judgment = Judgment(
                job_id=job_id,
                annotator=annotator,
                verdict=verdict,
                timestamp=time.time(),
                permutation=permutation,
            )
            self._append(
                {
                    "event": "judgment",
                    "job_id": judgment.job_id,
                    "annotator": judgment.annotator,
                    "verdict": judgment.verdict.value,
                    "ts": judgment.timestamp,
                    **({"permutation": permutation} if permutation else {}),
                }
            )
            return self._apply_judgment(judgment)

    # -- queries ----------------------------------------------------------

    def next_item(self, annotator: str) -> AnnotationView | None:
        """Oldest pair this annotator has not judged yet, if any."""
        with self._lock:
            if annotator not in self.annotators:
                raise UnknownAnnotatorError(f"unknown annotator {annotator!r}")
            for job_id in self._order:
                job = self._jobs[job_id]
                if job.status not in (JobStatus.GENERATED, JobStatus.IN_ANNOTATION):
                    continue
                if annotator in self._judgments[job_id]:
                    continue
                assert job.low_text is not None and job.high_text is not None
                return AnnotationView(
                    job_id=job_id,
                    original=job.original,
                    low_text=job.low_text,
                    high_text=job.high_text,
                )
        return None

    def job(self, job_id: str) -> ParaphraseJob:
        with self._lock:
            try:
                return self._jobs[job_id]
            except KeyError:
                raise JobNotFoundError(f"unknown job {job_id!r}") from None

    def jobs(self) -> list[ParaphraseJob]:
        with self._lock:
            return [self._jobs[job_id] for job_id in self._order]

    def progress(self) -> dict:
        with self._lock:
            by_status = {status.value: 0 for status in JobStatus}
            for job in self._jobs.values():
                by_status[job.status.value] += 1
            by_annotator = {a: 0 for a in self.annotators}
            judgments = 0
            for votes in self._judgments.values():
                judgments += len(votes)
                for annotator in votes:
                    by_annotator[annotator] += 1
            return {
                "total": len(self._jobs),
                "by_status": by_status,
                "judgments": judgments,
                "by_annotator": by_annotator,
            }

    def accepted_records(self) -> list[dict]:
        """Accepted pairs as export records, sorted by source id."""
        with self._lock:
            records = []
            for job in self._jobs.values():
                if job.status is not JobStatus.ACCEPTED:
                    continue
                records.append(
                    {
                        "source_id": job.source_id,
                        "low_text": job.low_text,
                        "high_text": job.high_text,
                        "ground_truth": job.ground_truth,
                    }
                )
            records.sort(key=lambda r: r["source_id"])
            return records

    def close(self) -> None:
        with self._lock:
            if self._fh is not None:
                self._fh.close()
                self._fh = None

    def __enter__(self) -> "AnnotationPipeline":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def _job_to_event(job: ParaphraseJob) -> dict:
    return {
        "source_id": job.source_id,
        "original": job.original,
        "candidates": list(job.candidates),
        "low_text": job.low_text,
        "high_text": job.high_text,
        "status": job.status.value,
        "reject_reason": job.reject_reason,
        "ground_truth": job.ground_truth,
    }


def _job_from_event(event: dict) -> ParaphraseJob:
    try:
        status = JobStatus(event["status"])
        if status not in (JobStatus.GENERATED, JobStatus.REJECTED):
            raise ValueError(f"job event cannot carry derived status {status.value}")
        return ParaphraseJob(
            source_id=event["source_id"],
            original=event["original"],
            candidates=tuple(event["candidates"]),
            low_text=event["low_text"],
            high_text=event["high_text"],
            status=status,
            reject_reason=event.get("reject_reason"),
            ground_truth=event.get("ground_truth"),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise JournalError(f"bad job event: {exc}") from exc


@dataclass(frozen=True)
class PartitionStats:
    """Token-length statistics of one side of the exported pairs."""

    count: int
    mean_tokens: float | None
    max_tokens: int | None
    min_tokens: int | None


@dataclass(frozen=True)
class ExportStats:
    records: int
    low: PartitionStats
    high: PartitionStats


def _partition_stats(texts: list[str], config: TokenizerConfig) -> PartitionStats:
    lengths = [len(tokenize(text, config)) for text in texts]
    if not lengths:
        return PartitionStats(count=0, mean_tokens=None, max_tokens=None, min_tokens=None)
    return PartitionStats(
        count=len(lengths),
        mean_tokens=sum(lengths) / len(lengths),
        max_tokens=max(lengths),
        min_tokens=min(lengths),
    )


def export_accepted(
    pipeline: AnnotationPipeline,
    path: str | Path,
    config: TokenizerConfig = DEFAULT_TOKENIZER,
) -> ExportStats:
    """Write accepted pairs as NDJSON, atomically, and return length stats.

    The output depends only on accepted jobs and their source ids, never on
    judgment timing or presentation order, so repeated exports of the same
    state are byte-identical.
    """
    records = pipeline.accepted_records()
    lines = [json.dumps(record, ensure_ascii=False) for record in records]
    atomic_write_text(path, "".join(line + "\n" for line in lines))
    return ExportStats(
        records=len(records),
        low=_partition_stats([r["low_text"] for r in records], config),
        high=_partition_stats([r["high_text"] for r in records], config),
    )


def ingest_dataset(
    pipeline: AnnotationPipeline,
    records: Iterable[dict],
    provider: Provider,
    scorer: Scorer,
) -> Iterator[ParaphraseJob]:
    """Generate and enqueue a job per source record.

    Records need an ``id`` and a ``text``; the whole record rides along as
    ground truth, adopted verbatim into the export.
    """
    for record in records:
        try:
            source_id = str(record["id"])
            text = record["text"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"source record needs id and text: {record!r}") from exc
        if not isinstance(text, str) or not text:
            raise ValueError(f"source record {source_id!r} has no usable text")
        job = generate_job(source_id, text, provider, scorer, ground_truth=record)
        pipeline.add_job(job)
        yield job
