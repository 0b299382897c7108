"""Corpus ingestion: tokenization, frequency tables, and their persistence.

A :class:`FrequencyTable` maps normalized tokens to counts.  Tables built by
counting hold integer counts and satisfy ``total == sum(counts)`` exactly;
tables imported from Zipf-scale word lists hold synthetic float counts
against a virtual total, so only relative frequencies are meaningful there.

The on-disk format is line-oriented and diffable::

    tfl-table/1 <total> <label>
    <token>\\t<count>
    ...

sorted by token, UTF-8, one trailing newline per line.  Numbers are written
as ``repr`` (ints as ints), so a save/load cycle is bit-exact.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from textfreq import kernels
from textfreq.ioutil import atomic_write_text

logger = logging.getLogger(__name__)

TABLE_FORMAT = "tfl-table/1"

# Batch size per worker task when counting with a thread pool.
_CHUNK = 256


class TableFormatError(ValueError):
    """A table file violates the serialization format."""


class FinalizedTableError(RuntimeError):
    """Mutation was attempted on a finalized table."""


@dataclass(frozen=True)
class TokenizerConfig:
    """Tokenizer settings.

    Segmentation is fixed: a token is a maximal run of Unicode alphanumeric
    code points, so punctuation-only spans never produce tokens.  Only the
    normalization step is configurable.
    """

    lowercase: bool = True


DEFAULT_TOKENIZER = TokenizerConfig()


def tokenize(text: str, config: TokenizerConfig = DEFAULT_TOKENIZER) -> list[str]:
    """Split ``text`` into normalized tokens."""
    return kernels.tokenize(text, config.lowercase)


class FrequencyTable:
    """Token counts plus their total.

    ``entries`` maps token -> count.  ``total`` is the denominator used for
    relative frequencies; for counted corpora it equals the sum of counts,
    for Zipf imports it is the virtual total the synthetic counts were
    scaled against.
    """

    __slots__ = ("entries", "total", "label", "finalized")

    def __init__(
        self,
        entries: dict[str, int | float] | None = None,
        total: int | float = 0,
        label: str = "corpus",
    ) -> None:
        if "\n" in label or "\r" in label:
            raise ValueError("table label must not contain newlines")
        self.entries: dict[str, int | float] = dict(entries) if entries else {}
        self.total: int | float = total
        self.label = label
        self.finalized = False

    def add(self, token: str, count: int | float = 1) -> None:
        if self.finalized:
            raise FinalizedTableError("cannot add to a finalized table")
        if not token:
            raise ValueError("empty token")
        if count <= 0:
            raise ValueError(f"count for {token!r} must be positive")
        self.entries[token] = self.entries.get(token, 0) + count
        self.total += count

    def finalize(self) -> "FrequencyTable":
        self.finalized = True
        return self

    def count(self, token: str) -> int | float:
        return self.entries.get(token, 0)

    def __len__(self) -> int:
        return len(self.entries)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (
            f"FrequencyTable(label={self.label!r}, tokens={len(self.entries)}, "
            f"total={self.total!r}, finalized={self.finalized})"
        )


def _count_chunk(texts: list[str], lowercase: bool) -> dict[str, int]:
    counts: dict[str, int] = {}
    for text in texts:
        kernels.count_into(counts, text, lowercase)
    return counts


def build_table(
    corpus: Iterable[str],
    config: TokenizerConfig = DEFAULT_TOKENIZER,
    label: str = "corpus",
    workers: int = 1,
) -> FrequencyTable:
    """Count every record of ``corpus`` into a finalized table.

    Records that are not text are skipped with a counted warning rather than
    aborting the whole build.  With ``workers > 1`` records are counted in
    batches on a thread pool; batch results merge by integer addition, so
    the outcome is bit-identical to the serial build.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    skipped = 0

    def records() -> Iterator[str]:
        nonlocal skipped
        for rec in corpus:
            if isinstance(rec, str):
                yield rec
            else:
                skipped += 1
                logger.debug("skipping unreadable corpus record %r", rec)

    if workers == 1:
        counts = _count_chunk(list(records()), config.lowercase)
    else:
        chunks: list[list[str]] = []
        chunk: list[str] = []
        for text in records():
            chunk.append(text)
            if len(chunk) >= _CHUNK:
                chunks.append(chunk)
                chunk = []
        if chunk:
            chunks.append(chunk)
        counts = {}
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(lambda c: _count_chunk(c, config.lowercase), chunks):
                for token, n in part.items():
                    counts[token] = counts.get(token, 0) + n
    if skipped:
        logger.warning("skipped %d unreadable corpus records", skipped)
    table = FrequencyTable(counts, total=sum(counts.values()), label=label)
    return table.finalize()


def merge_tables(a: FrequencyTable, b: FrequencyTable) -> FrequencyTable:
    """Combine two tables by adding counts; totals add as well."""
    entries = dict(a.entries)
    for token, n in b.entries.items():
        entries[token] = entries.get(token, 0) + n
    merged = FrequencyTable(entries, total=a.total + b.total, label=f"{a.label}+{b.label}")
    return merged.finalize()


def import_zipf_list(
    path: str | Path,
    virtual_total: float = 1e9,
    label: str | None = None,
) -> FrequencyTable:
    """Build a table from a ``token<TAB>zipf`` word list.

    The Zipf scale is ``log10(relative) + 9``, so a value of 9 means the
    token is the whole corpus and each step of 1 is a factor of 10.  Counts
    are synthesized as ``10**(zipf - 9) * virtual_total`` against the
    virtual total; they are floats and only ratios against ``total`` carry
    meaning.  Any malformed line aborts with its line number.
    """
    path = Path(path)
    if virtual_total <= 0:
        raise ValueError("virtual_total must be positive")
    entries: dict[str, int | float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            parts = line.split("\t")
            if len(parts) != 2:
                raise TableFormatError(f"{path}:{lineno}: expected token<TAB>zipf")
            token, zipf_text = parts[0].strip(), parts[1].strip()
            if not token:
                raise TableFormatError(f"{path}:{lineno}: empty token")
            try:
                zipf = float(zipf_text)
            except ValueError:
                raise TableFormatError(f"{path}:{lineno}: bad zipf value {zipf_text!r}") from None
            if zipf != zipf or zipf in (float("inf"), float("-inf")):
                raise TableFormatError(f"{path}:{lineno}: zipf value must be finite")
            if token in entries:
                raise TableFormatError(f"{path}:{lineno}: duplicate token {token!r}")
            entries[token] = 10.0 ** (zipf - 9.0) * virtual_total
    table = FrequencyTable(
        entries,
        total=virtual_total,
        label=label if label is not None else f"zipf-import:{path.name}",
    )
    return table.finalize()


def _format_number(value: int | float) -> str:
    if isinstance(value, bool):  # bool is an int subclass; never valid here
        raise TypeError("boolean count")
    if isinstance(value, int):
        return str(value)
    return repr(value)


def _parse_number(text: str) -> int | float:
    try:
        return int(text)
    except ValueError:
        return float(text)


def save_table(table: FrequencyTable, path: str | Path) -> None:
    """Serialize a finalized table atomically."""
    if not table.finalized:
        raise FinalizedTableError("only finalized tables can be saved")
    lines = [f"{TABLE_FORMAT} {_format_number(table.total)} {table.label}"]
    for token in sorted(table.entries):
        if "\t" in token or "\n" in token or "\r" in token:
            raise ValueError(f"token {token!r} cannot be serialized")
        lines.append(f"{token}\t{_format_number(table.entries[token])}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_table(path: str | Path) -> FrequencyTable:
    """Load a table, refusing anything malformed or truncated."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if not text:
        raise TableFormatError(f"{path}: empty file")
    if not text.endswith("\n"):
        raise TableFormatError(f"{path}: truncated file (missing final newline)")
    lines = text.split("\n")[:-1]
    header = lines[0].split(" ", 2)
    if header[0] != TABLE_FORMAT:
        raise TableFormatError(f"{path}: unsupported table format {header[0]!r}")
    if len(header) < 2:
        raise TableFormatError(f"{path}: header missing total")
    try:
        total = _parse_number(header[1])
    except ValueError:
        raise TableFormatError(f"{path}: bad total {header[1]!r}") from None
    label = header[2] if len(header) == 3 else ""
    entries: dict[str, int | float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0]:
            raise TableFormatError(f"{path}:{lineno}: expected token<TAB>count")
        if parts[0] in entries:
            raise TableFormatError(f"{path}:{lineno}: duplicate token {parts[0]!r}")
        try:
            entries[parts[0]] = _parse_number(parts[1])
        except ValueError:
            raise TableFormatError(f"{path}:{lineno}: bad count {parts[1]!r}") from None
    if isinstance(total, int):
        # Counted tables promise total == sum(counts); a mismatch means the
        # file lost lines (truncation at a line boundary) or was edited.
        if sum(entries.values()) != total:
            raise TableFormatError(f"{path}: count sum does not match total (truncated or corrupt)")
    table = FrequencyTable(entries, total=total, label=label)
    return table.finalize()


def iter_text_records(path: str | Path) -> Iterator[str]:
    """Yield text records from a corpus file.

    ``.jsonl`` files yield the ``text`` field of each JSON object; anything
    else is treated as one record per line.  Records that cannot be decoded
    or parsed are skipped with a counted warning.
    """
    path = Path(path)
    is_jsonl = path.suffix.lower() in (".jsonl", ".ndjson")
    skipped = 0
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            try:
                line = raw.decode("utf-8").rstrip("\n").rstrip("\r")
            except UnicodeDecodeError:
                skipped += 1
                logger.debug("%s:%d: undecodable line skipped", path, lineno)
                continue
            if not line:
                continue
            if is_jsonl:
                try:
                    record = json.loads(line)
                    text = record["text"]
                except (ValueError, KeyError, TypeError):
                    skipped += 1
                    logger.debug("%s:%d: malformed record skipped", path, lineno)
                    continue
                if isinstance(text, str):
                    yield text
                else:
                    skipped += 1
            else:
                yield line
    if skipped:
        logger.warning("%s: skipped %d unreadable records", path, skipped)
