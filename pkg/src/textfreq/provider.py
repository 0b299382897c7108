"""Text completion providers.

Two interchangeable implementations sit behind one duck-typed interface
(``complete(request) -> str``): a deterministic mock backed by a fixture
file for tests and offline runs, and an HTTP client for chat-completion
endpoints.  Batch completion fans out over a thread pool but always returns
results in request order, with per-item failures captured as exception
values instead of poisoning the whole batch.

The HTTP bearer token is read from the ``TFL_PROVIDER_TOKEN`` environment
variable at request time and is never written to disk or echoed back.
"""

from __future__ import annotations

import hashlib
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import requests

logger = logging.getLogger(__name__)

PROVIDER_TOKEN_ENV = "TFL_PROVIDER_TOKEN"


class ProviderError(Exception):
    """Base class for completion failures."""


class MissingFixtureError(ProviderError):
    """The mock provider has no canned completion for a prompt."""


class PermanentProviderError(ProviderError):
    """The endpoint rejected the request; retrying cannot help."""


class RetriesExhaustedError(ProviderError):
    """Transient failures persisted beyond the retry budget."""


@dataclass(frozen=True)
class CompletionRequest:
    """One prompt plus its sampling controls."""

    prompt: str
    max_output_tokens: int = 512
    temperature: float = 1.0

    def __post_init__(self) -> None:
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be >= 1")
        if not (self.temperature >= 0.0):
            raise ValueError("temperature must be >= 0")


def prompt_hash(prompt: str) -> str:
    """Stable fixture key for a prompt."""
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def _escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


def _unescape(text: str) -> str:
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\\" and i + 1 < n:
            nxt = text[i + 1]
            if nxt == "\\":
                out.append("\\")
            elif nxt == "t":
                out.append("\t")
            elif nxt == "n":
                out.append("\n")
            elif nxt == "r":
                out.append("\r")
            else:
                out.append(ch)
                out.append(nxt)
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class MockProvider:
    """Deterministic provider keyed by prompt hash.

    Fixture files are TSV lines ``<sha256(prompt)>\\t<completion>`` with
    tabs, newlines, and backslashes in the completion backslash-escaped, so
    multi-line completions survive the line-oriented format.
    """

    def __init__(self, fixtures: dict[str, str] | None = None) -> None:
        self.fixtures: dict[str, str] = dict(fixtures) if fixtures else {}

    @classmethod
    def load(cls, path: str | Path) -> "MockProvider":
        fixtures: dict[str, str] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t", 1)
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected hash<TAB>completion")
                fixtures[parts[0]] = _unescape(parts[1])
        return cls(fixtures)

    def save(self, path: str | Path) -> None:
        lines = [f"{key}\t{_escape(value)}" for key, value in sorted(self.fixtures.items())]
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")

    def add(self, prompt: str, completion: str) -> None:
        self.fixtures[prompt_hash(prompt)] = completion

    def complete(self, request: CompletionRequest) -> str:
        key = prompt_hash(request.prompt)
        try:
            return self.fixtures[key]
        except KeyError:
            raise MissingFixtureError(
                f"no fixture for prompt hash {key} ({request.prompt[:60]!r}...)"
            ) from None


class HttpProvider:
    """Chat-completions client with bounded exponential-backoff retries.

    5xx responses, timeouts, and connection failures are retried up to
    ``max_retries`` extra attempts with ``backoff_base * 2**attempt`` second
    pauses; 4xx responses fail immediately as permanent.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        max_retries: int = 3,
        backoff_base: float = 0.5,
        timeout: float = 60.0,
        session: requests.Session | None = None,
    ) -> None:
        if max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.timeout = timeout
        self._session = session or requests.Session()

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(PROVIDER_TOKEN_ENV)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def complete(self, request: CompletionRequest) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        url = f"{self.base_url}/chat/completions"
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_base * 2 ** (attempt - 1))
            try:
                response = self._session.post(
                    url, json=payload, headers=self._headers(), timeout=self.timeout
                )
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_error = exc
                logger.warning("completion attempt %d failed: %s", attempt + 1, exc)
                continue
            if 400 <= response.status_code < 500:
                raise PermanentProviderError(
                    f"endpoint rejected request: {response.status_code} {response.text[:200]}"
                )
            if response.status_code >= 500:
                last_error = ProviderError(f"server error {response.status_code}")
                logger.warning("completion attempt %d failed: %s", attempt + 1, last_error)
                continue
            return self._parse(response)
        raise RetriesExhaustedError(
            f"gave up after {self.max_retries + 1} attempts: {last_error}"
        )

    @staticmethod
    def _parse(response: requests.Response) -> str:
        try:
            data = response.json()
            content = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed completion response: {exc}") from exc
        if not isinstance(content, str) or not content:
            raise ProviderError("completion response carried no text")
        return content


Provider = MockProvider | HttpProvider


def complete_batch(
    requests_: Sequence[CompletionRequest] | Iterable[CompletionRequest],
    provider: Provider,
    parallelism: int = 1,
) -> list[str | ProviderError]:
    """Run completions concurrently, preserving request order.

    Each failed item holds its ``ProviderError`` in place of text, so
    callers can account for partial batches deterministically.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    items = list(requests_)

    def one(request: CompletionRequest) -> str | ProviderError:
        try:
            return provider.complete(request)
        except ProviderError as exc:
            return exc

    if parallelism == 1 or len(items) <= 1:
        return [one(r) for r in items]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(one, items))
