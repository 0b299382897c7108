from __future__ import annotations

from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from textfreq import _pykernels, kernels

try:
    from textfreq import _ckernels

    HAS_COMPILED = True
except ImportError:
    HAS_COMPILED = False

needs_compiled = pytest.mark.skipif(not HAS_COMPILED, reason="compiled kernels unavailable")


def test_backend_is_selected() -> None:
    assert kernels.BACKEND in ("c", "python")
    assert "python" in kernels.available_backends()


def test_tokenize_words_and_lowercase() -> None:
    assert kernels.tokenize("The cat sat.") == ["the", "cat", "sat"]


def test_tokenize_preserves_case_when_asked() -> None:
    assert kernels.tokenize("The CAT", lowercase=False) == ["The", "CAT"]


def test_tokenize_empty_and_punctuation_only() -> None:
    assert kernels.tokenize("") == []
    assert kernels.tokenize("?!... --- ,,,") == []


def test_tokenize_splits_on_every_non_alphanumeric() -> None:
    assert kernels.tokenize("A-1 b2") == ["a", "1", "b2"]
    assert kernels.tokenize("a_b") == ["a", "b"]
    assert kernels.tokenize("don't") == ["don", "t"]


def test_tokenize_unicode() -> None:
    assert kernels.tokenize("Łódź café") == ["łódź", "café"]
    assert kernels.tokenize("北京123 東京") == ["北京123", "東京"]


def test_count_into_accumulates_and_returns_token_count() -> None:
    counts: dict[str, int] = {"the": 5}
    added = kernels.count_into(counts, "The cat and the dog")
    assert added == 5
    assert counts == {"the": 7, "cat": 1, "and": 1, "dog": 1}


@given(st.text(max_size=200))
def test_count_into_matches_tokenize(text: str) -> None:
    counts: dict[str, int] = {}
    kernels.count_into(counts, text)
    assert counts == dict(Counter(kernels.tokenize(text)))


@needs_compiled
@given(st.text(max_size=200), st.booleans())
def test_backends_tokenize_identically(text: str, lowercase: bool) -> None:
    assert _ckernels.tokenize(text, lowercase) == _pykernels.tokenize(text, lowercase)


@needs_compiled
@given(st.text(max_size=200))
def test_backends_count_identically(text: str) -> None:
    a: dict[str, int] = {}
    b: dict[str, int] = {}
    assert _ckernels.count_into(a, text) == _pykernels.count_into(b, text)
    assert a == b
