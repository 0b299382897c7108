from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from textfreq.corpus import FrequencyTable, build_table
from textfreq.freq import (
    EmptySentenceError,
    EmptyTableError,
    SentenceScore,
    SmoothingPolicy,
    bin_histogram,
    log_score_tokens,
    sentence_frequency,
    word_frequency,
    zipf_scale,
    zipf_to_relative,
)

EPS = 1e-12


def table_of(counts: dict[str, int], label: str = "test") -> FrequencyTable:
    return FrequencyTable(counts, total=sum(counts.values()), label=label).finalize()


# -- word_frequency ---------------------------------------------------------


def test_word_frequency_examples() -> None:
    table = table_of({"the": 2, "cat": 1, "mat": 1})
    assert word_frequency("the", table) == 0.5
    assert word_frequency("cat", table) == 0.25
    assert word_frequency("unseen", table) == 0.0


def test_word_frequency_empty_table_is_an_error() -> None:
    with pytest.raises(EmptyTableError):
        word_frequency("the", FrequencyTable().finalize())


# -- zipf scale --------------------------------------------------------------


def test_zipf_scale_reference_points() -> None:
    assert zipf_scale(1e-6) == 3.0
    assert zipf_scale(1e-9) == 0.0
    assert zipf_scale(1.0) == 9.0


def test_zipf_scale_domain() -> None:
    with pytest.raises(ValueError):
        zipf_scale(0.0)
    with pytest.raises(ValueError):
        zipf_scale(-0.1)


def test_zipf_scale_round_trip_identity() -> None:
    for i in range(0, 121):
        relative = 10.0 ** (-i / 10.0)  # grid over (1e-12, 1]
        assert abs(zipf_to_relative(zipf_scale(relative)) - relative) <= EPS * relative
    for zipf in [x / 8.0 for x in range(-24, 73)]:
        assert abs(zipf_scale(zipf_to_relative(zipf)) - zipf) <= EPS


# -- sentence_frequency -------------------------------------------------------


def test_sentence_frequency_single_token_equals_word_log() -> None:
    table = table_of({"the": 2, "cat": 1, "mat": 1})
    score = sentence_frequency("cat", table)
    assert score.token_count == 1
    assert score.log_sfreq == math.log(0.25)


def test_sentence_frequency_two_tokens_is_mean_of_logs() -> None:
    table = table_of({"the": 2, "cat": 1, "mat": 1})
    score = sentence_frequency("the cat", table)
    assert score.token_count == 2
    assert score.log_sfreq == (math.log(0.5) + math.log(0.25)) / 2.0


def test_sentence_frequency_repeated_token_weights_by_count() -> None:
    table = table_of({"the": 2, "cat": 1, "mat": 1})
    score = sentence_frequency("the the cat", table)
    expected = math.fsum([(2 / 3) * math.log(0.5), (1 / 3) * math.log(0.25)])
    assert score.log_sfreq == expected


def test_sentence_frequency_unseen_token_uses_floor() -> None:
    table = table_of({"the": 1})
    score = sentence_frequency("voynich", table)
    assert score.log_sfreq == math.log(1e-9)
    score = sentence_frequency("voynich", table, SmoothingPolicy(floor=1e-6))
    assert score.log_sfreq == math.log(1e-6)


def test_sentence_frequency_zipf_consistency() -> None:
    table = table_of({"the": 2, "cat": 1, "mat": 1})
    score = sentence_frequency("the cat mat", table)
    assert math.isclose(score.zipf_sfreq, score.log_sfreq / math.log(10) + 9.0, rel_tol=0, abs_tol=0)


def test_sentence_frequency_errors() -> None:
    with pytest.raises(EmptyTableError):
        sentence_frequency("the cat", FrequencyTable().finalize())
    with pytest.raises(EmptySentenceError):
        sentence_frequency("?!...", table_of({"a": 1}))


def test_sentence_score_validation() -> None:
    with pytest.raises(ValueError):
        SentenceScore(text="x", token_count=0, log_sfreq=-1.0)
    with pytest.raises(ValueError):
        SentenceScore(text="x", token_count=1, log_sfreq=float("nan"))


def test_smoothing_policy_validation() -> None:
    with pytest.raises(ValueError):
        SmoothingPolicy(floor=0.0)
    with pytest.raises(ValueError):
        SmoothingPolicy(floor=-1e-9)


def test_negative_log_matches_mean_token_information() -> None:
    table = table_of({"a": 5, "b": 3, "c": 2})
    text = "a b a c b a"
    score = sentence_frequency(text, table)
    naive = sum(-math.log(word_frequency(t, table)) for t in text.split()) / 6
    assert math.isclose(-score.log_sfreq, naive, rel_tol=0, abs_tol=EPS)


# -- exact invariance properties ----------------------------------------------

TOKENS = st.lists(
    st.text(alphabet="abcdefgh", min_size=1, max_size=5), min_size=1, max_size=20
)


@st.composite
def tokens_and_permutation(draw):
    tokens = draw(TOKENS)
    shuffled = draw(st.permutations(tokens))
    return tokens, shuffled


@given(tokens_and_permutation())
def test_permutation_invariance_is_exact(pair: tuple[list[str], list[str]]) -> None:
    tokens, shuffled = pair
    table = table_of({t: 1 + i for i, t in enumerate(sorted(set(tokens)))})
    score_a = sentence_frequency(" ".join(tokens), table)
    score_b = sentence_frequency(" ".join(shuffled), table)
    assert score_a.log_sfreq == score_b.log_sfreq


@given(TOKENS, st.integers(min_value=2, max_value=5))
def test_duplication_invariance_is_exact(tokens: list[str], m: int) -> None:
    table = table_of({t: 1 + i for i, t in enumerate(sorted(set(tokens)))})
    once = sentence_frequency(" ".join(tokens), table)
    repeated = sentence_frequency(" ".join(tokens * m), table)
    assert once.log_sfreq == repeated.log_sfreq
    assert repeated.token_count == m * once.token_count


@given(
    st.lists(st.sampled_from("abcde"), min_size=1, max_size=12),
    st.sampled_from("abcde"),
)
def test_score_strictly_increases_with_word_frequency(tokens: list[str], bumped: str) -> None:
    if bumped not in tokens:
        tokens = tokens + [bumped]
    base = {t: 0.1 for t in "abcde"}
    richer = dict(base)
    richer[bumped] = 0.2
    low = log_score_tokens(tokens, base.__getitem__)
    high = log_score_tokens(tokens, richer.__getitem__)
    assert high > low


@given(TOKENS)
def test_floor_is_irrelevant_without_unseen_tokens(tokens: list[str]) -> None:
    table = table_of({t: 2 for t in set(tokens)})
    text = " ".join(tokens)
    a = sentence_frequency(text, table, SmoothingPolicy(floor=1e-9))
    b = sentence_frequency(text, table, SmoothingPolicy(floor=1e-3))
    assert a.log_sfreq == b.log_sfreq


def test_lower_floor_lowers_score_with_unseen_tokens() -> None:
    table = table_of({"the": 1})
    text = "the voynich"
    deep = sentence_frequency(text, table, SmoothingPolicy(floor=1e-12))
    shallow = sentence_frequency(text, table, SmoothingPolicy(floor=1e-6))
    assert deep.log_sfreq < shallow.log_sfreq


# -- histogram ----------------------------------------------------------------


def test_bin_histogram_example() -> None:
    hist = bin_histogram([0.2, 1.2, 1.7, 2.1, 3.0, 9.9], edges=[1.0, 2.0, 3.0])
    assert hist.counts == (2, 1)
    assert hist.below == 1
    assert hist.above == 2
    assert hist.observations == 6


def test_bin_histogram_left_closed_edges() -> None:
    hist = bin_histogram([1.0, 2.0], edges=[1.0, 2.0, 3.0])
    assert hist.counts == (1, 1)


def test_bin_histogram_accepts_sentence_scores() -> None:
    table = table_of({"the": 2, "cat": 1, "mat": 1})
    score = sentence_frequency("the", table)
    hist = bin_histogram([score], edges=[0.0, 9.0, 10.0])
    assert sum(hist.counts) + hist.below + hist.above == 1


def test_bin_histogram_rejects_bad_edges() -> None:
    with pytest.raises(ValueError):
        bin_histogram([], edges=[1.0])
    with pytest.raises(ValueError):
        bin_histogram([], edges=[2.0, 1.0])
    with pytest.raises(ValueError):
        bin_histogram([], edges=[1.0, 1.0, 2.0])


@given(st.lists(st.floats(min_value=-5.0, max_value=15.0, allow_nan=False), max_size=50))
def test_bin_histogram_accounts_for_every_observation(values: list[float]) -> None:
    hist = bin_histogram(values, edges=[0.0, 3.0, 6.0, 9.0])
    assert hist.observations == len(values)
