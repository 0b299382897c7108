"""Acceptance gate.

One test per core guarantee, each at its stated tolerance, each ending in a
single PASS line.  These are the checks a release must clear; everything
here is deterministic (fixed seeds, mock provider, frozen goldens).
"""

from __future__ import annotations

import itertools
import json
import math
import random
import time
from pathlib import Path

import mpmath
import numpy as np
import pytest

from textfreq import theory
from textfreq.corpus import FrequencyTable, build_table, load_table, save_table
from textfreq.distill import CombineConfig, CombinedTable, combined_word_frequency
from textfreq.freq import (
    SmoothingPolicy,
    log_score_tokens,
    sentence_frequency,
)
from textfreq.policy import OrderingMode, TrainingInstance, order_curriculum
from textfreq.provider import MockProvider
from textfreq.tfpd import (
    REPHRASE_PROMPT,
    AnnotationPipeline,
    JobStatus,
    ParaphraseJob,
    Verdict,
    export_accepted,
    generate_job,
)

S_VALUES = (0.8, 1.0, 1.2)


def ok(message: str) -> None:
    print(f"PASS: {message}")


# 1 -------------------------------------------------------------------------


def test_self_information_is_linear_at_scale() -> None:
    start = time.perf_counter()
    worst = 0.0
    for s in S_VALUES:
        model = theory.make_zipf(s, 10_000)
        worst = max(worst, theory.self_information_residual(model))
    elapsed = time.perf_counter() - start
    assert worst <= 1e-12, f"residual {worst:g}"
    assert elapsed < 1.0, f"took {elapsed:.3f}s"
    ok(
        "self-information linear in log rank at vocab 10k for s in "
        f"{S_VALUES}: max residual {worst:.2e} <= 1e-12 in {elapsed * 1e3:.0f}ms"
    )


# 2 -------------------------------------------------------------------------


def test_semilog_fit_recovers_the_law() -> None:
    worst_exact = 0.0
    for s in S_VALUES:
        model = theory.make_zipf(s, 500)
        fit = theory.semilog_fit(theory.make_perturbed(model, 0.0))
        worst_exact = max(worst_exact, abs(fit.slope - s), abs(fit.intercept - model.c))
    assert worst_exact <= 1e-9, f"exact-fit error {worst_exact:g}"

    worst_noisy = 0.0
    for s in S_VALUES:
        model = theory.make_zipf(s, 500)
        for seed in range(5):
            fit = theory.semilog_fit(theory.make_perturbed(model, 0.1, seed=seed))
            worst_noisy = max(worst_noisy, fit.max_abs_residual)
    assert worst_noisy <= 0.2, f"noisy residual {worst_noisy:g}"
    ok(
        "semilog fit recovers slope and intercept to "
        f"{worst_exact:.2e} (<= 1e-9) unperturbed; residuals at eps 0.1 stay "
        f"within +/-{worst_noisy:.3f} (<= 0.2)"
    )


# 3 -------------------------------------------------------------------------


def test_loss_ordering_sweep_has_zero_violations() -> None:
    epsilon = 0.05
    total_violations = 0
    total_conditioned = 0
    for s in S_VALUES:
        model = theory.make_zipf(s, 500)
        for seed in range(1000):
            pm = theory.make_perturbed(model, epsilon, seed=seed)
            violations, conditioned = theory.monotonicity_violations(pm)
            total_violations += violations
            total_conditioned += conditioned
        got = theory.activation_ratio(epsilon, s)
        with mpmath.workdps(50):
            reference = float(mpmath.exp(2 * mpmath.mpf(epsilon) / mpmath.mpf(s)))
        assert abs(got - reference) <= math.ulp(reference), f"threshold at s={s}"
    assert total_violations == 0
    ok(
        "1000-model sweep per s in "
        f"{S_VALUES} (vocab 500, eps 0.05): 0 violations over "
        f"{total_conditioned} conditioned pairs; activation ratio matches a "
        "50-digit reference within 1 ulp"
    )


# 4 -------------------------------------------------------------------------


def test_sentence_loss_decomposes_exactly() -> None:
    model = theory.make_zipf(1.0, 500)
    pm = theory.make_perturbed(model, 0.05, seed=0)
    worst = 0.0
    checked = 0
    for lam in (0.0, 0.3, 0.7):
        cond = theory.make_conditional(pm, lam, seed=1)
        rng = np.random.default_rng(42)
        for _ in range(100):
            d = theory.decompose_sentence(theory.random_sentence(rng, 500, 20), cond)
            assert d.token_count <= 20
            assert abs(d.delta_bar) <= d.eps_bar
            worst = max(worst, d.residual)
            checked += 1
            if lam == 0.0:
                assert d.eta_bar == 0.0
    assert worst <= 1e-10, f"residual {worst:g}"
    ok(
        f"sentence loss decomposition over {checked} sentences at lam 0/0.3/0.7: "
        f"max residual {worst:.2e} <= 1e-10, mean deviation always inside mean eps"
    )


# 5 -------------------------------------------------------------------------


def test_frequency_margin_forces_loss_ordering() -> None:
    model = theory.make_zipf(1.0, 500)
    pm = theory.make_perturbed(model, 0.05, seed=0)
    cond = theory.make_conditional(pm, 0.3, seed=0)
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    trials = conditioned = unconditioned_ordered = 0
    while trials < 10_000:
        a = theory.random_sentence(rng, 500, 20)
        b = theory.random_sentence(rng, 500, 20)
        nls_a = theory.sentence_neg_log_sfreq(a, model)
        nls_b = theory.sentence_neg_log_sfreq(b, model)
        if nls_a == nls_b:
            continue
        pair = (a, b) if nls_a < nls_b else (b, a)
        trial = theory.selection_margin_trial(*pair, cond)  # raises on any violation
        trials += 1
        conditioned += trial.condition_holds
        if trial.ordering_holds and not trial.condition_holds:
            unconditioned_ordered += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"took {elapsed:.1f}s"
    assert conditioned > 0
    ok(
        f"{trials} frequency-gap trials: condition held {conditioned} times with "
        f"zero ordering failures in {elapsed:.1f}s (< 30s); ordering also held "
        f"without the condition {unconditioned_ordered} times (sufficient, not necessary)"
    )


# 6 -------------------------------------------------------------------------


def test_scoring_invariances_hold_exactly_in_bulk() -> None:
    rng = random.Random(12345)
    alphabet = [f"w{i}" for i in range(30)]

    def random_case() -> tuple[list[str], dict[str, float]]:
        tokens = [rng.choice(alphabet) for _ in range(rng.randint(1, 20))]
        lookup = {w: rng.uniform(1e-6, 1.0) for w in alphabet}
        return tokens, lookup

    for _ in range(1000):  # permutation invariance, bitwise
        tokens, lookup = random_case()
        shuffled = tokens[:]
        rng.shuffle(shuffled)
        assert log_score_tokens(tokens, lookup.__getitem__) == log_score_tokens(
            shuffled, lookup.__getitem__
        )

    for _ in range(1000):  # duplication invariance, bitwise
        tokens, lookup = random_case()
        m = rng.randint(2, 5)
        assert log_score_tokens(tokens, lookup.__getitem__) == log_score_tokens(
            tokens * m, lookup.__getitem__
        )

    for _ in range(1000):  # single-token identity: score is that word's log frequency
        _, lookup = random_case()
        word = rng.choice(alphabet)
        assert log_score_tokens([word], lookup.__getitem__) == math.log(lookup[word])

    for _ in range(1000):  # strict monotonicity in any single word frequency
        tokens, lookup = random_case()
        bumped = rng.choice(tokens)
        richer = dict(lookup)
        richer[bumped] = lookup[bumped] * (1.0 + rng.uniform(1e-4, 1.0))
        if richer[bumped] > 1.0:
            richer[bumped] = min(1.0, richer[bumped])
            if richer[bumped] == lookup[bumped]:
                continue
        assert log_score_tokens(tokens, richer.__getitem__) > log_score_tokens(
            tokens, lookup.__getitem__
        )

    for _ in range(1000):  # floor only matters when a frequency sits below it
        tokens, lookup = random_case()
        a = log_score_tokens(tokens, lookup.__getitem__, SmoothingPolicy(floor=1e-9))
        b = log_score_tokens(tokens, lookup.__getitem__, SmoothingPolicy(floor=1e-7))
        assert a == b
        zeroed = dict(lookup)
        zeroed[tokens[0]] = 0.0
        low = log_score_tokens(tokens, zeroed.__getitem__, SmoothingPolicy(floor=1e-9))
        high = log_score_tokens(tokens, zeroed.__getitem__, SmoothingPolicy(floor=1e-7))
        assert low < high
    ok(
        "scoring invariances over 1000 random cases each: bitwise permutation "
        "and duplication invariance, single-token identity, strict per-word "
        "monotonicity, floor inertness"
    )


# 7 -------------------------------------------------------------------------


def test_frequency_combination_algebra_is_exact() -> None:
    rng = random.Random(2024)

    def value_table(value: float) -> FrequencyTable:
        entries = {"tok": value} if value else {}
        return FrequencyTable(entries, total=1.0, label="v").finalize()

    for _ in range(100):
        f1 = rng.choice([0.0, rng.uniform(0.0, 1.0)])
        f2 = rng.uniform(0.0, 1.0)
        alpha = rng.uniform(0.0, 2.0)
        beta = rng.uniform(1e-9, 2.0)
        zeta = rng.uniform(0.0, 3.0)
        combined = CombinedTable(
            base=value_table(f1),
            distilled=value_table(f2),
            config=CombineConfig(alpha=alpha, beta=beta, zeta=zeta),
        )
        expected = alpha * f1 + (1.0 + zeta * (1.0 if f1 == 0.0 else 0.0)) * beta * f2
        assert combined_word_frequency("tok", combined) == expected

    # Degenerate weights collapse to the pure terms, bit for bit.
    base = build_table(["the cat sat on the mat the end"], label="b")
    distilled = build_table(["a feline reposed on a rug"], label="d")
    pure_base = CombinedTable(base, distilled, CombineConfig(alpha=1.0, beta=0.0))
    for token in ("the", "cat", "feline", "absent"):
        f1 = base.entries.get(token, 0) / base.total
        assert combined_word_frequency(token, pure_base) == f1
    pure_distilled = CombinedTable(base, distilled, CombineConfig(alpha=0.0, beta=0.75, zeta=0.0))
    for token in ("on", "feline", "absent"):
        f2 = distilled.entries.get(token, 0) / distilled.total
        assert combined_word_frequency(token, pure_distilled) == 0.75 * f2
    boosted = CombinedTable(base, distilled, CombineConfig(alpha=0.5, beta=0.5, zeta=1.0))
    f2 = distilled.entries["feline"] / distilled.total
    assert combined_word_frequency("feline", boosted) == (1.0 + 1.0) * 0.5 * f2
    ok(
        "combination algebra exact on 100 random weight tuples plus the "
        "pure-base, pure-distilled, and unseen-boost special cases"
    )


# 8 -------------------------------------------------------------------------


def test_curriculum_ordering_contracts_exhaustively() -> None:
    ids = ["a", "b", "c", "d", "e", "f"]
    distinct = {name: float(i) for i, name in enumerate(ids)}
    tied = {"a": 1.0, "b": 1.0, "c": 2.0, "d": 2.0, "e": 3.0, "f": 3.0}
    checked = 0
    for perm in itertools.permutations(ids):
        instances = [TrainingInstance(id=i, input_text=i) for i in perm]
        up = order_curriculum(instances, scores=distinct)
        down = order_curriculum(instances, scores=distinct, mode=OrderingMode.DESCENDING_FREQUENCY)
        assert up == ids  # distinct keys: one true ascending order
        assert down == list(reversed(up))  # exact duality
        assert sorted(up) == ids and sorted(down) == ids  # permutation completeness

        up_t = order_curriculum(instances, scores=tied)
        down_t = order_curriculum(instances, scores=tied, mode=OrderingMode.DESCENDING_FREQUENCY)
        assert sorted(up_t) == ids and sorted(down_t) == ids
        keys_up = [tied[i] for i in up_t]
        assert keys_up == sorted(keys_up)
        keys_down = [tied[i] for i in down_t]
        assert keys_down == sorted(keys_down, reverse=True)
        for value in (1.0, 2.0, 3.0):  # stability: ties keep input order, both modes
            group = [i for i in perm if tied[i] == value]
            assert [i for i in up_t if tied[i] == value] == group
            assert [i for i in down_t if tied[i] == value] == group
        checked += 1
    assert checked == 720
    ok(
        "curriculum ordering verified over all 720 orderings of 6-element "
        "inputs: completeness, ascending/descending duality, stable ties both ways"
    )


# 9 -------------------------------------------------------------------------

ANNOTATORS = ("ann-a", "ann-b", "ann-c")

SOURCES = [
    {"id": "q1", "text": "The cat sat quietly.", "answer": "a1"},
    {"id": "q2", "text": "A dog ran over the hill.", "answer": "a2"},
    {"id": "q3", "text": "The sun rose slowly.", "answer": "a3"},
    {"id": "q4", "text": "People like simple words.", "answer": "a4"},
    {"id": "q5", "text": "The town was quiet.", "answer": "a5"},
]

# Verdict script per source: q3 hits a MaybeSame, q4 a NotSame.
VERDICTS = {
    "q1": (Verdict.SAME, Verdict.SAME, Verdict.SAME),
    "q2": (Verdict.SAME, Verdict.SAME, Verdict.SAME),
    "q3": (Verdict.SAME, Verdict.MAYBE_SAME, Verdict.SAME),
    "q4": (Verdict.NOT_SAME, Verdict.SAME, Verdict.SAME),
    "q5": (Verdict.SAME, Verdict.SAME, Verdict.SAME),
}

# The candidate sets are built so the extremes are knowable by inspection:
# "the the the the" is the only candidate made purely of the corpus's most
# frequent word, and "qqq www zzz" is the only all-unseen candidate, so they
# must be the most and least frequent rephrasings.
GOLDEN_EXPORT_LINES = [
    '{"source_id": "q1", "low_text": "qqq www zzz", "high_text": "the the the the", '
    '"ground_truth": {"id": "q1", "text": "The cat sat quietly.", "answer": "a1"}}',
    '{"source_id": "q2", "low_text": "qqq www zzz", "high_text": "the the the the", '
    '"ground_truth": {"id": "q2", "text": "A dog ran over the hill.", "answer": "a2"}}',
    '{"source_id": "q5", "low_text": "qqq www zzz", "high_text": "the the the the", '
    '"ground_truth": {"id": "q5", "text": "The town was quiet.", "answer": "a5"}}',
]


def demo_candidates() -> list[str]:
    fillers = [f"the cat ran {k}" for k in range(18)]
    return fillers + ["qqq www zzz", "the the the the"]


def demo_table() -> FrequencyTable:
    return build_table(
        [
            "the cat sat on the mat",
            "the dog ran over the hill",
            "a cat and a dog played",
            "the sun rose over the quiet town",
            "people like simple common words",
        ],
        label="demo",
    )


def test_pipeline_accepts_only_unanimous_same(tmp_path: Path) -> None:
    verdicts = (Verdict.SAME, Verdict.MAYBE_SAME, Verdict.NOT_SAME)
    accepted = 0
    job_template = dict(
        original="orig",
        candidates=("low t", "high t"),
        low_text="low t",
        high_text="high t",
        status=JobStatus.GENERATED,
    )
    for i, combo in enumerate(itertools.product(verdicts, repeat=3)):
        pipe = AnnotationPipeline(tmp_path / f"combo{i}.jsonl", annotators=ANNOTATORS)
        pipe.add_job(ParaphraseJob(source_id="j", **job_template))
        for annotator, verdict in zip(ANNOTATORS, combo):
            status = pipe.record_judgment("j", annotator, verdict)
        expected = (
            JobStatus.ACCEPTED if all(v is Verdict.SAME for v in combo) else JobStatus.REJECTED
        )
        assert status is expected
        accepted += status is JobStatus.ACCEPTED
        pipe.close()
    assert accepted == 1
    ok(
        "all 27 three-annotator verdict combinations finalize correctly; "
        "exactly the unanimous-Same combination is accepted"
    )


def test_pipeline_end_to_end_matches_golden_and_replays(tmp_path: Path) -> None:
    table = demo_table()

    def scorer(text: str):
        return sentence_frequency(text, table)

    provider = MockProvider()
    for source in SOURCES:
        provider.add(
            REPHRASE_PROMPT.format(sentence=source["text"]),
            " |||| ".join(demo_candidates()),
        )

    journal = tmp_path / "journal.jsonl"
    pipe = AnnotationPipeline(journal, annotators=ANNOTATORS)
    for source in SOURCES:
        job = generate_job(source["id"], source["text"], provider, scorer, ground_truth=source)
        assert job.status is JobStatus.GENERATED
        pipe.add_job(job)

    # Crash-safety: after every acknowledged judgment a cold replay of the
    # journal must reproduce the exact pipeline state.
    for source in SOURCES:
        for annotator, verdict in zip(ANNOTATORS, VERDICTS[source["id"]]):
            pipe.record_judgment(source["id"], annotator, verdict)
            replayed = AnnotationPipeline(journal)
            assert replayed.progress() == pipe.progress()
            assert replayed.job(source["id"]).status is pipe.job(source["id"]).status
            replayed.close()

    for source_id, verdicts in VERDICTS.items():
        expected = (
            JobStatus.ACCEPTED
            if all(v is Verdict.SAME for v in verdicts)
            else JobStatus.REJECTED
        )
        assert pipe.job(source_id).status is expected

    dest = tmp_path / "pairs.ndjson"
    stats = export_accepted(pipe, dest)
    assert stats.records == 3
    got = dest.read_text(encoding="utf-8")
    assert got == "".join(line + "\n" for line in GOLDEN_EXPORT_LINES)

    # The golden itself is honest: the pair really is the frequency extremes.
    scores = {c: scorer(c).log_sfreq for c in demo_candidates()}
    assert min(scores, key=scores.get) == "qqq www zzz"
    assert max(scores, key=scores.get) == "the the the the"
    ok(
        "five-source mock pipeline run matches the frozen export golden "
        "byte for byte, with journal replay equivalence after every judgment"
    )


# 10 ------------------------------------------------------------------------


def test_large_table_persistence_is_bit_exact(tmp_path: Path) -> None:
    rng = random.Random(99)
    entries: dict[str, int | float] = {f"tok{i:06d}": rng.randint(1, 10**12) for i in range(100_000)}
    table = FrequencyTable(entries, total=sum(entries.values()), label="big int table")
    table.finalize()
    dest = tmp_path / "big.tsv"
    save_table(table, dest)
    loaded = load_table(dest)
    assert loaded.entries == table.entries
    assert loaded.total == table.total and isinstance(loaded.total, int)
    assert loaded.label == table.label
    second = tmp_path / "big2.tsv"
    save_table(loaded, second)
    assert second.read_bytes() == dest.read_bytes()

    float_entries: dict[str, int | float] = {
        f"tok{i:06d}": rng.uniform(1e-6, 1e9) for i in range(100_000)
    }
    float_table = FrequencyTable(float_entries, total=1e9, label="big float table")
    float_table.finalize()
    fdest = tmp_path / "bigf.tsv"
    save_table(float_table, fdest)
    floaded = load_table(fdest)
    assert floaded.entries == float_table.entries  # bitwise float equality
    assert floaded.total == 1e9
    fsecond = tmp_path / "bigf2.tsv"
    save_table(floaded, fsecond)
    assert fsecond.read_bytes() == fdest.read_bytes()
    ok(
        "100k-entry tables (integer and float counts) round-trip bit-exactly "
        "through save/load; re-serialization is byte-identical"
    )


def test_parallel_build_is_bit_identical_to_serial(tmp_path: Path) -> None:
    rng = random.Random(5)
    vocabulary = [f"word{i}" for i in range(400)]
    texts = [
        " ".join(rng.choice(vocabulary) for _ in range(rng.randint(1, 30))) for _ in range(3000)
    ]
    serial = build_table(texts, workers=1, label="par")
    parallel = build_table(texts, workers=4, label="par")
    assert serial.entries == parallel.entries
    assert serial.total == parallel.total
    a, b = tmp_path / "serial.tsv", tmp_path / "parallel.tsv"
    save_table(serial, a)
    save_table(parallel, b)
    assert a.read_bytes() == b.read_bytes()
    ok(
        "4-worker corpus build equals the serial build bit for bit "
        "(counts, total, and serialized bytes)"
    )
