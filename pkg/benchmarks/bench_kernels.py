"""Benchmark the compiled tokenizer against the pure-Python fallback.

Both backends are imported directly (bypassing the import-time selection in
textfreq.kernels), checked for agreement on the benchmark corpus, then timed
on tokenization and table building.

Usage: python benchmarks/bench_kernels.py [--texts N] [--repeats R]
"""

from __future__ import annotations

import argparse
import random
import time

from textfreq import _pykernels

try:
    from textfreq import _ckernels
except ImportError:
    _ckernels = None

WORDS = [
    "the", "of", "and", "frequency", "sentence", "corpus", "żółć", "naïve",
    "москва", "東京", "test123", "x", "hyphen-ated", "it's", "under_score",
]
PUNCT = ["", ",", ".", "!", "?", ";", " --", "..."]


def make_corpus(n_texts: int, seed: int = 0) -> list[str]:
    rng = random.Random(seed)
    corpus = []
    for _ in range(n_texts):
        words = [rng.choice(WORDS) + rng.choice(PUNCT) for _ in range(rng.randint(5, 40))]
        corpus.append(" ".join(words))
    return corpus


def time_backend(kernels, corpus: list[str], repeats: int) -> tuple[float, float]:
    best_tok = min(
        _timed(lambda: [kernels.tokenize(text, True) for text in corpus])
        for _ in range(repeats)
    )

    def build() -> dict[str, int]:
        counts: dict[str, int] = {}
        for text in corpus:
            kernels.count_into(counts, text, True)
        return counts

    best_count = min(_timed(build) for _ in range(repeats))
    return best_tok, best_count


def _timed(fn) -> float:
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--texts", type=int, default=20_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    corpus = make_corpus(args.texts)
    n_tokens = sum(len(_pykernels.tokenize(text, True)) for text in corpus)
    print(f"corpus: {len(corpus)} texts, {n_tokens} tokens")

    if _ckernels is not None:
        for text in corpus:  # agreement check before timing anything
            assert _ckernels.tokenize(text, True) == _pykernels.tokenize(text, True)
        print("backends agree on the full corpus")

    results = {}
    backends = [("python", _pykernels)] + ([("c", _ckernels)] if _ckernels else [])
    for name, kernels in backends:
        tok, count = time_backend(kernels, corpus, args.repeats)
        results[name] = (tok, count)
        print(
            f"{name:>8}: tokenize {tok * 1e3:8.1f} ms ({n_tokens / tok / 1e6:6.2f} Mtok/s)"
            f"   count {count * 1e3:8.1f} ms ({n_tokens / count / 1e6:6.2f} Mtok/s)"
        )

    if _ckernels is not None:
        py_tok, py_count = results["python"]
        c_tok, c_count = results["c"]
        print(f"speedup: tokenize {py_tok / c_tok:.2f}x, count {py_count / c_count:.2f}x")
    else:
        print("compiled backend not built; showing pure-Python timings only")


if __name__ == "__main__":
    main()
