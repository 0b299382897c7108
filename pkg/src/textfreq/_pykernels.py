"""Pure-Python tokenization kernels, the fallback for ``_ckernels``.

Both backends must agree byte for byte on every input.  ``[^\\W_]+`` matches
exactly the maximal runs of code points for which ``str.isalnum`` is true:
``\\w`` is the alphanumerics plus underscore, so removing ``_`` from its
complement class leaves the alphanumerics alone.
"""

from __future__ import annotations

import re

_WORD = re.compile(r"[^\W_]+")


def backend_name() -> str:
    return "python"


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Split ``text`` into alphanumeric runs, dropping everything else."""
    tokens = _WORD.findall(text)
    if lowercase:
        return [t.lower() for t in tokens]
    return tokens


def count_into(counts: dict, text: str, lowercase: bool = True) -> int:
    """Accumulate token counts of ``text`` into ``counts``; returns tokens seen."""
    added = 0
    for tok in _WORD.findall(text):
        if lowercase:
            tok = tok.lower()
        counts[tok] = counts.get(tok, 0) + 1
        added += 1
    return added
