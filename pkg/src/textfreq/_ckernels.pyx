# cython: language_level=3
"""Compiled tokenization kernels.

Semantics must stay bit-for-bit interchangeable with ``_pykernels``; the
backend is picked once at import time and everything above the kernel layer
is backend-agnostic.  A token is a maximal run of Unicode alphanumeric code
points (``str.isalnum``), optionally lowercased per token.
"""


def backend_name():
    return "c"


def tokenize(str text, bint lowercase=True):
    """Split ``text`` into alphanumeric runs, dropping everything else."""
    cdef list out = []
    cdef Py_ssize_t i = 0, n = len(text), start
    cdef Py_UCS4 ch
    cdef str tok
    while i < n:
        ch = text[i]
        if ch.isalnum():
            start = i
            i += 1
            while i < n:
                ch = text[i]
                if not ch.isalnum():
                    break
                i += 1
            tok = text[start:i]
            out.append(tok.lower() if lowercase else tok)
        else:
            i += 1
    return out


def count_into(dict counts, str text, bint lowercase=True):
    """Accumulate token counts of ``text`` into ``counts``; returns tokens seen."""
    cdef Py_ssize_t i = 0, n = len(text), start, added = 0
    cdef Py_UCS4 ch
    cdef str tok
    while i < n:
        ch = text[i]
        if ch.isalnum():
            start = i
            i += 1
            while i < n:
                ch = text[i]
                if not ch.isalnum():
                    break
                i += 1
            tok = text[start:i]
            if lowercase:
                tok = tok.lower()
            counts[tok] = counts.get(tok, 0) + 1
            added += 1
        else:
            i += 1
    return added
