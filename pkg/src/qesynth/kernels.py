"""Token-level Levenshtein kernels.

Tokens arrive integer-encoded. The table is built over *suffixes*:
``table[i, j]`` is the edit distance between ``hyp[i:]`` and ``ref[j:]``, so
the script is read off front-to-back starting at ``(0, 0)``. At every step the
first optimal move in the order Match, Substitute, Delete, Insert is taken,
which pushes edits as late into the hypothesis as possible.

Two interchangeable implementations exist: an ``@njit`` loop kernel and a
row-vectorised numpy kernel. :data:`BACKEND` names the one in use.
"""

import numpy as np

from qesynth._accel import HAS_NUMBA, njit

MATCH, SUBSTITUTE, DELETE, INSERT = 0, 1, 2, 3


def _suffix_table_loops(hyp, ref):
    n = hyp.shape[0]
    m = ref.shape[0]
    table = np.empty((n + 1, m + 1), dtype=np.int32)
    for j in range(m + 1):
        table[n, j] = m - j
    for i in range(n - 1, -1, -1):
        table[i, m] = n - i
        h = hyp[i]
        for j in range(m - 1, -1, -1):
            best = table[i + 1, j + 1] + (0 if h == ref[j] else 1)
            d = table[i + 1, j] + 1
            if d < best:
                best = d
            ins = table[i, j + 1] + 1
            if ins < best:
                best = ins
            table[i, j] = best
    return table


def _suffix_table_numpy(hyp, ref):
    n = hyp.shape[0]
    m = ref.shape[0]
    table = np.empty((n + 1, m + 1), dtype=np.int32)
    cols = np.arange(m + 1, dtype=np.int32)
    table[n] = m - cols
    for i in range(n - 1, -1, -1):
        below = table[i + 1]
        cand = below + 1
        cand[:m] = np.minimum(cand[:m], below[1:] + (ref != hyp[i]))
        # insertions chain rightwards: row[j] = min_{k>=j} cand[k] + (k - j)
        skew = cand + cols
        table[i] = np.minimum.accumulate(skew[::-1])[::-1] - cols
    return table


def _trace_loops(table, hyp, ref):
    n = hyp.shape[0]
    m = ref.shape[0]
    size = n + m
    kinds = np.empty(size, dtype=np.int8)
    hyp_idx = np.empty(size, dtype=np.int32)
    ref_idx = np.empty(size, dtype=np.int32)
    i = 0
    j = 0
    k = 0
    while i < n or j < m:
        here = table[i, j]
        if i < n and j < m and hyp[i] == ref[j] and table[i + 1, j + 1] == here:
            kinds[k] = MATCH
            hyp_idx[k] = i
            ref_idx[k] = j
            i += 1
            j += 1
        elif i < n and j < m and table[i + 1, j + 1] + 1 == here:
            kinds[k] = SUBSTITUTE
            hyp_idx[k] = i
            ref_idx[k] = j
            i += 1
            j += 1
        elif i < n and table[i + 1, j] + 1 == here:
            kinds[k] = DELETE
            hyp_idx[k] = i
            ref_idx[k] = -1
            i += 1
        else:
            kinds[k] = INSERT
            hyp_idx[k] = -1
            ref_idx[k] = j
            j += 1
        k += 1
    return kinds[:k], hyp_idx[:k], ref_idx[:k]


if HAS_NUMBA:
    suffix_table = njit(cache=True, nogil=True)(_suffix_table_loops)
    trace = njit(cache=True, nogil=True)(_trace_loops)
    BACKEND = "numba"
else:
    suffix_table = _suffix_table_numpy
    trace = _trace_loops
    BACKEND = "numpy"


def encode_pair(hyp, ref):
    """Map two token lists onto a shared int32 vocabulary."""
    vocab = {}
    h = np.fromiter((vocab.setdefault(t, len(vocab)) for t in hyp), np.int32, len(hyp))
    r = np.fromiter((vocab.setdefault(t, len(vocab)) for t in ref), np.int32, len(ref))
    return h, r


def align_codes(hyp, ref):
    """Return ``(distance, kinds, hyp_idx, ref_idx)`` for two token lists.

    Index arrays hold -1 where an op does not touch that side.
    """
    h, r = encode_pair(hyp, ref)
    table = suffix_table(h, r)
    kinds, hi, ri = trace(table, h, r)
    return int(table[0, 0]), kinds, hi, ri
