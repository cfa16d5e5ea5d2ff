"""Hot dynamic-programming kernels.

Each kernel exists twice: a numba ``@njit`` version and a vectorised numpy
version with identical results.  The numba path is used when numba imports and
``FELIX_NO_NUMBA`` is unset (or ``0``); set ``FELIX_NO_NUMBA=1`` to force the
numpy path.  Both are always importable as ``nb_*`` / ``np_*`` so tests and the
benchmark can compare them directly.

All kernels take int64 id arrays; callers map tokens to ids first.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("FELIX_NO_NUMBA", "0") in ("", "0", "false", "False")


# --------------------------------------------------------------------------
# numpy reference path


def np_edit_table(a, b):
    """Full Levenshtein table, shape (len(a)+1, len(b)+1)."""
    n, m = len(a), len(b)
    ar = np.arange(m + 1, dtype=np.int64)
    table = np.empty((n + 1, m + 1), dtype=np.int64)
    table[0] = ar
    tmp = np.empty(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        prev = table[i - 1]
        cost = (b != a[i - 1]).astype(np.int64)
        tmp[0] = i
        np.minimum(prev[1:] + 1, prev[:-1] + cost, out=tmp[1:])
        # cur[j] = min_k<=j tmp[k] + (j - k)
        table[i] = np.minimum.accumulate(tmp - ar) + ar
    return table


def np_edit_distance(a, b):
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return n + m
    ar = np.arange(m + 1, dtype=np.int64)
    prev = ar.copy()
    tmp = np.empty(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        cost = (b != a[i - 1]).astype(np.int64)
        tmp[0] = i
        np.minimum(prev[1:] + 1, prev[:-1] + cost, out=tmp[1:])
        prev = np.minimum.accumulate(tmp - ar) + ar
    return int(prev[m])


def _backtrace_counts(table, a, b):
    # Preference on ties: diagonal (match/substitution), then deletion, then insertion.
    i, j = len(a), len(b)
    ins = dele = sub = 0
    while i > 0 or j > 0:
        cur = table[i, j]
        if i > 0 and j > 0:
            diag = 0 if a[i - 1] == b[j - 1] else 1
            if table[i - 1, j - 1] + diag == cur:
                sub += diag
                i -= 1
                j -= 1
                continue
        if i > 0 and table[i - 1, j] + 1 == cur:
            dele += 1
            i -= 1
            continue
        ins += 1
        j -= 1
    return ins, dele, sub


def np_edit_ops(a, b):
    """(distance, insertions, deletions, substitutions) turning ``a`` into ``b``."""
    table = np_edit_table(a, b)
    ins, dele, sub = _backtrace_counts(table, a, b)
    return int(table[len(a), len(b)]), ins, dele, sub


def np_lcs_table(a, b):
    n, m = len(a), len(b)
    table = np.zeros((n + 1, m + 1), dtype=np.int64)
    for i in range(1, n + 1):
        prev = table[i - 1]
        eq = (b == a[i - 1]).astype(np.int64)
        t = np.maximum(prev[1:], prev[:-1] + eq)
        table[i, 1:] = np.maximum.accumulate(t)
    return table


def np_lcs_length(a, b):
    if len(a) == 0 or len(b) == 0:
        return 0
    return int(np_lcs_table(a, b)[-1, -1])


def _contains_block(ref, block):
    L = len(block)
    for j in range(len(ref) - L + 1):
        if np.array_equal(ref[j:j + L], block):
            return True
    return False


def np_best_shift(hyp, ref, max_len):
    """Best single block shift of ``hyp`` towards ``ref``.

    Returns (gain, start, length, dest); gain is the drop in edit distance and
    is 0 when no shift helps.  Candidates are scanned by start, then length,
    then destination, and only a strictly larger gain replaces the incumbent.
    """
    n = len(hyp)
    base = np_edit_distance(hyp, ref)
    best = (0, -1, 0, -1)
    for i in range(n):
        for L in range(1, min(max_len, n - i) + 1):
            block = hyp[i:i + L]
            if not _contains_block(ref, block):
                continue
            rest = np.concatenate((hyp[:i], hyp[i + L:]))
            for k in range(n - L + 1):
                if k == i:
                    continue
                cand = np.concatenate((rest[:k], block, rest[k:]))
                gain = base - np_edit_distance(cand, ref)
                if gain > best[0]:
                    best = (gain, i, L, k)
    return best


# --------------------------------------------------------------------------
# numba path

if HAVE_NUMBA:

    @njit(cache=True)
    def nb_edit_table(a, b):
        n, m = len(a), len(b)
        table = np.empty((n + 1, m + 1), dtype=np.int64)
        for j in range(m + 1):
            table[0, j] = j
        for i in range(1, n + 1):
            table[i, 0] = i
            ai = a[i - 1]
            for j in range(1, m + 1):
                c = table[i - 1, j - 1] + (0 if ai == b[j - 1] else 1)
                d = table[i - 1, j] + 1
                if d < c:
                    c = d
                d = table[i, j - 1] + 1
                if d < c:
                    c = d
                table[i, j] = c
        return table

    @njit(cache=True)
    def nb_edit_distance(a, b):
        n, m = len(a), len(b)
        if n == 0 or m == 0:
            return n + m
        prev = np.arange(m + 1)
        cur = np.empty(m + 1, dtype=np.int64)
        for i in range(1, n + 1):
            cur[0] = i
            ai = a[i - 1]
            for j in range(1, m + 1):
                c = prev[j - 1] + (0 if ai == b[j - 1] else 1)
                d = prev[j] + 1
                if d < c:
                    c = d
                d = cur[j - 1] + 1
                if d < c:
                    c = d
                cur[j] = c
            prev, cur = cur, prev
        return prev[m]

    @njit(cache=True)
    def _nb_edit_ops(a, b):
        table = nb_edit_table(a, b)
        i, j = len(a), len(b)
        ins = 0
        dele = 0
        sub = 0
        while i > 0 or j > 0:
            cur = table[i, j]
            if i > 0 and j > 0:
                diag = 0 if a[i - 1] == b[j - 1] else 1
                if table[i - 1, j - 1] + diag == cur:
                    sub += diag
                    i -= 1
                    j -= 1
                    continue
            if i > 0 and table[i - 1, j] + 1 == cur:
                dele += 1
                i -= 1
                continue
            ins += 1
            j -= 1
        return table[len(a), len(b)], ins, dele, sub

    def nb_edit_ops(a, b):
        d, ins, dele, sub = _nb_edit_ops(a, b)
        return int(d), int(ins), int(dele), int(sub)

    @njit(cache=True)
    def nb_lcs_table(a, b):
        n, m = len(a), len(b)
        table = np.zeros((n + 1, m + 1), dtype=np.int64)
        for i in range(1, n + 1):
            ai = a[i - 1]
            for j in range(1, m + 1):
                if ai == b[j - 1]:
                    table[i, j] = table[i - 1, j - 1] + 1
                elif table[i - 1, j] >= table[i, j - 1]:
                    table[i, j] = table[i - 1, j]
                else:
                    table[i, j] = table[i, j - 1]
        return table

    def nb_lcs_length(a, b):
        if len(a) == 0 or len(b) == 0:
            return 0
        return int(nb_lcs_table(a, b)[-1, -1])

    @njit(cache=True)
    def _nb_best_shift(hyp, ref, max_len):
        n = len(hyp)
        m = len(ref)
        base = nb_edit_distance(hyp, ref)
        best_gain = 0
        best_i = -1
        best_len = 0
        best_k = -1
        cand = np.empty(n, dtype=np.int64)
        rest = np.empty(n, dtype=np.int64)
        for i in range(n):
            top = min(max_len, n - i)
            for L in range(1, top + 1):
                found = False
                for j in range(m - L + 1):
                    ok = True
                    for t in range(L):
                        if ref[j + t] != hyp[i + t]:
                            ok = False
                            break
                    if ok:
                        found = True
                        break
                if not found:
                    continue
                r = 0
                for t in range(n):
                    if t < i or t >= i + L:
                        rest[r] = hyp[t]
                        r += 1
                for k in range(n - L + 1):
                    if k == i:
                        continue
                    for t in range(k):
                        cand[t] = rest[t]
                    for t in range(L):
                        cand[k + t] = hyp[i + t]
                    for t in range(k, n - L):
                        cand[t + L] = rest[t]
                    gain = base - nb_edit_distance(cand, ref)
                    if gain > best_gain:
                        best_gain = gain
                        best_i = i
                        best_len = L
                        best_k = k
        return best_gain, best_i, best_len, best_k

    def nb_best_shift(hyp, ref, max_len):
        g, i, L, k = _nb_best_shift(hyp, ref, max_len)
        return int(g), int(i), int(L), int(k)


if USE_NUMBA:
    edit_distance = nb_edit_distance
    edit_ops = nb_edit_ops
    lcs_table = nb_lcs_table
    lcs_length = nb_lcs_length
    best_shift = nb_best_shift
else:
    edit_distance = np_edit_distance
    edit_ops = np_edit_ops
    lcs_table = np_lcs_table
    lcs_length = np_lcs_length
    best_shift = np_best_shift


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


def to_ids(*seqs):
    """Map token sequences to int64 arrays over a shared ad-hoc id space."""
    ids = {}
    out = []
    for seq in seqs:
        out.append(np.array([ids.setdefault(t, len(ids)) for t in seq], dtype=np.int64))
    return out
