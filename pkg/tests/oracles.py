"""Slow reference implementations used to check the library.

None of these import felix; they recompute each quantity from first
principles with plain Python so a shared bug cannot hide.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np


def levenshtein(a, b) -> int:
    a, b = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))

    return d(len(a), len(b))


def lcs(a, b) -> int:
    a, b = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def f(i, j):
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + f(i + 1, j + 1)
        return max(f(i + 1, j), f(i, j + 1))

    return f(0, 0)


def grams(toks, n):
    return [tuple(toks[i:i + n]) for i in range(len(toks) - n + 1)]


def count(items):
    out = {}
    for x in items:
        out[x] = out.get(x, 0) + 1
    return out


def sari_oracle(src, pred, refs, del_f1=False):
    """Sentence SARI, n = 1..4, with the reference-replicated counts of the original scorer."""
    R = len(refs)
    keep_s = add_s = del_s = 0.0
    for n in range(1, 5):
        s = count(grams(src, n))
        c = count(grams(pred, n))
        r = {}
        for ref in refs:
            for g, k in count(grams(ref, n)).items():
                r[g] = r.get(g, 0) + k
        s = {g: k * R for g, k in s.items()}
        c = {g: k * R for g, k in c.items()}

        keep_sys = {g: min(s[g], c[g]) for g in s if g in c}
        keep_good = {g: min(v, r[g]) for g, v in keep_sys.items() if g in r}
        keep_all = {g: min(s[g], r[g]) for g in s if g in r}
        p = sum(keep_good[g] / keep_sys[g] for g in keep_good) / len(keep_sys) if keep_sys else 0.0
        rr = sum(keep_good[g] / keep_all[g] for g in keep_good) / len(keep_all) if keep_all else 0.0
        keep_s += 2 * p * rr / (p + rr) if p + rr > 0 else 0.0

        del_sys = {g: s[g] - c.get(g, 0) for g in s if s[g] > c.get(g, 0)}
        del_good = {g: v - r.get(g, 0) for g, v in del_sys.items() if v > r.get(g, 0)}
        del_all = {g: s[g] - r.get(g, 0) for g in s if s[g] > r.get(g, 0)}
        p = sum(del_good[g] / del_sys[g] for g in del_good) / len(del_sys) if del_sys else 0.0
        if del_f1:
            rr = sum(del_good[g] / del_all[g] for g in del_good) / len(del_all) if del_all else 0.0
            del_s += 2 * p * rr / (p + rr) if p + rr > 0 else 0.0
        else:
            del_s += p

        add_sys = set(c) - set(s)
        add_good = add_sys & set(r)
        add_all = set(r) - set(s)
        p = len(add_good) / len(add_sys) if add_sys else 0.0
        rr = len(add_good) / len(add_all) if add_all else 0.0
        add_s += 2 * p * rr / (p + rr) if p + rr > 0 else 0.0
    keep_s, del_s, add_s = keep_s / 4, del_s / 4, add_s / 4
    return 100 * (keep_s + del_s + add_s) / 3, 100 * add_s, 100 * keep_s, 100 * del_s


def bleu_oracle(preds, refs_list):
    m = [0] * 4
    t = [0] * 4
    hl = rl = 0
    for pred, refs in zip(preds, refs_list):
        hl += len(pred)
        rl += sorted((abs(len(r) - len(pred)), len(r)) for r in refs)[0][1]
        for n in range(1, 5):
            hg = grams(pred, n)
            t[n - 1] += len(hg)
            for g, k in count(hg).items():
                m[n - 1] += min(k, max(count(grams(r, n)).get(g, 0) for r in refs))
    if hl == 0 or m[0] == 0:
        return 0.0
    logs = []
    for n in range(4):
        logs.append(math.log(m[n] / t[n] if m[n] else 1.0 / (t[n] + 1)))
    bp = 1.0 if hl > rl else math.exp(1 - rl / hl)
    return 100 * bp * math.exp(sum(logs) / 4)


def rouge_oracle(preds, refs_list):
    tot = 0.0
    for pred, refs in zip(preds, refs_list):
        best = 0.0
        for r in refs:
            k = lcs(pred, r)
            if k:
                p, q = k / len(pred), k / len(r)
                best = max(best, 2 * p * q / (p + q))
        tot += best
    return 100 * tot / len(preds)


def ter_oracle(hyp, ref, max_shift=10):
    """Greedy-shift TER: number of edits per reference token, plus the shift count.

    Each round tries every block (length <= max_shift, present in ref) and
    every destination, keeping the first strictly best gain in (start, length,
    destination) order.
    """
    hyp = list(hyp)
    shifts = 0
    while len(hyp) > 1:
        base = levenshtein(hyp, ref)
        best = (0, None)
        for i in range(len(hyp)):
            for L in range(1, min(max_shift, len(hyp) - i) + 1):
                block = hyp[i:i + L]
                if not any(ref[j:j + L] == block for j in range(len(ref) - L + 1)):
                    continue
                rest = hyp[:i] + hyp[i + L:]
                for k in range(len(rest) + 1):
                    if k == i:
                        continue
                    gain = base - levenshtein(rest[:k] + block + rest[k:], ref)
                    if gain > best[0]:
                        best = (gain, rest[:k] + block + rest[k:])
        if best[1] is None:
            break
        hyp = best[1]
        shifts += 1
    return 100.0 * (levenshtein(hyp, ref) + shifts) / len(ref), shifts


def exhaustive_chain(logp, keep):
    """Best chain from CLS over every permutation of ``keep``; ties to the lexicographically smaller chain."""
    best = None
    for perm in itertools.permutations(keep):
        chain = (0,) + perm
        score = sum(logp[a, b] for a, b in zip(chain, chain[1:]))
        key = (-score, chain)
        if best is None or key < best:
            best = key
    return list(best[1]), -best[0]


def numeric_grad(fn, params, eps=1e-4):
    """Central differences of scalar ``fn(params)`` for every entry of every array."""
    out = {}
    for name, arr in params.items():
        g = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gf = g.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + eps
            lp = fn(params)
            flat[i] = old - eps
            lm = fn(params)
            flat[i] = old
            gf[i] = (lp - lm) / (2 * eps)
        out[name] = g
    return out


def max_rel_error(analytic, numeric, floor=1e-6):
    """max |a - n| / max(|a|, |n|, floor) over all entries.

    The floor keeps entries whose true gradient is zero (for example the key
    bias of softmax attention) from dividing round-off by round-off.
    """
    worst = 0.0
    for name, num in numeric.items():
        a = analytic.get(name, np.zeros_like(num))
        rel = np.abs(a - num) / np.maximum(np.maximum(np.abs(a), np.abs(num)), floor)
        worst = max(worst, float(rel.max()))
    return worst
