"""Synthetic corpora with known edits, used for property tests and training demos."""

from __future__ import annotations

from typing import List, Tuple

import numpy as np

Pair = Tuple[List[str], List[str]]


def random_edit_pair(rng: np.random.Generator, vocab_size: int = 50, max_len: int = 12,
                     keep_prob: float = 0.7, reorder_prob: float = 0.5, insert_prob: float = 0.3,
                     max_insert: int = 8) -> Pair:
    """Source of random words; target = random deletes, block swaps and insertions."""
    words = [f"w{i}" for i in range(vocab_size)]
    n = int(rng.integers(1, max_len + 1))
    source = [words[i] for i in rng.integers(0, vocab_size, n)]
    kept = [t for t in source if rng.random() < keep_prob]
    if len(kept) > 1 and rng.random() < reorder_prob:
        a, b = sorted(rng.choice(len(kept) + 1, 2, replace=False))
        c = int(rng.integers(0, len(kept) - (b - a) + 1))
        block, rest = kept[a:b], kept[:a] + kept[b:]
        kept = rest[:c] + block + rest[c:]
    target: List[str] = []
    for i in range(len(kept) + 1):
        if rng.random() < insert_prob:
            k = int(rng.integers(1, max_insert + 1))
            target.extend(words[j] for j in rng.integers(0, vocab_size, k))
        if i < len(kept):
            target.append(kept[i])
    if not target:
        target = [words[int(rng.integers(0, vocab_size))]]
    return source, target


def random_edit_corpus(n: int, seed: int = 0, **kw) -> List[Pair]:
    rng = np.random.default_rng(seed)
    return [random_edit_pair(rng, **kw) for _ in range(n)]


def reorder_heavy_corpus(n: int, seed: int = 0, vocab_size: int = 50) -> List[Pair]:
    """Every pair is a pure block swap of the source (plus nothing else)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        src, _ = random_edit_pair(rng, vocab_size, max_len=12, keep_prob=1.0, reorder_prob=0.0, insert_prob=0.0)
        if len(src) < 2:
            src = src + ["w0"]
        a, b = sorted(rng.choice(len(src) + 1, 2, replace=False))
        block, rest = src[a:b], src[:a] + src[b:]
        c = int(rng.integers(0, len(rest) + 1))
        out.append((src, rest[:c] + block + rest[c:]))
    return out


ADJ = ["big", "small", "old", "red", "loud", "quiet"]
SYNONYM = {"big": "large", "small": "tiny", "loud": "noisy"}
NOUN = ["cat", "dog", "bird", "car", "tree"]
VERB = ["runs", "sleeps", "sits", "waits"]
FILLER = ["very", "really"]
TIME = ["today", "now", "later"]


def rule_pair(rng: np.random.Generator) -> Pair:
    """One pair from a fixed rule family covering every edit type.

    Source: ``the [FILLER] ADJ NOUN VERB [TIME]``.  Target: fillers dropped,
    some adjectives swapped for a synonym, ``runs`` gains ``fast`` and a
    trailing time word moves to the front.
    """
    adj = ADJ[int(rng.integers(len(ADJ)))]
    noun = NOUN[int(rng.integers(len(NOUN)))]
    verb = VERB[int(rng.integers(len(VERB)))]
    source = ["the"]
    if rng.random() < 0.5:
        source.append(FILLER[int(rng.integers(len(FILLER)))])
    source += [adj, noun, verb]
    time = TIME[int(rng.integers(len(TIME)))] if rng.random() < 0.5 else None
    if time:
        source.append(time)

    target = [time] if time else []
    target += ["the", SYNONYM.get(adj, adj), noun, verb]
    if verb == "runs":
        target.append("fast")
    return source, target


def rule_corpus(n: int, seed: int = 0, unique: bool = True) -> List[Pair]:
    rng = np.random.default_rng(seed)
    out: List[Pair] = []
    seen = set()
    tries = 0
    while len(out) < n:
        tries += 1
        if tries > 100 * n:
            raise ValueError(f"rule family cannot produce {n} distinct pairs")
        src, tgt = rule_pair(rng)
        key = tuple(src)
        if unique and key in seen:
            continue
        seen.add(key)
        out.append((src, tgt))
    return out
