"""Batching, optimisers and the two independent training loops."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..align import AlignmentConfig, align
from ..core import PAD_ID, EditPlan, Vocabulary
from ..insertion_io import MaskedSeq, build_insertion_input, oracle_insertions
from ..realize import chain_to_skeleton, daisy_chain
from .config import Hyperparams
from .insertion import InsertionBatch, InsertionModel, insertion_loss_and_grads
from .tagger import TaggerBatch, TaggerModel, tagger_loss_and_grads

log = logging.getLogger(__name__)


class NumericError(FloatingPointError):
    pass


@dataclass(frozen=True)
class AlignedExample:
    source: Tuple[str, ...]
    target: Tuple[str, ...]
    plan: EditPlan


def alignment_config(hyper: Hyperparams) -> AlignmentConfig:
    return AlignmentConfig(hyper.mode, hyper.max_span, hyper.pointing_enabled)


def prepare_corpus(pairs: Iterable[Tuple[Sequence[str], Sequence[str]]], hyper: Hyperparams) -> List[AlignedExample]:
    """Align every pair; unalignable pairs are dropped (and counted in the log)."""
    cfg = alignment_config(hyper)
    out, skipped = [], 0
    for src, tgt in pairs:
        res = align(src, tgt, cfg)
        if res.ok:
            out.append(AlignedExample(tuple(src), tuple(tgt), res.plan))
        else:
            skipped += 1
    if skipped:
        log.info("skipped %d unalignable pairs", skipped)
    return out


def insertion_example(ex: AlignedExample, hyper: Hyperparams) -> Tuple[MaskedSeq, List[str]]:
    cfg = alignment_config(hyper)
    skeleton = chain_to_skeleton(daisy_chain(ex.plan), ex.plan, ex.source)
    masked = build_insertion_input(skeleton, ex.plan, ex.source, cfg)
    return masked, oracle_insertions(masked, ex.target)


def _pad(rows: Sequence[Sequence[int]], fill: int) -> np.ndarray:
    width = max(len(r) for r in rows)
    out = np.full((len(rows), width), fill, dtype=np.int64)
    for i, r in enumerate(rows):
        out[i, :len(r)] = r
    return out


def tagger_batch(model: TaggerModel, examples: Sequence[AlignedExample]) -> TaggerBatch:
    ids = [model.input_ids(ex.source)[0] for ex in examples]
    tags = [model.gold_tag_ids(ex.plan) for ex in examples]
    ptrs = []
    for ex in examples:
        row = [-1] * (ex.plan.n + 1)
        for a, b in ex.plan.pointers.items():
            row[a] = b
        ptrs.append(row)
    ids_arr = _pad(ids, PAD_ID)
    return TaggerBatch(ids_arr, _pad([[1] * len(r) for r in ids], 0).astype(bool), _pad(tags, 0), _pad(ptrs, -1))


def insertion_batch(model: InsertionModel, items: Sequence[Tuple[MaskedSeq, List[str]]]) -> InsertionBatch:
    ids, labels, is_mask = [], [], []
    for masked, gold in items:
        ids.append(model.vocab.encode(masked.tokens))
        lab = [0] * len(masked.tokens)
        flag = [0] * len(masked.tokens)
        for pos, tok in zip(masked.mask_positions, gold):
            lab[pos] = model.vocab.id(tok)
            flag[pos] = 1
        labels.append(lab)
        is_mask.append(flag)
    ids_arr = _pad(ids, PAD_ID)
    return InsertionBatch(ids_arr, _pad([[1] * len(r) for r in ids], 0).astype(bool),
                          _pad(labels, 0), _pad(is_mask, 0).astype(bool))


class SGD:
    def __init__(self, lr: float, momentum: float = 0.0):
        self.lr, self.momentum = lr, momentum
        self.vel: dict = {}

    def step(self, params: dict, grads: dict) -> None:
        for name, g in grads.items():
            if self.momentum:
                v = self.vel.get(name)
                v = g.copy() if v is None else self.momentum * v + g
                self.vel[name] = v
                g = v
            params[name] -= self.lr * g


class Adam:
    def __init__(self, lr: float, b1: float = 0.9, b2: float = 0.999, eps: float = 1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m: dict = {}
        self.v: dict = {}
        self.t = 0

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        c1 = 1 - self.b1 ** self.t
        c2 = 1 - self.b2 ** self.t
        for name, g in grads.items():
            m = self.m.get(name, 0.0) * self.b1 + (1 - self.b1) * g
            v = self.v.get(name, 0.0) * self.b2 + (1 - self.b2) * g * g
            self.m[name], self.v[name] = m, v
            params[name] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def make_optimizer(hyper: Hyperparams):
    if hyper.optimizer == "adam":
        return Adam(hyper.lr)
    return SGD(hyper.lr, hyper.momentum)


def _fit(model, items, batch_fn, loss_fn, hyper: Hyperparams, rng, on_step) -> List[float]:
    opt = make_optimizer(hyper)
    losses = []
    order = np.array([], dtype=np.int64)
    for step in range(hyper.steps):
        if len(order) < hyper.batch_size:
            order = np.concatenate([order, rng.permutation(len(items))])
        idx, order = order[:hyper.batch_size], order[hyper.batch_size:]
        batch = batch_fn(model, [items[i] for i in idx])
        loss, grads, _ = loss_fn(model.params, hyper, batch, model.pos_table)
        if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
            raise NumericError(f"{model.kind} loss became non-finite at step {step}")
        opt.step(model.params, grads)
        losses.append(float(loss))
        if on_step is not None:
            on_step(model.kind, step, float(loss))
    return losses


def build_vocab(examples: Iterable[AlignedExample]) -> Vocabulary:
    seqs = []
    for ex in examples:
        seqs.append(ex.source)
        seqs.append(ex.target)
    return Vocabulary.build(seqs)


def train(
    corpus: Sequence[AlignedExample],
    hyper: Hyperparams,
    vocab: Optional[Vocabulary] = None,
    on_step: Optional[Callable[[str, int, float], None]] = None,
) -> Tuple[TaggerModel, InsertionModel]:
    """Train the tagger and the insertion model independently.

    Every random draw comes from ``hyper.seed``, so two runs with equal inputs
    produce identical weights.  ``on_step(kind, step, loss)`` sees each loss.
    """
    if not corpus:
        raise ValueError("cannot train on an empty corpus")
    vocab = vocab or build_vocab(corpus)
    seeds = np.random.SeedSequence(hyper.seed).spawn(4)
    init_t, init_i, order_t, order_i = (np.random.default_rng(s) for s in seeds)

    tagger = TaggerModel.init(hyper, vocab, init_t)
    _fit(tagger, list(corpus), tagger_batch, tagger_loss_and_grads, hyper, order_t, on_step)

    inserter = InsertionModel.init(hyper, vocab, init_i)
    items = [it for it in (insertion_example(ex, hyper) for ex in corpus) if it[0].mask_positions]
    if items:
        _fit(inserter, items, insertion_batch, insertion_loss_and_grads, hyper, order_i, on_step)
    return tagger, inserter


def loss_and_gradients(batch, params: dict, hyper: Hyperparams, kind: str):
    """Scalar loss and per-parameter gradients for one tagger or insertion batch."""
    from .nn import sinusoid_table

    pos = sinusoid_table(hyper.max_len, hyper.d_model)
    fn = tagger_loss_and_grads if kind == "tagger" else insertion_loss_and_grads
    loss, grads, _ = fn(params, hyper, batch, pos)
    if not np.isfinite(loss):
        raise NumericError("non-finite loss")
    return loss, grads
