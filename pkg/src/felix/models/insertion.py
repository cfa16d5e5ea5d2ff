"""Insertion model: a separate encoder with a masked-LM output head."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import PAD_ID, RESERVED, Vocabulary
from ..insertion_io import MaskedSeq
from . import nn
from .config import Hyperparams


def init_insertion(hyper: Hyperparams, vocab_size: int, rng) -> dict:
    d = hyper.d_model
    p: dict = {}
    nn.init_encoder(rng, p, "enc", vocab_size, d, hyper.layers, hyper.d_ff)
    p["mlm.w"] = rng.normal(0.0, d ** -0.5, (d, vocab_size))
    p["mlm.b"] = np.zeros(vocab_size)
    return p


@dataclass
class InsertionBatch:
    ids: np.ndarray  # (B, T) y^m token ids
    mask: np.ndarray  # (B, T) real tokens
    labels: np.ndarray  # (B, T) gold ids at MASK positions
    is_mask: np.ndarray  # (B, T) MASK positions


def insertion_loss_and_grads(p, hyper: Hyperparams, batch: InsertionBatch, pos_table, need_grads: bool = True):
    """Mean CE over every MASK position in the batch."""
    h, cache = nn.encoder_fwd(batch.ids, batch.mask, p, "enc", hyper.layers, hyper.heads, pos_table)
    logits = nn.linear_fwd(h, p, "mlm")
    total = max(int(batch.is_mask.sum()), 1)
    loss, dlogits = nn.cross_entropy(logits, batch.labels, batch.is_mask / total)
    if not need_grads:
        return loss, {}, {"insertion": loss}
    grads: dict = {}
    dh = nn.linear_bwd(dlogits, h, p, "mlm", grads)
    nn.encoder_bwd(dh, cache, p, "enc", grads)
    return loss, grads, {"insertion": loss}


class InsertionModel:
    kind = "insertion"

    def __init__(self, params: dict, hyper: Hyperparams, vocab: Vocabulary):
        self.params = params
        self.hyper = hyper
        self.vocab = vocab
        self.pos_table = nn.sinusoid_table(hyper.max_len, hyper.d_model)
        banned = list(range(len(RESERVED)))
        if hyper.mode == "infilling":
            banned.remove(PAD_ID)
        self._banned = np.array(banned)

    @classmethod
    def init(cls, hyper: Hyperparams, vocab: Vocabulary, rng) -> "InsertionModel":
        return cls(init_insertion(hyper, len(vocab), rng), hyper, vocab)

    def logits(self, masked: MaskedSeq) -> np.ndarray:
        """Vocabulary logits at every MASK position, all from one forward pass."""
        if not masked.mask_positions:
            return np.zeros((0, len(self.vocab)))
        ids = np.array([self.vocab.encode(masked.tokens)], dtype=np.int64)
        h, _ = nn.encoder_fwd(ids, np.ones_like(ids, dtype=bool), self.params, "enc",
                              self.hyper.layers, self.hyper.heads, self.pos_table)
        out = nn.linear_fwd(h[0], self.params, "mlm")
        return out[list(masked.mask_positions)]

    def predict_tokens(self, masked: MaskedSeq):
        logits = self.logits(masked).copy()
        if len(logits):
            logits[:, self._banned] = -np.inf
        return self.vocab.decode(logits.argmax(-1)) if len(logits) else []
