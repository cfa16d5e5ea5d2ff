"""Tagging model: encoder, tag head and the pointer layer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ..core import CLS, KEEP, EditPlan, Tag, Vocabulary, tag_set
from . import nn
from .config import Hyperparams


def init_tagger(hyper: Hyperparams, vocab_size: int, n_tags: int, rng) -> dict:
    d = hyper.d_model
    p: dict = {}
    nn.init_encoder(rng, p, "enc", vocab_size, d, hyper.layers, hyper.d_ff)
    p["tag.w"] = rng.normal(0.0, d ** -0.5, (d, n_tags))
    p["tag.b"] = np.zeros(n_tags)
    p["ptr.tag_emb"] = rng.normal(0.0, 1.0, (n_tags, hyper.tag_emb_dim))
    fan_in = 2 * d + hyper.tag_emb_dim
    p["ptr.f.w"] = rng.normal(0.0, fan_in ** -0.5, (fan_in, d))
    p["ptr.f.b"] = np.zeros(d)
    if hyper.pointer_layer:
        nn.init_layer(rng, p, "ptr.extra", d, hyper.d_ff)
    for proj in ("q", "k"):
        p[f"ptr.{proj}.w"] = rng.normal(0.0, d ** -0.5, (d, d))
        p[f"ptr.{proj}.b"] = np.zeros(d)
    return p


def tag_head_fwd(h, p):
    return nn.linear_fwd(h, p, "tag")


def pointer_fwd(h, tag_ids, mask, p, hyper: Hyperparams, pos_table):
    """Pointer attention logits (masked) and probabilities, shape (B, T, T).

    Each position's input is an affine map of [hidden; tag embedding;
    position embedding]; queries and keys are linear projections of it and
    scores are their scaled dot products.
    """
    b, t, d = h.shape
    e_tag = p["ptr.tag_emb"][tag_ids]
    e_pos = np.broadcast_to(pos_table[:t], (b, t, d))
    z = np.concatenate([h, e_tag, e_pos], axis=-1)
    h1 = nn.linear_fwd(z, p, "ptr.f")
    extra = None
    hq = h1
    if hyper.pointer_layer:
        hq, extra = nn.layer_fwd(h1, p, "ptr.extra", mask, hyper.heads)
    q = nn.linear_fwd(hq, p, "ptr.q")
    k = nn.linear_fwd(h1, p, "ptr.k")
    scale = 1.0 / np.sqrt(q.shape[-1])
    s = (q @ k.transpose(0, 2, 1)) * scale
    s = np.where(mask[:, None, :], s, nn.NEG_INF)
    return s, (z, h1, hq, extra, q, k, scale, tag_ids, d)


def pointer_bwd(ds, cache, p, hyper: Hyperparams, grads):
    z, h1, hq, extra, q, k, scale, tag_ids, d = cache
    ds = ds * scale
    dq = ds @ k
    dk = ds.transpose(0, 2, 1) @ q
    dhq = nn.linear_bwd(dq, hq, p, "ptr.q", grads)
    dh1 = nn.linear_bwd(dk, h1, p, "ptr.k", grads)
    if extra is not None:
        dh1 = dh1 + nn.layer_bwd(dhq, extra, p, "ptr.extra", grads)
    else:
        dh1 = dh1 + dhq
    dz = nn.linear_bwd(dh1, z, p, "ptr.f", grads)
    de = dz[..., d:d + hyper.tag_emb_dim]
    demb = np.zeros_like(p["ptr.tag_emb"])
    np.add.at(demb, tag_ids.reshape(-1), de.reshape(-1, de.shape[-1]))
    nn._acc(grads, "ptr.tag_emb", demb)
    return dz[..., :d]


@dataclass
class TaggerBatch:
    ids: np.ndarray  # (B, T) token ids, CLS first
    mask: np.ndarray  # (B, T) real tokens
    tags: np.ndarray  # (B, T) gold tag ids (row 0 = CLS)
    pointers: np.ndarray  # (B, T) gold next position, -1 where none


def tagger_loss_and_grads(p, hyper: Hyperparams, batch: TaggerBatch, pos_table, need_grads: bool = True):
    """Mean over examples of (mean tag CE + mean pointer CE over rows with a gold edge).

    With ``need_grads=False`` the backward pass is skipped and grads is empty.
    """
    b = batch.ids.shape[0]
    h, enc_cache = nn.encoder_fwd(batch.ids, batch.mask, p, "enc", hyper.layers, hyper.heads, pos_table)
    logits = tag_head_fwd(h, p)
    n_tok = batch.mask.sum(1, keepdims=True)
    w_tag = batch.mask / n_tok / b
    tag_loss, dlogits = nn.cross_entropy(logits, batch.tags, w_tag)

    s, pcache = pointer_fwd(h, batch.tags, batch.mask, p, hyper, pos_table)
    has_ptr = batch.pointers >= 0
    n_ptr = np.maximum(has_ptr.sum(1, keepdims=True), 1)
    w_ptr = has_ptr / n_ptr / b
    ptr_loss, ds = nn.cross_entropy(s, batch.pointers, w_ptr)

    parts = {"tag": tag_loss, "pointer": ptr_loss}
    if not need_grads:
        return tag_loss + ptr_loss, {}, parts
    grads: dict = {}
    dh = nn.linear_bwd(dlogits, h, p, "tag", grads)
    dh = dh + pointer_bwd(ds, pcache, p, hyper, grads)
    nn.encoder_bwd(dh, enc_cache, p, "enc", grads)
    return tag_loss + ptr_loss, grads, parts


class TaggerModel:
    """Trained tagging network plus the vocabulary and tag inventory it uses."""

    kind = "tagger"

    def __init__(self, params: dict, hyper: Hyperparams, vocab: Vocabulary):
        self.params = params
        self.hyper = hyper
        self.vocab = vocab
        self.tags: List[Tag] = tag_set(hyper.mode, hyper.max_span)
        self.tag_index = {t: i for i, t in enumerate(self.tags)}
        self.pos_table = nn.sinusoid_table(hyper.max_len, hyper.d_model)

    @classmethod
    def init(cls, hyper: Hyperparams, vocab: Vocabulary, rng) -> "TaggerModel":
        n_tags = len(tag_set(hyper.mode, hyper.max_span))
        return cls(init_tagger(hyper, len(vocab), n_tags, rng), hyper, vocab)

    def input_ids(self, source: Sequence[str]) -> np.ndarray:
        return np.array([self.vocab.encode([CLS, *source])], dtype=np.int64)

    def gold_tag_ids(self, plan: EditPlan) -> List[int]:
        return [self.tag_index[Tag(KEEP, plan.cls_insertion)]] + [self.tag_index[t] for t in plan.tags]

    def encode(self, source: Sequence[str]) -> np.ndarray:
        ids = self.input_ids(source)
        h, _ = nn.encoder_fwd(ids, np.ones_like(ids, dtype=bool), self.params, "enc",
                              self.hyper.layers, self.hyper.heads, self.pos_table)
        return h[0]

    def predict_tags(self, h: np.ndarray):
        """Tag logits (rows incl. CLS) and argmax tags; CLS is restricted to KEEP tags."""
        logits = tag_head_fwd(h, self.params)
        ids = logits.argmax(-1)
        keep_ids = [i for i, t in enumerate(self.tags) if t.keep]
        ids[0] = keep_ids[int(np.argmax(logits[0, keep_ids]))]
        return logits, [self.tags[i] for i in ids]

    def pointer_scores(self, h: np.ndarray, tags: Sequence[Tag]) -> np.ndarray:
        tag_ids = np.array([[self.tag_index[t] for t in tags]], dtype=np.int64)
        mask = np.ones(tag_ids.shape, dtype=bool)
        s, _ = pointer_fwd(h[None], tag_ids, mask, self.params, self.hyper, self.pos_table)
        return nn.softmax(s[0])
