"""Two-step inference: tag + point, then fill all MASKs in one pass."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

from ..core import GENERIC_INS, TokenSeq
from ..insertion_io import MaskedSeq, apply_insertion, build_insertion_input
from ..realize import beam_realize, chain_to_skeleton, plan_from_chain, source_order_chain
from .insertion import InsertionModel
from .tagger import TaggerModel
from .train import alignment_config


class VocabMismatch(ValueError):
    pass


@dataclass
class Prediction:
    tokens: TokenSeq
    tags: List[str]  # labels, CLS row first
    chain: List[int]
    masked: MaskedSeq


def _coerce_cls(ins, mode):
    if ins is None:
        return None
    return GENERIC_INS if mode == "infilling" else ins


def predict(source: Sequence[str], tagger: TaggerModel, inserter: InsertionModel, beam_size: int = None) -> Prediction:
    if tagger.vocab != inserter.vocab:
        raise VocabMismatch("tagger and insertion models use different vocabularies")
    hyper = tagger.hyper
    beam = beam_size or hyper.beam_size
    h = tagger.encode(source)
    _, tags = tagger.predict_tags(h)
    cls_tag, src_tags = tags[0], tags[1:]
    if hyper.pointing_enabled:
        chain = beam_realize(tagger.pointer_scores(h, tags), src_tags, beam)
    else:
        chain = source_order_chain(src_tags)
    plan = plan_from_chain(src_tags, chain, _coerce_cls(cls_tag.insertion, hyper.mode))
    cfg = alignment_config(hyper)
    skeleton = chain_to_skeleton(chain, plan, source)
    masked = build_insertion_input(skeleton, plan, source, cfg)
    fills = inserter.predict_tokens(masked)
    return Prediction(apply_insertion(masked, fills), [t.label for t in tags], chain, masked)


def predict_tokens(source: Sequence[str], models, hyper=None) -> TokenSeq:
    tagger, inserter = models
    return predict(source, tagger, inserter, getattr(hyper, "beam_size", None)).tokens
