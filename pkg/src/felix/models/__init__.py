"""Toy-scale tagging and insertion networks and the two-step pipeline."""

from __future__ import annotations

import numpy as np

from ..insertion_io import MaskedSeq
from .checkpoint import CheckpointError, load, save
from .config import Hyperparams
from .insertion import InsertionModel
from .pipeline import Prediction, VocabMismatch, predict, predict_tokens
from .tagger import TaggerModel
from .train import AlignedExample, NumericError, loss_and_gradients, prepare_corpus, train


def encode(tokens, model: TaggerModel) -> np.ndarray:
    """Final encoder states, one row per token of ``[CLS] + tokens``."""
    return model.encode(tokens)


def predict_tags(h: np.ndarray, model: TaggerModel):
    return model.predict_tags(h)


def pointer_scores(h: np.ndarray, tags, model: TaggerModel) -> np.ndarray:
    return model.pointer_scores(h, tags)


def insertion_logits(masked: MaskedSeq, model: InsertionModel) -> np.ndarray:
    return model.logits(masked)


__all__ = [
    "AlignedExample",
    "CheckpointError",
    "Hyperparams",
    "InsertionModel",
    "NumericError",
    "Prediction",
    "TaggerModel",
    "VocabMismatch",
    "encode",
    "insertion_logits",
    "load",
    "loss_and_gradients",
    "pointer_scores",
    "predict",
    "predict_tags",
    "predict_tokens",
    "prepare_corpus",
    "save",
    "train",
]
