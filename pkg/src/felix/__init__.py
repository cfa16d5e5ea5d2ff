"""Text editing by tagging, pointer-based reordering and masked insertion."""

from .align import AlignmentConfig, AlignmentOutcome, align, alignment_stats
from .core import (
    CLS,
    DELETE,
    GENERIC_INS,
    KEEP,
    MASK,
    PAD,
    REPL_CLOSE,
    REPL_OPEN,
    EditPlan,
    SentinelError,
    Tag,
    Vocabulary,
    WhitespaceTokenizer,
    detokenize,
    tag_set,
    tokenize,
)
from .insertion_io import MaskedSeq, apply_insertion, build_insertion_input, oracle_insertions
from .realize import beam_realize, chain_to_skeleton, daisy_chain, plan_from_chain, source_order_chain

__version__ = "0.1.0"

__all__ = [
    "AlignmentConfig", "AlignmentOutcome", "align", "alignment_stats",
    "CLS", "DELETE", "GENERIC_INS", "KEEP", "MASK", "PAD", "REPL_CLOSE", "REPL_OPEN",
    "EditPlan", "SentinelError", "Tag", "Vocabulary", "WhitespaceTokenizer",
    "detokenize", "tag_set", "tokenize",
    "MaskedSeq", "apply_insertion", "build_insertion_input", "oracle_insertions",
    "beam_realize", "chain_to_skeleton", "daisy_chain", "plan_from_chain", "source_order_chain",
]
