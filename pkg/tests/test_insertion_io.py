import pytest
from hypothesis import given, settings, strategies as st

from felix.align import AlignmentConfig, align
from felix.core import MASK, PAD, REPL_CLOSE, REPL_OPEN, EditPlan, Tag
from felix.insertion_io import (
    AlignmentError, MaskedSeq, ModeMismatch, apply_insertion, build_insertion_input, oracle_insertions,
)
from felix.realize import chain_to_skeleton, daisy_chain

SRC = "The big very loud cat".split()
TGT = "The noisy large cat".split()


def masked_for(src, tgt, cfg):
    out = align(src, tgt, cfg)
    return build_insertion_input(chain_to_skeleton(daisy_chain(out.plan), out.plan, src), out.plan, src, cfg)


def test_masking_input_replacement_example():
    m = masked_for(SRC, TGT, AlignmentConfig("masking", 8))
    assert list(m.tokens) == ["The", REPL_OPEN, "big", "very", "loud", REPL_CLOSE, MASK, MASK, "cat"]
    assert m.mask_positions == (6, 7)
    m.validate()
    assert oracle_insertions(m, TGT) == ["noisy", "large"]


def test_infilling_pads_to_max_span():
    m = masked_for(SRC, TGT, AlignmentConfig("infilling", 4))
    assert m.tokens.count(MASK) == 4
    assert oracle_insertions(m, TGT) == ["noisy", "large", PAD, PAD]


def test_apply_insertion_drops_repl_and_pad():
    m = MaskedSeq.from_tokens(["a", REPL_OPEN, "x", REPL_CLOSE, MASK, MASK, "b"], "infilling")
    assert apply_insertion(m, ["y", PAD]) == ["a", "y", "b"]
    with pytest.raises(ValueError):
        apply_insertion(m, ["y"])
    with pytest.raises(ValueError):
        apply_insertion(m, ["y", MASK])


def test_mode_mismatch():
    plan = EditPlan((Tag("KEEP", 2),), {0: 1})
    sk = chain_to_skeleton([0, 1], plan, ["a"])
    with pytest.raises(ModeMismatch):
        build_insertion_input(sk, plan, ["a"], AlignmentConfig("infilling", 4))


def test_oracle_failure():
    m = MaskedSeq.from_tokens(["a", MASK])
    with pytest.raises(AlignmentError):
        oracle_insertions(m, ["b", "c"])


def test_validate_catches_bad_repl():
    with pytest.raises(ValueError):
        MaskedSeq.from_tokens([REPL_OPEN, "a"]).validate()
    with pytest.raises(ValueError):
        MaskedSeq.from_tokens([REPL_CLOSE]).validate()


words = st.lists(st.sampled_from(list("abcdef")), max_size=8)


@settings(max_examples=300, deadline=None)
@given(words, words, st.sampled_from(["masking", "infilling"]), st.booleans())
def test_oracle_round_trip(src, tgt, mode, pointing):
    cfg = AlignmentConfig(mode, 8, pointing)
    out = align(src, tgt, cfg)
    if not out.ok:
        return
    m = masked_for(src, tgt, cfg)
    m.validate()
    fills = oracle_insertions(m, tgt)
    assert len(fills) == len(m.mask_positions)
    assert apply_insertion(m, fills) == tgt
