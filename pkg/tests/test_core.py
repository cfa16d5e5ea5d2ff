import pytest
from hypothesis import given, strategies as st

from felix.core import (
    CLS, DELETE, GENERIC_INS, KEEP, MASK, RESERVED, SENTINELS, UNK, EditPlan, SentinelError, Tag,
    Vocabulary, WhitespaceTokenizer, detokenize, first_sentinel, tag_set, tokenize,
)

words = st.text(alphabet=st.characters(blacklist_categories=("Zs", "Cc")), min_size=1, max_size=6)
texts = st.lists(st.one_of(words, st.sampled_from(sorted(SENTINELS))), max_size=8).map(" ".join)


def test_tokenize_splits_on_whitespace():
    assert tokenize("  The  big\tcat\n") == ["The", "big", "cat"]
    assert tokenize("") == []


@given(texts)
def test_tokenize_round_trip(text):
    toks = tokenize(text)
    assert not any(t in SENTINELS for t in toks)
    assert detokenize(toks) == " ".join(text.split())


def test_user_sentinel_is_escaped():
    toks = tokenize("a [MASK] b")
    assert toks[1] == "\\[MASK]"
    assert detokenize(toks) == "a [MASK] b"


def test_detokenize_rejects_raw_sentinel():
    with pytest.raises(SentinelError):
        detokenize(["a", MASK])


def test_lowercase_option():
    assert WhitespaceTokenizer(lowercase=True).tokenize("The Cat") == ["the", "cat"]


def test_tag_labels_round_trip():
    for t in tag_set("masking", 4) + tag_set("infilling", 4):
        assert Tag.from_label(t.label) == t
    assert Tag(DELETE, 2).label == "DELETE|INS_2"
    assert Tag(KEEP, GENERIC_INS).label == "KEEP|INS"


@pytest.mark.parametrize("bad", [0, -1, True, 2.0, "x"])
def test_tag_rejects_bad_insertion(bad):
    with pytest.raises(ValueError):
        Tag(KEEP, bad)


def test_tag_set_sizes():
    assert len(tag_set("infilling", 8)) == 4
    assert len(tag_set("masking", 3)) == 8
    assert tag_set("masking", 3)[0] == Tag(KEEP)
    with pytest.raises(ValueError):
        tag_set("other", 3)


def test_edit_plan_validate():
    tags = (Tag(KEEP), Tag(DELETE), Tag(KEEP))
    EditPlan(tags, {0: 1, 1: 3}).validate()
    with pytest.raises(ValueError):
        EditPlan(tags, {0: 2}).validate()
    with pytest.raises(ValueError):
        EditPlan(tags, {0: 1, 1: 1}).validate()
    with pytest.raises(ValueError):
        EditPlan(tags, {0: 4}).validate()


def test_vocabulary():
    v = Vocabulary.build([["b", "a"], ["a", CLS]])
    assert v.tokens()[: len(RESERVED)] == list(RESERVED)
    assert v.tokens()[len(RESERVED):] == ["a", "b"]
    assert v.id("zzz") == v.id(UNK)
    assert v.decode(v.encode(["a", "b"])) == ["a", "b"]
    assert Vocabulary.from_tokens(v.tokens()) == v
    with pytest.raises(ValueError):
        Vocabulary.from_tokens(["a"])


def test_first_sentinel():
    assert first_sentinel(["a", MASK, CLS]) == MASK
    assert first_sentinel(["a"]) is None
