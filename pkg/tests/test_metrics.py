import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import bleu_oracle, levenshtein, rouge_oracle, sari_oracle, ter_oracle

from felix import metrics

sent = st.lists(st.sampled_from(list("abcd")), min_size=1, max_size=7)


def test_ter_swap():
    r = metrics.ter(["b", "a"], ["a", "b"])
    assert r.ter == 50.0 and r.shift == 1 and r.edits == 1


def test_ter_identity_and_components():
    assert metrics.ter("a b c", "a b c").ter == 0.0
    r = metrics.ter("a x c", "a b c d")
    assert (r.sub, r.ins, r.dele) == (1, 1, 0)
    assert r.ter == pytest.approx(50.0)
    with pytest.raises(ValueError):
        metrics.ter("a", "")


def test_ter_can_exceed_100():
    assert metrics.ter("a b c d", "x").ter == 400.0


@settings(max_examples=150, deadline=None)
@given(sent, sent)
def test_ter_matches_oracle_and_shift_bound(hyp, ref):
    r = metrics.ter(hyp, ref)
    want, shifts = ter_oracle(hyp, ref)
    assert r.ter == pytest.approx(want, abs=1e-9)
    assert r.shift == shifts
    no_shift = metrics.ter(hyp, ref, shifts=False)
    assert no_shift.ter == pytest.approx(100.0 * levenshtein(hyp, ref) / len(ref))
    assert r.ter <= no_shift.ter + 1e-12


@settings(max_examples=150, deadline=None)
@given(sent, sent, st.lists(sent, min_size=1, max_size=3), st.booleans())
def test_sari_matches_oracle(src, pred, refs, del_f1):
    got = metrics.sari(src, pred, refs, del_f1)
    assert tuple(got) == pytest.approx(sari_oracle(src, pred, refs, del_f1), abs=1e-9)
    assert all(0.0 <= v <= 100.0 for v in got)


def test_sari_hand_value():
    # identical source, prediction and reference: nothing to add or delete.
    # (four tokens so that every n-gram order up to 4 exists)
    s = metrics.sari("a b c d", "a b c d", ["a b c d"])
    assert s.keep == 100.0 and s.add == 0.0 and s.delete == 0.0
    assert s.sari == pytest.approx(100 / 3)


def test_sari_accepts_string_reference():
    assert metrics.sari("a b", "a", "a") == metrics.sari("a b", "a", ["a"])
    with pytest.raises(ValueError):
        metrics.sari("a", "a", [])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(sent, st.lists(sent, min_size=1, max_size=3)), min_size=1, max_size=5))
def test_bleu_and_rouge_match_oracles(rows):
    preds = [p for p, _ in rows]
    refs = [r for _, r in rows]
    assert metrics.bleu4(preds, refs) == pytest.approx(bleu_oracle(preds, refs), abs=1e-9)
    assert metrics.rouge_l(preds, refs) == pytest.approx(rouge_oracle(preds, refs), abs=1e-9)


def test_bleu_and_rouge_simple_values():
    assert metrics.bleu4(["a b c d"], [["a b c d"]]) == pytest.approx(100.0)
    assert metrics.bleu4(["x y"], [["a b"]]) == 0.0
    assert metrics.rouge_l(["a b"], [["c d"]]) == 0.0
    assert metrics.rouge_l(["a b c"], [["a c"]]) == pytest.approx(100 * 0.8)


def test_exact_and_copy_rate():
    assert metrics.exact(["a b", "c"], ["a b", "d"]) == 50.0
    assert metrics.exact(["a"], [["x", "a"]]) == 100.0
    assert metrics.copy_rate(["a", "b"], ["a", "c"]) == 50.0
    with pytest.raises(ValueError):
        metrics.exact(["a"], [])
    with pytest.raises(ValueError):
        metrics.copy_rate(["a"], [])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(sent, sent, sent), min_size=2, max_size=6), st.randoms())
def test_corpus_metrics_are_order_invariant(rows, rnd: random.Random):
    shuffled = rows[:]
    rnd.shuffle(shuffled)
    a = metrics.evaluate(*map(list, zip(*rows)))
    b = metrics.evaluate(*map(list, zip(*shuffled)))
    for key in ("sari", "bleu4", "rouge_l", "ter", "exact", "copy_rate"):
        assert getattr(a, key) == pytest.approx(getattr(b, key), abs=1e-9)


def test_report_serialisation():
    r = metrics.evaluate(["a b"], ["a b"], ["a b"])
    assert r.exact == 100.0 and r.count == 1
    assert r.metadata["sari_variant"] == "del-precision"
    assert "bleu_smoothing" in r.metadata
    assert "exact: 100.0000" in r.to_text()
    assert '"exact": 100.0' in r.to_json()
    assert metrics.evaluate(["a"], ["b"], ["b"], del_f1=True).metadata["sari_variant"] == "del-f1"
    with pytest.raises(ValueError):
        metrics.evaluate([], [], [])
