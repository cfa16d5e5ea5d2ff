"""Evaluation metrics: SARI, Exact, BLEU-4, ROUGE-L, TER and copy rate.

Every function accepts either whitespace-tokenizable strings or token lists.
Scores are percentages.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import List, NamedTuple, Sequence, Union

import numpy as np

from . import _kernels

Text = Union[str, Sequence[str]]

BLEU_SMOOTHING = "add-one on zero-match orders n>=2"
TER_MAX_SHIFT = 10


def _toks(x: Text) -> List[str]:
    return x.split() if isinstance(x, str) else list(x)


def _refs(x) -> List[List[str]]:
    """One reference string, or a list of references (strings or token lists)."""
    if isinstance(x, str):
        return [x.split()]
    return [_toks(r) for r in x]


def ngrams(tokens: Sequence[str], n: int) -> List[tuple]:
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


# -- SARI ---------------------------------------------------------------------


def _f1(p, r):
    return 2 * p * r / (p + r) if p > 0 or r > 0 else 0.0


def _sari_order(sgrams, cgrams, rgrams_list, del_f1):
    numref = len(rgrams_list)
    rc = Counter(g for rg in rgrams_list for g in rg)
    sc = Counter(sgrams)
    cc = Counter(cgrams)
    s_rep = Counter({g: c * numref for g, c in sc.items()})
    c_rep = Counter({g: c * numref for g, c in cc.items()})

    keep_sys = s_rep & c_rep
    keep_good = keep_sys & rc
    keep_all = s_rep & rc
    kp = sum(keep_good[g] / keep_sys[g] for g in keep_good) / len(keep_sys) if keep_sys else 0.0
    kr = sum(keep_good[g] / keep_all[g] for g in keep_good) / len(keep_all) if keep_all else 0.0
    keep = _f1(kp, kr)

    del_sys = s_rep - c_rep
    del_good = del_sys - rc
    del_all = s_rep - rc
    dp = sum(del_good[g] / del_sys[g] for g in del_good) / len(del_sys) if del_sys else 0.0
    if del_f1:
        dr = sum(del_good[g] / del_all[g] for g in del_good) / len(del_all) if del_all else 0.0
        delete = _f1(dp, dr)
    else:
        delete = dp

    add_sys = set(cc) - set(sc)
    add_good = add_sys & set(rc)
    add_all = set(rc) - set(sc)
    ap = len(add_good) / len(add_sys) if add_sys else 0.0
    ar = len(add_good) / len(add_all) if add_all else 0.0
    return keep, delete, _f1(ap, ar)


class SariScore(NamedTuple):
    sari: float
    add: float
    keep: float
    delete: float


def sari(source: Text, prediction: Text, references, del_f1: bool = False) -> SariScore:
    """Sentence SARI over n-gram orders 1-4.

    ADD and KEEP are F1 scores; DELETE is precision unless ``del_f1`` is set.
    """
    refs = _refs(references)
    if not refs:
        raise ValueError("SARI needs at least one reference")
    s, c = _toks(source), _toks(prediction)
    keep = delete = add = 0.0
    for n in range(1, 5):
        k, d, a = _sari_order(ngrams(s, n), ngrams(c, n), [ngrams(r, n) for r in refs], del_f1)
        keep += k
        delete += d
        add += a
    keep, delete, add = keep / 4, delete / 4, add / 4
    return SariScore(100 * (keep + delete + add) / 3, 100 * add, 100 * keep, 100 * delete)


def corpus_sari(sources, predictions, references, del_f1: bool = False) -> SariScore:
    """Mean of sentence-level SARI components."""
    _same_len(sources, predictions, references)
    if not sources:
        raise ValueError("empty corpus")
    scores = [sari(s, p, r, del_f1) for s, p, r in zip(sources, predictions, references)]
    return SariScore(*(sum(col) / len(scores) for col in zip(*scores)))


# -- simple rates -------------------------------------------------------------


def _same_len(*cols):
    lens = {len(c) for c in cols}
    if len(lens) > 1:
        raise ValueError(f"length mismatch: {sorted(lens)}")


def _norm(x: Text) -> str:
    return " ".join(_toks(x))


def exact(predictions, references) -> float:
    _same_len(predictions, references)
    if not predictions:
        return 0.0
    hits = 0
    for p, r in zip(predictions, references):
        pn = _norm(p)
        hits += any(pn == " ".join(ref) for ref in _refs(r))
    return 100.0 * hits / len(predictions)


def copy_rate(sources, predictions) -> float:
    _same_len(sources, predictions)
    if not sources:
        return 0.0
    return 100.0 * sum(_norm(s) == _norm(p) for s, p in zip(sources, predictions)) / len(sources)


# -- TER ----------------------------------------------------------------------


class TerResult(NamedTuple):
    ter: float
    ins: int
    dele: int
    sub: int
    shift: int
    ref_len: int

    @property
    def edits(self) -> int:
        return self.ins + self.dele + self.sub + self.shift


def ter(prediction: Text, reference: Text, shifts: bool = True, max_shift: int = TER_MAX_SHIFT) -> TerResult:
    """Translation edit rate of ``prediction`` against one reference.

    Shifts are found greedily: while some block shift lowers the edit
    distance, apply the one with the largest drop (earliest start, then
    shortest block, then earliest destination).  Blocks must occur verbatim
    in the reference and are at most ``max_shift`` tokens long.
    """
    hyp_toks, ref_toks = _toks(prediction), _toks(reference)
    if not ref_toks:
        raise ValueError("TER needs a non-empty reference")
    hyp, ref = _kernels.to_ids(hyp_toks, ref_toks)
    nshift = 0
    while shifts and len(hyp) > 1:
        gain, i, length, k = _kernels.best_shift(hyp, ref, max_shift)
        if gain <= 0:
            break
        block = hyp[i:i + length]
        rest = np.concatenate((hyp[:i], hyp[i + length:]))
        hyp = np.concatenate((rest[:k], block, rest[k:]))
        nshift += 1
    _, ins, dele, sub = _kernels.edit_ops(hyp, ref)
    total = ins + dele + sub + nshift
    return TerResult(100.0 * total / len(ref), ins, dele, sub, nshift, len(ref))


def corpus_ter(predictions, references, shifts: bool = True) -> TerResult:
    """Total edits over total reference length."""
    _same_len(predictions, references)
    results = [ter(p, r, shifts) for p, r in zip(predictions, references)]
    if not results:
        raise ValueError("empty corpus")
    ins = sum(r.ins for r in results)
    dele = sum(r.dele for r in results)
    sub = sum(r.sub for r in results)
    shift = sum(r.shift for r in results)
    ref_len = sum(r.ref_len for r in results)
    return TerResult(100.0 * (ins + dele + sub + shift) / ref_len, ins, dele, sub, shift, ref_len)


# -- BLEU / ROUGE ---------------------------------------------------------------


def bleu4(predictions, references) -> float:
    """Corpus BLEU-4 with brevity penalty.

    An order n >= 2 with zero clipped matches uses precision 1 / (total + 1).
    """
    _same_len(predictions, references)
    matches = [0] * 4
    totals = [0] * 4
    hyp_len = ref_len = 0
    for pred, refs in zip(predictions, references):
        hyp = _toks(pred)
        refs = _refs(refs)
        hyp_len += len(hyp)
        ref_len += min((len(r) for r in refs), key=lambda rl: (abs(rl - len(hyp)), rl))
        for n in range(1, 5):
            counts = Counter(ngrams(hyp, n))
            max_ref = Counter()
            for r in refs:
                max_ref |= Counter(ngrams(r, n))
            matches[n - 1] += sum(min(c, max_ref[g]) for g, c in counts.items())
            totals[n - 1] += max(len(hyp) - n + 1, 0)
    if hyp_len == 0:
        return 0.0
    log_p = 0.0
    for n in range(4):
        if matches[n] == 0:
            if n == 0:
                return 0.0
            p = 1.0 / (totals[n] + 1)
        else:
            p = matches[n] / totals[n]
        log_p += math.log(p) / 4
    bp = 1.0 if hyp_len > ref_len else math.exp(1 - ref_len / hyp_len)
    return 100.0 * bp * math.exp(log_p)


def rouge_l_pair(prediction: Text, reference: Text, beta: float = 1.0) -> float:
    hyp, ref = _toks(prediction), _toks(reference)
    if not hyp and not ref:
        return 1.0
    if not hyp or not ref:
        return 0.0
    a, b = _kernels.to_ids(hyp, ref)
    lcs = _kernels.lcs_length(a, b)
    if lcs == 0:
        return 0.0
    p, r = lcs / len(hyp), lcs / len(ref)
    return (1 + beta ** 2) * p * r / (r + beta ** 2 * p)


def rouge_l(predictions, references) -> float:
    """Corpus mean of sentence ROUGE-L F1 (best reference per sentence)."""
    _same_len(predictions, references)
    if not predictions:
        return 0.0
    total = 0.0
    for p, refs in zip(predictions, references):
        total += max(rouge_l_pair(p, r) for r in _refs(refs))
    return 100.0 * total / len(predictions)


# -- report ---------------------------------------------------------------------


@dataclass
class MetricReport:
    sari: float
    sari_add: float
    sari_keep: float
    sari_del: float
    exact: float
    bleu4: float
    rouge_l: float
    ter: float
    ter_ins: int
    ter_del: int
    ter_sub: int
    ter_shift: int
    ter_ins_rate: float
    ter_del_rate: float
    ter_sub_rate: float
    ter_shift_rate: float
    copy_rate: float
    count: int
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = []
        for key, val in self.to_dict().items():
            if key == "metadata":
                continue
            lines.append(f"{key}: {val:.4f}" if isinstance(val, float) else f"{key}: {val}")
        for key, val in sorted(self.metadata.items()):
            lines.append(f"meta.{key}: {val}")
        return "\n".join(lines) + "\n"


def evaluate(sources, predictions, references, del_f1: bool = False) -> MetricReport:
    _same_len(sources, predictions, references)
    if not predictions:
        raise ValueError("nothing to evaluate")
    s = corpus_sari(sources, predictions, references, del_f1)
    first_refs = [_refs(r)[0] for r in references]
    t = corpus_ter(predictions, first_refs)

    def rate(x):
        return 100.0 * x / t.ref_len

    return MetricReport(
        sari=s.sari,
        sari_add=s.add,
        sari_keep=s.keep,
        sari_del=s.delete,
        exact=exact(predictions, references),
        bleu4=bleu4(predictions, references),
        rouge_l=rouge_l(predictions, references),
        ter=t.ter,
        ter_ins=t.ins,
        ter_del=t.dele,
        ter_sub=t.sub,
        ter_shift=t.shift,
        ter_ins_rate=rate(t.ins),
        ter_del_rate=rate(t.dele),
        ter_sub_rate=rate(t.sub),
        ter_shift_rate=rate(t.shift),
        copy_rate=copy_rate(sources, predictions),
        count=len(predictions),
        metadata={
            "sari_variant": "del-f1" if del_f1 else "del-precision",
            "bleu_smoothing": BLEU_SMOOTHING,
            "ter_max_shift": TER_MAX_SHIFT,
            "kernel_backend": _kernels.backend(),
        },
    )
