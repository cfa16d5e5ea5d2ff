"""Training-target construction: turn a (source, target) pair into an EditPlan."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import _kernels
from .core import DELETE, GENERIC_INS, KEEP, EditPlan, Tag, first_sentinel

SPAN_TOO_LONG = "InsertionSpanTooLong"


@dataclass(frozen=True)
class AlignmentConfig:
    mode: str = "masking"
    max_span: Optional[int] = 8  # None means unbounded
    pointing_enabled: bool = True

    def __post_init__(self):
        if self.mode not in ("masking", "infilling"):
            raise ValueError(f"mode must be 'masking' or 'infilling', got {self.mode!r}")
        if self.max_span is not None and self.max_span < 1:
            raise ValueError("max_span must be >= 1")


@dataclass(frozen=True)
class AlignmentOutcome:
    """Either ``plan`` (with the inserted target spans keyed by chain edge) or ``reason``."""

    plan: Optional[EditPlan] = None
    reason: Optional[str] = None
    insertions: Dict[int, Tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if (self.plan is None) == (self.reason is None):
            raise ValueError("exactly one of plan / reason must be set")

    @property
    def ok(self) -> bool:
        return self.plan is not None

    @property
    def kept(self) -> int:
        return len(self.plan.kept_positions()) if self.plan else 0

    @property
    def inserted(self) -> int:
        return sum(len(s) for s in self.insertions.values())


def _match_pointing(source: Sequence[str], target: Sequence[str]) -> List[Optional[int]]:
    n = len(source)
    used = [False] * (n + 2)
    cursor = 0
    matched: List[Optional[int]] = []
    for t, tok in enumerate(target):
        nxt = cursor + 1
        if nxt <= n and not used[nxt] and source[nxt - 1] == tok:
            pick = nxt
        else:
            pick, best_len = None, 0
            for j in range(1, n + 1):
                if used[j] or source[j - 1] != tok:
                    continue
                length = 1
                while (
                    j + length <= n
                    and t + length < len(target)
                    and not used[j + length]
                    and source[j + length - 1] == target[t + length]
                ):
                    length += 1
                if length > best_len:
                    pick, best_len = j, length
        if pick is not None:
            used[pick] = True
            cursor = pick
        matched.append(pick)
    return matched


def _match_monotone(source: Sequence[str], target: Sequence[str]) -> List[Optional[int]]:
    matched: List[Optional[int]] = [None] * len(target)
    if not source or not target:
        return matched
    a, b = _kernels.to_ids(source, target)
    table = _kernels.lcs_table(a, b)
    i, j = len(source), len(target)
    while i > 0 and j > 0:
        if a[i - 1] == b[j - 1]:
            matched[j - 1] = i
            i -= 1
            j -= 1
        elif table[i - 1, j] >= table[i, j - 1]:
            i -= 1
        else:
            j -= 1
    return matched


def segment_end(plan_keep: Sequence[bool], pos: int) -> int:
    """Last position of the segment owned by kept position ``pos``.

    A segment is the kept token plus the run of deleted tokens that follows it
    in source order.  ``plan_keep`` is indexed by position (index 0 = CLS).
    """
    q = pos
    while q + 1 < len(plan_keep) and not plan_keep[q + 1]:
        q += 1
    return q


def align(source: Sequence[str], target: Sequence[str], cfg: AlignmentConfig = AlignmentConfig()) -> AlignmentOutcome:
    """Greedy edit plan maximising kept tokens.

    With pointing, each target token is matched left to right: continue the
    current contiguous source run when possible, otherwise jump to the unused
    source occurrence starting the longest contiguous unused match (smallest
    index on ties), otherwise insert.  Without pointing the kept tokens are a
    longest common subsequence, so they stay in source order.
    """
    bad = first_sentinel(source) or first_sentinel(target)
    if bad is not None:
        return AlignmentOutcome(reason=f"Other: sentinel {bad} in input")

    n = len(source)
    matcher = _match_pointing if cfg.pointing_enabled else _match_monotone
    matched = matcher(source, target)

    chain = [0]
    spans: Dict[int, List[str]] = {}
    for tok, pos in zip(target, matched):
        if pos is None:
            spans.setdefault(chain[-1], []).append(tok)
        else:
            chain.append(pos)

    if cfg.max_span is not None and any(len(s) > cfg.max_span for s in spans.values()):
        return AlignmentOutcome(reason=SPAN_TOO_LONG)

    keep = [True] + [False] * n
    for p in chain[1:]:
        keep[p] = True
    ins_at: Dict[int, object] = {}
    for edge, span in spans.items():
        carrier = segment_end(keep, edge)
        ins_at[carrier] = len(span) if cfg.mode == "masking" else GENERIC_INS

    tags = [Tag(KEEP if keep[i] else DELETE, ins_at.get(i)) for i in range(1, n + 1)]
    pointers = {chain[k]: chain[k + 1] for k in range(len(chain) - 1)}
    plan = EditPlan(tags, pointers, ins_at.get(0))
    return AlignmentOutcome(plan=plan, insertions={e: tuple(s) for e, s in spans.items()})


def alignment_stats(corpus: Iterable[Tuple[Sequence[str], Sequence[str]]], cfg: AlignmentConfig = AlignmentConfig()) -> dict:
    """Coverage and MASK percentage over a corpus.

    MASK % counts true insertion lengths (never padded widths) over the target
    tokens of the alignable pairs.
    """
    pairs = aligned = masks = tgt_tokens = 0
    skipped: Dict[str, int] = {}
    for source, target in corpus:
        pairs += 1
        out = align(source, target, cfg)
        if not out.ok:
            skipped[out.reason] = skipped.get(out.reason, 0) + 1
            continue
        aligned += 1
        masks += out.inserted
        tgt_tokens += len(target)
    return {
        "pairs": pairs,
        "aligned": aligned,
        "skipped": skipped,
        "coverage_percent": 100.0 * aligned / pairs if pairs else 0.0,
        "mask_percent": 100.0 * masks / tgt_tokens if tgt_tokens else 0.0,
    }
