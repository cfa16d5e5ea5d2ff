"""Insertion-model input (kept tokens, REPL spans, MASK slots) and its inverse."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

from .align import AlignmentConfig
from .core import GENERIC_INS, MASK, PAD, REPL_CLOSE, REPL_OPEN, SENTINELS, EditPlan, TokenSeq
from .realize import Slot


class ModeMismatch(ValueError):
    pass


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class Span:
    edge: int
    width: int  # number of MASK tokens emitted for this span
    start: int  # index of the first MASK in MaskedSeq.tokens


@dataclass(frozen=True)
class MaskedSeq:
    tokens: Tuple[str, ...]
    mask_positions: Tuple[int, ...]
    spans: Tuple[Span, ...] = ()
    mode: str = "masking"

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "mask_positions", tuple(self.mask_positions))
        object.__setattr__(self, "spans", tuple(self.spans))

    @classmethod
    def from_tokens(cls, tokens: Sequence[str], mode: str = "masking") -> "MaskedSeq":
        """Rebuild from a flat token list; consecutive MASKs form one span."""
        tokens = tuple(tokens)
        positions = tuple(i for i, t in enumerate(tokens) if t == MASK)
        spans = []
        i = 0
        while i < len(tokens):
            if tokens[i] == MASK:
                j = i
                while j < len(tokens) and tokens[j] == MASK:
                    j += 1
                spans.append(Span(-1, j - i, i))
                i = j
            else:
                i += 1
        return cls(tokens, positions, tuple(spans), mode)

    def validate(self) -> None:
        depth = 0
        for tok in self.tokens:
            if tok == REPL_OPEN:
                if depth:
                    raise ValueError("nested [REPL]")
                depth = 1
            elif tok == REPL_CLOSE:
                if not depth:
                    raise ValueError("unbalanced [/REPL]")
                depth = 0
        if depth:
            raise ValueError("unclosed [REPL]")
        if self.mask_positions != tuple(i for i, t in enumerate(self.tokens) if t == MASK):
            raise ValueError("mask_positions do not index the MASK tokens")


def _check_mode(plan: EditPlan, mode: str) -> None:
    for pos in range(plan.n + 1):
        ins = plan.insertion_at(pos)
        if ins is None:
            continue
        if (ins == GENERIC_INS) != (mode == "infilling"):
            raise ModeMismatch(f"position {pos} has insertion {ins!r} but mode is {mode}")


def build_insertion_input(
    skeleton: Sequence[Union[str, Slot]],
    plan: EditPlan,
    source: Sequence[str],
    cfg: AlignmentConfig,
) -> MaskedSeq:
    """Expand each slot into MASKs, preceded by its deleted run inside REPL tags.

    Masking mode emits ``k`` MASKs for ``INS_k``; infilling emits ``max_span``.
    """
    if len(source) != plan.n:
        raise ValueError(f"plan has {plan.n} tags but source has {len(source)} tokens")
    _check_mode(plan, cfg.mode)
    tokens: List[str] = []
    spans: List[Span] = []
    for item in skeleton:
        if not isinstance(item, Slot):
            tokens.append(item)
            continue
        if cfg.mode == "masking":
            if item.size == GENERIC_INS:
                raise ModeMismatch("generic INS slot in masking mode")
            width = item.size
        else:
            if item.size != GENERIC_INS:
                raise ModeMismatch(f"INS_{item.size} slot in infilling mode")
            if cfg.max_span is None:
                raise ValueError("infilling mode needs a finite max_span")
            width = cfg.max_span
        if item.replaced:
            tokens.extend((REPL_OPEN, *item.replaced, REPL_CLOSE))
        spans.append(Span(item.edge, width, len(tokens)))
        tokens.extend([MASK] * width)
    positions = [i for i, t in enumerate(tokens) if t == MASK]
    return MaskedSeq(tuple(tokens), tuple(positions), tuple(spans), cfg.mode)


def apply_insertion(masked: MaskedSeq, predictions: Sequence[str]) -> TokenSeq:
    """Fill MASKs, then drop PADs and every REPL-enclosed span."""
    if len(predictions) != len(masked.mask_positions):
        raise ValueError(f"{len(predictions)} predictions for {len(masked.mask_positions)} MASK slots")
    preds = iter(predictions)
    out: TokenSeq = []
    in_repl = False
    for tok in masked.tokens:
        if tok == REPL_OPEN:
            in_repl = True
        elif tok == REPL_CLOSE:
            in_repl = False
        elif in_repl:
            continue
        elif tok == MASK:
            p = next(preds)
            if p == PAD:
                continue
            if p in SENTINELS:
                raise ValueError(f"insertion prediction {p!r} is a reserved token")
            out.append(p)
        else:
            out.append(tok)
    return out


def _units(masked: MaskedSeq) -> List[Tuple[str, object]]:
    units = []
    toks = masked.tokens
    i = 0
    in_repl = False
    while i < len(toks):
        tok = toks[i]
        if tok == REPL_OPEN:
            in_repl = True
        elif tok == REPL_CLOSE:
            in_repl = False
        elif in_repl:
            pass
        elif tok == MASK:
            j = i
            while j < len(toks) and toks[j] == MASK:
                j += 1
            units.append(("mask", j - i))
            i = j
            continue
        else:
            units.append(("tok", tok))
        i += 1
    return units


def oracle_insertions(masked: MaskedSeq, target: Sequence[str]) -> List[str]:
    """Gold token for every MASK, PAD-filling the unused tail of infilling spans.

    When several span lengths reconstruct the target the earliest spans are
    taken as short as possible.
    """
    units = _units(masked)
    target = tuple(target)
    infill = masked.mode == "infilling"

    @lru_cache(maxsize=None)
    def solve(u: int, j: int) -> Optional[Tuple[str, ...]]:
        if u == len(units):
            return () if j == len(target) else None
        kind, val = units[u]
        if kind == "tok":
            if j < len(target) and target[j] == val:
                return solve(u + 1, j + 1)
            return None
        lengths = range(1, val + 1) if infill else (val,)
        for length in lengths:
            if j + length > len(target):
                break
            rest = solve(u + 1, j + length)
            if rest is not None:
                return target[j:j + length] + (PAD,) * (val - length) + rest
        return None

    limit = sys.getrecursionlimit()
    if len(units) + 100 > limit:
        sys.setrecursionlimit(len(units) + 100)
    try:
        labels = solve(0, 0)
    finally:
        sys.setrecursionlimit(limit)
    if labels is None:
        raise AlignmentError("masked sequence cannot be filled to produce the target")
    return list(labels)
