"""From pointers to an output order: daisy chaining and constrained beam search."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from .align import segment_end
from .core import GENERIC_INS, EditPlan, Insertion, Tag

Chain = List[int]


class ChainError(ValueError):
    pass


class BeamExhausted(RuntimeError):
    def __init__(self, best_partial):
        super().__init__(f"beam search found no complete chain; best partial {list(best_partial)}")
        self.best_partial = list(best_partial)


@dataclass(frozen=True)
class Slot:
    """Insertion marker on the chain edge leaving position ``edge``."""

    edge: int
    size: Insertion
    replaced: Tuple[str, ...] = ()

    def __str__(self):
        return "⟨INS⟩" if self.size == GENERIC_INS else f"⟨INS:{self.size}⟩"


def daisy_chain(plan: EditPlan) -> Chain:
    """Follow pointers from CLS; every kept position must be reached exactly once."""
    chain = [0]
    seen = {0}
    pos = 0
    while pos in plan.pointers:
        nxt = plan.pointers[pos]
        if nxt in seen:
            raise ChainError(f"pointer loop: position {nxt} reached twice (from {pos})")
        if not 1 <= nxt <= plan.n or not plan.is_kept(nxt):
            raise ChainError(f"position {pos} points to {nxt}, which is not a kept position")
        chain.append(nxt)
        seen.add(nxt)
        pos = nxt
    for p in plan.kept_positions():
        if p not in seen:
            raise ChainError(f"kept position {p} is unreachable from CLS")
    return chain


def source_order_chain(tags: Sequence[Tag]) -> Chain:
    return [0] + [i for i, t in enumerate(tags, 1) if t.keep]


def plan_from_chain(tags: Sequence[Tag], chain: Chain, cls_insertion: Insertion = None) -> EditPlan:
    pointers = {chain[k]: chain[k + 1] for k in range(len(chain) - 1)}
    return EditPlan(tuple(tags), pointers, cls_insertion)


def _log_scores(scores) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[0] != scores.shape[1]:
        raise ValueError(f"pointer scores must be square, got shape {scores.shape}")
    if not np.all(np.isfinite(scores)):
        raise ValueError("pointer scores contain non-finite values")
    with np.errstate(divide="ignore"):
        return np.log(np.clip(scores, 0.0, None))


def beam_realize(scores, tags: Sequence[Tag], beam_size: int = 5) -> Chain:
    """Highest log-probability loop-free chain found by width-``beam_size`` search.

    Expansion from a partial chain only considers kept positions not yet on
    it, so no position is visited twice.  Ties are broken by the
    lexicographically smaller chain.
    """
    if beam_size < 1:
        raise ValueError("beam_size must be >= 1")
    logp = _log_scores(scores)
    if logp.shape[0] != len(tags) + 1:
        raise ValueError(f"scores are {logp.shape} but there are {len(tags)} tags")
    keep = [i for i, t in enumerate(tags, 1) if t.keep]
    beams: List[Tuple[float, Tuple[int, ...]]] = [(0.0, (0,))]
    for _ in range(len(keep)):
        cands = []
        for lp, chain in beams:
            last = chain[-1]
            row = logp[last]
            for j in keep:
                if j not in chain:
                    cands.append((lp + row[j], chain + (j,)))
        if not cands:
            raise BeamExhausted(beams[0][1])
        cands.sort(key=lambda c: (-c[0], c[1]))
        beams = cands[:beam_size]
    return list(beams[0][1])


def chain_log_prob(scores, chain: Chain) -> float:
    logp = _log_scores(scores)
    total = 0.0
    for a, b in zip(chain, chain[1:]):
        total = total + logp[a, b]
    return total


def greedy_has_loop(scores, tags: Sequence[Tag]) -> bool:
    """Would unconstrained argmax pointer following revisit a position?"""
    scores = np.asarray(scores)
    keep = [i for i, t in enumerate(tags, 1) if t.keep]
    if not keep:
        return False
    cols = np.array(keep)
    seen = {0}
    pos = 0
    for _ in keep:
        nxt = int(cols[np.argmax(scores[pos, cols])])
        if nxt in seen:
            return True
        seen.add(nxt)
        pos = nxt
    return False


def loop_rate(instances) -> float:
    """Fraction of (scores, tags) instances whose greedy decode loops."""
    instances = list(instances)
    if not instances:
        return 0.0
    return sum(greedy_has_loop(s, t) for s, t in instances) / len(instances)


def _merge_insertions(values) -> Insertion:
    values = [v for v in values if v is not None]
    if not values:
        return None
    if all(v == GENERIC_INS for v in values):
        return GENERIC_INS
    if any(v == GENERIC_INS for v in values):
        raise ValueError("segment mixes counted and generic insertion tags")
    return sum(values)


def chain_to_skeleton(chain: Chain, plan: EditPlan, source: Sequence[str]) -> List[Union[str, Slot]]:
    """Kept tokens in chain order with a :class:`Slot` on each edge that inserts.

    A slot records the deleted source run of its segment so the insertion
    input can show it between REPL tags.
    """
    if len(source) != plan.n:
        raise ValueError(f"plan has {plan.n} tags but source has {len(source)} tokens")
    keep = [True] + [t.keep for t in plan.tags]
    out: List[Union[str, Slot]] = []
    for p in chain:
        if p > 0:
            out.append(source[p - 1])
        q = segment_end(keep, p)
        ins = _merge_insertions(plan.insertion_at(i) for i in range(p, q + 1))
        if ins is not None:
            out.append(Slot(p, ins, tuple(source[p:q])))
    return out
