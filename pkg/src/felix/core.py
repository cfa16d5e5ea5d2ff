"""Tokenization, vocabulary and the edit-plan types shared by every stage."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Union

CLS = "[CLS]"
MASK = "[MASK]"
PAD = "[PAD]"
REPL_OPEN = "[REPL]"
REPL_CLOSE = "[/REPL]"
UNK = "[UNK]"

SENTINELS = frozenset({CLS, MASK, PAD, REPL_OPEN, REPL_CLOSE, UNK})

# Fixed ids; every Vocabulary starts with these in this order.
RESERVED = (PAD, UNK, CLS, MASK, REPL_OPEN, REPL_CLOSE)
PAD_ID, UNK_ID, CLS_ID, MASK_ID, REPL_OPEN_ID, REPL_CLOSE_ID = range(len(RESERVED))

KEEP = "KEEP"
DELETE = "DELETE"
GENERIC_INS = "INS"

TokenSeq = List[str]
Insertion = Union[None, int, str]

_ESCAPE = "\\"
_ESCAPED = re.compile(r"^(\\*)(\[CLS\]|\[MASK\]|\[PAD\]|\[REPL\]|\[/REPL\]|\[UNK\])$")


class SentinelError(ValueError):
    pass


@dataclass(frozen=True)
class WhitespaceTokenizer:
    """Splits on runs of whitespace.

    User text that spells a sentinel literally (``[MASK]``) is escaped with a
    leading backslash so that sentinels are never produced from raw text;
    :meth:`detokenize` undoes the escape.
    """

    lowercase: bool = False

    def tokenize(self, text: str) -> TokenSeq:
        if self.lowercase:
            text = text.lower()
        out = []
        for tok in text.split():
            if _ESCAPED.match(tok):
                tok = _ESCAPE + tok
            out.append(tok)
        return out

    def detokenize(self, seq: Sequence[str]) -> str:
        words = []
        for tok in seq:
            m = _ESCAPED.match(tok)
            if m:
                if not m.group(1):
                    raise SentinelError(f"sentinel token {tok!r} cannot be detokenized")
                tok = tok[1:]
            words.append(tok)
        return " ".join(words)


_default = WhitespaceTokenizer()


def tokenize(text: str) -> TokenSeq:
    return _default.tokenize(text)


def detokenize(seq: Sequence[str]) -> str:
    return _default.detokenize(seq)


def normalize_whitespace(text: str) -> str:
    return " ".join(text.split())


@dataclass(frozen=True)
class Tag:
    """Edit tag of one source token.

    ``insertion`` is None (nothing inserted after this token's segment), a
    positive int ``k`` (masking mode: k MASK slots) or ``"INS"`` (infilling
    mode: a fixed-width padded span).
    """

    base: str
    insertion: Insertion = None

    def __post_init__(self):
        if self.base not in (KEEP, DELETE):
            raise ValueError(f"bad tag base {self.base!r}")
        ins = self.insertion
        if ins is not None and ins != GENERIC_INS:
            if isinstance(ins, bool) or not isinstance(ins, int) or ins < 1:
                raise ValueError(f"insertion count must be a positive int, got {ins!r}")

    @property
    def keep(self) -> bool:
        return self.base == KEEP

    @property
    def label(self) -> str:
        if self.insertion is None:
            return self.base
        if self.insertion == GENERIC_INS:
            return f"{self.base}|INS"
        return f"{self.base}|INS_{self.insertion}"

    @classmethod
    def from_label(cls, label: str) -> "Tag":
        base, _, ins = label.partition("|")
        if not ins:
            return cls(base)
        if ins == GENERIC_INS:
            return cls(base, GENERIC_INS)
        if ins.startswith("INS_"):
            return cls(base, int(ins[4:]))
        raise ValueError(f"unparseable tag label {label!r}")

    def __str__(self):
        return self.label


def tag_set(mode: str, max_span: int) -> List[Tag]:
    """Ordered tag inventory for a mode; index = tag id, id 0 is KEEP."""
    if mode == "infilling":
        ins_opts: List[Insertion] = [None, GENERIC_INS]
    elif mode == "masking":
        ins_opts = [None, *range(1, max_span + 1)]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return [Tag(base, ins) for base in (KEEP, DELETE) for ins in ins_opts]


@dataclass(frozen=True)
class EditPlan:
    """Per-token tags plus the pointer map over positions 0 (CLS) .. n.

    ``pointers[i] = j`` means the token at position i is followed in the output
    by the token at position j.  ``cls_insertion`` holds an insertion that
    precedes the first kept token when the CLS segment has no deleted token to
    carry it.
    """

    tags: tuple
    pointers: Dict[int, int] = field(default_factory=dict)
    cls_insertion: Insertion = None

    def __post_init__(self):
        object.__setattr__(self, "tags", tuple(self.tags))

    @property
    def n(self) -> int:
        return len(self.tags)

    def is_kept(self, pos: int) -> bool:
        return pos == 0 or self.tags[pos - 1].keep

    def kept_positions(self) -> List[int]:
        return [i for i in range(1, self.n + 1) if self.tags[i - 1].keep]

    def insertion_at(self, pos: int) -> Insertion:
        return self.cls_insertion if pos == 0 else self.tags[pos - 1].insertion

    def validate(self) -> None:
        targets = list(self.pointers.values())
        if len(targets) != len(set(targets)):
            raise ValueError("a position is pointed to more than once")
        for src, dst in self.pointers.items():
            if not (0 <= src <= self.n and 1 <= dst <= self.n):
                raise ValueError(f"pointer {src}->{dst} out of range")
            if not self.is_kept(src) or not self.is_kept(dst):
                raise ValueError(f"pointer {src}->{dst} touches a deleted position")


class Vocabulary:
    """Token <-> id bijection with the reserved ids of :data:`RESERVED`."""

    def __init__(self, tokens: Iterable[str] = ()):
        self._itos: List[str] = list(RESERVED)
        self._stoi: Dict[str, int] = {t: i for i, t in enumerate(self._itos)}
        for tok in tokens:
            self.add(tok)

    @classmethod
    def build(cls, corpus: Iterable[Sequence[str]]) -> "Vocabulary":
        seen = set()
        for seq in corpus:
            seen.update(seq)
        return cls(sorted(seen - SENTINELS))

    def add(self, tok: str) -> int:
        if tok not in self._stoi:
            self._stoi[tok] = len(self._itos)
            self._itos.append(tok)
        return self._stoi[tok]

    def __len__(self):
        return len(self._itos)

    def __contains__(self, tok):
        return tok in self._stoi

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self._itos == other._itos

    def id(self, tok: str) -> int:
        return self._stoi.get(tok, UNK_ID)

    def token(self, idx: int) -> str:
        return self._itos[idx]

    def encode(self, seq: Sequence[str]) -> List[int]:
        return [self.id(t) for t in seq]

    def decode(self, ids: Iterable[int]) -> TokenSeq:
        return [self._itos[i] for i in ids]

    def tokens(self) -> List[str]:
        return list(self._itos)

    @classmethod
    def from_tokens(cls, itos: Sequence[str]) -> "Vocabulary":
        if tuple(itos[: len(RESERVED)]) != RESERVED:
            raise ValueError("vocabulary does not start with the reserved sentinels")
        return cls(itos[len(RESERVED):])


def is_sentinel(tok: str) -> bool:
    return tok in SENTINELS


def first_sentinel(seq: Sequence[str]) -> Optional[str]:
    for tok in seq:
        if tok in SENTINELS:
            return tok
    return None
