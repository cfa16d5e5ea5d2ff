"""Checkpoint files: a JSON header followed by raw little-endian float64 tensors.

Layout::

    b"FELIXCKPT\\n" | uint64 header length | header JSON (UTF-8) | tensor bytes

The header stores the format version, model kind, hyperparameters, vocabulary,
tag labels and each tensor's name, shape and byte offset.  Nothing time- or
host-dependent is written, so equal models give byte-identical files.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Union

import numpy as np

from ..core import Vocabulary
from .config import Hyperparams
from .insertion import InsertionModel, init_insertion
from .tagger import TaggerModel, init_tagger

MAGIC = b"FELIXCKPT\n"
FORMAT_VERSION = 1
_DTYPE = "<f8"


class CheckpointError(ValueError):
    pass


def _expected_shapes(kind: str, hyper: Hyperparams, vocab_size: int, n_tags: int) -> dict:
    rng = np.random.default_rng(0)
    if kind == "tagger":
        params = init_tagger(hyper, vocab_size, n_tags, rng)
    else:
        params = init_insertion(hyper, vocab_size, rng)
    return {k: v.shape for k, v in params.items()}


def dumps(model: Union[TaggerModel, InsertionModel], extra: dict = None) -> bytes:
    tensors = []
    chunks = []
    offset = 0
    for name in sorted(model.params):
        arr = np.ascontiguousarray(model.params[name], dtype=_DTYPE)
        raw = arr.tobytes()
        tensors.append({"name": name, "shape": list(arr.shape), "offset": offset, "nbytes": len(raw)})
        chunks.append(raw)
        offset += len(raw)
    header = {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "dtype": _DTYPE,
        "hyper": model.hyper.to_dict(),
        "vocab": model.vocab.tokens(),
        "tags": [t.label for t in getattr(model, "tags", [])],
        "tensors": tensors,
        "extra": extra or {},
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return MAGIC + struct.pack("<Q", len(head)) + head + b"".join(chunks)


def loads(data: bytes):
    if not data.startswith(MAGIC):
        raise CheckpointError("not a felix checkpoint (bad magic)")
    pos = len(MAGIC)
    (hlen,) = struct.unpack("<Q", data[pos:pos + 8])
    pos += 8
    header = json.loads(data[pos:pos + hlen].decode("utf-8"))
    pos += hlen
    if header.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {header.get('format_version')}")
    kind = header["kind"]
    if kind not in ("tagger", "insertion"):
        raise CheckpointError(f"unknown model kind {kind!r}")
    hyper = Hyperparams.from_dict(header["hyper"])
    vocab = Vocabulary.from_tokens(header["vocab"])
    expected = _expected_shapes(kind, hyper, len(vocab), len(header["tags"]))
    params = {}
    for t in header["tensors"]:
        start = pos + t["offset"]
        arr = np.frombuffer(data[start:start + t["nbytes"]], dtype=header["dtype"]).astype(np.float64)
        shape = tuple(t["shape"])
        if expected.get(t["name"]) != shape:
            raise CheckpointError(f"tensor {t['name']} has shape {shape}, expected {expected.get(t['name'])}")
        params[t["name"]] = arr.reshape(shape)
    missing = set(expected) - set(params)
    if missing:
        raise CheckpointError(f"checkpoint is missing tensors {sorted(missing)}")
    cls = TaggerModel if kind == "tagger" else InsertionModel
    model = cls(params, hyper, vocab)
    if kind == "tagger" and [t.label for t in model.tags] != header["tags"]:
        raise CheckpointError("tag inventory does not match hyperparameters")
    return model, header.get("extra", {})


def save(model, path, extra: dict = None) -> None:
    Path(path).write_bytes(dumps(model, extra))


def load(path):
    return loads(Path(path).read_bytes())
