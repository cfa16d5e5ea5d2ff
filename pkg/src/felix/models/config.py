from __future__ import annotations

from dataclasses import asdict, dataclass, fields


@dataclass(frozen=True)
class Hyperparams:
    # encoder
    d_model: int = 64
    layers: int = 2
    heads: int = 4
    d_ff: int = 128
    max_len: int = 64
    # tagger
    tag_emb_dim: int = 16
    pointer_layer: bool = False  # extra transformer layer before the query projection
    # optimisation
    optimizer: str = "sgd"
    lr: float = 0.05
    momentum: float = 0.0
    steps: int = 1500
    batch_size: int = 16
    seed: int = 0
    # editing
    mode: str = "masking"
    max_span: int = 8
    pointing_enabled: bool = True
    beam_size: int = 5

    def __post_init__(self):
        for name in ("d_model", "layers", "heads", "d_ff", "max_len", "tag_emb_dim", "steps",
                     "batch_size", "max_span", "beam_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.d_model % self.heads:
            raise ValueError("d_model must be divisible by heads")
        if self.mode not in ("masking", "infilling"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Hyperparams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown hyperparameters: {sorted(unknown)}")
        return cls(**data)
