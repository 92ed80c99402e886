"""Model hyperparameter record."""
from __future__ import annotations

from dataclasses import dataclass, asdict

__all__ = ["ModelConfig"]

TD_MONTH_CLASSES = 13  # months 0..12
TD_DAY_CLASSES = 30  # days 0..29


@dataclass(frozen=True)
class ModelConfig:
    """Decoder-only transformer without positional embeddings, three output heads.

    embed_dim must divide evenly both into attention heads and into the three
    contiguous sub-embeddings the time-decomposition head reads.
    """

    vocab_size: int
    embed_dim: int
    n_layers: int
    n_heads: int
    context_window: int
    dropout_rate: float = 0.0
    max_td_year_class: int = 10

    def __post_init__(self):
        if self.embed_dim % 3 != 0:
            raise ValueError(f"embed_dim {self.embed_dim} not divisible by 3")
        if self.embed_dim % self.n_heads != 0:
            raise ValueError(f"embed_dim {self.embed_dim} not divisible by n_heads {self.n_heads}")
        if min(self.vocab_size, self.embed_dim, self.n_layers, self.n_heads, self.context_window) <= 0:
            raise ValueError("all model dimensions must be positive")
        if not (0.0 <= self.dropout_rate < 1.0):
            raise ValueError(f"dropout_rate out of range: {self.dropout_rate}")

    @property
    def head_dim(self) -> int:
        return self.embed_dim // self.n_heads

    @property
    def sub_embed_dim(self) -> int:
        return self.embed_dim // 3

    @property
    def td_year_classes(self) -> int:
        return self.max_td_year_class + 1

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)
