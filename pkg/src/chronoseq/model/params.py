"""Trainable tensors of the decoder and its three heads.

There is deliberately no positional-embedding table: order information
reaches the model only through the causal mask and the time tokens in the
sequence itself. The next-token projection is weight-tied to the embedding
table. The time-decomposition maps are pure linear maps (no bias); the
time-to-event head is a small feed-forward stack emitting the two Gamma
pre-activations.
"""
from __future__ import annotations

import hashlib

import numpy as np

from ..autodiff import Tensor, parameter
from .config import ModelConfig, TD_DAY_CLASSES, TD_MONTH_CLASSES

__all__ = ["ModelParams", "init_params", "params_sha256"]

_INIT_STD = 0.02


class ModelParams:
    """Ordered name -> Tensor mapping; order is the checkpoint layout."""

    def __init__(self, tensors: dict[str, Tensor]):
        self.tensors = dict(tensors)

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def names(self):
        return list(self.tensors.keys())

    def values(self):
        return list(self.tensors.values())

    def items(self):
        return self.tensors.items()

    def zero_grads(self):
        for t in self.tensors.values():
            t.zero_grad()

    def n_parameters(self) -> int:
        return sum(t.data.size for t in self.tensors.values())


def init_params(cfg: ModelConfig, seed: int) -> ModelParams:
    rng = np.random.default_rng(seed)
    d = cfg.embed_dim
    d3 = cfg.sub_embed_dim

    def w(shape):
        return rng.normal(0.0, _INIT_STD, size=shape)

    tensors: dict[str, Tensor] = {}

    def add(name, data):
        tensors[name] = parameter(data, name=name)

    add("tok_emb", w((cfg.vocab_size, d)))
    for i in range(cfg.n_layers):
        p = f"block{i}."
        add(p + "ln1.g", np.ones(d))
        add(p + "ln1.b", np.zeros(d))
        add(p + "qkv.w", w((d, 3 * d)))
        add(p + "qkv.b", np.zeros(3 * d))
        add(p + "proj.w", w((d, d)))
        add(p + "proj.b", np.zeros(d))
        add(p + "ln2.g", np.ones(d))
        add(p + "ln2.b", np.zeros(d))
        add(p + "ff1.w", w((d, 4 * d)))
        add(p + "ff1.b", np.zeros(4 * d))
        add(p + "ff2.w", w((4 * d, d)))
        add(p + "ff2.b", np.zeros(d))
    add("final_ln.g", np.ones(d))
    add("final_ln.b", np.zeros(d))
    add("td.year.w", w((d3, cfg.td_year_classes)))
    add("td.month.w", w((d3, TD_MONTH_CLASSES)))
    add("td.day.w", w((d3, TD_DAY_CLASSES)))
    add("tte.fc1.w", w((d, d)))
    add("tte.fc1.b", np.zeros(d))
    add("tte.fc2.w", w((d, 2)))
    add("tte.fc2.b", np.zeros(2))
    return ModelParams(tensors)


def params_sha256(params: ModelParams) -> str:
    h = hashlib.sha256()
    for name, t in params.items():
        h.update(name.encode("utf-8"))
        h.update(np.ascontiguousarray(t.data).tobytes())
    return h.hexdigest()
