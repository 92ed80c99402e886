"""Tiny bidirectional transformer encoders for the time-token vs summation test.

Both models share one architecture (post-norm encoder blocks, learned
positional embeddings, a classification read-out at a prepended CLS
position) and one embedding table layout; they differ only in how the two
events and their times enter: as three tokens (x1, delta-t, x2) or as two
summed embeddings (x1+t1, x2+t2).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..autodiff import (
    Tensor,
    add,
    concat,
    cross_entropy,
    gather_rows,
    gelu,
    index_axis0,
    layer_norm,
    matmul,
    mean_all,
    reshape,
    scale,
    softmax,
    transpose,
)
from ..model.params import ModelParams
from .logic import LOGIC_DOMAIN

__all__ = ["EncoderConfig", "CLS_ID", "X_BASE", "T_BASE", "VOCAB_SIZE", "init_encoder_params",
           "encode_timetoken_batch", "encode_summation_batch", "classifier_logits", "batch_loss", "batch_accuracy"]

CLS_ID = 0
X_BASE = 1  # ids 1..2 for the binary event values
T_BASE = 3  # ids 3..31 for time values 0..28 (shared by t and delta-t)
VOCAB_SIZE = T_BASE + LOGIC_DOMAIN["t_max"] + 1
_MAX_LEN = 4


@dataclass(frozen=True)
class EncoderConfig:
    embed_dim: int = 16
    n_layers: int = 2
    n_heads: int = 2
    intermediate_dim: int = 32
    dropout: float = 0.0
    steps: int = 20000
    batch_size: int = 128
    eval_every: int = 100
    learning_rate: float = 1e-3
    weight_decay: float = 0.01
    warmup_steps: int = 500

    @property
    def head_dim(self) -> int:
        return self.embed_dim // self.n_heads


def init_encoder_params(cfg: EncoderConfig, seed: int) -> ModelParams:
    rng = np.random.default_rng(seed)
    d = cfg.embed_dim

    def w(shape):
        return rng.normal(0.0, 0.02, size=shape)

    tensors = {}
    from ..autodiff import parameter

    def addp(name, data):
        tensors[name] = parameter(data, name=name)

    addp("tok_emb", w((VOCAB_SIZE, d)))
    addp("pos_emb", w((_MAX_LEN, d)))
    for i in range(cfg.n_layers):
        p = f"enc{i}."
        addp(p + "qkv.w", w((d, 3 * d)))
        addp(p + "qkv.b", np.zeros(3 * d))
        addp(p + "proj.w", w((d, d)))
        addp(p + "proj.b", np.zeros(d))
        addp(p + "ln1.g", np.ones(d))
        addp(p + "ln1.b", np.zeros(d))
        addp(p + "ff1.w", w((d, cfg.intermediate_dim)))
        addp(p + "ff1.b", np.zeros(cfg.intermediate_dim))
        addp(p + "ff2.w", w((cfg.intermediate_dim, d)))
        addp(p + "ff2.b", np.zeros(d))
        addp(p + "ln2.g", np.ones(d))
        addp(p + "ln2.b", np.zeros(d))
    addp("head.w", w((d, 2)))
    addp("head.b", np.zeros(2))
    return ModelParams(tensors)


def _encoder_stack(params: ModelParams, cfg: EncoderConfig, x: Tensor) -> Tensor:
    """(B, L, d) -> (B, L, d), bidirectional post-norm blocks."""
    B, L, d = x.data.shape
    H, dh = cfg.n_heads, cfg.head_dim
    for i in range(cfg.n_layers):
        p = f"enc{i}."
        qkv = add(matmul(x, params[p + "qkv.w"]), params[p + "qkv.b"])
        qkv = transpose(reshape(qkv, (B, L, 3, H, dh)), (2, 0, 3, 1, 4))  # (3, B, H, L, dh)
        q = index_axis0(qkv, 0)
        k = index_axis0(qkv, 1)
        v = index_axis0(qkv, 2)
        scores = scale(matmul(q, transpose(k, (0, 1, 3, 2))), 1.0 / np.sqrt(dh))
        ctx = matmul(softmax(scores), v)  # (B, H, L, dh)
        ctx = reshape(transpose(ctx, (0, 2, 1, 3)), (B, L, d))
        attn_out = add(matmul(ctx, params[p + "proj.w"]), params[p + "proj.b"])
        x = layer_norm(add(x, attn_out), params[p + "ln1.g"], params[p + "ln1.b"])
        h = gelu(add(matmul(x, params[p + "ff1.w"]), params[p + "ff1.b"]))
        ff_out = add(matmul(h, params[p + "ff2.w"]), params[p + "ff2.b"])
        x = layer_norm(add(x, ff_out), params[p + "ln2.g"], params[p + "ln2.b"])
    return x


def encode_timetoken_batch(params: ModelParams, cfg: EncoderConfig, x1, t1, x2, t2) -> Tensor:
    """Inputs as three tokens: e_x1, e_dt, e_x2 (plus CLS); only the interval enters."""
    B = len(x1)
    dt = np.asarray(t2) - np.asarray(t1)
    ids = np.stack(
        [
            np.full(B, CLS_ID, dtype=np.int64),
            X_BASE + np.asarray(x1, dtype=np.int64),
            T_BASE + dt.astype(np.int64),
            X_BASE + np.asarray(x2, dtype=np.int64),
        ],
        axis=1,
    )
    x = gather_rows(params["tok_emb"], ids)  # (B, 4, d)
    x = add(x, gather_rows(params["pos_emb"], np.arange(4)))
    return _encoder_stack(params, cfg, x)


def encode_summation_batch(params: ModelParams, cfg: EncoderConfig, x1, t1, x2, t2) -> Tensor:
    """Inputs as two positions carrying e_x + e_t sums (plus CLS)."""
    B = len(x1)
    x_ids = np.stack([X_BASE + np.asarray(x1, np.int64), X_BASE + np.asarray(x2, np.int64)], axis=1)
    t_ids = np.stack([T_BASE + np.asarray(t1, np.int64), T_BASE + np.asarray(t2, np.int64)], axis=1)
    summed = add(gather_rows(params["tok_emb"], x_ids), gather_rows(params["tok_emb"], t_ids))  # (B, 2, d)
    cls = gather_rows(params["tok_emb"], np.full((B, 1), CLS_ID, dtype=np.int64))
    x = concat([cls, summed], axis=1)  # (B, 3, d)
    x = add(x, gather_rows(params["pos_emb"], np.arange(3)))
    return _encoder_stack(params, cfg, x)


def classifier_logits(params: ModelParams, hidden: Tensor) -> Tensor:
    """Linear read-out at the prepended classification position."""
    cls = index_axis0(transpose(hidden, (1, 0, 2)), 0)  # (B, d)
    return add(matmul(cls, params["head.w"]), params["head.b"])


def batch_loss(params: ModelParams, cfg: EncoderConfig, encode_fn, batch) -> Tensor:
    x1, t1, x2, t2, y = batch
    hidden = encode_fn(params, cfg, x1, t1, x2, t2)
    logits = classifier_logits(params, hidden)
    return mean_all(cross_entropy(logits, np.asarray(y, dtype=np.int64)))


def batch_accuracy(params: ModelParams, cfg: EncoderConfig, encode_fn, batch) -> float:
    x1, t1, x2, t2, y = batch
    hidden = encode_fn(params, cfg, x1, t1, x2, t2)
    logits = classifier_logits(params, hidden)
    return float((logits.data.argmax(axis=1) == np.asarray(y)).mean())
