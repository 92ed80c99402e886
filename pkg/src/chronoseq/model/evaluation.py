"""Graph-free loss evaluation (plain numpy, dropout off).

Mirrors total_loss exactly; a unit test pins the two paths together to
float64 round-off. Used for per-epoch evaluation where gradients are wasted
work.
"""
from __future__ import annotations

import numpy as np

from ..autodiff.special import lgamma_value
from .bundle import TimelineModel
from .config import ModelConfig
from .inference import _gelu, _layer_norm, _softmax
from .params import ModelParams

__all__ = ["forward_numpy", "batch_loss_numpy", "evaluate_loss"]

_POSITIVE_EPS = 1e-6


def forward_numpy(params: ModelParams, cfg: ModelConfig, token_ids, attn_mask):
    """(logits, hidden) for one row, no autodiff graph."""
    ids = np.asarray(token_ids, dtype=np.int64)
    T = ids.shape[0]
    if T > cfg.context_window:
        raise ValueError(f"input length {T} exceeds context window {cfg.context_window}")
    H, dh = cfg.n_heads, cfg.head_dim
    w = {name: t.data for name, t in params.items()}
    x = w["tok_emb"][ids]
    for i in range(cfg.n_layers):
        p = f"block{i}."
        a = _layer_norm(x, w[p + "ln1.g"], w[p + "ln1.b"])
        qkv = (a @ w[p + "qkv.w"] + w[p + "qkv.b"]).reshape(T, 3, H, dh).transpose(1, 2, 0, 3)
        q, k, v = qkv[0], qkv[1], qkv[2]
        scores = q @ k.transpose(0, 2, 1) / np.sqrt(dh) + attn_mask
        ctx = (_softmax(scores) @ v).transpose(1, 0, 2).reshape(T, H * dh)
        x = x + ctx @ w[p + "proj.w"] + w[p + "proj.b"]
        b = _layer_norm(x, w[p + "ln2.g"], w[p + "ln2.b"])
        x = x + _gelu(b @ w[p + "ff1.w"] + w[p + "ff1.b"]) @ w[p + "ff2.w"] + w[p + "ff2.b"]
    hidden = _layer_norm(x, w["final_ln.g"], w["final_ln.b"])
    logits = hidden @ w["tok_emb"].T
    return logits, hidden


def _ce_sum(logits, targets):
    m = logits.max(axis=-1, keepdims=True)
    z = logits - m
    lse = np.log(np.exp(z).sum(axis=-1))
    picked = z[np.arange(len(targets)), targets]
    return float((lse - picked).sum())


def batch_loss_numpy(params: ModelParams, cfg: ModelConfig, batch) -> dict:
    """LossBreakdown-equivalent dict for one PackedBatch, no gradients."""
    rows = batch.rows if hasattr(batch, "rows") else (batch,)
    n_tokens = int(getattr(batch, "n_tokens", sum(r.n_tokens for r in rows)))
    w = {name: t.data for name, t in params.items()}
    ntp = td = tte = 0.0
    for row in rows:
        logits, hidden = forward_numpy(params, cfg, row.token_ids, row.attention_mask())
        ntp += _ce_sum(logits[row.ntp_positions], row.ntp_targets)
        if len(row.att_positions) == 0:
            continue
        h_att = hidden[row.att_positions]
        K = h_att.shape[0]
        thirds = h_att.reshape(K, 3, cfg.sub_embed_dim)
        td += _ce_sum(thirds[:, 0] @ w["td.year.w"], row.year_target)
        td += _ce_sum(thirds[:, 1] @ w["td.month.w"], row.month_target)
        td += _ce_sum(thirds[:, 2] @ w["td.day.w"], row.day_target)
        h = _gelu(h_att @ w["tte.fc1.w"] + w["tte.fc1.b"])
        pre = h @ w["tte.fc2.w"] + w["tte.fc2.b"]
        alpha = np.logaddexp(0.0, pre[:, 0]) + _POSITIVE_EPS
        beta = np.logaddexp(0.0, pre[:, 1]) + _POSITIVE_EPS
        t = row.tte_t
        logp = alpha * np.log(beta) - lgamma_value(alpha) + (alpha - 1.0) * np.log(t) - beta * t
        tte += float(-logp.sum())
    return {
        "total": (ntp + td + tte) / n_tokens,
        "ntp": ntp / n_tokens,
        "td": td / n_tokens,
        "tte": tte / n_tokens,
    }


def evaluate_loss(model: TimelineModel, batches) -> dict:
    """Token-weighted average loss components over a batch list."""
    total = {"total": 0.0, "ntp": 0.0, "td": 0.0, "tte": 0.0}
    n = 0
    for b in batches:
        parts = batch_loss_numpy(model.params, model.config, b)
        for k in total:
            total[k] += parts[k] * b.n_tokens
        n += b.n_tokens
    if n == 0:
        raise ValueError("no tokens to evaluate")
    return {k: v / n for k, v in total.items()}
