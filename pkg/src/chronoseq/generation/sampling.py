"""Autoregressive sampling with the standard decoding controls.

Control order is fixed and load-bearing: repetition penalty on the raw
logits, then temperature, then top-k, then nucleus (top-p), then a final
renormalization before drawing. With all controls neutral (penalty 1, T=1,
k=0, p=1) the draw follows the raw softmax distribution.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..codec import TokenSequence
from ..codec.tokens import TokenClass, classify_token
from ..model import InferenceSession, TimelineModel

__all__ = ["SamplingConfig", "apply_decoding_controls", "sample_token_id", "sample_sequence"]


@dataclass(frozen=True)
class SamplingConfig:
    temperature: float = 1.0
    top_k: int = 0  # 0 disables
    top_p: float = 1.0
    repetition_penalty: float = 1.0
    max_tokens: int = 1024  # total sequence length cap
    min_tokens: int = 20
    checkpoint_id: str = ""
    seed: int = 0

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")
        if self.top_k < 0:
            raise ValueError("top_k must be >= 0")
        if not (0.0 < self.top_p <= 1.0):
            raise ValueError("top_p must lie in (0, 1]")
        if self.repetition_penalty < 1.0:
            raise ValueError("repetition_penalty must be >= 1")
        if self.max_tokens <= 0 or self.min_tokens < 0:
            raise ValueError("token limits must be positive")


def apply_decoding_controls(logits, context_ids, cfg: SamplingConfig) -> np.ndarray:
    """Raw next-token logits -> normalized sampling distribution."""
    z = np.array(logits, dtype=np.float64)
    if cfg.repetition_penalty != 1.0 and len(context_ids) > 0:
        seen = np.unique(np.asarray(context_ids, dtype=np.int64))
        vals = z[seen]
        z[seen] = np.where(vals > 0, vals / cfg.repetition_penalty, vals * cfg.repetition_penalty)
    z /= cfg.temperature
    if cfg.top_k and cfg.top_k < z.shape[0]:
        cutoff = np.partition(z, -cfg.top_k)[-cfg.top_k]
        z[z < cutoff] = -np.inf
    z -= z[np.isfinite(z)].max()
    probs = np.exp(z)  # exp(-inf) underflows to an exact zero
    probs /= probs.sum()
    if cfg.top_p < 1.0:
        order = np.argsort(-probs, kind="stable")
        csum = np.cumsum(probs[order])
        keep_n = int(np.searchsorted(csum, cfg.top_p, side="left")) + 1  # always >= 1 token
        mask = np.zeros_like(probs, dtype=bool)
        mask[order[:keep_n]] = True
        probs = np.where(mask, probs, 0.0)
        probs /= probs.sum()
    return probs


def sample_token_id(probs: np.ndarray, rng: np.random.Generator) -> int:
    csum = np.cumsum(probs)
    return int(np.searchsorted(csum, rng.random() * csum[-1], side="right"))


def _check_prompt(tokens):
    if len(tokens) < 4:
        raise ValueError("prompt must start with the 4-token demographic prefix")
    want = (TokenClass.YEAR, TokenClass.AGE, TokenClass.GENDER, TokenClass.RACE)
    for i, cls in enumerate(want):
        if classify_token(tokens[i]) is not cls:
            raise ValueError(f"prompt token {i} ({tokens[i]!r}) is not a {cls.value} token")


def sample_sequence(
    model: TimelineModel,
    prompt_tokens,
    cfg: SamplingConfig,
    rng: np.random.Generator,
    person_id: str | None = None,
) -> TokenSequence:
    """Generate until [END] or the length cap; a capped sequence is flagged, not dropped."""
    prompt = tuple(prompt_tokens)
    _check_prompt(prompt)
    limit = min(cfg.max_tokens, model.config.context_window)
    if len(prompt) >= limit:
        raise ValueError(f"prompt of {len(prompt)} tokens leaves no room under the {limit}-token cap")
    session = InferenceSession(model)
    session.prefill([model.vocab.id_of(t) for t in prompt])
    tokens = list(prompt)
    end_id = model.vocab.end_id
    hit_max = False
    while True:
        probs = apply_decoding_controls(session.next_logits(), session.context_ids, cfg)
        tid = sample_token_id(probs, rng)
        tokens.append(model.vocab.token_of(tid))
        if tid == end_id:
            break
        if len(tokens) >= limit:
            hit_max = True
            break
        session.append(tid)
    return TokenSequence(tuple(tokens), person_id=person_id, hit_max_tokens=hit_max)
