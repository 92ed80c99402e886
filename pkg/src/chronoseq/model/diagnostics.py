"""Self-contained gradient-check harness over a tiny fixed batch.

Builds a miniature vocabulary (full time-token coverage is pointless when
finite-differencing every embedding row) and a two-sequence packed batch
that exercises all three loss heads, then compares analytic gradients of the
combined objective against central differences.
"""
from __future__ import annotations

import numpy as np

from ..autodiff.gradcheck import grad_check
from ..codec import TokenSequence
from ..codec.vocab import Vocabulary
from ..training.packing import EncodedExample, pack
from .bundle import TimelineModel
from .config import ModelConfig
from .losses import total_loss
from .supervision import build_att_supervision

__all__ = ["toy_batch", "toy_grad_check"]

_TOKENS_A = (
    "year:2000", "age:50", "gender:8532", "race:8527",
    "[VS]", "v:9202", "c:320128", "[VE]", "D7",
    "[VS]", "v:9201", "i-D2", "d:1125315", "dis:8536", "[VE]", "[LT]",
    "[VS]", "v:9202", "[VE]", "[END]",
)
_TOKENS_B = (
    "year:2001", "age:40", "gender:8507", "race:8516",
    "[VS]", "v:9202", "d:1125316", "[VE]", "D0",
    "[VS]", "v:9202", "c:320129", "[VE]", "[END]",
)


def toy_batch(max_year_class: int = 10):
    """(vocabulary, packed batch) covering NTP, TD, TTE, [LT] and D0 cases."""
    seqs = [
        TokenSequence(_TOKENS_A, person_id="a", att_days=((8, 7), (15, 2000))),
        TokenSequence(_TOKENS_B, person_id="b", att_days=((8, 0),)),
    ]
    used = sorted({t for s in seqs for t in s.tokens})
    specials = ["[PAD]", "[VS]", "[VE]", "[LT]", "[END]"]
    vocab = Vocabulary(specials + [t for t in used if t not in specials])
    examples = [
        EncodedExample(s.person_id, np.array(vocab.encode(s.tokens), dtype=np.int64),
                       build_att_supervision(s, max_year_class))
        for s in seqs
    ]
    return vocab, pack(examples, tokens_per_batch=64)[0]


def toy_grad_check(embed_dim: int = 6, n_layers: int = 2, n_heads: int = 2, seed: int = 0,
                   epsilon: float = 1e-5) -> float:
    """Max relative gradient error of total_loss on the toy batch."""
    vocab, batch = toy_batch()
    cfg = ModelConfig(
        vocab_size=len(vocab),
        embed_dim=embed_dim,
        n_layers=n_layers,
        n_heads=n_heads,
        context_window=64,
    )
    model = TimelineModel.initialize(cfg, vocab, seed=seed)

    def build():
        return total_loss(model.params, cfg, batch)[0]

    return grad_check(build, model.params.values(), epsilon=epsilon)
