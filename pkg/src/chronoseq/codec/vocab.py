"""Token <-> id vocabulary with deterministic construction and expansion."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

from .codec import TokenSequence
from .tokens import END, LT, MAX_ATT_DAYS, PAD, VE, VS, classify_token

__all__ = ["Vocabulary", "ExpandReport", "build_vocabulary", "expand_vocabulary"]

SPECIALS = (PAD, VS, VE, LT, END)
_ATT_RANGE = tuple(f"D{n}" for n in range(MAX_ATT_DAYS + 1))


class Vocabulary:
    """Immutable dense token<->id bijection; ids are stable once assigned."""

    __slots__ = ("tokens", "_index", "frozen")

    def __init__(self, tokens, frozen=True):
        self.tokens = tuple(tokens)
        self._index = {t: i for i, t in enumerate(self.tokens)}
        if len(self._index) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")
        for s in SPECIALS:
            if s not in self._index:
                raise ValueError(f"special token {s} missing from vocabulary")
        self.frozen = frozen

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self._index

    def id_of(self, token: str) -> int:
        return self._index[token]

    def token_of(self, idx: int) -> str:
        return self.tokens[idx]

    def encode(self, tokens) -> list[int]:
        return [self._index[t] for t in tokens]

    def decode(self, ids) -> list[str]:
        return [self.tokens[i] for i in ids]

    @property
    def pad_id(self) -> int:
        return self._index[PAD]

    @property
    def end_id(self) -> int:
        return self._index[END]

    def class_of_id(self, idx: int):
        return classify_token(self.tokens[idx])

    def serialize(self) -> str:
        lines = [f"{i}\t{t}\t{classify_token(t).value}" for i, t in enumerate(self.tokens)]
        return "\n".join(lines) + "\n"

    def sha256(self) -> str:
        return hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()

    def save(self, path):
        Path(path).write_text(self.serialize(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        tokens = []
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
            if not line.strip():
                continue
            idx_s, token, cls_name = line.split("\t")
            if int(idx_s) != len(tokens):
                raise ValueError(f"{path}:{lineno + 1}: ids are not dense")
            if classify_token(token).value != cls_name:
                raise ValueError(f"{path}:{lineno + 1}: class mismatch for {token!r}")
            tokens.append(token)
        return cls(tokens)


@dataclass(frozen=True)
class ExpandReport:
    added: int
    duplicates: int


def build_vocabulary(corpus) -> Vocabulary:
    """Deterministic vocabulary: specials, D0..D1080, then observed tokens sorted.

    Identical corpora produce byte-identical vocabularies regardless of
    sequence order.
    """
    observed: set[str] = set()
    n_seq = 0
    for seq in corpus:
        n_seq += 1
        tokens = seq.tokens if isinstance(seq, TokenSequence) else seq
        observed.update(tokens)
    if n_seq == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    base = list(SPECIALS) + list(_ATT_RANGE)
    fixed = set(base)
    rest = sorted(t for t in observed if t not in fixed)
    for t in rest:
        classify_token(t)  # reject malformed tokens early
    return Vocabulary(base + rest)


def expand_vocabulary(vocab: Vocabulary, new_tokens) -> tuple[Vocabulary, ExpandReport]:
    """Append unseen tokens, keeping every existing id; duplicates are counted, not added."""
    if not vocab.frozen:
        raise ValueError("expand_vocabulary requires a frozen vocabulary")
    tokens = list(vocab.tokens)
    seen = set(tokens)
    added = 0
    duplicates = 0
    for t in new_tokens:
        if t in seen:
            duplicates += 1
            continue
        classify_token(t)
        tokens.append(t)
        seen.add(t)
        added += 1
    return Vocabulary(tokens), ExpandReport(added=added, duplicates=duplicates)
