"""Line-oriented sequence files: person_id <TAB> tokens [<TAB> flags]."""
from __future__ import annotations

from pathlib import Path

from .codec import TokenSequence

__all__ = ["read_sequences", "write_sequences"]

_FLAG_MAXED = "maxed"


def write_sequences(sequences, path):
    with open(path, "w", encoding="utf-8") as f:
        for seq in sequences:
            pid = seq.person_id if seq.person_id is not None else ""
            line = f"{pid}\t{' '.join(seq.tokens)}"
            if seq.hit_max_tokens:
                line += f"\t{_FLAG_MAXED}"
            f.write(line + "\n")


def read_sequences(path) -> list[TokenSequence]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        parts = line.split("\t")
        pid = parts[0] or None
        tokens = tuple(parts[1].split()) if len(parts) > 1 else ()
        flags = parts[2].split(",") if len(parts) > 2 else []
        out.append(TokenSequence(tokens, person_id=pid, hit_max_tokens=_FLAG_MAXED in flags))
    return out
