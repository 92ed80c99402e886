"""Sample packing: first-fit-decreasing into rows, rows grouped under a token budget.

A row is one concatenated sequence of whole examples with a block-diagonal
causal mask (never longer than the model's context window). A batch is the
unit of one optimizer step: one or more rows totalling at most
tokens_per_batch tokens.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..model.supervision import AttSupervision
from ..model.transformer import segment_causal_mask

__all__ = ["EncodedExample", "PackedRow", "PackedBatch", "pack"]


@dataclass
class EncodedExample:
    person_id: str | None
    token_ids: np.ndarray  # (L,) int64
    sup: AttSupervision

    def __len__(self):
        return len(self.token_ids)


@dataclass
class PackedRow:
    """One concatenated row of whole sequences; nothing crosses a segment boundary."""

    token_ids: np.ndarray
    segment_bounds: tuple[tuple[int, int], ...]
    ntp_positions: np.ndarray
    ntp_targets: np.ndarray
    att_positions: np.ndarray
    year_target: np.ndarray
    month_target: np.ndarray
    day_target: np.ndarray
    tte_t: np.ndarray
    n_tokens: int
    _mask: np.ndarray | None = field(default=None, repr=False, compare=False)

    def attention_mask(self) -> np.ndarray:
        if self._mask is None:
            self._mask = segment_causal_mask(self.n_tokens, self.segment_bounds)
        return self._mask


@dataclass
class PackedBatch:
    rows: tuple[PackedRow, ...]
    n_tokens: int

    @property
    def n_att(self) -> int:
        return sum(len(r.att_positions) for r in self.rows)


def _build_row(examples) -> PackedRow:
    ids = np.concatenate([e.token_ids for e in examples])
    bounds = []
    ntp_pos, ntp_tgt = [], []
    att_pos, yt, mt, dt_, tt = [], [], [], [], []
    offset = 0
    for e in examples:
        L = len(e.token_ids)
        bounds.append((offset, offset + L))
        if L >= 2:
            ntp_pos.append(np.arange(offset, offset + L - 1, dtype=np.int64))
            ntp_tgt.append(e.token_ids[1:])
        s = e.sup
        if s.n_att:
            att_pos.append(s.att_positions + offset)
            yt.append(s.year_target)
            mt.append(s.month_target)
            dt_.append(s.day_target)
            tt.append(s.tte_t)
        offset += L

    def cat(parts, dtype):
        return np.concatenate(parts) if parts else np.array([], dtype=dtype)

    return PackedRow(
        token_ids=ids,
        segment_bounds=tuple(bounds),
        ntp_positions=cat(ntp_pos, np.int64),
        ntp_targets=cat(ntp_tgt, np.int64),
        att_positions=cat(att_pos, np.int64),
        year_target=cat(yt, np.int64),
        month_target=cat(mt, np.int64),
        day_target=cat(dt_, np.int64),
        tte_t=cat(tt, np.float64),
        n_tokens=int(ids.shape[0]),
    )


def pack(examples, tokens_per_batch: int, row_capacity: int | None = None) -> list[PackedBatch]:
    """First-fit-decreasing packing; every input token lands in exactly one batch.

    Rows are capped at row_capacity (default: the whole batch budget, which
    callers should set to the model's context window when it is smaller).
    """
    cap = min(row_capacity, tokens_per_batch) if row_capacity else tokens_per_batch
    for e in examples:
        if len(e) > cap:
            raise ValueError(f"sequence of {len(e)} tokens exceeds the {cap}-token packing capacity")
    order = sorted(range(len(examples)), key=lambda i: (-len(examples[i]), i))
    bins: list[list] = []
    room: list[int] = []
    for i in order:
        e = examples[i]
        L = len(e)
        for b, free in enumerate(room):
            if L <= free:
                bins[b].append(e)
                room[b] -= L
                break
        else:
            bins.append([e])
            room.append(cap - L)
    rows = [_build_row(b) for b in bins]
    batches: list[PackedBatch] = []
    group: list[PackedRow] = []
    total = 0
    for row in rows:
        if group and total + row.n_tokens > tokens_per_batch:
            batches.append(PackedBatch(tuple(group), total))
            group, total = [], 0
        group.append(row)
        total += row.n_tokens
    if group:
        batches.append(PackedBatch(tuple(group), total))
    return batches
