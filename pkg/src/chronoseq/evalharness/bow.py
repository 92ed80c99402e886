"""Bag-of-words features: concept counts inside an observation window."""
from __future__ import annotations

import datetime as dt

import numpy as np

from ..codec import PatientRecord

__all__ = ["bow_features", "concept_vocabulary"]


def concept_vocabulary(records) -> list[int]:
    """Sorted distinct concept ids across all events; the BOW feature axis."""
    seen = set()
    for r in records:
        for v in r.visits:
            for e in v.events:
                seen.add(e.concept_id)
    return sorted(seen)


def bow_features(record: PatientRecord, index_date: dt.date, window: tuple[int, int], concepts) -> np.ndarray:
    """Counts of each concept with date in [index+window[0], index+window[1]].

    window offsets are days relative to the index date (e.g. (-365, 0) for a
    one-year lookback); both endpoints are inclusive. Dimension equals
    len(concepts); concepts outside the list are ignored.
    """
    lo_off, hi_off = window
    if lo_off > hi_off:
        raise ValueError("window start offset exceeds end offset")
    lo = index_date + dt.timedelta(days=lo_off)
    hi = index_date + dt.timedelta(days=hi_off)
    index = {c: i for i, c in enumerate(concepts)}
    out = np.zeros(len(index), dtype=np.int64)
    for v in record.visits:
        for e in v.events:
            if lo <= e.date <= hi:
                j = index.get(e.concept_id)
                if j is not None:
                    out[j] += 1
    return out
