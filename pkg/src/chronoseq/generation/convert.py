"""Synthetic sequences back to event tables, with an honest conversion report."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

from ..codec import CodecConfig, DecodeError, EventTables, decode_sequence, records_to_tables

__all__ = ["ConversionReport", "convert_to_tables"]


@dataclass
class ConversionReport:
    attempted: int = 0
    succeeded: int = 0
    failures: dict[str, int] = field(default_factory=dict)

    @property
    def failed(self) -> int:
        return self.attempted - self.succeeded

    def fractions(self) -> dict[str, float]:
        """'succeeded' plus one entry per failure reason; sums to 1 over attempts."""
        if self.attempted == 0:
            return {"succeeded": 0.0}
        out = {"succeeded": self.succeeded / self.attempted}
        for reason, n in sorted(self.failures.items()):
            out[f"failed:{reason}"] = n / self.attempted
        return out

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["outcome", "count", "fraction"])
            w.writerow(["attempted", self.attempted, 1.0 if self.attempted else 0.0])
            w.writerow(["succeeded", self.succeeded, self.fractions()["succeeded"]])
            for reason, n in sorted(self.failures.items()):
                w.writerow([f"failed:{reason}", n, n / self.attempted])


def convert_to_tables(corpus, cfg: CodecConfig = CodecConfig()) -> tuple[EventTables, ConversionReport]:
    """Decode every sequence; failures become report rows, never exceptions.

    Sequences flagged as having hit the generation cap are decoded leniently
    (truncated back to their last complete visit block). Synthetic person ids
    are reassigned densely.
    """
    sequences = corpus.sequences if hasattr(corpus, "sequences") else list(corpus)
    report = ConversionReport()
    records = []
    for seq in sequences:
        report.attempted += 1
        lenient = bool(getattr(seq, "hit_max_tokens", False))
        try:
            rec = decode_sequence(seq, cfg, person_id=f"s{report.succeeded + 1}", lenient_tail=lenient)
        except DecodeError as e:
            report.failures[e.reason] = report.failures.get(e.reason, 0) + 1
            continue
        report.succeeded += 1
        records.append(rec)
    return records_to_tables(records), report
