"""Zero-shot task definitions and concept-hierarchy expansion."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from ..configfile import parse_kv_text

__all__ = ["TaskConfig", "ConceptAncestry", "expand_outcomes", "load_task_config"]


@dataclass(frozen=True)
class TaskConfig:
    task_name: str
    outcome_events: tuple[int, ...]
    include_descendants: bool = False
    prediction_window_start: int = 0
    prediction_window_end: int = 30
    max_new_tokens: int = 128
    n_simulations: int = 50

    def __post_init__(self):
        if not self.outcome_events:
            raise ValueError("outcome_events must be nonempty")
        if not (0 <= self.prediction_window_start < self.prediction_window_end):
            raise ValueError("need 0 <= prediction_window_start < prediction_window_end")
        if self.max_new_tokens <= 0 or self.n_simulations <= 0:
            raise ValueError("max_new_tokens and n_simulations must be positive")


def load_task_config(path) -> TaskConfig:
    """Key-value task file; field names match the task-definition examples verbatim."""
    kv = parse_kv_text(Path(path).read_text(encoding="utf-8"))
    known = {
        "task_name",
        "outcome_events",
        "include_descendants",
        "prediction_window_start",
        "prediction_window_end",
        "max_new_tokens",
        "n_simulations",
    }
    unknown = set(kv) - known
    if unknown:
        raise ValueError(f"{path}: unknown task field(s): {', '.join(sorted(unknown))}")
    if "task_name" not in kv or "outcome_events" not in kv:
        raise ValueError(f"{path}: task_name and outcome_events are required")
    events = kv["outcome_events"]
    if not isinstance(events, list):
        events = [events]
    return TaskConfig(
        task_name=str(kv["task_name"]),
        outcome_events=tuple(int(e) for e in events),
        include_descendants=bool(kv.get("include_descendants", False)),
        prediction_window_start=int(kv.get("prediction_window_start", 0)),
        prediction_window_end=int(kv.get("prediction_window_end", 30)),
        max_new_tokens=int(kv.get("max_new_tokens", 128)),
        n_simulations=int(kv.get("n_simulations", 50)),
    )


class ConceptAncestry:
    """(ancestor, descendant) pairs; every concept is its own descendant at query time."""

    def __init__(self, pairs=()):
        self._down: dict[int, set[int]] = {}
        for anc, desc in pairs:
            self._down.setdefault(int(anc), set()).add(int(desc))

    def descendants_of(self, concept_id: int) -> set[int]:
        return {int(concept_id)} | self._down.get(int(concept_id), set())

    @classmethod
    def load(cls, path) -> "ConceptAncestry":
        pairs = []
        with open(path, newline="", encoding="utf-8") as f:
            for row in csv.reader(f):
                if not row or not row[0].strip():
                    continue
                if not row[0].strip().lstrip("-").isdigit():
                    continue  # header row
                pairs.append((int(row[0]), int(row[1])))
        return cls(pairs)


def expand_outcomes(task: TaskConfig, ancestry: ConceptAncestry | None = None) -> frozenset[int]:
    """The outcome concept set, unioned with descendants when the task asks for it.

    Idempotent: expanding an already-expanded set adds nothing (the hierarchy
    pairs here are transitive-closure rows, as in the standard ancestor
    table). Unknown ids pass through unchanged.
    """
    base = {int(c) for c in task.outcome_events}
    if not task.include_descendants:
        return frozenset(base)
    if ancestry is None:
        raise ValueError("include_descendants is set but no ancestry was provided")
    out: set[int] = set()
    for c in base:
        out |= ancestry.descendants_of(c)
    return frozenset(out)
