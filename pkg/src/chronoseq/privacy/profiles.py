"""Fixed-width binary profiles derived from event tables.

The attack literature operates on fixed-dimension binary records, so each
person is flattened to indicator bits: one per gender/race concept, one per
age decade, one per concept in a chosen set. The attribute layout comes from
a ProfileSpec so train/eval/synthetic datasets share one feature space.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..codec import EventTables

__all__ = ["ProfileSpec", "build_profiles"]

_AGE_DECADES = 12  # 0-9 ... 110+


@dataclass(frozen=True)
class ProfileSpec:
    gender_concepts: tuple[int, ...]
    race_concepts: tuple[int, ...]
    concepts: tuple[tuple[str, int], ...]  # (domain, concept_id)

    @property
    def dimension(self) -> int:
        return len(self.gender_concepts) + len(self.race_concepts) + _AGE_DECADES + len(self.concepts)

    def attribute_names(self) -> list[str]:
        names = [f"gender:{g}" for g in self.gender_concepts]
        names += [f"race:{r}" for r in self.race_concepts]
        names += [f"age_decade:{k}" for k in range(_AGE_DECADES)]
        names += [f"{d}:{c}" for d, c in self.concepts]
        return names

    @classmethod
    def from_tables(cls, tables: EventTables, top_k_concepts: int = 64) -> "ProfileSpec":
        """Deterministic spec from a reference dataset: the top-k concepts by
        person prevalence (ties by domain then id), plus observed demographics."""
        genders = tuple(sorted({p.gender_concept_id for p in tables.persons}))
        races = tuple(sorted({p.race_concept_id for p in tables.persons}))
        seen: dict[tuple[str, int], set] = {}
        for e in tables.events:
            seen.setdefault((e.domain, e.concept_id), set()).add(e.person_id)
        ranked = sorted(seen.items(), key=lambda kv: (-len(kv[1]), kv[0][0], kv[0][1]))
        return cls(gender_concepts=genders, race_concepts=races,
                   concepts=tuple(dc for dc, _ in ranked[:top_k_concepts]))


def build_profiles(tables: EventTables, spec: ProfileSpec) -> np.ndarray:
    """(n_persons, spec.dimension) uint8 matrix, person order = persons table order."""
    concept_index = {dc: i for i, dc in enumerate(spec.concepts)}
    gender_index = {g: i for i, g in enumerate(spec.gender_concepts)}
    race_index = {r: i for i, r in enumerate(spec.race_concepts)}
    n_gender, n_race = len(spec.gender_concepts), len(spec.race_concepts)
    base_concepts = n_gender + n_race + _AGE_DECADES
    first_visit_year: dict[str, int] = {}
    for v in tables.visits:
        y = v.start_date.year
        if v.person_id not in first_visit_year or y < first_visit_year[v.person_id]:
            first_visit_year[v.person_id] = y
    rows = np.zeros((len(tables.persons), spec.dimension), dtype=np.uint8)
    person_row = {p.person_id: i for i, p in enumerate(tables.persons)}
    for i, p in enumerate(tables.persons):
        g = gender_index.get(p.gender_concept_id)
        if g is not None:
            rows[i, g] = 1
        r = race_index.get(p.race_concept_id)
        if r is not None:
            rows[i, n_gender + r] = 1
        year = first_visit_year.get(p.person_id)
        if year is not None:
            decade = min(max((year - p.birth_year) // 10, 0), _AGE_DECADES - 1)
            rows[i, n_gender + n_race + decade] = 1
    for e in tables.events:
        j = concept_index.get((e.domain, e.concept_id))
        if j is not None:
            i = person_row.get(e.person_id)
            if i is not None:
                rows[i, base_concepts + j] = 1
    return rows
