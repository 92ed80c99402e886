"""Seeded synthetic-hospital corpus: random but structurally plausible records.

This is desk-scale stand-in data for exercising the pipeline end to end.
Records stay inside the class the codec represents losslessly: visits never
overlap, non-inpatient visits are single-day, and inpatient events fall
inside the stay. Inter-visit gaps are biased toward 7/14/30-day follow-ups
with a long tail, and a small fraction of gaps exceed 1080 days.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .codec import ClinicalEvent, PatientRecord, Visit, sorted_events

__all__ = ["WorldConfig", "sample_hospital_records", "demographics_of"]

OUTPATIENT = 9202
INPATIENT = 9201
EMERGENCY = 9203
DISCHARGE_HOME = 8536
DISCHARGE_SNF = 8863
GENDER_FEMALE = 8532
GENDER_MALE = 8507


@dataclass(frozen=True)
class WorldConfig:
    start_year_range: tuple[int, int] = (1985, 2015)
    age_range: tuple[int, int] = (20, 85)
    visits_range: tuple[int, int] = (2, 8)
    events_per_visit_range: tuple[int, int] = (1, 4)
    inpatient_prob: float = 0.2
    emergency_prob: float = 0.1
    long_gap_prob: float = 0.02
    max_inpatient_days: int = 12
    gender_concepts: tuple[int, ...] = (GENDER_FEMALE, GENDER_MALE)
    race_concepts: tuple[int, ...] = (8527, 8516, 8515)
    condition_pool: tuple[int, ...] = tuple(range(320128, 320128 + 16))
    drug_pool: tuple[int, ...] = tuple(range(1125315, 1125315 + 12))
    procedure_pool: tuple[int, ...] = tuple(range(4336464, 4336464 + 8))
    gap_choices: tuple[int, ...] = (1, 3, 7, 7, 14, 14, 21, 30, 30, 60, 90, 180, 365)
    discharge_concepts: tuple[int, ...] = (DISCHARGE_HOME, DISCHARGE_SNF)


def _sample_events(rng, cfg: WorldConfig, start: dt.date, end: dt.date, n: int):
    events = []
    span = (end - start).days
    for _ in range(n):
        u = rng.random()
        if u < 0.55:
            domain, pool = "condition", cfg.condition_pool
        elif u < 0.85:
            domain, pool = "drug", cfg.drug_pool
        else:
            domain, pool = "procedure", cfg.procedure_pool
        offset = int(rng.integers(0, span + 1)) if span > 0 else 0
        events.append(ClinicalEvent(start + dt.timedelta(days=offset), domain, int(rng.choice(pool))))
    return sorted_events(events)


def sample_hospital_records(n: int, seed: int, cfg: WorldConfig = WorldConfig()) -> list[PatientRecord]:
    rng = np.random.default_rng(seed)
    records = []
    for k in range(n):
        start_year = int(rng.integers(cfg.start_year_range[0], cfg.start_year_range[1] + 1))
        age = int(rng.integers(cfg.age_range[0], cfg.age_range[1] + 1))
        gender = int(rng.choice(cfg.gender_concepts))
        race = int(rng.choice(cfg.race_concepts))
        n_visits = int(rng.integers(cfg.visits_range[0], cfg.visits_range[1] + 1))
        day0 = dt.date(start_year, 1, 1) + dt.timedelta(days=int(rng.integers(0, 365)))
        visits = []
        cursor = day0
        for _ in range(n_visits):
            u = rng.random()
            if u < cfg.inpatient_prob:
                vtype = INPATIENT
                stay = int(rng.integers(1, cfg.max_inpatient_days + 1))
                discharge = int(rng.choice(cfg.discharge_concepts))
            elif u < cfg.inpatient_prob + cfg.emergency_prob:
                vtype, stay, discharge = EMERGENCY, 0, None
            else:
                vtype, stay, discharge = OUTPATIENT, 0, None
            start = cursor
            end = start + dt.timedelta(days=stay)
            n_events = int(rng.integers(cfg.events_per_visit_range[0], cfg.events_per_visit_range[1] + 1))
            visits.append(Visit(vtype, start, end, discharge, _sample_events(rng, cfg, start, end, n_events)))
            if rng.random() < cfg.long_gap_prob:
                gap = int(rng.integers(1081, 2500))
            else:
                gap = int(rng.choice(cfg.gap_choices))
            cursor = end + dt.timedelta(days=gap)
        records.append(PatientRecord(f"p{k + 1}", start_year - age, gender, race, tuple(visits)))
    return records


def demographics_of(records) -> list[tuple[int, int, int, int]]:
    """(start_year, age, gender, race) per record; the generation prompt pool."""
    out = []
    for r in records:
        y = r.visits[0].start_date.year
        out.append((y, y - r.birth_year, r.gender_concept, r.race_concept))
    return out
