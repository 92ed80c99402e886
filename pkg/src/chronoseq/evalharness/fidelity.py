"""Fidelity checks: concept prevalence comparison and treatment-pathway cohorts."""
from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass

from ..codec import EventTables
from ..generation.stats import GENDER_FEMALE

__all__ = ["PrevalenceRow", "prevalence_report", "write_prevalence_csv", "CohortSpec", "PathwayResult", "pathway_cohort"]

STRATA = ("full", "female", "hospitalized")
_DEFAULT_INPATIENT = frozenset({9201, 262})


@dataclass(frozen=True)
class PrevalenceRow:
    stratum: str
    domain: str
    concept_id: int
    real_prevalence: float
    synthetic_prevalence: float


def _person_concepts(tables: EventTables):
    """person -> set of (domain, concept) including visit types as domain 'visit'."""
    out: dict[str, set] = {p.person_id: set() for p in tables.persons}
    for e in tables.events:
        if e.person_id in out:
            out[e.person_id].add((e.domain, e.concept_id))
    for v in tables.visits:
        if v.person_id in out:
            out[v.person_id].add(("visit", v.visit_concept_id))
    return out


def _strata_members(tables: EventTables, female_concept: int, inpatient_concepts) -> dict[str, set]:
    hospitalized = {v.person_id for v in tables.visits if v.visit_concept_id in inpatient_concepts}
    return {
        "full": {p.person_id for p in tables.persons},
        "female": {p.person_id for p in tables.persons if p.gender_concept_id == female_concept},
        "hospitalized": hospitalized,
    }


def prevalence_report(
    real: EventTables,
    synthetic: EventTables,
    female_concept: int = GENDER_FEMALE,
    inpatient_concepts=_DEFAULT_INPATIENT,
) -> list[PrevalenceRow]:
    """Per-concept person-prevalence in both datasets, stratified by domain and
    by sub-population (full / female / hospitalized).

    Prevalence is the fraction of stratum persons with at least one
    occurrence; every concept in the union of the two datasets gets a row in
    every stratum (absent means 0.0). An empty stratum yields prevalence 0.
    """
    if not real.persons or not synthetic.persons:
        raise ValueError("both datasets must be nonempty")
    pc_real = _person_concepts(real)
    pc_syn = _person_concepts(synthetic)
    concepts = sorted({dc for s in pc_real.values() for dc in s} | {dc for s in pc_syn.values() for dc in s})
    strata_real = _strata_members(real, female_concept, inpatient_concepts)
    strata_syn = _strata_members(synthetic, female_concept, inpatient_concepts)
    rows = []
    for stratum in STRATA:
        members_r = strata_real[stratum]
        members_s = strata_syn[stratum]
        counts_r = {dc: 0 for dc in concepts}
        counts_s = {dc: 0 for dc in concepts}
        for pid in members_r:
            for dc in pc_real[pid]:
                counts_r[dc] += 1
        for pid in members_s:
            for dc in pc_syn[pid]:
                counts_s[dc] += 1
        for domain, concept in concepts:
            rows.append(
                PrevalenceRow(
                    stratum=stratum,
                    domain=domain,
                    concept_id=concept,
                    real_prevalence=counts_r[(domain, concept)] / len(members_r) if members_r else 0.0,
                    synthetic_prevalence=counts_s[(domain, concept)] / len(members_s) if members_s else 0.0,
                )
            )
    return rows


def write_prevalence_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["stratum", "domain", "concept_id", "real_prevalence", "synthetic_prevalence"])
        for r in rows:
            w.writerow([r.stratum, r.domain, r.concept_id, r.real_prevalence, r.synthetic_prevalence])


# ---------------------------------------------------------------------------
# treatment-pathway cohort


@dataclass(frozen=True)
class CohortSpec:
    """Longitudinal cohort definition.

    The pathway fields (lookback at the first index exposure, then >= 1
    qualifying exposure in each of n_intervals consecutive interval_days
    windows) drive pathway_cohort; the outcome fields additionally let
    build_labeled_cohort produce binary prediction examples.
    """

    name: str
    index_concepts: frozenset[int]
    lookback_days: int = 365
    interval_days: int = 120
    n_intervals: int = 9
    domain: str = "drug"
    outcome_concepts: frozenset[int] = frozenset()
    outcome_window: tuple[int, int] = (1, 365)  # days after the index date, inclusive

    def __post_init__(self):
        if self.lookback_days <= 0 or self.interval_days <= 0 or self.n_intervals <= 0:
            raise ValueError("cohort windows must be positive")
        if not self.index_concepts:
            raise ValueError("index concept set must be nonempty")
        if self.outcome_window[0] > self.outcome_window[1]:
            raise ValueError("outcome window start exceeds end")


@dataclass
class PathwayResult:
    cohort: list[str]
    n_persons: int
    prevalence: float
    spec: CohortSpec


def pathway_cohort(tables: EventTables, spec: CohortSpec) -> PathwayResult:
    """Persons whose first index exposure has >= lookback_days of recorded
    history before it and who have >= 1 qualifying exposure in each of the
    n_intervals consecutive windows [index + k*interval, index + (k+1)*interval).

    Prior observation is measured from the person's first recorded event.
    Event order within a day never matters (only dates are compared).
    """
    first_event: dict[str, dt.date] = {}
    exposures: dict[str, list[dt.date]] = {}
    for e in tables.events:
        if e.person_id not in first_event or e.date < first_event[e.person_id]:
            first_event[e.person_id] = e.date
        if e.domain == spec.domain and e.concept_id in spec.index_concepts:
            exposures.setdefault(e.person_id, []).append(e.date)
    for v in tables.visits:
        if v.person_id not in first_event or v.start_date < first_event[v.person_id]:
            first_event[v.person_id] = v.start_date
    cohort = []
    for p in tables.persons:
        dates = exposures.get(p.person_id)
        if not dates:
            continue
        index = min(dates)
        if (index - first_event[p.person_id]).days < spec.lookback_days:
            continue
        offsets = sorted((d - index).days for d in dates)
        ok = True
        for k in range(spec.n_intervals):
            lo = k * spec.interval_days
            hi = lo + spec.interval_days
            if not any(lo <= off < hi for off in offsets):
                ok = False
                break
        if ok:
            cohort.append(p.person_id)
    n = len(tables.persons)
    return PathwayResult(cohort=cohort, n_persons=n, prevalence=len(cohort) / n if n else 0.0, spec=spec)
