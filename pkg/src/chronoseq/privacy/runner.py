"""Table-level privacy audit: profiles + attribute split + all four attacks.

The attribute roles follow the attack setting: demographics are the
quasi-identifiers an adversary can link on; keys are demographics plus the
commonest half of the concept bits (information an adversary plausibly
holds); the rarer half are the sensitive bits under inference.
"""
from __future__ import annotations

import csv

import numpy as np

from ..codec import EventTables
from .attacks import PrivacySuiteResult, run_privacy_suite
from .profiles import ProfileSpec, build_profiles

__all__ = ["audit_tables", "write_privacy_csv", "default_attribute_split"]


def default_attribute_split(spec: ProfileSpec):
    """(key_attrs, sensitive_attrs, quasi_identifiers) index arrays for a spec."""
    n_demo = spec.dimension - len(spec.concepts)
    n_concepts = len(spec.concepts)
    half = n_concepts // 2
    quasi = np.arange(n_demo)
    keys = np.concatenate([quasi, n_demo + np.arange(half)])
    sensitive = n_demo + np.arange(half, n_concepts)
    if len(sensitive) == 0:
        raise ValueError("profile spec has too few concept bits to split")
    return keys, sensitive, quasi


def audit_tables(
    train: EventTables,
    eval_: EventTables,
    synthetic: EventTables,
    top_k_concepts: int = 64,
    seed: int = 0,
    match_tolerance: float = 0.8,
    sample_size: int | None = None,
    key_attrs=None,
    sensitive_attrs=None,
    quasi_identifiers=None,
) -> PrivacySuiteResult:
    spec = ProfileSpec.from_tables(train, top_k_concepts=top_k_concepts)
    keys, sensitive, quasi = default_attribute_split(spec)
    if key_attrs is not None:
        keys = np.asarray(key_attrs, dtype=np.int64)
    if sensitive_attrs is not None:
        sensitive = np.asarray(sensitive_attrs, dtype=np.int64)
    if quasi_identifiers is not None:
        quasi = np.asarray(quasi_identifiers, dtype=np.int64)
    return run_privacy_suite(
        build_profiles(train, spec),
        build_profiles(eval_, spec),
        build_profiles(synthetic, spec),
        key_attrs=keys,
        sensitive_attrs=sensitive,
        quasi_identifiers=quasi,
        seed=seed,
        match_tolerance=match_tolerance,
        sample_size=sample_size,
    )


def write_privacy_csv(path, result: PrivacySuiteResult):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["attack", "score", "threshold", "verdict"])
        for name, score in result.rows():
            w.writerow([name, score, result.threshold, "PASS" if score < result.threshold else "FAIL"])
        w.writerow(["overall", "", result.threshold, "PASS" if result.passed else "FAIL"])
