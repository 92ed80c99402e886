"""Four privacy attacks over binary profiles, each yielding one risk score.

These are declared approximations of the published attack metrics: Hamming
distance on indicator profiles, with scores framed as improvement over a
naive baseline (floored at zero) so that statistically independent synthetic
data scores near 0 and memorized data scores high. The PASS rule compares
every score against the 0.333 threshold.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RISK_THRESHOLD",
    "NnaaResult",
    "MembershipResult",
    "AttributeResult",
    "IdentityResult",
    "nnaa_risk",
    "membership_inference",
    "attribute_inference",
    "identity_disclosure",
    "PrivacySuiteResult",
    "run_privacy_suite",
]

RISK_THRESHOLD = 0.333


def _as_matrix(profiles) -> np.ndarray:
    m = np.asarray(profiles, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("profiles must be a 2-D binary matrix")
    return m


def _canonical_sort(m: np.ndarray) -> np.ndarray:
    """Lexicographic row order so scores cannot depend on input record order."""
    return m[np.lexsort(m.T[::-1])]


def _hamming_cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(len(a), len(b)) pairwise Hamming distances between binary matrices."""
    return a @ (1.0 - b).T + (1.0 - a) @ b.T


def _min_offdiag(d: np.ndarray) -> np.ndarray:
    d = d.copy()
    np.fill_diagonal(d, np.inf)
    return d.min(axis=1)


@dataclass(frozen=True)
class NnaaResult:
    score: float
    aa_eval_synth: float
    aa_train_synth: float
    n: int


def _adversarial_accuracy(a: np.ndarray, b: np.ndarray) -> float:
    """AA(A,B): how often the nearest cross-set neighbor is farther than the
    nearest leave-self-out within-set neighbor, averaged over both directions."""
    d_cross = _hamming_cross(a, b)
    term_a = (d_cross.min(axis=1) > _min_offdiag(_hamming_cross(a, a))).mean()
    term_b = (d_cross.min(axis=0) > _min_offdiag(_hamming_cross(b, b))).mean()
    return 0.5 * float(term_a + term_b)


def nnaa_risk(train, eval_, synthetic, seed: int = 0, sample_size: int | None = None) -> NnaaResult:
    """AA(eval, synthetic) - AA(train, synthetic); positive means synthetic
    records sit closer to training data than held-out data (memorization).
    All three sets are subsampled (seeded, order-invariant) to one size n."""
    train, eval_, synthetic = map(_as_matrix, (train, eval_, synthetic))
    n = min(len(train), len(eval_), len(synthetic))
    if sample_size is not None:
        n = min(n, int(sample_size))
    if n < 10:
        raise ValueError(f"sample size {n} too small for a stable NNAA estimate (need >= 10)")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x44AA]))
    parts = []
    for m in (train, eval_, synthetic):
        m = _canonical_sort(m)
        idx = rng.choice(len(m), size=n, replace=False)
        parts.append(m[np.sort(idx)])
    train_s, eval_s, synth_s = parts
    aa_es = _adversarial_accuracy(eval_s, synth_s)
    aa_ts = _adversarial_accuracy(train_s, synth_s)
    return NnaaResult(score=float(aa_es - aa_ts), aa_eval_synth=aa_es, aa_train_synth=aa_ts, n=n)


@dataclass(frozen=True)
class MembershipResult:
    score: float
    best_threshold: int
    best_f1: float
    baseline_f1: float


def membership_inference(targets, membership_truth, synthetic) -> MembershipResult:
    """Distance-threshold membership attack, scored as best-F1 gain.

    A target counts as 'member' when its nearest synthetic record lies within
    tau Hamming bits; tau sweeps the full range and the score is the best F1
    minus the F1 of the classify-everyone-positive baseline, floored at 0.
    """
    targets = _as_matrix(targets)
    synthetic = _as_matrix(synthetic)
    if len(synthetic) == 0:
        raise ValueError("empty synthetic set")
    truth = np.asarray(membership_truth, dtype=bool)
    if truth.shape != (len(targets),):
        raise ValueError("membership_truth must align with targets")
    if not truth.any():
        raise ValueError("no true members among targets")
    min_d = _hamming_cross(targets, synthetic).min(axis=1)
    n_pos = int(truth.sum())
    baseline_f1 = 2.0 * n_pos / (len(targets) + n_pos)  # all-positive classifier
    best_f1, best_tau = 0.0, 0
    for tau in range(0, targets.shape[1] + 1):
        pred = min_d <= tau
        tp = float(np.sum(pred & truth))
        if tp == 0.0:
            continue
        precision = tp / pred.sum()
        recall = tp / n_pos
        f1 = 2.0 * precision * recall / (precision + recall)
        if f1 > best_f1:
            best_f1, best_tau = f1, tau
    return MembershipResult(
        score=float(max(0.0, best_f1 - baseline_f1)),
        best_threshold=best_tau,
        best_f1=float(best_f1),
        baseline_f1=float(baseline_f1),
    )


@dataclass(frozen=True)
class AttributeResult:
    score: float
    per_attribute: tuple[tuple[int, float, float], ...]  # (column, accuracy, baseline)


def attribute_inference(targets, synthetic, key_attrs, sensitive_attrs) -> AttributeResult:
    """Nearest synthetic neighbor on key attributes predicts the sensitive bits.

    Score is the entropy-weighted mean accuracy improvement over each
    attribute's majority rate, floored at zero; constant attributes carry no
    weight.
    """
    targets = _as_matrix(targets)
    synthetic = _as_matrix(synthetic)
    key = np.asarray(key_attrs, dtype=np.int64)
    sens = np.asarray(sensitive_attrs, dtype=np.int64)
    if len(key) == 0 or len(sens) == 0:
        raise ValueError("key and sensitive attribute sets must be nonempty")
    if set(key.tolist()) & set(sens.tolist()):
        raise ValueError("key and sensitive attribute sets must be disjoint")
    d = _hamming_cross(targets[:, key], synthetic[:, key])
    nn = d.argmin(axis=1)  # ties: lowest synthetic index, deterministic
    pred = synthetic[np.ix_(nn, sens)]
    true = targets[:, sens]
    acc = (pred == true).mean(axis=0)
    p = true.mean(axis=0)
    base = np.maximum(p, 1.0 - p)
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = -np.where(p > 0, p * np.log2(p), 0.0) - np.where(p < 1, (1 - p) * np.log2(1 - p), 0.0)
    if ent.sum() == 0.0:
        return AttributeResult(score=0.0, per_attribute=tuple(zip(sens.tolist(), acc.tolist(), base.tolist())))
    score = float(np.sum(ent * (acc - base)) / ent.sum())
    return AttributeResult(
        score=max(0.0, score),
        per_attribute=tuple(zip(sens.tolist(), acc.tolist(), base.tolist())),
    )


@dataclass(frozen=True)
class IdentityResult:
    score: float
    n_disclosed: int


def identity_disclosure(population, synthetic, quasi_identifiers, match_tolerance: float = 0.8) -> IdentityResult:
    """Simplified meaningful-identity-disclosure rate.

    A synthetic record disclosing: its quasi-identifier bits match exactly one
    population record, and at least match_tolerance of the remaining
    attributes agree with that record. Score averages 1/group_size over
    disclosing records (group_size is 1 by construction here; the
    simplification is declared, not hidden).
    """
    population = _as_matrix(population)
    synthetic = _as_matrix(synthetic)
    qi = np.asarray(quasi_identifiers, dtype=np.int64)
    if len(qi) == 0:
        raise ValueError("quasi-identifier set must be nonempty")
    rest = np.array([j for j in range(population.shape[1]) if j not in set(qi.tolist())], dtype=np.int64)
    groups: dict[bytes, list[int]] = {}
    for i, row in enumerate(population[:, qi].astype(np.uint8)):
        groups.setdefault(row.tobytes(), []).append(i)
    disclosed = 0
    total = 0.0
    for srow in synthetic.astype(np.uint8):
        members = groups.get(srow[qi].tobytes())
        if members is None or len(members) != 1:
            continue
        if len(rest) == 0:
            agree = 1.0
        else:
            agree = float((population[members[0], rest] == srow[rest]).mean())
        if agree >= match_tolerance:
            disclosed += 1
            total += 1.0  # 1/group_size with group_size == 1
    n = len(synthetic)
    return IdentityResult(score=total / n if n else 0.0, n_disclosed=disclosed)


@dataclass
class PrivacySuiteResult:
    nnaa: NnaaResult
    membership: MembershipResult
    attribute: AttributeResult
    identity: IdentityResult
    threshold: float = RISK_THRESHOLD

    @property
    def passed(self) -> bool:
        return all(
            s < self.threshold
            for s in (self.nnaa.score, self.membership.score, self.attribute.score, self.identity.score)
        )

    def rows(self):
        return [
            ("nnaa_risk", self.nnaa.score),
            ("membership_inference", self.membership.score),
            ("attribute_inference", self.attribute.score),
            ("identity_disclosure", self.identity.score),
        ]


def run_privacy_suite(
    train,
    eval_,
    synthetic,
    key_attrs,
    sensitive_attrs,
    quasi_identifiers,
    membership_targets=None,
    membership_truth=None,
    seed: int = 0,
    match_tolerance: float = 0.8,
    sample_size: int | None = None,
) -> PrivacySuiteResult:
    """All four attacks; membership targets default to half train, half eval."""
    train = _as_matrix(train)
    eval_ = _as_matrix(eval_)
    synthetic = _as_matrix(synthetic)
    if membership_targets is None:
        k = min(len(train), len(eval_))
        membership_targets = np.concatenate([train[:k], eval_[:k]])
        membership_truth = np.concatenate([np.ones(k, dtype=bool), np.zeros(k, dtype=bool)])
    return PrivacySuiteResult(
        nnaa=nnaa_risk(train, eval_, synthetic, seed=seed, sample_size=sample_size),
        membership=membership_inference(membership_targets, membership_truth, synthetic),
        attribute=attribute_inference(
            np.concatenate([train, eval_]), synthetic, key_attrs, sensitive_attrs
        ),
        identity=identity_disclosure(train, synthetic, quasi_identifiers, match_tolerance),
    )
