"""Score a labeled cohort with simulated probabilities, then AUROC/AUPRC + bootstrap."""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..evalharness.metrics import BootstrapResult, auprc, auroc, bootstrap_metric
from ..generation.sampling import SamplingConfig
from .simulate import SimulationEstimate, simulate_probability
from .tasks import TaskConfig, expand_outcomes

__all__ = ["TaskMetrics", "evaluate_task", "write_task_metrics"]


@dataclass
class TaskMetrics:
    task_name: str
    n_examples: int
    n_positive_labels: int
    auroc: BootstrapResult
    auprc: BootstrapResult
    scores: list[float]
    labels: list[int]
    estimates: list[SimulationEstimate]
    n_capped: int


def evaluate_task(
    model,
    cohort,
    task: TaskConfig,
    seed: int = 0,
    n_bootstrap: int = 1000,
    ancestry=None,
    sampling: SamplingConfig | None = None,
    n_threads: int = 1,
) -> TaskMetrics:
    """cohort: iterable of (prefix_tokens, label). Per-patient simulation
    bundles draw from independent streams keyed by (seed, patient index), so
    any thread count reproduces the same scores."""
    cohort = list(cohort)
    labels = [int(lbl) for _, lbl in cohort]
    if len(set(labels)) < 2:
        raise ValueError("cohort must contain both classes")
    outcome_ids = expand_outcomes(task, ancestry)

    def one(i):
        prefix, _ = cohort[i]
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        return simulate_probability(model, prefix, task, rng, sampling=sampling, outcome_ids=outcome_ids)

    indices = range(len(cohort))
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as ex:
            estimates = list(ex.map(one, indices))
    else:
        estimates = [one(i) for i in indices]
    scores = [e.probability for e in estimates]
    return TaskMetrics(
        task_name=task.task_name,
        n_examples=len(cohort),
        n_positive_labels=sum(labels),
        auroc=bootstrap_metric(scores, labels, auroc, n_bootstrap, seed),
        auprc=bootstrap_metric(scores, labels, auprc, n_bootstrap, seed),
        scores=scores,
        labels=labels,
        estimates=estimates,
        n_capped=sum(1 for e in estimates if e.capped),
    )


def write_task_metrics(path, metrics: TaskMetrics):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["metric", "value", "sd", "ci_low", "ci_high"])
        for name, b in (("auroc", metrics.auroc), ("auprc", metrics.auprc)):
            w.writerow([name, b.point, b.sd, b.ci_low, b.ci_high])
        w.writerow(["n_examples", metrics.n_examples, "", "", ""])
        w.writerow(["n_positive_labels", metrics.n_positive_labels, "", "", ""])
        w.writerow(["n_capped_estimates", metrics.n_capped, "", "", ""])
