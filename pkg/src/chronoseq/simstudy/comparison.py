"""Train the time-token and summation encoders on one dataset; emit accuracy curves."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ..autodiff import backward
from ..autodiff.tensor import first_nonfinite
from ..training.optimizer import AdamW
from .encoder import (
    EncoderConfig,
    batch_accuracy,
    batch_loss,
    encode_summation_batch,
    encode_timetoken_batch,
    init_encoder_params,
)
from .logic import LOGIC_DOMAIN, logic_label

__all__ = ["SimDataset", "sample_dataset", "AccuracyCurve", "ComparisonResult", "run_comparison", "write_curves_csv"]


@dataclass
class SimDataset:
    x1: np.ndarray
    t1: np.ndarray
    x2: np.ndarray
    t2: np.ndarray
    y: np.ndarray

    def __len__(self):
        return len(self.y)

    def batch(self, idx):
        return self.x1[idx], self.t1[idx], self.x2[idx], self.t2[idx], self.y[idx]

    def full(self):
        return self.x1, self.t1, self.x2, self.t2, self.y


def sample_dataset(n_samples: int, seed: int) -> SimDataset:
    """Uniform samples of (x1, x2, t1, t2) with t1 <= t2, labeled by the rule list."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xDA7A]))
    t_max = LOGIC_DOMAIN["t_max"]
    x1 = rng.integers(0, 2, size=n_samples)
    x2 = rng.integers(0, 2, size=n_samples)
    ta = rng.integers(0, t_max + 1, size=n_samples)
    tb = rng.integers(0, t_max + 1, size=n_samples)
    t1 = np.minimum(ta, tb)
    t2 = np.maximum(ta, tb)
    y = np.array([logic_label(int(a), int(b), int(u), int(v)) for a, b, u, v in zip(x1, x2, t1, t2)])
    return SimDataset(x1=x1, t1=t1, x2=x2, t2=t2, y=y)


@dataclass
class AccuracyCurve:
    model: str
    points: list[tuple[int, float]] = field(default_factory=list)  # (step, full-train accuracy)

    def accuracy_at(self, step: int) -> float:
        best = None
        for s, acc in self.points:
            if s <= step:
                best = acc
        if best is None:
            raise ValueError(f"no accuracy recorded at or before step {step}")
        return best

    def first_step_reaching(self, target: float):
        for s, acc in self.points:
            if acc >= target:
                return s
        return None


@dataclass
class ComparisonResult:
    timetoken: AccuracyCurve
    summation: AccuracyCurve
    convergence_step: int | None  # first eval step where the time-token model clears the target
    target_accuracy: float
    seed: int


def _train_one(name, encode_fn, dataset, cfg: EncoderConfig, seed: int, max_steps: int,
               stop_at=None) -> AccuracyCurve:
    params = init_encoder_params(cfg, seed)
    opt = AdamW(params, lr=cfg.learning_rate, weight_decay=cfg.weight_decay,
                warmup_steps=cfg.warmup_steps)
    curve = AccuracyCurve(model=name)
    full = dataset.full()
    curve.points.append((0, batch_accuracy(params, cfg, encode_fn, full)))
    if stop_at is not None and curve.points[-1][1] >= stop_at:
        return curve
    n = len(dataset)
    step = 0
    epoch = 0
    while step < max_steps:
        order = np.random.default_rng(np.random.SeedSequence([seed, 0xE90C, epoch])).permutation(n)
        epoch += 1
        for lo in range(0, n, cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            params.zero_grads()
            loss = batch_loss(params, cfg, encode_fn, dataset.batch(idx))
            if not np.isfinite(loss.data):
                raise RuntimeError(f"{name}: non-finite loss at step {step + 1} (op {first_nonfinite(loss)!r})")
            backward(loss)
            opt.step()
            step += 1
            if step % cfg.eval_every == 0:
                acc = batch_accuracy(params, cfg, encode_fn, full)
                curve.points.append((step, acc))
                if stop_at is not None and acc >= stop_at:
                    return curve
            if step >= max_steps:
                break
    return curve


def run_comparison(
    cfg: EncoderConfig = EncoderConfig(),
    n_samples: int = 1000,
    seed: int = 0,
    stop_at_convergence: bool = False,
    target_accuracy: float = 0.99,
) -> ComparisonResult:
    """Train both models on identical data; record full-train accuracy every
    eval_every steps (step 0 included).

    With stop_at_convergence, the time-token model halts at its first
    evaluation >= target_accuracy and the summation model trains only up to
    that step, which is all the convergence comparison needs.
    """
    dataset = sample_dataset(n_samples, seed)
    tt_curve = _train_one(
        "timetoken",
        encode_timetoken_batch,
        dataset,
        cfg,
        seed,
        cfg.steps,
        stop_at=target_accuracy if stop_at_convergence else None,
    )
    conv = tt_curve.first_step_reaching(target_accuracy)
    sum_steps = cfg.steps if not stop_at_convergence else (conv if conv is not None else cfg.steps)
    sum_curve = _train_one("summation", encode_summation_batch, dataset, cfg, seed, max(sum_steps, 0))
    return ComparisonResult(
        timetoken=tt_curve,
        summation=sum_curve,
        convergence_step=conv,
        target_accuracy=target_accuracy,
        seed=seed,
    )


def write_curves_csv(path, result: ComparisonResult):
    tt = dict(result.timetoken.points)
    sm = dict(result.summation.points)
    steps = sorted(set(tt) | set(sm))
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["step", "acc_timetoken", "acc_sum"])
        for s in steps:
            w.writerow([s, tt.get(s, ""), sm.get(s, "")])
