"""L2-regularized logistic regression fit by gradient descent with backtracking."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LogisticModel", "fit_logistic"]


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass
class LogisticModel:
    weights: np.ndarray
    intercept: float
    converged: bool
    n_iterations: int
    final_grad_norm: float

    def decision(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights + self.intercept

    def predict_proba(self, X) -> np.ndarray:
        return _sigmoid(self.decision(X))

    def predict(self, X) -> np.ndarray:
        return (self.decision(X) >= 0).astype(np.int64)


def fit_logistic(X, y, l2: float = 0.0, max_iter: int = 5000, tol: float = 1e-6) -> LogisticModel:
    """Minimize mean log-loss + (l2/2)||w||^2 (intercept unpenalized).

    Plain gradient descent with a backtracking line search, stopping at
    gradient norm < tol or max_iter.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError("X must be (n, d) and y (n,)")
    if y.min() == y.max():
        raise ValueError("labels are single-class")
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0

    def loss_grad(w, b):
        z = X @ w + b
        # log(1 + exp(-s z)) computed stably
        m = np.logaddexp(0.0, -z) * y + np.logaddexp(0.0, z) * (1.0 - y)
        p = _sigmoid(z)
        r = p - y
        gw = X.T @ r / n + l2 * w
        gb = float(r.mean())
        return float(m.mean() + 0.5 * l2 * (w @ w)), gw, gb

    loss, gw, gb = loss_grad(w, b)
    step = 1.0
    it = 0
    gnorm = float(np.sqrt(gw @ gw + gb * gb))
    while gnorm >= tol and it < max_iter:
        it += 1
        # backtracking on the Armijo condition
        while True:
            w2 = w - step * gw
            b2 = b - step * gb
            loss2, gw2, gb2 = loss_grad(w2, b2)
            if loss2 <= loss - 0.5 * step * (gw @ gw + gb * gb) or step < 1e-12:
                break
            step *= 0.5
        w, b, loss, gw, gb = w2, b2, loss2, gw2, gb2
        gnorm = float(np.sqrt(gw @ gw + gb * gb))
        step = min(step * 2.0, 1e6)
    return LogisticModel(weights=w, intercept=float(b), converged=gnorm < tol,
                         n_iterations=it, final_grad_norm=gnorm)
