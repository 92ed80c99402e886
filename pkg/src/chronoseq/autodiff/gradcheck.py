"""Central finite-difference verification of analytic gradients."""
from __future__ import annotations

import numpy as np

from .tensor import backward, first_nonfinite

__all__ = ["grad_check", "GradCheckError"]


class GradCheckError(RuntimeError):
    """Raised when a graph evaluates to non-finite values during checking."""


def grad_check(build_loss, params, epsilon=1e-5):
    """Max relative error between analytic and central-difference gradients.

    build_loss() must rebuild the scalar loss graph from the current contents
    of the parameter tensors; it is re-evaluated 2x per parameter element.
    Relative error is |analytic - numeric| / max(1, |analytic|), maximized
    over every element of every parameter.
    """
    loss = build_loss()
    if not np.all(np.isfinite(loss.data)):
        raise GradCheckError(f"non-finite loss from op {first_nonfinite(loss)!r}")
    for p in params:
        p.zero_grad()
    backward(loss)
    analytic = []
    for p in params:
        g = p.grad if p.grad is not None else np.zeros_like(p.data)
        if not np.all(np.isfinite(g)):
            raise GradCheckError(f"non-finite gradient on parameter {p.name!r}")
        analytic.append(g.copy())

    worst = 0.0
    for p, g in zip(params, analytic):
        flat = p.data.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            up = float(build_loss().data)
            flat[i] = orig - epsilon
            down = float(build_loss().data)
            flat[i] = orig
            if not (np.isfinite(up) and np.isfinite(down)):
                raise GradCheckError(f"non-finite perturbed loss on parameter {p.name!r}")
            numeric = (up - down) / (2.0 * epsilon)
            err = abs(gflat[i] - numeric) / max(1.0, abs(gflat[i]))
            if err > worst:
                worst = err
    return worst
