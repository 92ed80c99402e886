"""Log-gamma, digamma, and the Gamma log-density used by the time-to-event head.

lgamma uses the Lanczos approximation (g=7, 9 coefficients), accurate to well
under 1e-10 over the parameter range the model produces; digamma uses the
ascending recurrence plus an asymptotic tail. Both are vectorized and avoid
any dependency beyond numpy.
"""
from __future__ import annotations

import numpy as np

from . import tensor as T

__all__ = ["lgamma_value", "digamma_value", "gamma_log_pdf"]

_LANCZOS_G = 7.0
_LANCZOS_COEF = np.array(
    [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ]
)
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


def _lgamma_core(x):
    # valid for x >= 0.5
    z = x - 1.0
    acc = np.full_like(z, _LANCZOS_COEF[0])
    for i in range(1, len(_LANCZOS_COEF)):
        acc = acc + _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(acc)


def lgamma_value(x):
    """log|Gamma(x)| for x > 0, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0.0):
        raise ValueError("lgamma_value requires x > 0")
    small = x < 0.5
    if not np.any(small):
        return _lgamma_core(x)
    # reflection: logGamma(x) = log(pi / sin(pi x)) - logGamma(1 - x)
    safe = np.where(small, 1.0, x)
    refl = np.log(np.pi / np.sin(np.pi * np.where(small, x, 0.5)))
    return np.where(small, refl - _lgamma_core(1.0 - np.where(small, x, 0.5)), _lgamma_core(safe))


def digamma_value(x):
    """psi(x) for x > 0, elementwise: recurrence below 6, asymptotic series above."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0.0):
        raise ValueError("digamma_value requires x > 0")
    x = x.copy()
    out = np.zeros_like(x)
    for _ in range(6):
        low = x < 6.0
        if not np.any(low):
            break
        out = np.where(low, out - 1.0 / x, out)
        x = np.where(low, x + 1.0, x)
    inv = 1.0 / x
    inv2 = inv * inv
    tail = (
        np.log(x)
        - 0.5 * inv
        - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)))
    )
    return out + tail


def gamma_log_pdf(alpha: T.Tensor, beta: T.Tensor, t):
    """log p(t; alpha, beta) under the shape-rate Gamma, differentiable in alpha, beta.

    log p = alpha*log(beta) - logGamma(alpha) + (alpha - 1)*log(t) - beta*t.
    t is a positive constant (scalar or array matching alpha/beta).
    """
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr <= 0.0):
        raise ValueError("gamma_log_pdf requires t > 0; apply the half-day offset upstream")
    if np.any(alpha.data <= 0.0) or np.any(beta.data <= 0.0):
        raise ValueError("gamma_log_pdf requires alpha > 0 and beta > 0")
    term1 = T.mul(alpha, T.log(beta))
    term2 = T.lgamma(alpha)
    term3 = T.mul(T.add_const(alpha, -1.0), T.constant(np.log(t_arr)))
    term4 = T.mul(beta, T.constant(t_arr))
    return T.sub(T.add(T.sub(term1, term2), term3), term4)
