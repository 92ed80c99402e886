"""Time-gated boolean functions: the labeling rules and the hand-built router.

The hand-designed network shows that with the interval available as its own
input, fixed weights and a hard threshold suffice to route (x1, x2) into XOR
below an 8-day gap and AND at 8 days or more. All arithmetic here is exact
integer/float work on fixed matrices; nothing is trained.
"""
from __future__ import annotations

import numpy as np

__all__ = ["logic_label", "handcrafted_forward", "handcrafted_activations", "LOGIC_DOMAIN"]

LOGIC_DOMAIN = {"t_min": 0, "t_max": 28}

_W1 = np.array(
    [
        [1, 0, 0, 1, 0, 0],
        [0, -1, 0, 0, 1, 0],
        [0, 0, 1, 0, 0, 1],
    ],
    dtype=np.float64,
)
_B1 = np.array([0.0, 7.5, 0.0, 0.0, -7.5, 0.0])
_W2 = np.array(
    [
        [1, 0, 0, 0],
        [1, 1, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 1, 0],
        [0, 0, 1, 1],
        [0, 0, 0, 1],
    ],
    dtype=np.float64,
)
_B2 = np.array([-1.5, -1.5, -1.5, -1.5])
_SEL_XOR = np.array([[1, 0], [0, 1], [0, 0], [0, 0]], dtype=np.float64)
_SEL_AND = np.array([[0, 0], [0, 0], [1, 0], [0, 1]], dtype=np.float64)


def _step(x):
    """Modified ReLU: 0 for x <= 0, 1 for x > 0."""
    return (np.asarray(x) > 0).astype(np.int64)


def logic_label(x1: int, x2: int, t1: int, t2: int) -> int:
    """First matching rule of the ordered five-rule list decides the label."""
    if not (x1 in (0, 1) and x2 in (0, 1)):
        raise ValueError("x1, x2 must be binary")
    if not (0 <= t1 <= t2 <= LOGIC_DOMAIN["t_max"]):
        raise ValueError("need 0 <= t1 <= t2 <= 28")
    dt = t2 - t1
    if dt % 4 == 0 and x1 == 1:
        return 1 - x2
    if dt % 3 == 0 and x1 == 0:
        return x2
    if dt <= 7:
        return x1 ^ x2
    if dt <= 14:
        return x1 & x2
    return x1 | x2


def handcrafted_activations(x1: int, dt: int, x2: int):
    """(a1, a2, y) of the fixed two-layer router on input [x1, dt, x2]."""
    if x1 not in (0, 1) or x2 not in (0, 1) or dt < 0:
        raise ValueError("inputs must be binary events with a nonnegative gap")
    x = np.array([x1, dt, x2], dtype=np.float64)
    a1 = _step(x @ _W1 + _B1)
    a2 = _step(a1 @ _W2 + _B2)
    xor_in = a2 @ _SEL_XOR
    and_in = a2 @ _SEL_AND
    y = int((int(xor_in[0]) ^ int(xor_in[1])) | (int(and_in[0]) & int(and_in[1])))
    return a1, a2, y


def handcrafted_forward(x1: int, dt: int, x2: int) -> int:
    return handcrafted_activations(x1, dt, x2)[2]
