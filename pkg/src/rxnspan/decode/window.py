"""Per-unit softmax taggers over a window of neighbouring unit vectors.

Radius 0 is the linear decoder, radius 1 the trigram decoder. Positions
past either edge of the sequence see a trainable pad vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from .crf import LABELS, N_LABELS


@dataclass
class WindowParams:
    W: np.ndarray      # ((2r+1)*d, 3)
    b: np.ndarray      # (3,)
    pad: np.ndarray    # (d,)
    radius: int = 0

    @classmethod
    def zeros(cls, dim, radius=0):
        return cls(np.zeros(((2 * radius + 1) * dim, N_LABELS)), np.zeros(N_LABELS), np.zeros(dim), radius)


def window_inputs(X, pad, radius):
    """Rows ``concat(x[t-r], ..., x[t+r])`` with ``pad`` outside the sequence."""
    L, d = X.shape
    P = np.vstack([np.tile(pad, (radius, 1)), X, np.tile(pad, (radius, 1))])
    return np.hstack([P[k:k + L] for k in range(2 * radius + 1)]) if L else np.zeros((0, (2 * radius + 1) * d))


def window_scores(X, params: WindowParams):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] * (2 * params.radius + 1) != params.W.shape[0]:
        raise InputError(f"unit vectors of shape {X.shape} do not fit weights {params.W.shape}")
    return window_inputs(X, params.pad, params.radius) @ params.W + params.b


def softmax(S):
    Z = S - S.max(axis=1, keepdims=True)
    e = np.exp(Z)
    return e / e.sum(axis=1, keepdims=True)


def window_loss(X, gold, params: WindowParams):
    """Summed cross-entropy and gradients keyed ``W``, ``b``, ``pad``, ``X``."""
    X = np.asarray(X, dtype=np.float64)
    gold = np.asarray(gold, dtype=np.int64)
    L, d = X.shape
    r = params.radius
    Z = window_inputs(X, params.pad, r)
    S = Z @ params.W + params.b
    P = softmax(S)
    m = S.max(axis=1)
    log_norm = m + np.log(np.exp(S - m[:, None]).sum(axis=1))
    loss = float(np.sum(log_norm - S[np.arange(L), gold]))
    dS = P.copy()
    dS[np.arange(L), gold] -= 1.0
    dZ = dS @ params.W.T
    dPad = np.zeros((L + 2 * r, d))
    for k in range(2 * r + 1):
        dPad[k:k + L] += dZ[:, k * d:(k + 1) * d]
    grads = {
        "W": Z.T @ dS,
        "b": dS.sum(axis=0),
        "pad": dPad[:r].sum(axis=0) + dPad[r + L:].sum(axis=0),
        "X": dPad[r:r + L],
    }
    return loss, grads


def _decode(X, params):
    return [LABELS[k] for k in np.argmax(window_scores(X, params), axis=1)]


def linear_decode(X, params: WindowParams) -> list[str]:
    """Per-unit argmax over softmax scores; ties go to the lowest label index."""
    if params.radius != 0:
        raise InputError("linear decoder needs radius 0")
    return _decode(X, params)


def trigram_decode(X, params: WindowParams) -> list[str]:
    """Per-unit argmax over the previous, current and next unit vectors."""
    if params.radius != 1:
        raise InputError("trigram decoder needs radius 1")
    return _decode(X, params)
