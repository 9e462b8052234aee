"""Linear-chain CRF over the B/I/O label set.

Scores are kept in log space. Forbidden transitions carry ``-inf`` and
receive zero gradient, so they stay forbidden through training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError

LABELS = ("B", "I", "O")
B, I, O = 0, 1, 2
N_LABELS = 3


def default_mask():
    """Allowed transitions ``(3, 3)`` and allowed start labels ``(3,)``."""
    allowed = np.ones((N_LABELS, N_LABELS), dtype=bool)
    allowed[O, I] = False
    start_allowed = np.array([True, False, True])
    return allowed, start_allowed


@dataclass
class CrfParams:
    W: np.ndarray          # (d_p, 3) emission weights
    b: np.ndarray          # (3,) emission bias
    trans: np.ndarray      # (3, 3), -inf where forbidden
    start: np.ndarray      # (3,), -inf where forbidden
    end: np.ndarray        # (3,)

    @classmethod
    def zeros(cls, dim, masked=True):
        p = cls(np.zeros((dim, N_LABELS)), np.zeros(N_LABELS), np.zeros((N_LABELS, N_LABELS)),
                np.zeros(N_LABELS), np.zeros(N_LABELS))
        if masked:
            p.apply_mask()
        return p

    def apply_mask(self, allowed=None, start_allowed=None):
        if allowed is None:
            allowed, start_allowed = default_mask()
        self.trans = np.where(allowed, self.trans, -np.inf)
        self.start = np.where(start_allowed, self.start, -np.inf)
        return self

    def emissions(self, X):
        return np.asarray(X) @ self.W + self.b


def _lse(a, axis=None):
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis) if axis is not None else out.item()


def forward_backward(E, trans, start, end):
    """Log-space alpha/beta tables and ``log Z`` for emissions ``E`` ``(L, 3)``."""
    L = E.shape[0]
    alpha = np.empty((L, N_LABELS))
    beta = np.empty((L, N_LABELS))
    alpha[0] = start + E[0]
    for t in range(1, L):
        alpha[t] = _lse(alpha[t - 1][:, None] + trans, axis=0) + E[t]
    beta[L - 1] = end
    for t in range(L - 2, -1, -1):
        beta[t] = _lse(trans + (E[t + 1] + beta[t + 1])[None, :], axis=1)
    log_z = _lse(alpha[L - 1] + end)
    return alpha, beta, log_z


def log_partition(E, trans, start, end) -> float:
    return forward_backward(E, trans, start, end)[2]


def marginals(E, trans, start, end):
    """Node marginals ``(L, 3)`` and pairwise marginals ``(L-1, 3, 3)``."""
    alpha, beta, log_z = forward_backward(E, trans, start, end)
    with np.errstate(invalid="ignore"):
        node = np.exp(alpha + beta - log_z)
        pair = np.exp(alpha[:-1, :, None] + trans[None] + (E[1:] + beta[1:])[:, None, :] - log_z)
    return np.nan_to_num(node), np.nan_to_num(pair), log_z


def sequence_score(E, tags, trans, start, end) -> float:
    s = start[tags[0]] + end[tags[-1]] + sum(E[t, y] for t, y in enumerate(tags))
    return s + sum(trans[a, b] for a, b in zip(tags, tags[1:]))


def crf_log_likelihood(X, gold, params: CrfParams, source=None):
    """``log p(gold | X)`` and its gradients.

    Returns ``(log_likelihood, grads)`` with ``grads`` keyed ``W``, ``b``,
    ``trans``, ``start``, ``end`` and ``X``.
    """
    X = np.asarray(X, dtype=np.float64)
    gold = np.asarray(gold, dtype=np.int64)
    E = params.emissions(X)
    node, pair, log_z = marginals(E, params.trans, params.start, params.end)
    score = sequence_score(E, gold, params.trans, params.start, params.end)
    if not np.isfinite(score):
        where = f" in {source}" if source else ""
        raise TrainingError(f"gold tag sequence violates the transition constraints{where}")

    L = len(gold)
    onehot = np.zeros((L, N_LABELS))
    onehot[np.arange(L), gold] = 1.0
    dE = onehot - node
    dtrans = -pair.sum(axis=0)
    np.add.at(dtrans, (gold[:-1], gold[1:]), 1.0)
    dstart = -node[0].copy()
    dstart[gold[0]] += 1.0
    dend = -node[-1].copy()
    dend[gold[-1]] += 1.0
    # forbidden entries are constants, never parameters
    dtrans[~np.isfinite(params.trans)] = 0.0
    dstart[~np.isfinite(params.start)] = 0.0
    grads = {
        "W": X.T @ dE,
        "b": dE.sum(axis=0),
        "trans": dtrans,
        "start": dstart,
        "end": dend,
        "X": dE @ params.W.T,
    }
    return score - log_z, grads


def viterbi_path(E, trans, start, end) -> list[int]:
    """Highest-scoring label sequence; ties go to the lower label index."""
    L = E.shape[0]
    if L == 0:
        return []
    delta = start + E[0]
    back = np.zeros((L, N_LABELS), dtype=np.int64)
    for t in range(1, L):
        cand = delta[:, None] + trans
        back[t] = np.argmax(cand, axis=0)
        delta = cand[back[t], np.arange(N_LABELS)] + E[t]
    path = [int(np.argmax(delta + end))]
    for t in range(L - 1, 0, -1):
        path.append(int(back[t, path[-1]]))
    return path[::-1]


def viterbi(X, params: CrfParams) -> list[str]:
    return [LABELS[k] for k in viterbi_path(params.emissions(X), params.trans, params.start, params.end)]
