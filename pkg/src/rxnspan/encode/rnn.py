"""Batched bidirectional recurrence (tanh or LSTM cell) with exact gradients.

Sequences in a batch are right-padded; a step past a sequence's length
copies the previous state forward, so the state at the last step is the
final state of every sequence.
"""

from __future__ import annotations

import numpy as np

CELLS = ("tanh", "lstm")


def _gates(cell: str) -> int:
    return 4 if cell == "lstm" else 1


def init_rnn(rng, input_dim: int, hidden: int, cell: str, prefix: str) -> dict:
    g = _gates(cell)
    params = {}
    for direction in ("f", "b"):
        params[f"{prefix}.{direction}.Wx"] = rng.uniform(-1, 1, (input_dim, g * hidden)) / np.sqrt(input_dim)
        params[f"{prefix}.{direction}.Wh"] = rng.uniform(-1, 1, (hidden, g * hidden)) / np.sqrt(hidden)
        params[f"{prefix}.{direction}.b"] = np.zeros(g * hidden)
    return params


def _sigmoid(x):
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


def _mask(lengths, T):
    return (np.arange(T)[None, :] < np.asarray(lengths)[:, None]).astype(np.float64)


def scan_forward(X, lengths, Wx, Wh, b, cell="tanh"):
    """Run one direction over ``X`` of shape ``(B, T, d)``.

    Returns per-step states ``(B, T, h)`` and a cache for ``scan_backward``.
    """
    B, T, _ = X.shape
    h = Wh.shape[0]
    mask = _mask(lengths, T)
    H = np.zeros((B, T, h))
    hp = np.zeros((B, h))
    cp = np.zeros((B, h))
    steps = []
    for t in range(T):
        a = X[:, t] @ Wx + hp @ Wh + b
        m = mask[:, t, None]
        if cell == "tanh":
            hn = np.tanh(a)
            steps.append((hp, hn))
            hp = m * hn + (1 - m) * hp
        else:
            i, f, o = _sigmoid(a[:, :h]), _sigmoid(a[:, h:2 * h]), _sigmoid(a[:, 2 * h:3 * h])
            g = np.tanh(a[:, 3 * h:])
            cn = f * cp + i * g
            tc = np.tanh(cn)
            hn = o * tc
            steps.append((hp, cp, i, f, o, g, tc))
            hp = m * hn + (1 - m) * hp
            cp = m * cn + (1 - m) * cp
        H[:, t] = hp
    return H, (X, mask, Wx, Wh, cell, steps)


def scan_backward(dH, cache):
    """Gradients of a single-direction scan given ``dL/dH``."""
    X, mask, Wx, Wh, cell, steps = cache
    B, T, _ = X.shape
    h = Wh.shape[0]
    dX = np.zeros_like(X)
    dWx = np.zeros_like(Wx)
    dWh = np.zeros_like(Wh)
    db = np.zeros(Wx.shape[1])
    dh = np.zeros((B, h))
    dc = np.zeros((B, h))
    for t in range(T - 1, -1, -1):
        dh = dh + dH[:, t]
        m = mask[:, t, None]
        dhn = m * dh
        if cell == "tanh":
            hp, hn = steps[t]
            da = dhn * (1 - hn * hn)
        else:
            hp, cp, i, f, o, g, tc = steps[t]
            dcn = m * dc + dhn * o * (1 - tc * tc)
            da = np.concatenate(
                [dcn * g * i * (1 - i), dcn * cp * f * (1 - f), dhn * tc * o * (1 - o), dcn * i * (1 - g * g)],
                axis=1,
            )
            dc = dcn * f + (1 - m) * dc
        dWx += X[:, t].T @ da
        dWh += hp.T @ da
        db += da.sum(axis=0)
        dX[:, t] = da @ Wx.T
        dh = da @ Wh.T + (1 - m) * dh
    return dX, dWx, dWh, db


def _reverse_index(lengths, T):
    t = np.arange(T)[None, :]
    L = np.asarray(lengths)[:, None]
    return np.where(t < L, L - 1 - t, t)


def birnn_forward(X, lengths, params, prefix, cell="tanh"):
    """Bidirectional pass over padded ``X`` ``(B, T, d)``.

    Returns ``(outputs, finals, cache)`` where ``outputs[b, t]`` is the
    concatenation of forward and backward states at ``t`` and ``finals[b]``
    concatenates the last forward state with the backward state at step 0.
    """
    X = np.asarray(X, dtype=np.float64)
    B, T, _ = X.shape
    lengths = np.asarray(lengths, dtype=np.int64)
    rows = np.arange(B)[:, None]
    rev = _reverse_index(lengths, T)
    Hf, cf = scan_forward(X, lengths, params[f"{prefix}.f.Wx"], params[f"{prefix}.f.Wh"],
                          params[f"{prefix}.f.b"], cell)
    Hr, cb = scan_forward(X[rows, rev], lengths, params[f"{prefix}.b.Wx"], params[f"{prefix}.b.Wh"],
                          params[f"{prefix}.b.b"], cell)
    Hb = Hr[rows, rev]
    h = Hf.shape[2]
    outputs = np.concatenate([Hf, Hb], axis=2)
    finals = np.zeros((B, 2 * h))
    if T:
        finals = np.concatenate([Hf[:, -1], Hr[:, -1]], axis=1)
    return outputs, finals, (cf, cb, rev, prefix, h)


def birnn_backward(d_outputs, d_finals, cache):
    """Returns ``(grads, dX)``; ``grads`` is keyed by full parameter name."""
    cf, cb, rev, prefix, h = cache
    B, T = rev.shape
    rows = np.arange(B)[:, None]
    dHf = np.array(d_outputs[:, :, :h], dtype=np.float64)
    dHb = d_outputs[:, :, h:]
    dHr = np.array(dHb[rows, rev], dtype=np.float64)
    if T and d_finals is not None:
        dHf[:, -1] += d_finals[:, :h]
        dHr[:, -1] += d_finals[:, h:]
    dXf, dWxf, dWhf, dbf = scan_backward(dHf, cf)
    dXr, dWxb, dWhb, dbb = scan_backward(dHr, cb)
    dX = dXf + dXr[rows, rev]
    grads = {
        f"{prefix}.f.Wx": dWxf, f"{prefix}.f.Wh": dWhf, f"{prefix}.f.b": dbf,
        f"{prefix}.b.Wx": dWxb, f"{prefix}.b.Wh": dWhb, f"{prefix}.b.b": dbb,
    }
    return grads, dX


def birnn_forward_backward(sequence, params, upstream, prefix="rnn", cell="tanh"):
    """Single-sequence convenience wrapper.

    ``sequence`` is ``(T, d)`` and ``upstream`` is ``dL/d outputs`` of shape
    ``(T, 2h)``. Returns ``(outputs, param_grads, input_grads)``.
    """
    X = np.asarray(sequence, dtype=np.float64)[None]
    outputs, _, cache = birnn_forward(X, [X.shape[1]], params, prefix, cell)
    grads, dX = birnn_backward(np.asarray(upstream, dtype=np.float64)[None], None, cache)
    return outputs[0], grads, dX[0]
