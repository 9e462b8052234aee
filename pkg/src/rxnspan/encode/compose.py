"""Token embedding composition and paragraph pooling."""

from __future__ import annotations

import numpy as np

from ..errors import InputError
from .features import FEATURES, feature_ids
from .rnn import birnn_backward, birnn_forward

PARAGRAPH_MODES = ("mean", "max", "birnn")


def feature_table_names():
    return [f"emb.feat.{name}" for name, _ in FEATURES]


def compose(word_ids, feat_ids, contextual, params) -> np.ndarray:
    """Concatenate word rows, contextual vectors and feature rows per token."""
    blocks = [params["emb.word"][word_ids]]
    if contextual is not None and contextual.shape[1]:
        blocks.append(contextual)
    for k, name in enumerate(feature_table_names()):
        table = params.get(name)
        if table is not None and table.shape[1]:
            blocks.append(table[feat_ids[:, k]])
    return np.concatenate(blocks, axis=1)


def compose_backward(dX, word_ids, feat_ids, contextual, params, grads) -> None:
    """Accumulate embedding-row gradients into ``grads`` in place."""
    d_w = params["emb.word"].shape[1]
    g = grads.setdefault("emb.word", np.zeros_like(params["emb.word"]))
    np.add.at(g, word_ids, dX[:, :d_w])
    col = d_w
    if contextual is not None:
        col += contextual.shape[1]
    for k, name in enumerate(feature_table_names()):
        table = params.get(name)
        if table is None or not table.shape[1]:
            continue
        d = table.shape[1]
        g = grads.setdefault(name, np.zeros_like(table))
        np.add.at(g, feat_ids[:, k], dX[:, col:col + d])
        col += d


def embed_tokens(tokens, vocab, params, contextual=None, chem_flags=None) -> np.ndarray:
    """``(T, d_w + d_c + d_f)`` matrix for one unit's tokens.

    ``contextual`` is an optional ``(T, d_c)`` block (see
    ``ContextualStore.unit_matrix``); out-of-vocabulary tokens use ``[UNK]``.
    """
    word_ids = vocab.indices(t.surface for t in tokens)
    feats = feature_ids(tokens, chem_flags)
    if len(tokens) == 0:
        dim = params["emb.word"].shape[1] + sum(params[n].shape[1] for n in feature_table_names() if n in params)
        if contextual is not None:
            dim += contextual.shape[1]
        return np.zeros((0, dim))
    return compose(word_ids, feats, contextual, params)


def encode_units(X, lengths, params, mode, cell="tanh"):
    """Reduce the concatenated token rows of several units to one vector each.

    ``X`` stacks the token rows of all units in order; ``lengths`` gives the
    token count per unit. Returns ``(vectors, cache)``.
    """
    lengths = np.asarray(lengths, dtype=np.int64)
    U = len(lengths)
    offsets = np.concatenate([[0], np.cumsum(lengths)])
    if X.shape[0] != offsets[-1]:
        raise InputError(f"token matrix has {X.shape[0]} rows, lengths sum to {offsets[-1]}")
    d = X.shape[1]
    if mode == "mean":
        M = np.zeros((U, X.shape[0]))
        for u in range(U):
            if lengths[u]:
                M[u, offsets[u]:offsets[u + 1]] = 1.0 / lengths[u]
        return M @ X, (mode, M)
    if mode == "max":
        out = np.zeros((U, d))
        arg = np.full((U, d), -1, dtype=np.int64)
        for u in range(U):
            if lengths[u]:
                seg = X[offsets[u]:offsets[u + 1]]
                idx = np.argmax(seg, axis=0)
                arg[u] = offsets[u] + idx
                out[u] = seg[idx, np.arange(d)]
        return out, (mode, arg, X.shape[0])
    if mode == "birnn":
        T = int(lengths.max()) if U else 0
        P = np.zeros((U, T, d))
        for u in range(U):
            P[u, :lengths[u]] = X[offsets[u]:offsets[u + 1]]
        _, finals, cache = birnn_forward(P, lengths, params, "penc", cell)
        return finals, (mode, cache, offsets, lengths, T)
    raise ValueError(f"unknown paragraph mode {mode!r}")


def encode_units_backward(dV, cache, grads):
    """Gradient w.r.t. the stacked token rows; parameter grads go into ``grads``."""
    mode = cache[0]
    if mode == "mean":
        return cache[1].T @ dV
    if mode == "max":
        _, arg, n = cache
        dX = np.zeros((n, dV.shape[1]))
        U, d = dV.shape
        for u in range(U):
            if arg[u, 0] >= 0:
                dX[arg[u], np.arange(d)] += dV[u]
        return dX
    _, rcache, offsets, lengths, T = cache
    U = len(lengths)
    h2 = dV.shape[1]
    g, dP = birnn_backward(np.zeros((U, T, h2)), dV, rcache)
    for k, v in g.items():
        grads[k] = grads.get(k, 0) + v
    return np.concatenate([dP[u, :lengths[u]] for u in range(U)], axis=0) if U else np.zeros((0, dP.shape[2]))


def encode_paragraph(token_matrix, params, mode="mean", cell="tanh") -> np.ndarray:
    """Fixed-size vector for one paragraph; an empty paragraph maps to zeros."""
    X = np.asarray(token_matrix, dtype=np.float64)
    if X.ndim != 2:
        raise InputError("token matrix must be 2-D")
    if mode == "birnn":
        Wx = params["penc.f.Wx"]
        if X.shape[1] != Wx.shape[0]:
            raise InputError(f"token dimension {X.shape[1]} does not match encoder input {Wx.shape[0]}")
        if X.shape[0] == 0:
            return np.zeros(2 * params["penc.f.Wh"].shape[0])
    elif X.shape[0] == 0:
        return np.zeros(X.shape[1])
    vectors, _ = encode_units(X, [X.shape[0]], params, mode, cell)
    return vectors[0]
