"""Full tagger: token embeddings -> unit vectors -> (contextualiser) -> decoder."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from ..chemmask import ChemLexicon, recognize_chems
from ..config import RunConfig
from ..corpus import Document
from ..encode import (
    FEATURES,
    ContextualStore,
    EmbeddingTable,
    Vocabulary,
    birnn_backward,
    birnn_forward,
    compose,
    compose_backward,
    encode_units,
    encode_units_backward,
    feature_ids,
    init_rnn,
)
from ..encode.vocab import normalize_token
from ..errors import ConfigError
from ..labeling import spans_to_tags, unit_tokens
from .crf import LABELS, CrfParams, crf_log_likelihood, default_mask, marginals, viterbi_path
from .window import WindowParams, softmax, window_loss, window_scores

LABEL_INDEX = {t: i for i, t in enumerate(LABELS)}
RADIUS = {"linear": 0, "trigram": 1}


@dataclass
class FeaturizedDoc:
    doc_id: str
    word_ids: np.ndarray       # (N,)
    feat_ids: np.ndarray       # (N, n_features)
    contextual: np.ndarray | None  # (N, d_c)
    lengths: np.ndarray        # tokens per unit
    offsets: np.ndarray        # (U + 1,)
    gold: np.ndarray | None    # label index per unit

    @property
    def n_units(self) -> int:
        return len(self.lengths)


class Model:
    """Parameters plus the configuration that fixes every tensor shape."""

    def __init__(self, config: RunConfig, vocab: Vocabulary, params: dict, *, lexicon_names=(),
                 context_dim=0, masked=False, checksums=None, metadata=None):
        self.config = config
        self.vocab = vocab
        self.params = params
        self.lexicon = ChemLexicon(frozenset(lexicon_names))
        self.context_dim = context_dim
        self.masked = masked
        self.checksums = dict(checksums or {})
        self.metadata = dict(metadata or {})

    # -- construction ------------------------------------------------------

    @classmethod
    def build(cls, config: RunConfig, vocab: Vocabulary, rng, *, pretrained: EmbeddingTable | None = None,
              context_dim=0, lexicon: ChemLexicon | None = None, masked=False, checksums=None):
        enc, dec = config.encode, config.decode
        d_w = pretrained.dim if pretrained is not None else enc.word_dim
        params = {"emb.word": rng.uniform(-0.1, 0.1, (len(vocab), d_w))}
        if pretrained is not None:
            for token, row in zip(pretrained.tokens, pretrained.matrix):
                idx = vocab.stoi.get(normalize_token(token))
                if idx is not None:
                    params["emb.word"][idx] = row
        for name, n_values in FEATURES:
            params[f"emb.feat.{name}"] = rng.uniform(-0.1, 0.1, (n_values, enc.feature_dim))
        token_dim = d_w + context_dim + len(FEATURES) * enc.feature_dim
        if enc.paragraph_mode == "birnn":
            params.update(init_rnn(rng, token_dim, enc.hidden_dim, enc.rnn_cell, "penc"))
            unit_dim = 2 * enc.hidden_dim
        else:
            unit_dim = token_dim
        if config.contextualize:
            params.update(init_rnn(rng, unit_dim, dec.context_hidden_dim, enc.rnn_cell, "ctx"))
            unit_dim = 2 * dec.context_hidden_dim
        if dec.kind == "crf":
            crf = CrfParams.zeros(unit_dim)
            crf.W = rng.uniform(-1, 1, crf.W.shape) / np.sqrt(unit_dim)
            params.update({"crf.W": crf.W, "crf.b": crf.b, "crf.trans": crf.trans,
                           "crf.start": crf.start, "crf.end": crf.end})
        else:
            r = RADIUS[dec.kind]
            fan_in = (2 * r + 1) * unit_dim
            params["win.W"] = rng.uniform(-1, 1, (fan_in, len(LABELS))) / np.sqrt(fan_in)
            params["win.b"] = np.zeros(len(LABELS))
            if r:
                params["win.pad"] = rng.uniform(-0.1, 0.1, unit_dim)
        names = sorted(lexicon.names) if lexicon is not None else ()
        return cls(config, vocab, params, lexicon_names=names, context_dim=context_dim,
                   masked=masked, checksums=checksums)

    # -- descriptors -------------------------------------------------------

    @property
    def kind(self) -> str:
        return self.config.decode.kind

    @property
    def granularity(self) -> str:
        return self.config.labeling.granularity

    def describe(self) -> dict:
        allowed, start_allowed = default_mask()
        return {
            "labels": list(LABELS),
            "constraint_mask": allowed.astype(int).tolist(),
            "start_mask": start_allowed.astype(int).tolist(),
            "decoder": self.kind,
            "contextualize": self.config.contextualize,
            "paragraph_mode": self.config.encode.paragraph_mode,
            "rnn_cell": self.config.encode.rnn_cell,
            "granularity": self.granularity,
            "segment_mode": self.config.segment.paragraph_mode,
            "masked": self.masked,
            "context_dim": self.context_dim,
            "shapes": {k: list(v.shape) for k, v in sorted(self.params.items())},
            "vocab": self.vocab.digest(),
            "lexicon": hashlib.sha256("\n".join(sorted(self.lexicon.names)).encode()).hexdigest(),
            "embedding_files": dict(sorted(self.checksums.items())),
        }

    def fingerprint(self) -> str:
        blob = json.dumps(self.describe(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def crf_params(self) -> CrfParams:
        p = self.params
        return CrfParams(p["crf.W"], p["crf.b"], p["crf.trans"], p["crf.start"], p["crf.end"])

    def window_params(self) -> WindowParams:
        p = self.params
        r = RADIUS[self.kind]
        pad = p.get("win.pad")
        if pad is None:
            pad = np.zeros(p["win.W"].shape[0])
        return WindowParams(p["win.W"], p["win.b"], pad, r)

    # -- data --------------------------------------------------------------

    def check_input(self, doc: Document) -> None:
        if doc.masked != self.masked:
            want = "[CHEM]-masked" if self.masked else "unmasked"
            raise ConfigError(f"{doc.doc_id}: model expects {want} input (fingerprint {self.fingerprint()[:12]})")

    def featurize(self, doc: Document, store: ContextualStore | None = None, with_gold=True) -> FeaturizedDoc:
        units = unit_tokens(doc, self.granularity)
        lengths = np.array([len(u) for u in units], dtype=np.int64)
        tokens = [t for u in units for t in u]
        flags = np.zeros(len(tokens), dtype=bool)
        flags[recognize_chems(tokens, self.lexicon)] = True
        word_ids = self.vocab.indices(t.surface for t in tokens)
        feats = feature_ids(tokens, flags).reshape(len(tokens), len(FEATURES))
        contextual = None
        if self.context_dim:
            contextual = np.zeros((len(tokens), self.context_dim))
            if store is not None:
                row = 0
                for u, unit in enumerate(units):
                    contextual[row:row + len(unit)] = store.unit_matrix(doc.doc_id, u, len(unit))
                    row += len(unit)
        gold = None
        if with_gold:
            tags = spans_to_tags(doc, self.granularity).tags
            gold = np.array([LABEL_INDEX[t] for t in tags], dtype=np.int64)
        offsets = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
        return FeaturizedDoc(doc.doc_id, word_ids, feats, contextual, lengths, offsets, gold)

    # -- forward / backward ------------------------------------------------

    def _forward(self, fd: FeaturizedDoc, lo: int, hi: int):
        t0, t1 = fd.offsets[lo], fd.offsets[hi]
        ctx = fd.contextual[t0:t1] if fd.contextual is not None else None
        wid, fid = fd.word_ids[t0:t1], fd.feat_ids[t0:t1]
        X = compose(wid, fid, ctx, self.params)
        cell = self.config.encode.rnn_cell
        V, pcache = encode_units(X, fd.lengths[lo:hi], self.params, self.config.encode.paragraph_mode, cell)
        ccache = None
        if self.config.contextualize:
            Hs, _, ccache = birnn_forward(V[None], [hi - lo], self.params, "ctx", cell)
            V = Hs[0]
        return V, (wid, fid, ctx, pcache, ccache)

    def _backward(self, dH, cache, grads):
        wid, fid, ctx, pcache, ccache = cache
        if ccache is not None:
            g, dV = birnn_backward(dH[None], None, ccache)
            for k, v in g.items():
                grads[k] = grads.get(k, 0) + v
            dH = dV[0]
        dX = encode_units_backward(dH, pcache, grads)
        compose_backward(dX, wid, fid, ctx, self.params, grads)
        if not self.config.encode.train_embeddings:
            grads["emb.word"] = np.zeros_like(self.params["emb.word"])

    def unit_vectors(self, fd: FeaturizedDoc, lo=0, hi=None) -> np.ndarray:
        hi = fd.n_units if hi is None else hi
        return self._forward(fd, lo, hi)[0]

    def loss_and_grads(self, fd: FeaturizedDoc, lo: int, hi: int):
        """Negative log-likelihood (CRF) or summed cross-entropy of units ``[lo, hi)``."""
        H, cache = self._forward(fd, lo, hi)
        gold = fd.gold[lo:hi]
        if len(gold) and gold[0] == LABEL_INDEX["I"]:
            # chunk cut inside a span longer than the window: local B, as in repair rule "b"
            gold = gold.copy()
            gold[0] = LABEL_INDEX["B"]
        grads: dict = {}
        if self.kind == "crf":
            ll, g = crf_log_likelihood(H, gold, self.crf_params(), source=fd.doc_id)
            loss = -ll
            for name in ("W", "b", "trans", "start", "end"):
                grads[f"crf.{name}"] = -g[name]
            dH = -g["X"]
        else:
            wp = self.window_params()
            loss, g = window_loss(H, gold, wp)
            grads["win.W"], grads["win.b"] = g["W"], g["b"]
            if "win.pad" in self.params:
                grads["win.pad"] = g["pad"]
            dH = g["X"]
        self._backward(dH, cache, grads)
        return loss, grads

    def decode_window(self, fd: FeaturizedDoc, lo: int, hi: int):
        """Label indices for units ``[lo, hi)`` and the confidence of each label."""
        H, _ = self._forward(fd, lo, hi)
        if self.kind == "crf":
            p = self.crf_params()
            E = p.emissions(H)
            path = np.array(viterbi_path(E, p.trans, p.start, p.end), dtype=np.int64)
            node, _, _ = marginals(E, p.trans, p.start, p.end)
            return path, node[np.arange(len(path)), path]
        P = softmax(window_scores(H, self.window_params()))
        path = np.argmax(P, axis=1)
        return path, P[np.arange(len(path)), path]
