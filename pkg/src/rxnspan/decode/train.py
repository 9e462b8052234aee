"""Mini-batch SGD training with validation-based early stopping."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..chemmask import ChemLexicon, load_lexicon, mask_chems
from ..config import RunConfig
from ..corpus import Corpus
from ..encode import ContextualStore, EmbeddingTable, Vocabulary
from ..errors import TrainingError
from ..evaluation import scores_from_counts, strict_match_score
from ..labeling import gold_unit_spans, unit_tokens
from .crf import I
from .model import Model
from .predict import predict

log = logging.getLogger(__name__)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    validation_f1: float | None
    validation_loss: float | None = None


@dataclass
class TrainResult:
    model: Model
    history: list[EpochRecord] = field(default_factory=list)


def training_windows(n_units: int, window: int, gold=None) -> list[tuple[int, int]]:
    """Tile ``[0, n_units)`` with chunks of at most ``window`` units.

    Chunks advance by ``window``. With ``gold`` label indices, a cut that
    would start the next chunk on an I unit is moved back to that span's
    start when this leaves the current chunk non-empty.
    """
    out, lo = [], 0
    while lo < n_units:
        hi = min(lo + window, n_units)
        if gold is not None and hi < n_units:
            back = hi
            while back > lo and gold[back] == I:
                back -= 1
            if back > lo:
                hi = back
        out.append((lo, hi))
        lo = hi
    return out


def clip_gradients(grads: dict, max_norm: float) -> float:
    norm = float(np.sqrt(sum(np.sum(g * g) for g in grads.values())))
    if norm > max_norm:
        scale = max_norm / norm
        for k in grads:
            grads[k] = grads[k] * scale
    return norm


def validation_f1(model: Model, docs, store=None) -> float:
    matches = n_gold = n_pred = 0
    for doc in docs:
        gold = gold_unit_spans(doc, model.granularity)
        pred = predict(model, doc, store)
        s = strict_match_score(gold, pred)
        matches += s.match_count
        n_gold += len(gold)
        n_pred += len(pred)
    return scores_from_counts(matches, n_gold, n_pred).f1


def mean_loss(model: Model, featurized, window: int) -> float:
    """Average per-window loss over whole documents, without updating anything."""
    total, n = 0.0, 0
    for fd in featurized:
        for lo, hi in training_windows(fd.n_units, window, fd.gold):
            total += model.loss_and_grads(fd, lo, hi)[0]
            n += 1
    return total / n if n else 0.0


def prepare_documents(corpus: Corpus, config: RunConfig, lexicon: ChemLexicon) -> Corpus:
    if not config.chemmask.enabled:
        return corpus
    docs = [d if d.masked else mask_chems(d, lexicon) for d in corpus.documents]
    return Corpus(docs, dict(corpus.split_assignment))


def train(corpus: Corpus, config: RunConfig, *, lexicon: ChemLexicon | None = None,
          pretrained: EmbeddingTable | None = None, store: ContextualStore | None = None) -> TrainResult:
    """Fit a tagger on the ``train`` split, selecting by ``validation`` strict F1.

    Every random draw comes from generators seeded by ``config.run.seed``.
    """
    config.validate()
    lexicon = lexicon if lexicon is not None else load_lexicon(None, config.chemmask.patterns_version)
    corpus = prepare_documents(corpus, config, lexicon)
    train_docs = corpus.split("train")
    val_docs = corpus.split("validation")
    if not train_docs:
        raise TrainingError("no training documents")
    masked = {d.masked for d in train_docs + val_docs}
    if len(masked) > 1:
        raise TrainingError("training data mixes [CHEM]-masked and unmasked documents")
    masked = masked.pop()

    surfaces = (t.surface for d in train_docs for u in unit_tokens(d, config.labeling.granularity) for t in u)
    vocab = Vocabulary.build(surfaces, config.encode.min_count)
    if pretrained is not None:
        vocab = Vocabulary(pretrained.tokens + vocab.itos)

    init_rng = np.random.default_rng([config.seed, 0])
    order_rng = np.random.default_rng([config.seed, 1])
    checksums = {}
    if pretrained is not None:
        checksums["word"] = pretrained.checksum
    if store is not None:
        checksums["contextual"] = store.checksum
    model = Model.build(config, vocab, init_rng, pretrained=pretrained,
                        context_dim=store.dim if store is not None else 0,
                        lexicon=lexicon, masked=masked, checksums=checksums)

    featurized = [model.featurize(d, store) for d in train_docs]
    windows = [(i, lo, hi) for i, fd in enumerate(featurized)
               for lo, hi in training_windows(fd.n_units, config.decode.window, fd.gold) if hi > lo]
    if not windows:
        raise TrainingError("training documents contain no units")

    val_featurized = [model.featurize(d, store) for d in val_docs]

    dec = config.decode
    best, best_f1, best_params, best_epoch, stale = None, None, None, 0, 0
    history = []
    for epoch in range(1, dec.epochs + 1):
        order = order_rng.permutation(len(windows))
        total = 0.0
        for b, start in enumerate(range(0, len(order), dec.batch_size)):
            batch = order[start:start + dec.batch_size]
            grads: dict = {}
            loss = 0.0
            for j in batch:
                i, lo, hi = windows[j]
                l, g = model.loss_and_grads(featurized[i], lo, hi)
                loss += l
                for k, v in g.items():
                    grads[k] = grads[k] + v if k in grads else v
            if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
                raise TrainingError(f"non-finite loss or gradient at epoch {epoch}, batch {b}")
            for k in grads:
                grads[k] = grads[k] / len(batch)
            clip_gradients(grads, dec.clip_norm)
            for k, g in grads.items():
                p = model.params[k]
                finite = np.isfinite(p)
                p[finite] -= dec.learning_rate * g[finite]
            total += loss
        train_loss = total / len(windows)

        f1 = val_loss = None
        if val_docs:
            f1 = validation_f1(model, val_docs, store)
            val_loss = mean_loss(model, val_featurized, dec.window)
        history.append(EpochRecord(epoch, train_loss, f1, val_loss))
        log.info("epoch %d loss %.6f val_f1 %s", epoch, train_loss, "n/a" if f1 is None else f"{f1:.4f}")

        # strict F1 first; validation loss breaks ties so a saturated F1 keeps improving
        score = (f1, -val_loss) if val_docs else (-train_loss,)
        if best is None or score > best:
            best, best_f1, best_epoch, stale = score, f1, epoch, 0
            best_params = {k: v.copy() for k, v in model.params.items()}
        else:
            stale += 1
        if val_docs and stale >= dec.patience:
            break

    if val_docs:
        model.params = best_params
    model.metadata = {
        "seed": config.seed,
        "epochs": len(history),
        "best_epoch": best_epoch if val_docs else len(history),
        "best_validation_f1": best_f1,
        "train_documents": len(train_docs),
        "validation_documents": len(val_docs),
    }
    return TrainResult(model, history)
