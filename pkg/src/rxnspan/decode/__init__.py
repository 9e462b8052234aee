"""Unit-sequence taggers: linear, trigram window and linear-chain CRF."""

import numpy as np

from ..encode import birnn_forward

from .checkpoint import checkpoint_bytes, load_checkpoint, save_checkpoint
from .crf import (
    LABELS,
    CrfParams,
    crf_log_likelihood,
    default_mask,
    forward_backward,
    log_partition,
    marginals,
    sequence_score,
    viterbi,
    viterbi_path,
)
from .model import FeaturizedDoc, Model
from .predict import (
    format_predictions,
    parse_predictions,
    predict,
    predict_tags,
    stitch,
    window_starts,
)
from .train import EpochRecord, TrainResult, train, training_windows, validation_f1
from .window import WindowParams, linear_decode, trigram_decode, window_loss, window_scores


def contextualize_units(unit_vectors, params, cell="tanh", prefix="ctx"):
    """Bidirectional recurrent pass over a sequence of unit vectors, ``(L, 2h)``."""
    X = np.asarray(unit_vectors, dtype=np.float64)
    outputs, _, _ = birnn_forward(X[None], [X.shape[0]], params, prefix, cell)
    return outputs[0]
