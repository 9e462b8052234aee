"""Windowed inference with overlap stitching."""

from __future__ import annotations

import numpy as np

from ..corpus import Document
from ..encode import ContextualStore
from ..errors import ParseError
from ..labeling import GRANULARITIES, ExtractedSpan, tags_to_spans
from .crf import LABELS
from .model import Model


def window_starts(n_units: int, window: int) -> list[int]:
    """Window starts with stride ``window // 2``; the last window ends at the document end."""
    if n_units <= window:
        return [0] if n_units else []
    stride = max(1, window // 2)
    starts = list(range(0, n_units - window + 1, stride))
    if starts[-1] + window < n_units:
        starts.append(n_units - window)
    return starts


def stitch(n_units: int, windows) -> list[int]:
    """Merge per-window ``(start, labels, confidences)`` into one label per unit.

    Where windows overlap, the label with the highest confidence wins; an
    exact tie keeps the earlier window's label.
    """
    labels = np.full(n_units, -1, dtype=np.int64)
    best = np.full(n_units, -np.inf)
    for start, lab, conf in windows:
        sl = slice(start, start + len(lab))
        better = conf > best[sl]
        labels[sl] = np.where(better, lab, labels[sl])
        best[sl] = np.where(better, conf, best[sl])
    return labels.tolist()


def predict_tags(model: Model, doc: Document, store: ContextualStore | None = None) -> list[str]:
    model.check_input(doc)
    fd = model.featurize(doc, store, with_gold=False)
    W = model.config.decode.window
    windows = []
    for s in window_starts(fd.n_units, W):
        lab, conf = model.decode_window(fd, s, min(s + W, fd.n_units))
        windows.append((s, lab, conf))
    return [LABELS[k] for k in stitch(fd.n_units, windows)]


def predict(model: Model, doc: Document, store: ContextualStore | None = None) -> list[ExtractedSpan]:
    return tags_to_spans(predict_tags(model, doc, store), model.config.labeling.repair)


def format_predictions(doc_id: str, spans, granularity: str) -> str:
    return "".join(f"{doc_id}\t{s.begin}\t{s.end}\t{granularity}\n" for s in spans)


def parse_predictions(text: str, source=None) -> tuple[dict, str | None]:
    """Read ``doc_id<TAB>begin<TAB>end<TAB>granularity`` lines.

    Returns ``({doc_id: [ExtractedSpan]}, granularity)``; mixed granularities
    are rejected.
    """
    out: dict = {}
    grans = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 4 or not fields[1].isdigit() or not fields[2].isdigit():
            raise ParseError("expected doc_id<TAB>begin<TAB>end<TAB>granularity", line=lineno, source=source)
        doc_id, begin, end, gran = fields
        if gran not in GRANULARITIES:
            raise ParseError(f"unknown granularity {gran!r}", line=lineno, source=source)
        grans.add(gran)
        out.setdefault(doc_id, []).append(ExtractedSpan(int(begin), int(end)))
    if len(grans) > 1:
        raise ParseError(f"mixed granularities {sorted(grans)}", source=source)
    return out, (grans.pop() if grans else None)
