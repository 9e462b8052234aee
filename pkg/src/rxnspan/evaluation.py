"""Strict and fuzzy span matching, tag accuracy, and report formatting.

Fuzzy recall counts gold spans that have at least one prediction whose
begin and end both lie within the tolerance. Fuzzy precision applies the
same test from the prediction side; that half is a local convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputError
from .labeling import ExtractedSpan

FUZZY_PRECISION_NOTE = "fuzzy precision counts predictions with a gold span within tolerance (local convention)"


@dataclass(frozen=True)
class Scores:
    precision: float
    recall: float
    f1: float
    match_count: int
    gold_count: int = 0
    pred_count: int = 0
    # predictions matched to some gold span (differs from match_count for fuzzy)
    pred_match_count: int = 0


def harmonic(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _ratio(num: int, den: int, other_den: int) -> float:
    if den == 0:
        return 1.0 if other_den == 0 else 0.0
    return num / den


def scores_from_counts(gold_matched: int, n_gold: int, n_pred: int, pred_matched=None) -> Scores:
    pred_matched = gold_matched if pred_matched is None else pred_matched
    p = _ratio(pred_matched, n_pred, n_gold)
    r = _ratio(gold_matched, n_gold, n_pred)
    return Scores(p, r, harmonic(p, r), gold_matched, n_gold, n_pred, pred_matched)


def _check(spans, name):
    spans = sorted(ExtractedSpan(*s) for s in spans)
    for s in spans:
        if s.begin < 0 or s.end < s.begin:
            raise InputError(f"{name}: invalid span {tuple(s)}")
    for a, b in zip(spans, spans[1:]):
        if b.begin <= a.end:
            raise InputError(f"{name}: overlapping spans {tuple(a)} and {tuple(b)}")
    return spans


def strict_match_score(gold, pred) -> Scores:
    gold, pred = _check(gold, "gold"), _check(pred, "pred")
    matches = len(set(gold) & set(pred))
    return scores_from_counts(matches, len(gold), len(pred))


def _near(a, b, tol):
    return abs(a.begin - b.begin) <= tol and abs(a.end - b.end) <= tol


def fuzzy_match_score(gold, pred, tolerance: int = 1) -> Scores:
    if tolerance < 0:
        raise InputError("tolerance must be non-negative")
    gold, pred = _check(gold, "gold"), _check(pred, "pred")
    gold_matched = sum(any(_near(g, p, tolerance) for p in pred) for g in gold)
    pred_matched = sum(any(_near(g, p, tolerance) for g in gold) for p in pred)
    return scores_from_counts(gold_matched, len(gold), len(pred), pred_matched)


def tag_accuracy(gold_tags, pred_tags) -> float:
    gold_tags, pred_tags = list(gold_tags), list(pred_tags)
    if len(gold_tags) != len(pred_tags):
        raise InputError(f"tag sequences differ in length: {len(gold_tags)} vs {len(pred_tags)}")
    if not gold_tags:
        return 1.0
    return sum(a == b for a, b in zip(gold_tags, pred_tags)) / len(gold_tags)


@dataclass
class DocResult:
    doc_id: str
    strict: Scores
    fuzzy: Scores
    tag_accuracy: float | None


@dataclass
class MatchReport:
    strict: Scores
    fuzzy: Scores
    tag_accuracy: float | None
    tolerance: int = 1
    per_document: list[DocResult] = field(default_factory=list)


def evaluate(gold: dict, pred: dict, tolerance: int = 1, gold_tags=None, pred_tags=None) -> MatchReport:
    """Micro-averaged report over documents.

    ``gold`` and ``pred`` map doc_id to span lists. Documents missing from
    ``pred`` count as having no predictions; unknown ids in ``pred`` are an
    error. Tag accuracy is computed when both tag maps are given.
    """
    unknown = sorted(set(pred) - set(gold))
    if unknown:
        raise InputError(f"predictions for unknown documents: {', '.join(unknown)}")
    per_doc = []
    s_match = f_gold = f_pred = n_gold = n_pred = 0
    acc_hits = acc_total = 0
    for doc_id in sorted(gold):
        g, p = gold[doc_id], pred.get(doc_id, [])
        s = strict_match_score(g, p)
        f = fuzzy_match_score(g, p, tolerance)
        acc = None
        if gold_tags is not None and pred_tags is not None:
            gt, pt = gold_tags[doc_id], pred_tags[doc_id]
            acc = tag_accuracy(gt, pt)
            acc_hits += sum(a == b for a, b in zip(gt, pt))
            acc_total += len(gt)
        per_doc.append(DocResult(doc_id, s, f, acc))
        s_match += s.match_count
        f_gold += f.match_count
        f_pred += f.pred_match_count
        n_gold += len(g)
        n_pred += len(p)
    accuracy = None
    if gold_tags is not None and pred_tags is not None:
        accuracy = acc_hits / acc_total if acc_total else 1.0
    return MatchReport(
        strict=scores_from_counts(s_match, n_gold, n_pred),
        fuzzy=scores_from_counts(f_gold, n_gold, n_pred, f_pred),
        tag_accuracy=accuracy,
        tolerance=tolerance,
        per_document=per_doc,
    )


def _kv_block(prefix, s: Scores):
    return [
        (f"{prefix}.precision", s.precision),
        (f"{prefix}.recall", s.recall),
        (f"{prefix}.f1", s.f1),
        (f"{prefix}.match_count", s.match_count),
    ]


def report_items(report: MatchReport):
    items = _kv_block("strict", report.strict) + _kv_block("fuzzy", report.fuzzy)
    items.append(("fuzzy.tolerance", report.tolerance))
    if report.tag_accuracy is not None:
        items.append(("tag_accuracy", report.tag_accuracy))
    items += [("gold_spans", report.strict.gold_count), ("predicted_spans", report.strict.pred_count)]
    for d in report.per_document:
        items += _kv_block(f"per_doc.{d.doc_id}.strict", d.strict)
        items += _kv_block(f"per_doc.{d.doc_id}.fuzzy", d.fuzzy)
        if d.tag_accuracy is not None:
            items.append((f"per_doc.{d.doc_id}.tag_accuracy", d.tag_accuracy))
    return items


def _fmt(v):
    return f"{v:.6f}" if isinstance(v, float) else str(v)


def report_to_kv(report: MatchReport) -> str:
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in report_items(report))


def parse_kv(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        if line.strip():
            k, _, v = line.partition("=")
            out[k.strip()] = v.strip()
    return out


def report_table(report: MatchReport) -> str:
    rows = [("strict", report.strict), (f"fuzzy(t={report.tolerance})", report.fuzzy)]
    lines = [f"{'match':<12}{'P':>9}{'R':>9}{'F1':>9}{'matched':>9}"]
    for name, s in rows:
        lines.append(f"{name:<12}{s.precision:>9.4f}{s.recall:>9.4f}{s.f1:>9.4f}{s.match_count:>9d}")
    if report.tag_accuracy is not None:
        lines.append(f"tag accuracy {report.tag_accuracy:.4f}")
    lines.append(f"gold spans {report.strict.gold_count}, predicted spans {report.strict.pred_count}")
    lines.append(f"note: {FUZZY_PRECISION_NOTE}")
    return "\n".join(lines) + "\n"
