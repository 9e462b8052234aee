"""Character spans to unit-level IOB2 tags, and back."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

from .corpus import Corpus, Document
from .errors import IntegrityError, ParseError
from .segment import CharSpan

B, I, O = "B", "I", "O"
GRANULARITIES = ("paragraph", "sentence")
REPAIR_RULES = ("b", "o")


class ExtractedSpan(NamedTuple):
    """Inclusive unit-index range."""

    begin: int
    end: int


@dataclass(frozen=True)
class TagSequence:
    doc_id: str
    granularity: str
    tags: tuple[str, ...]

    def __len__(self):
        return len(self.tags)


@dataclass(frozen=True)
class CorpusStats:
    file_count: int
    word_count: int
    paragraph_count: int
    avg_tokens_per_paragraph: float
    avg_paragraphs_per_document: float
    reaction_count: int


def unit_spans(doc: Document, granularity: str = "paragraph") -> list[CharSpan]:
    if granularity == "paragraph":
        return [p.span for p in doc.paragraphs]
    if granularity == "sentence":
        return [s.span for p in doc.paragraphs for s in p.sentences]
    raise ValueError(f"unknown granularity {granularity!r}")


def unit_tokens(doc: Document, granularity: str = "paragraph") -> list[tuple]:
    if granularity == "paragraph":
        return [p.tokens for p in doc.paragraphs]
    if granularity == "sentence":
        return [p.sentence_tokens(s) for p in doc.paragraphs for s in p.sentences]
    raise ValueError(f"unknown granularity {granularity!r}")


def merge_char_spans(spans) -> list[CharSpan]:
    """Union of overlapping spans; spans that merely touch stay separate."""
    merged: list[CharSpan] = []
    for s in sorted(spans):
        if merged and s.start < merged[-1].end:
            last = merged.pop()
            s = CharSpan(last.start, max(last.end, s.end))
        merged.append(s)
    return merged


def gold_unit_spans(doc: Document, granularity: str = "paragraph") -> list[ExtractedSpan]:
    """Unit-index images of the (merged) gold annotations of ``doc``."""
    units = unit_spans(doc, granularity)
    starts = [u.start for u in units]
    images = []
    for span in merge_char_spans(a.span for a in doc.annotations):
        # first unit whose end lies after the span start, last unit starting before its end
        lo = bisect.bisect_right(starts, span.start) - 1
        if lo < 0 or units[lo].end <= span.start:
            lo += 1
        hi = bisect.bisect_left(starts, span.end) - 1
        if lo > hi or lo >= len(units):
            raise IntegrityError(
                f"{doc.doc_id}: annotation [{span.start}, {span.end}) covers no "
                f"{granularity}"
            )
        images.append(ExtractedSpan(lo, hi))
    # two annotations sharing a boundary unit collapse into one unit span
    out: list[ExtractedSpan] = []
    for s in images:
        if out and s.begin <= out[-1].end:
            s = ExtractedSpan(out[-1].begin, max(out[-1].end, s.end))
            out.pop()
        out.append(s)
    return out


def spans_to_tag_list(spans, length: int) -> list[str]:
    tags = [O] * length
    for begin, end in spans:
        tags[begin] = B
        for k in range(begin + 1, end + 1):
            tags[k] = I
    return tags


def spans_to_tags(doc: Document, granularity: str = "paragraph") -> TagSequence:
    """B on the unit holding a reaction's first character, I through its last."""
    n = len(unit_spans(doc, granularity))
    tags = spans_to_tag_list(gold_unit_spans(doc, granularity), n)
    return TagSequence(doc.doc_id, granularity, tuple(tags))


def is_valid_iob2(tags) -> bool:
    prev = O
    for t in tags:
        if t not in (B, I, O):
            return False
        if t == I and prev == O:
            return False
        prev = t
    return True


def repair_tags(tags, rule: str = "b") -> list[str]:
    """Make a B/I/O sequence IOB2-valid.

    An ``I`` with no open span becomes ``B`` (rule ``"b"``) or ``O`` (rule ``"o"``).
    """
    if rule not in REPAIR_RULES:
        raise ValueError(f"unknown repair rule {rule!r}")
    out = []
    prev = O
    for t in tags:
        if t == I and prev == O:
            t = B if rule == "b" else O
        out.append(t)
        prev = t
    return out


def tags_to_spans(tags, rule: str = "b") -> list[ExtractedSpan]:
    if isinstance(tags, TagSequence):
        tags = tags.tags
    spans = []
    begin = None
    for k, t in enumerate(repair_tags(tags, rule)):
        if t == B or t == O:
            if begin is not None:
                spans.append(ExtractedSpan(begin, k - 1))
            begin = k if t == B else None
    if begin is not None:
        spans.append(ExtractedSpan(begin, len(tags) - 1))
    return spans


def corpus_stats(corpus: Corpus) -> CorpusStats:
    files = len(corpus.documents)
    words = sum(len(p.tokens) for d in corpus.documents for p in d.paragraphs)
    paras = sum(len(d.paragraphs) for d in corpus.documents)
    reactions = sum(len(merge_char_spans(a.span for a in d.annotations)) for d in corpus.documents)
    return CorpusStats(
        file_count=files,
        word_count=words,
        paragraph_count=paras,
        avg_tokens_per_paragraph=words / paras if paras else 0.0,
        avg_paragraphs_per_document=paras / files if files else 0.0,
        reaction_count=reactions,
    )


@dataclass(frozen=True)
class NoiseReport:
    doc_id: str
    # (unit index, fraction of its characters outside every gold span)
    units: tuple[tuple[int, float], ...]
    threshold: float

    @property
    def over_threshold(self) -> int:
        return sum(f > self.threshold for _, f in self.units)

    @property
    def share_over_threshold(self) -> float:
        return self.over_threshold / len(self.units) if self.units else 0.0


def boundary_noise_report(doc: Document, granularity: str = "paragraph",
                          threshold: float = 0.4) -> NoiseReport:
    units = unit_spans(doc, granularity)
    gold = merge_char_spans(a.span for a in doc.annotations)
    tags = spans_to_tags(doc, granularity).tags
    rows = []
    for k, (unit, tag) in enumerate(zip(units, tags)):
        if tag == O:
            continue
        inside = sum(max(0, min(unit.end, g.end) - max(unit.start, g.start)) for g in gold)
        rows.append((k, (len(unit) - inside) / len(unit)))
    return NoiseReport(doc.doc_id, tuple(rows), threshold)


def aggregate_noise(reports) -> tuple[int, int, float]:
    """Total reaction units, units over threshold, and their share."""
    total = sum(len(r.units) for r in reports)
    over = sum(r.over_threshold for r in reports)
    return total, over, (over / total if total else 0.0)


# --- tag files --------------------------------------------------------------

def format_tag_line(seq: TagSequence) -> str:
    return f"{seq.doc_id}\t{seq.granularity}\t{' '.join(seq.tags)}\n"


def write_tag_file(seqs, path) -> None:
    Path(path).write_text("".join(format_tag_line(s) for s in seqs), encoding="utf-8")


def parse_tag_lines(text: str, source=None) -> list[TagSequence]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError("expected doc_id<TAB>granularity<TAB>tags", line=lineno, source=source)
        doc_id, gran, tags = fields
        tags = tuple(tags.split())
        if gran not in GRANULARITIES or any(t not in (B, I, O) for t in tags):
            raise ParseError(f"bad granularity or tag in {line!r}", line=lineno, source=source)
        out.append(TagSequence(doc_id, gran, tags))
    return out


def read_tag_file(path) -> list[TagSequence]:
    path = Path(path)
    return parse_tag_lines(path.read_text(encoding="utf-8"), source=path.name)
