"""Document model and BRAT standoff I/O."""

from __future__ import annotations

import logging
import math
import random
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import InputError, IntegrityError, ParseError, RangeError
from .segment import CharSpan, Paragraph, split_paragraphs

log = logging.getLogger(__name__)

SPLITS = ("train", "validation", "test")
MASK_MARKER = ".masked"

_T_LINE = re.compile(r"^(T\d+)\t(\S+) (\d+ \d+(?:;\d+ \d+)*)\t(.*)$")
_LINE_BREAKS = re.compile(r"(?:\r?\n)+")


@dataclass(frozen=True)
class ReactionAnnotation:
    id: str
    span: CharSpan
    label: str
    surface: str


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str
    paragraphs: tuple[Paragraph, ...]
    annotations: tuple[ReactionAnnotation, ...] = ()
    masked: bool = False
    # pre-masking document, kept for audit
    original: "Document | None" = field(default=None, repr=False, compare=False)

    @classmethod
    def from_text(cls, doc_id, text, annotations=(), paragraph_mode="newline"):
        return cls(doc_id, text, tuple(split_paragraphs(text, paragraph_mode)), tuple(annotations))


@dataclass
class Corpus:
    documents: list[Document]
    split_assignment: dict[str, str] = field(default_factory=dict)

    def split(self, name: str) -> list[Document]:
        return [d for d in self.documents if self.split_assignment.get(d.doc_id) == name]

    def by_id(self) -> dict[str, Document]:
        return {d.doc_id: d for d in self.documents}


def parse_ann(ann_text: str, doc_text: str, labels=None, source=None) -> list[ReactionAnnotation]:
    """Parse the text-bound (``T``) lines of a BRAT ``.ann`` file.

    Relation, event, attribute and note lines are skipped. ``labels`` is an
    optional accept-set; annotations with other labels are dropped.
    """
    out = []
    for lineno, line in enumerate(ann_text.splitlines(), start=1):
        if not line.strip() or not line.startswith("T"):
            continue
        m = _T_LINE.match(line)
        if m is None:
            raise ParseError(f"malformed text-bound line: {line!r}", line=lineno, source=source)
        ann_id, label, offsets, surface = m.groups()
        if labels is not None and label not in labels:
            continue
        fragments = [tuple(map(int, f.split())) for f in offsets.split(";")]
        for start, end in fragments:
            if not (0 <= start < end <= len(doc_text)):
                raise RangeError(
                    f"{ann_id}: offsets [{start}, {end}) outside document of length {len(doc_text)}"
                )
        start, end = fragments[0][0], fragments[-1][1]
        if start >= end:
            raise RangeError(f"{ann_id}: fragments out of order")
        covered = doc_text[start:end]
        joined = " ".join(doc_text[a:b] for a, b in fragments)
        if surface not in (covered, joined):
            raise IntegrityError(
                f"{ann_id}: surface {surface!r} does not match text {joined!r}"
            )
        out.append(ReactionAnnotation(ann_id, CharSpan(start, end), label, covered))
    return out


def _fragments(a: ReactionAnnotation) -> list[tuple[int, int]]:
    frags, pos = [], 0
    for m in _LINE_BREAKS.finditer(a.surface):
        if m.start() > pos:
            frags.append((a.span.start + pos, a.span.start + m.start()))
        pos = m.end()
    if pos < len(a.surface):
        frags.append((a.span.start + pos, a.span.end))
    return frags


def write_ann(annotations) -> str:
    """Serialise annotations as BRAT ``T`` lines sorted by start offset.

    Surfaces crossing line breaks are written as discontinuous fragments,
    BRAT's convention for multi-line spans.
    """
    lines = []
    for a in sorted(annotations, key=lambda a: (a.span.start, a.span.end, a.id)):
        if len(a.surface) != len(a.span):
            raise IntegrityError(f"{a.id}: surface length does not match span")
        frags = _fragments(a)
        if not frags or frags[0][0] != a.span.start or frags[-1][1] != a.span.end:
            raise IntegrityError(f"{a.id}: span starts or ends on a line break")
        offsets = ";".join(f"{s} {e}" for s, e in frags)
        text = " ".join(a.surface[s - a.span.start:e - a.span.start] for s, e in frags)
        lines.append(f"{a.id}\t{a.label} {offsets}\t{text}\n")
    return "".join(lines)


def _read_text(path: Path) -> str:
    try:
        return path.read_bytes().decode("utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise InputError(f"{path} is not valid UTF-8: {exc}") from exc


def load_document_pair(txt_path, ann_path=None, *, labels=None, paragraph_mode="newline",
                       masked=False) -> Document:
    txt_path = Path(txt_path)
    text = _read_text(txt_path)
    annotations = []
    if ann_path is not None:
        ann_path = Path(ann_path)
        annotations = parse_ann(_read_text(ann_path), text, labels=labels, source=ann_path.name)
    doc = Document.from_text(txt_path.stem, text, annotations, paragraph_mode)
    return replace(doc, masked=masked) if masked else doc


def discover_pairs(corpus_dir) -> list[tuple[Path, Path | None]]:
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.is_dir():
        raise InputError(f"{corpus_dir} is not a directory")
    pairs = []
    for txt in sorted(corpus_dir.glob("*.txt")):
        ann = txt.with_suffix(".ann")
        pairs.append((txt, ann if ann.exists() else None))
    return pairs


def is_masked_dir(corpus_dir) -> bool:
    return (Path(corpus_dir) / MASK_MARKER).exists()


def load_corpus(corpus_dir, *, labels=None, paragraph_mode="newline", errors=None) -> Corpus:
    """Load every ``<id>.txt``/``<id>.ann`` pair in ``corpus_dir``.

    If ``errors`` is a list, per-file failures are appended to it as
    ``(path, exception)`` and the file is skipped; otherwise they propagate.
    """
    masked = is_masked_dir(corpus_dir)
    docs = []
    for txt, ann in discover_pairs(corpus_dir):
        try:
            docs.append(load_document_pair(txt, ann, labels=labels,
                                           paragraph_mode=paragraph_mode, masked=masked))
        except (InputError, ParseError, RangeError, IntegrityError) as exc:
            if errors is None:
                raise
            log.warning("skipping %s: %s", txt.name, exc)
            errors.append((ann or txt, exc))
    return Corpus(docs, {d.doc_id: "train" for d in docs})


def write_document(doc: Document, out_dir) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{doc.doc_id}.txt").write_bytes(doc.text.encode("utf-8"))
    (out_dir / f"{doc.doc_id}.ann").write_bytes(write_ann(doc.annotations).encode("utf-8"))


def assign_splits(corpus: Corpus, validation_fraction: float, seed: int) -> Corpus:
    """Move ``floor(fraction * N)`` non-test documents to validation.

    Documents already assigned to ``test`` keep that assignment.
    """
    if not (0 <= validation_fraction < 1):
        raise ValueError(f"validation fraction must be in [0, 1), got {validation_fraction}")
    pool = sorted(d.doc_id for d in corpus.documents if corpus.split_assignment.get(d.doc_id) != "test")
    random.Random(seed).shuffle(pool)
    n_val = math.floor(validation_fraction * len(pool) + 1e-9)
    assignment = {d.doc_id: "test" for d in corpus.documents
                  if corpus.split_assignment.get(d.doc_id) == "test"}
    for i, doc_id in enumerate(pool):
        assignment[doc_id] = "validation" if i < n_val else "train"
    return Corpus(list(corpus.documents), assignment)
