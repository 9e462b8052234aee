"""Paragraph, sentence and token segmentation with absolute character offsets.

The tokenizer is a rule-based approximation of a chemistry-aware tokenizer.
Its behaviour is pinned by regression fixtures in ``tests/test_segment.py``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import RangeError

PARAGRAPH_MODES = ("newline", "blankline")
TOKEN_KINDS = ("word", "number", "chemical", "punctuation", "unit")
CHEM_TOKEN = "[CHEM]"


@dataclass(frozen=True, order=True)
class CharSpan:
    """Half-open character range ``[start, end)``."""

    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise RangeError(f"invalid span [{self.start}, {self.end})")

    def __len__(self):
        return self.end - self.start

    def overlaps(self, other: "CharSpan") -> bool:
        return self.start < other.end and other.start < self.end

    def contains(self, offset: int) -> bool:
        return self.start <= offset < self.end


@dataclass(frozen=True)
class Token:
    span: CharSpan
    surface: str
    kind: str


@dataclass(frozen=True)
class Sentence:
    index: int
    span: CharSpan
    # [first, last) positions into the parent paragraph's token tuple
    token_range: tuple[int, int]


@dataclass(frozen=True)
class Paragraph:
    index: int
    span: CharSpan
    sentences: tuple[Sentence, ...]
    tokens: tuple[Token, ...]

    def sentence_tokens(self, sentence: Sentence) -> tuple[Token, ...]:
        lo, hi = sentence.token_range
        return self.tokens[lo:hi]


# --- paragraphs -------------------------------------------------------------

_SEPARATORS = {
    "newline": re.compile(r"(?:\r?\n)+"),
    "blankline": re.compile(r"\r?\n(?:[ \t\f\v]*\r?\n)+"),
}


def paragraph_ranges(text: str, mode: str = "newline") -> list[tuple[int, int]]:
    """Character ranges of non-blank paragraphs, stripped of edge whitespace."""
    try:
        sep = _SEPARATORS[mode]
    except KeyError:
        raise ValueError(f"unknown paragraph mode {mode!r}") from None
    ranges = []
    pos = 0
    for m in sep.finditer(text):
        ranges.append((pos, m.start()))
        pos = m.end()
    ranges.append((pos, len(text)))

    out = []
    for lo, hi in ranges:
        seg = text[lo:hi]
        stripped = seg.strip()
        if not stripped:
            continue
        lead = len(seg) - len(seg.lstrip())
        out.append((lo + lead, lo + lead + len(stripped)))
    return out


def split_paragraphs(text: str, mode: str = "newline") -> list[Paragraph]:
    paragraphs = []
    for i, (lo, hi) in enumerate(paragraph_ranges(text, mode)):
        sentences = []
        tokens: list[Token] = []
        for j, sent in enumerate(split_sentences(text[lo:hi], offset=lo)):
            first = len(tokens)
            tokens.extend(tokenize(text[sent.start:sent.end], offset=sent.start))
            sentences.append(Sentence(j, sent, (first, len(tokens))))
        paragraphs.append(Paragraph(i, CharSpan(lo, hi), tuple(sentences), tuple(tokens)))
    return paragraphs


# --- sentences --------------------------------------------------------------

_SENTENCE_END = re.compile(r"[.!?]+(?=\s+[A-Z0-9])")

# lowercased chunk preceding a period that does not end a sentence
PROTECTED_ABBREVIATIONS = frozenset(
    """
    eq equiv equivs approx wt vol ca e.g i.e etc fig figs no nos ex ref refs
    vs cf al resp sat aq conc dil soln temp abs calcd anal prep
    """.split()
)


def _is_protected(text: str, period: int) -> bool:
    lo = period
    while lo > 0 and not text[lo - 1].isspace():
        lo -= 1
    chunk = text[lo:period].lstrip("([")
    if not chunk:
        return False
    if len(chunk) == 1 and chunk.isupper():
        return True  # initials, e.g. "J. Org. Chem."
    return chunk.lower() in PROTECTED_ABBREVIATIONS


def split_sentences(paragraph_text: str, offset: int = 0) -> list[CharSpan]:
    """Sentence spans tiling ``paragraph_text``; offsets shifted by ``offset``.

    Each sentence runs up to the start of the next one, so trailing
    whitespace belongs to the preceding sentence.
    """
    if not paragraph_text.strip():
        return []
    starts = [0]
    for m in _SENTENCE_END.finditer(paragraph_text):
        if _is_protected(paragraph_text, m.start()):
            continue
        nxt = m.end()
        while nxt < len(paragraph_text) and paragraph_text[nxt].isspace():
            nxt += 1
        if nxt < len(paragraph_text):
            starts.append(nxt)
    bounds = starts + [len(paragraph_text)]
    return [CharSpan(offset + a, offset + b) for a, b in zip(bounds, bounds[1:]) if a < b]


# --- tokens -----------------------------------------------------------------

CHEM_SUFFIXES = (
    "yl", "ane", "ene", "yne", "ol", "ide", "ate", "ite", "ine", "one", "aldehyde",
    "amide", "amine", "oate", "ium", "azole", "idine", "oxy", "ic", "ile", "ether",
)
_SUFFIX_RE = re.compile(r"(?:%s)$" % "|".join(sorted(CHEM_SUFFIXES, key=len, reverse=True)), re.I)
_LOCANT_PREFIX_RE = re.compile(
    r"^(?:\((?:[RSEZ]|\d+[RSEZ])(?:,\s?\d*[RSEZ])*\)-"
    r"|\d+[a-z']?(?:,\d+[a-z']?)*-"
    r"|[NOS](?:,[NOS])*-)"
    r"(?=.*[A-Za-z]{2})"
)
_BRACKET_LOCANT_RE = re.compile(r"\(\d+[A-Za-z]?\)|\[\d[\d,.]*[a-z]?\]")
_CHEM_CHARS_RE = re.compile(r"^[A-Za-z0-9\-,()\[\]'+]+$")
_SCAN_RE = re.compile(
    r"""
     (?P<chem>\[CHEM\])
    |(?P<number>\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)
    |(?P<unit>(?:°C|℃|mmol|µmol|μmol|mol|mg|µg|μg|kg|g|mL|ml|µL|μL|L|h|hr|hrs|min|mM|M|rpm|MHz|Hz|ppm|atm|bar|psi|nm|Pa|kPa)(?![^\W_]))
    |(?P<word>[^\W_]+)
    |(?P<punctuation>\S)
    """,
    re.X,
)
_TRAILING = ".,;:!?"


def _balanced(s: str) -> bool:
    return s.count("(") == s.count(")") and s.count("[") == s.count("]")


def is_chemical_name(s: str) -> bool:
    """Morphological test for hyphen/comma/bracket-bearing chemical names."""
    if not _CHEM_CHARS_RE.match(s) or not any(c.isalpha() for c in s):
        return False
    if not any(c in "-,()[]" for c in s) or not _balanced(s):
        return False
    if s[0] in "-," or s[-1] in "-,":
        return False
    if _SUFFIX_RE.search(s) and sum(c.isalpha() for c in s) >= 4:
        return True
    return bool(_LOCANT_PREFIX_RE.match(s) or _BRACKET_LOCANT_RE.search(s))


def _chemical_core(chunk: str) -> tuple[int, int] | None:
    lo, hi = 0, len(chunk)
    changed = True
    while changed and lo < hi:
        changed = False
        while hi > lo and chunk[hi - 1] in _TRAILING:
            hi -= 1
            changed = True
        core = chunk[lo:hi]
        if core.endswith(")") and core.count(")") > core.count("("):
            hi -= 1
            changed = True
        elif core.endswith("]") and core.count("]") > core.count("["):
            hi -= 1
            changed = True
        elif core.startswith("(") and core.count("(") > core.count(")"):
            lo += 1
            changed = True
        elif core.startswith("[") and core.count("[") > core.count("]"):
            lo += 1
            changed = True
    core = chunk[lo:hi]
    if len(core) > 2 and core[0] == "(" and core[-1] == ")" and _balanced(core[1:-1]):
        if is_chemical_name(core[1:-1]):
            return lo + 1, hi - 1
    if core and core != CHEM_TOKEN and is_chemical_name(core):
        return lo, hi
    return None


def _scan(text: str, lo: int, hi: int, offset: int, out: list[Token]) -> None:
    pos = lo
    while pos < hi:
        m = _SCAN_RE.match(text, pos, hi)
        kind = m.lastgroup
        if kind == "chem":
            kind = "chemical"
        s, e = m.span()
        out.append(Token(CharSpan(offset + s, offset + e), text[s:e], kind))
        pos = e


def tokenize(text: str, offset: int = 0) -> list[Token]:
    """Split ``text`` into tokens whose spans are shifted by ``offset``.

    Rules, in priority order: chemical-like names with hyphens, commas or
    bracketed locants stay whole; numbers (decimal/exponent) stay whole;
    common unit strings stay whole; everything else splits into word runs
    and single punctuation characters.
    """
    tokens: list[Token] = []
    for m in re.finditer(r"\S+", text):
        chunk = m.group()
        core = _chemical_core(chunk)
        if core is None:
            _scan(text, m.start(), m.end(), offset, tokens)
            continue
        a, b = m.start() + core[0], m.start() + core[1]
        _scan(text, m.start(), a, offset, tokens)
        tokens.append(Token(CharSpan(offset + a, offset + b), text[a:b], "chemical"))
        _scan(text, b, m.end(), offset, tokens)
    return tokens
