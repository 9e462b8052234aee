"""Offline chemical-name recognition and ``[CHEM]`` masking."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .corpus import Document, ReactionAnnotation
from .segment import CHEM_SUFFIXES, CHEM_TOKEN, CharSpan, Paragraph, Sentence, Token

PATTERNS_VERSION = "1"

ELEMENTS = frozenset(
    """
    H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni Cu
    Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe Cs
    Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg Tl
    Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr D
    """.split()
)

# words that parse as element sequences but are ordinary English or lab jargon
FORMULA_STOPLIST = frozenset(
    """
    as at be bi by can cob con cons cos he hi his ho how hoc in is it no
    nos of on or os pi sb so sub sic sin sip son up us we who was bin ban bus
    nab nap nip pun puns cup cubs hops ions icon iron irons scan
    nmr hplc lcms ms es ir uv tlc rt wo pct ion ions
    """.split()
)

_ELEMENT_SEQ = re.compile(r"^(?:(?:%s)\d*)+$" % "|".join(sorted(ELEMENTS, key=len, reverse=True)))
_ELEMENT_TOKEN = re.compile(r"(%s)\d*" % "|".join(sorted(ELEMENTS, key=len, reverse=True)))

_SUFFIX = "(?i:%s)" % "|".join(sorted(CHEM_SUFFIXES, key=len, reverse=True))
_LOCANT = r"(?:\d+[a-z']?|[NOS]|[RSEZ]|tert|sec|iso|neo|cis|trans|n|t)"
_STEMS = (
    "meth", "eth", "prop", "but", "pent", "hex", "hept", "oct", "phen", "benz", "tolu",
    "chlor", "brom", "fluor", "iod", "amin", "amid", "hydr", "nitr", "oxo", "pyr",
    "pyrid", "pyrimid", "piperid", "morpholin", "imidazol", "indol", "quinol",
    "thi", "sulf", "carb", "acet", "cycl", "naphth", "furan", "oxaz", "triaz",
)

# ordered, versioned morphology patterns; evaluated after the exact lexicon
MORPHOLOGY_PATTERNS = (
    # locant-hyphen-stem with a chemical suffix, e.g. 4-nitrobenzaldehyde
    re.compile(r"^(?:[(\[]?%s(?:,%s)*[)\]]?-)+[A-Za-z()\[\],\d\-']*%s$" % (_LOCANT, _LOCANT, _SUFFIX)),
    # bracketed multi-part names, e.g. (2,4-dichlorophenyl)methanol
    re.compile(r"^[A-Za-z\d]*[(\[][\d,A-Za-z\-']+[)\]][A-Za-z\d\-,()\[\]']*%s$" % _SUFFIX),
    # single-word systematic names built from known stems, e.g. chlorobenzene
    re.compile(r"^[a-z]*(?:%s)[a-z]*%s$" % ("|".join(_STEMS), _SUFFIX), re.I),
)


@dataclass
class ChemLexicon:
    names: frozenset[str] = frozenset()
    patterns: tuple = MORPHOLOGY_PATTERNS
    stoplist: frozenset[str] = FORMULA_STOPLIST
    patterns_version: str = PATTERNS_VERSION

    def __post_init__(self):
        self.names = frozenset(n.casefold() for n in self.names)


def parse_lexicon(text: str) -> set[str]:
    names = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            names.add(line)
    return names


def load_lexicon(path=None, patterns_version: str = PATTERNS_VERSION) -> ChemLexicon:
    """Load a lexicon file; ``None`` loads the bundled default list."""
    if patterns_version != PATTERNS_VERSION:
        raise ValueError(f"unsupported chemmask patterns version {patterns_version!r}")
    if path is None:
        text = resources.files("rxnspan").joinpath("data/chem_lexicon.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return ChemLexicon(frozenset(parse_lexicon(text)))


def is_formula(s: str, stoplist=FORMULA_STOPLIST) -> bool:
    if len(s) < 2 or not s[0].isupper() or s.casefold() in stoplist:
        return False
    if not _ELEMENT_SEQ.match(s):
        return False
    parts = _ELEMENT_TOKEN.findall(s)
    return len(parts) >= 2 or any(c.isdigit() for c in s)


def is_chemical(surface: str, lexicon: ChemLexicon) -> bool:
    if surface == CHEM_TOKEN:
        return False
    if surface.casefold() in lexicon.names:
        return True
    if any(p.match(surface) for p in lexicon.patterns):
        return True
    return is_formula(surface, lexicon.stoplist)


def recognize_chems(tokens, lexicon: ChemLexicon) -> list[int]:
    """Indices of tokens recognised as chemical names.

    Order of tests: exact lexicon hit, morphology patterns, formula grammar.
    ``[CHEM]`` itself is never recognised, which keeps masking idempotent.
    """
    out = []
    for i, tok in enumerate(tokens):
        surface = tok if isinstance(tok, str) else tok.surface
        if is_chemical(surface, lexicon):
            out.append(i)
    return out


def _shift(offset: int, edits, *, end: bool = False) -> int:
    """Map an offset of the original text into the masked text.

    ``edits`` is a sorted list of ``(start, end, new_len)``; an offset inside a
    replaced token snaps to the corresponding edge of the replacement.
    """
    delta = 0
    for s, e, n in edits:
        if offset < s or (end and offset == s):
            break
        if offset < e or (end and offset == e):
            return s + delta + (n if end else 0)
        delta += n - (e - s)
    return offset + delta


def mask_chems(doc: Document, lexicon: ChemLexicon) -> Document:
    """Replace every recognised chemical token with ``[CHEM]``.

    Paragraph, sentence and token structure is preserved; all offsets are
    recomputed against the new text and annotations follow their units.
    """
    edits = []
    replaced = set()
    for p in doc.paragraphs:
        for i in recognize_chems(p.tokens, lexicon):
            tok = p.tokens[i]
            edits.append((tok.span.start, tok.span.end, len(CHEM_TOKEN)))
            replaced.add((p.index, i))
    if not edits:
        return replace(doc, masked=True, original=doc.original or doc)
    edits.sort()

    pieces, pos = [], 0
    for s, e, _ in edits:
        pieces.append(doc.text[pos:s])
        pieces.append(CHEM_TOKEN)
        pos = e
    pieces.append(doc.text[pos:])
    text = "".join(pieces)

    def span(cs: CharSpan) -> CharSpan:
        return CharSpan(_shift(cs.start, edits), _shift(cs.end, edits, end=True))

    paragraphs = []
    for p in doc.paragraphs:
        tokens = []
        for i, t in enumerate(p.tokens):
            ns = span(t.span)
            if (p.index, i) in replaced:
                tokens.append(Token(ns, CHEM_TOKEN, "chemical"))
            else:
                tokens.append(Token(ns, t.surface, t.kind))
        sentences = tuple(Sentence(s.index, span(s.span), s.token_range) for s in p.sentences)
        paragraphs.append(Paragraph(p.index, span(p.span), sentences, tuple(tokens)))

    annotations = []
    for a in doc.annotations:
        ns = span(a.span)
        annotations.append(ReactionAnnotation(a.id, ns, a.label, text[ns.start:ns.end]))
    return Document(doc.doc_id, text, tuple(paragraphs), tuple(annotations),
                    masked=True, original=doc.original or doc)
