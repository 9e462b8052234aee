from hypothesis import given, settings
from hypothesis import strategies as st

from rxnspan.segment import CharSpan, split_paragraphs, split_sentences, tokenize


def surfaces(text):
    return [t.surface for t in tokenize(text)]


def para_texts(text, mode="newline"):
    return [text[p.span.start:p.span.end] for p in split_paragraphs(text, mode)]


def test_paragraph_modes():
    assert para_texts("A\nB\n\nC") == ["A", "B", "C"]
    assert para_texts("A\nB\n\nC", "blankline") == ["A\nB", "C"]
    assert split_paragraphs("") == []
    assert para_texts("  \n\nX\n \n") == ["X"]


def test_paragraph_offsets_are_absolute():
    text = "first line\nsecond line\n"
    ps = split_paragraphs(text)
    assert [p.index for p in ps] == [0, 1]
    assert ps[1].span == CharSpan(11, 22)
    assert all(text[t.span.start:t.span.end] == t.surface for p in ps for t in p.tokens)


def test_sentence_examples():
    assert len(split_sentences("Stir for 2 h. Cool to rt.")) == 2
    assert len(split_sentences("Add 2.5 g of NaCl.")) == 1
    assert split_sentences("") == []


def test_sentence_protection_list():
    assert len(split_sentences("Add 1.2 eq. Of the base slowly.")) == 1
    assert len(split_sentences("Heat to approx. 80 °C. Filter.")) == 2
    assert len(split_sentences("Prepared by J. Smith. Then dried.")) == 2


def test_sentences_tile_paragraph():
    text = "Stir for 2 h.  Cool to rt. Filter!"
    spans = split_sentences(text, offset=10)
    assert spans[0].start == 10 and spans[-1].end == 10 + len(text)
    assert all(a.end == b.start for a, b in zip(spans, spans[1:]))


def test_tokenizer_fixtures():
    assert surfaces("4-nitrobenzaldehyde (13.2 mmol)") == ["4-nitrobenzaldehyde", "(", "13.2", "mmol", ")"]
    assert surfaces("NaCl.") == ["NaCl", "."]
    assert surfaces("") == []
    assert surfaces("(2,4-dichlorophenyl)methanol in THF at 0 °C for 2 h") == [
        "(2,4-dichlorophenyl)methanol", "in", "THF", "at", "0", "°C", "for", "2", "h"]
    assert surfaces("1.5e-3 mg") == ["1.5e-3", "mg"]


def test_token_kinds():
    kinds = {t.surface: t.kind for t in tokenize("4-nitrobenzaldehyde (13.2 mmol) was added, [CHEM]")}
    assert kinds["4-nitrobenzaldehyde"] == "chemical"
    assert kinds["13.2"] == "number"
    assert kinds["mmol"] == "unit"
    assert kinds["("] == "punctuation"
    assert kinds["was"] == "word"
    assert kinds["[CHEM]"] == "chemical"


def test_no_token_crosses_sentence_boundary():
    text = "Stir for 2 h. Cool to rt."
    (p,) = split_paragraphs(text)
    for s in p.sentences:
        for t in p.sentence_tokens(s):
            assert s.span.start <= t.span.start and t.span.end <= s.span.end


_text = st.text(alphabet=st.sampled_from(list("abcXY 12.,;()-\n\t°[]")), max_size=80)


@settings(max_examples=200, deadline=None)
@given(_text, st.sampled_from(["newline", "blankline"]))
def test_segmentation_invariants(text, mode):
    ps = split_paragraphs(text, mode)
    prev = 0
    for p in ps:
        assert text[prev:p.span.start].strip() == ""  # only separator whitespace between
        prev = p.span.end
        assert p.sentences[0].span.start == p.span.start and p.sentences[-1].span.end == p.span.end
        last = p.span.start
        for t in p.tokens:
            assert text[t.span.start:t.span.end] == t.surface
            assert t.span.start >= last
            last = t.span.end
    assert text[prev:].strip() == ""
    assert split_paragraphs(text, mode) == ps
