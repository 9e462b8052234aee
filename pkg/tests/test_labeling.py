import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_tags
from rxnspan.corpus import Corpus, Document, ReactionAnnotation
from rxnspan.errors import IntegrityError
from rxnspan.labeling import (
    ExtractedSpan,
    TagSequence,
    aggregate_noise,
    boundary_noise_report,
    corpus_stats,
    gold_unit_spans,
    is_valid_iob2,
    parse_tag_lines,
    read_tag_file,
    repair_tags,
    spans_to_tag_list,
    spans_to_tags,
    tags_to_spans,
    write_tag_file,
)
from rxnspan.segment import CharSpan


def block_doc(n_paras=5, width=100, spans=(), doc_id="d"):
    """Paragraph k covers ``[k*width, (k+1)*width)``: ``width - 1`` letters then a newline."""
    text = "".join("x" * (width - 1) + "\n" for _ in range(n_paras))
    anns = [ReactionAnnotation(f"T{i}", CharSpan(s, e), "R", text[s:e]) for i, (s, e) in enumerate(spans, 1)]
    return Document.from_text(doc_id, text, anns)


def char_membership_tags(doc, spans):
    """Brute force: B where a span's first char lies, I for later covered paragraphs."""
    tags = []
    for p in doc.paragraphs:
        lo, hi = p.span.start, p.span.start + 100
        tag = "O"
        for s, e in spans:
            if lo <= s < hi:
                tag = "B"
            elif s < lo and e > lo and tag != "B":
                tag = "I"
        tags.append(tag)
    return tags


def test_spans_to_tags_example():
    doc = block_doc(spans=[(150, 320)])
    tags = spans_to_tags(doc).tags
    assert list(tags) == ["O", "B", "I", "I", "O"]
    assert list(tags) == char_membership_tags(doc, [(150, 320)])


def test_no_annotations_all_o():
    assert set(spans_to_tags(block_doc()).tags) == {"O"}


def test_adjacent_reactions_both_begin():
    doc = block_doc(2, spans=[(0, 99), (100, 199)])
    assert list(spans_to_tags(doc).tags) == ["B", "B"]
    assert tags_to_spans(spans_to_tags(doc).tags) == [ExtractedSpan(0, 0), ExtractedSpan(1, 1)]


def test_overlapping_annotations_merge():
    doc = block_doc(spans=[(150, 250), (200, 320)])
    assert list(spans_to_tags(doc).tags) == ["O", "B", "I", "I", "O"]
    assert corpus_stats(Corpus([doc])).reaction_count == 1


def test_annotation_in_separator_is_integrity_error():
    doc = block_doc(spans=[(99, 100)])
    with pytest.raises(IntegrityError):
        spans_to_tags(doc)


def test_tags_to_spans_examples():
    assert tags_to_spans("O B I O B".split()) == [(1, 2), (4, 4)]
    assert tags_to_spans("O I I".split()) == [(1, 2)]
    assert tags_to_spans("O O O".split()) == []
    assert tags_to_spans("O I I".split(), rule="o") == []
    assert is_valid_iob2(repair_tags("O I I B I O I".split()))
    assert repair_tags("O I I".split()) == ["O", "B", "I"]


def test_sentence_granularity():
    text = "Stir for 2 h. Cool to rt. Filter.\nDry.\n"
    start = text.index("Cool")
    doc = Document.from_text("s", text, [ReactionAnnotation("T1", CharSpan(start, start + 11), "R",
                                                            text[start:start + 11])])
    seq = spans_to_tags(doc, "sentence")
    assert list(seq.tags) == ["O", "B", "O", "O"]
    assert gold_unit_spans(doc, "sentence") == [ExtractedSpan(1, 1)]


def random_aligned_document(rng, n_units):
    spans, k = [], 0
    while k < n_units:
        if rng.random() < 0.3:
            length = rng.randint(1, 4)
            end = min(n_units - 1, k + length - 1)
            spans.append((k, end))
            k = end + 1
            if rng.random() < 0.5:
                k += 1
        else:
            k += 1
    return spans


def test_round_trip_1000_documents():
    rng = random.Random(0)
    for _ in range(1000):
        n = rng.randint(0, 30)
        spans = random_aligned_document(rng, n)
        tags = spans_to_tag_list(spans, n)
        assert tags == brute_tags(spans, n)
        assert is_valid_iob2(tags)
        assert tags_to_spans(tags) == [ExtractedSpan(*s) for s in spans]


def test_round_trip_through_documents():
    rng = random.Random(1)
    for _ in range(50):
        n = rng.randint(1, 12)
        spans = random_aligned_document(rng, n)
        # trim a few characters inside the edge units so spans are unit-aligned but not unit-exact
        char_spans = [(b * 100 + rng.randint(0, 50), e * 100 + rng.randint(50, 99)) for b, e in spans]
        doc = block_doc(n, spans=char_spans)
        assert tags_to_spans(spans_to_tags(doc).tags) == [ExtractedSpan(*s) for s in spans]


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from("BIO"), max_size=25), st.sampled_from(["b", "o"]))
def test_tags_to_spans_cover_repaired_non_o(tags, rule):
    repaired = repair_tags(tags, rule)
    assert is_valid_iob2(repaired)
    spans = tags_to_spans(tags, rule)
    covered = {k for s in spans for k in range(s.begin, s.end + 1)}
    assert covered == {k for k, t in enumerate(repaired) if t != "O"}
    assert all(a.end < b.begin for a, b in zip(spans, spans[1:]))


def test_monotonic_under_added_annotation():
    base = block_doc(6, spans=[(120, 180)])
    more = block_doc(6, spans=[(120, 180), (330, 470)])
    for a, b in zip(spans_to_tags(base).tags, spans_to_tags(more).tags):
        assert not (a != "O" and b == "O")


def test_noise_report_examples():
    doc = block_doc(spans=[(100, 320)])
    report = boundary_noise_report(doc)
    fractions = dict(report.units)
    assert fractions[1] == 0.0
    assert fractions[3] == pytest.approx(79 / 99)  # uncovered content chars 320..399 of 99
    assert report.over_threshold == 1
    assert boundary_noise_report(block_doc()).units == ()
    assert aggregate_noise([report]) == (3, 1, pytest.approx(1 / 3))


def test_corpus_stats_empty_and_known():
    empty = Document.from_text("e", "")
    s = corpus_stats(Corpus([empty]))
    assert (s.file_count, s.word_count, s.paragraph_count, s.reaction_count) == (1, 0, 0, 0)
    assert s.avg_tokens_per_paragraph == 0.0
    z = corpus_stats(Corpus([]))
    assert z.file_count == 0 and z.avg_paragraphs_per_document == 0.0

    a = Document.from_text("a", "Stir the mixture.\nFilter it.\n")
    b = Document.from_text("b", "Dry.\n")
    s = corpus_stats(Corpus([a, b]))
    assert (s.file_count, s.word_count, s.paragraph_count) == (2, 9, 3)
    assert s.avg_tokens_per_paragraph == pytest.approx(3.0)
    assert s.avg_paragraphs_per_document == pytest.approx(1.5)


def test_tag_file_round_trip(tmp_path):
    seqs = [TagSequence("a", "paragraph", ("O", "B", "I")), TagSequence("b", "sentence", ())]
    write_tag_file(seqs, tmp_path / "t.tsv")
    assert (tmp_path / "t.tsv").read_text().splitlines()[0] == "a\tparagraph\tO B I"
    assert read_tag_file(tmp_path / "t.tsv") == seqs
    with pytest.raises(Exception):
        parse_tag_lines("a\tparagraph\tO X\n")
