import random

import pytest

from rxnspan.errors import InputError
from rxnspan.evaluation import (
    evaluate,
    fuzzy_match_score,
    parse_kv,
    report_table,
    report_to_kv,
    strict_match_score,
    tag_accuracy,
)


def random_spans(rng, n_units=40, p=0.15):
    spans, k = [], 0
    while k < n_units:
        if rng.random() < p:
            end = min(n_units - 1, k + rng.randint(0, 3))
            spans.append((k, end))
            k = end + 1 + rng.randint(0, 1)
        else:
            k += 1
    return spans


def brute_scores(gold, pred, tol=None):
    """Independent count-based oracle with the empty-set conventions spelled out."""
    def near(a, b):
        if tol is None:
            return a == b
        return abs(a[0] - b[0]) <= tol and abs(a[1] - b[1]) <= tol
    gm = sum(1 for g in gold if any(near(g, p) for p in pred))
    pm = sum(1 for p in pred if any(near(g, p) for g in gold))
    if not gold and not pred:
        return 1.0, 1.0
    P = pm / len(pred) if pred else 0.0
    R = gm / len(gold) if gold else 0.0
    return P, R


def test_strict_example():
    s = strict_match_score([(1, 3), (5, 6)], [(1, 3), (5, 7)])
    assert (s.precision, s.recall, s.f1, s.match_count) == (0.5, 0.5, 0.5, 1)


def test_empty_conventions():
    both = strict_match_score([], [])
    assert (both.precision, both.recall, both.f1) == (1.0, 1.0, 1.0)
    no_pred = strict_match_score([(0, 1)], [])
    assert (no_pred.precision, no_pred.recall, no_pred.f1) == (0.0, 0.0, 0.0)
    no_gold = strict_match_score([], [(0, 1)])
    assert (no_gold.precision, no_gold.recall, no_gold.f1) == (0.0, 0.0, 0.0)


def test_fuzzy_examples():
    assert fuzzy_match_score([(3, 5)], [(2, 6)], 1).recall == 1.0
    assert fuzzy_match_score([(3, 5)], [(3, 7)], 1).recall == 0.0
    s = fuzzy_match_score([(3, 5)], [(2, 6), (9, 9)], 1)
    assert (s.recall, s.precision) == (1.0, 0.5)
    assert s.f1 == pytest.approx(2 / 3)


def test_tag_accuracy_example():
    assert tag_accuracy("B I O".split(), "O I O".split()) == pytest.approx(2 / 3)
    assert tag_accuracy([], []) == 1.0
    with pytest.raises(InputError):
        tag_accuracy(["O"], [])


def test_invalid_inputs():
    with pytest.raises(InputError):
        strict_match_score([(1, 3), (3, 4)], [])
    with pytest.raises(InputError):
        strict_match_score([], [(4, 2)])
    with pytest.raises(InputError):
        fuzzy_match_score([], [], -1)
    with pytest.raises(InputError):
        evaluate({"a": []}, {"b": []})


def test_scores_match_oracle_and_dominance():
    rng = random.Random(5)
    for _ in range(1000):
        gold = random_spans(rng)
        pred = random_spans(rng)
        s = strict_match_score(gold, pred)
        assert (s.precision, s.recall) == pytest.approx(brute_scores(gold, pred))
        prev = s
        for t in (0, 1, 2, 3):
            f = fuzzy_match_score(gold, pred, t)
            assert (f.precision, f.recall) == pytest.approx(brute_scores(gold, pred, t))
            assert f.precision >= prev.precision and f.recall >= prev.recall
            if t == 0:
                assert (f.precision, f.recall, f.f1) == (s.precision, s.recall, s.f1)
            prev = f


def test_symmetry_of_strict_f1():
    rng = random.Random(9)
    for _ in range(200):
        a, b = random_spans(rng), random_spans(rng)
        ab, ba = strict_match_score(a, b), strict_match_score(b, a)
        assert ab.f1 == pytest.approx(ba.f1)
        assert (ab.precision, ab.recall) == (ba.recall, ba.precision)


def test_evaluate_micro_average_and_report():
    gold = {"a": [(1, 3), (5, 6)], "b": [(0, 0)], "c": []}
    pred = {"a": [(1, 3), (5, 7)], "b": [(0, 0)]}
    gold_tags = {"a": list("OBIIOBI"), "b": ["B"], "c": ["O"]}
    pred_tags = {"a": list("OBIIOBI"), "b": ["B"], "c": ["B"]}
    r = evaluate(gold, pred, 1, gold_tags, pred_tags)
    assert r.strict.match_count == 2 and r.strict.gold_count == 3 and r.strict.pred_count == 3
    assert r.strict.f1 == pytest.approx(2 / 3)
    assert r.fuzzy.f1 == 1.0
    assert r.tag_accuracy == pytest.approx(8 / 9)
    kv = parse_kv(report_to_kv(r))
    for key in ("strict.precision", "strict.recall", "strict.f1", "strict.match_count",
                "fuzzy.precision", "fuzzy.recall", "fuzzy.f1", "fuzzy.match_count",
                "fuzzy.tolerance", "tag_accuracy", "per_doc.a.strict.f1"):
        assert key in kv
    assert kv["strict.match_count"] == "2"
    assert "local convention" in report_table(r)
