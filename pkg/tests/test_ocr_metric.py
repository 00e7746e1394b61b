import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from docquad.exceptions import AlignmentError, InvalidParameter
from docquad.ocr_metric import (
    Entity,
    NormalizeConfig,
    align_by_box_iou,
    align_by_name,
    clamped_entity_distance,
    ldist,
    levenshtein,
    normalize_text,
    ocr_score,
    score_breakdown,
)
from oracles import recursive_levenshtein

short_text = st.text(alphabet="abcXY é", max_size=8)


def test_levenshtein_examples():
    assert levenshtein("abc", "abc") == 0
    assert levenshtein("", "abc") == 3
    assert levenshtein("kitten", "sitting") == 3
    assert recursive_levenshtein("kitten", "sitting") == 3


def test_levenshtein_small_alphabet_sample():
    words = ["".join(p) for n in range(4) for p in itertools.product("ab", repeat=n)]
    for a in words:
        for b in words:
            assert levenshtein(a, b) == recursive_levenshtein(a, b)


@given(short_text, short_text)
def test_levenshtein_matches_oracle(a, b):
    assert levenshtein(a, b) == recursive_levenshtein(a, b)


@given(short_text, short_text, short_text)
def test_levenshtein_metric_axioms(a, b, c):
    assert (levenshtein(a, b) == 0) == (a == b)
    assert levenshtein(a, b) == levenshtein(b, a)
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)
    assert abs(len(a) - len(b)) <= levenshtein(a, b) <= max(len(a), len(b))


def test_levenshtein_counts_code_points():
    assert levenshtein("é", "e") == 1
    assert levenshtein("日本", "日本語") == 1


def test_clamped_distance_examples():
    assert clamped_entity_distance("AB", "WXYZ") == 2
    assert recursive_levenshtein("AB", "WXYZ") == 4
    assert clamped_entity_distance("", "anything") == 0
    assert clamped_entity_distance("ABC", "ABC") == 0


def test_ldist_examples():
    assert ldist(["A", "BC"], ["A", "BC"]) == 0
    assert ldist(["ABCD", "XY"], ["ABXD", "XY"]) == 1
    assert ldist(["AB", "C"], ["", ""]) == 3
    with pytest.raises(AlignmentError):
        ldist(["A"], ["A", "B"])


def test_score_examples():
    assert ocr_score(["ABC", "DEF"], ["ABC", "DEF"]) == 1.0
    assert ocr_score(["ABC"], [""]) == 0.0
    assert ocr_score(["ABCD", "XY"], ["ABXD", "XY"]) == pytest.approx(1 - 1 / 6, abs=1e-9)
    assert ocr_score([], []) == 1.0
    assert ocr_score([""], ["junk"]) == 1.0


@given(st.lists(st.tuples(short_text, short_text), max_size=6))
def test_score_bounds_and_clamping(pairs):
    gt = [g for g, _ in pairs]
    pd = [p for _, p in pairs]
    score, rows = score_breakdown(gt, pd, NormalizeConfig(collapse_whitespace=False))
    assert 0.0 <= score <= 1.0
    for row, g in zip(rows, gt):
        assert row["distance"] <= row["gt_len"] == len(g)


def test_breakdown_rows():
    gt = [Entity("name", "ANA"), Entity("id", "1234")]
    score, rows = score_breakdown(gt, ["ANA", "1284"])
    assert rows == [{"name": "name", "gt_len": 3, "distance": 0}, {"name": "id", "gt_len": 4, "distance": 1}]
    assert score == pytest.approx(6 / 7)


def test_normalisation():
    assert normalize_text("  a \t b\n") == "a b"
    assert normalize_text("e\u0301") == "\u00e9"
    assert normalize_text("e\u0301", NormalizeConfig(compose=False)) == "e\u0301"
    assert normalize_text("ÉCOLE", NormalizeConfig(casefold=True)) == "école"
    assert ocr_score(["José  Silva"], ["José Silva"]) == 1.0
    assert ocr_score(["ABC"], ["abc"], NormalizeConfig(casefold=True)) == 1.0
    assert ocr_score(["ABC"], ["abc"]) == 0.0


def test_entity_box_validation():
    with pytest.raises(InvalidParameter):
        Entity("x", "t", (5, 0, 1, 1))


# alignment

ENTS = [
    Entity("name", "ANA", (10, 10, 100, 20)),
    Entity("id", "123", (10, 40, 100, 50)),
    Entity("date", "2020", (10, 70, 100, 80)),
]


def test_align_by_name():
    assert align_by_name(ENTS, {"name": "A", "id": "B", "date": "C"}) == ["A", "B", "C"]
    assert align_by_name(ENTS, {"name": "A", "date": "C"}) == ["A", "", "C"]
    assert align_by_name(ENTS, {" NAME ": "A", "extra": "Z"}) == ["A", "", ""]


def test_align_by_box_examples():
    out = align_by_box_iou(ENTS, [{"box": [10, 40, 100, 50], "text": "123"}])
    assert out == ["", "123", ""]
    assert align_by_box_iou(ENTS, [{"box": [500, 500, 510, 510], "text": "x"}]) == ["", "", ""]
    words = [{"box": [60, 10, 100, 20], "text": "right"}, {"box": [10, 10, 55, 20], "text": "left"}]
    assert align_by_box_iou(ENTS, words) == ["left right", "", ""]


def test_align_by_box_tie_goes_to_reading_order():
    a = Entity("a", "", (0, 0, 10, 10))
    b = Entity("b", "", (0, 20, 10, 30))
    between = [{"box": [0, 5, 10, 25], "text": "t"}]
    assert align_by_box_iou([b, a], between) == ["", "t"]


@given(st.lists(st.tuples(short_text, short_text), min_size=1, max_size=5))
def test_score_is_one_iff_all_pairs_match(pairs):
    gt = [g for g, _ in pairs]
    pd = [p for _, p in pairs]
    norm = NormalizeConfig()
    perfect = all(
        levenshtein(normalize_text(g, norm), normalize_text(p, norm)) == 0 or not normalize_text(g, norm)
        for g, p in pairs
    )
    assert (ocr_score(gt, pd, norm) == 1.0) == perfect


box_strategy = st.tuples(st.floats(0, 90), st.floats(0, 90), st.floats(1, 30), st.floats(1, 30)).map(
    lambda t: (t[0], t[1], t[0] + t[2], t[1] + t[3])
)


@given(st.lists(box_strategy, min_size=1, max_size=5), st.lists(box_strategy, max_size=8))
def test_box_alignment_invariants(ent_boxes, pred_boxes):
    ents = [Entity(f"e{k}", "x", b) for k, b in enumerate(ent_boxes)]
    preds = [{"box": list(b), "text": f"w{k}"} for k, b in enumerate(pred_boxes)]
    out = align_by_box_iou(ents, preds)
    assert len(out) == len(ents)
    words = [w for text in out for w in text.split()]
    assert len(words) == len(set(words))
