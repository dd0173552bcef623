import copy

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deckforge.deck import parse_deck, snapshot
from deckforge.diff import (
    diff_snapshots,
    format_diff_report,
    json_change_ratio,
    line_changes,
    pair_shapes,
    similarity,
    xml_change_ratio,
    xml_diff_text,
)
from deckforge.edit import EditProgram, apply_edit_program
from deckforge.errors import SchemaMismatchError


@pytest.fixture
def base(deck):
    return snapshot(parse_deck(deck))


def shape(doc, slide, name):
    return next(s for s in doc["slides"][slide - 1]["shapes"] if s["name"] == name)


def test_identical_snapshots(base):
    report = diff_snapshots(base, copy.deepcopy(base))
    assert report.total_differences == 0 and not report.has_differences
    assert report.similarity_score == 1.0
    assert format_diff_report(report) == "No differences"


@pytest.mark.parametrize("n,expected", [(0, 1.0), (1, 100 / 101), (100, 0.5), (300, 0.25)])
def test_similarity_values(n, expected):
    assert similarity(n) == pytest.approx(expected, abs=1e-12)


def test_similarity_rejects_negative():
    with pytest.raises(ValueError):
        similarity(-1)


def test_normalization_ignores_noise(base):
    pred = copy.deepcopy(base)
    title = shape(pred, 1, "Title 1")
    run = title["text"]["paragraphs"][0]["runs"][0]
    run["color"] = run["color"].lower()
    run["text"] = "  " + run["text"] + " "
    title["x"] += 0.004  # below 0.01 pt
    assert diff_snapshots(base, pred).total_differences == 0
    title["x"] += 0.02
    assert diff_snapshots(base, pred).total_differences == 1


def test_ids_and_filename_are_not_compared(base):
    pred = copy.deepcopy(base)
    pred["filename"] = "other.pptx"
    pred["slides"][0]["slide_id"] = 999
    assert diff_snapshots(base, pred).total_differences == 0


def test_shape_pairing_falls_back_to_name():
    gt = [{"shape_id": 1, "name": "A", "kind": "textbox", "z_index": 0},
          {"shape_id": 2, "name": "B", "kind": "picture", "z_index": 1}]
    pred = [{"shape_id": 9, "name": "B", "kind": "picture", "z_index": 0},
            {"shape_id": 1, "name": "A", "kind": "textbox", "z_index": 1}]
    pairs, only_gt, only_pred = pair_shapes(gt, pred)
    assert pairs == [(0, 1), (1, 0)] and only_gt == only_pred == []


def test_missing_and_extra_shapes(base):
    pred = copy.deepcopy(base)
    removed = pred["slides"][2]["shapes"].pop(1)
    report = diff_snapshots(base, pred)
    assert [(e.kind, e.path) for e in report.differences] == [
        ("missing-in-prediction", ("shapes", f"shape:{removed['shape_id']}"))]
    report = diff_snapshots(pred, base)
    assert report.differences[0].kind == "extra-in-prediction"


def test_slide_count_mismatch(base):
    pred = copy.deepcopy(base)
    dropped = pred["slides"].pop()
    report = diff_snapshots(base, pred)
    kinds = [e.kind for e in report.differences]
    assert kinds[0] == "slide-count-mismatch"
    assert kinds.count("missing-in-prediction") == len(dropped["shapes"])
    assert report.differences[0].expected == 3 and report.differences[0].actual == 2


def test_initial_annotations(base):
    gt = copy.deepcopy(base)
    shape(gt, 1, "Title 1")["x"] = 200.0
    shape(gt, 3, "Rectangle 2")["fill"]["color"] = "00FF00"
    pred = copy.deepcopy(base)
    shape(pred, 3, "Rectangle 2")["fill"]["color"] = "0000FF"
    shape(pred, 2, "Title 1")["y"] = 10.0
    report = diff_snapshots(gt, pred, initial=base)
    status = {e.path[-1]: e.initial_status for e in report.differences}
    assert status == {"x": "unchanged-from-initial", "color": "divergent", "y": "regressed"}
    assert "[regressed]" in format_diff_report(report)


def test_schema_mismatch():
    with pytest.raises(SchemaMismatchError):
        diff_snapshots({"slides": []}, {"no": "slides"})
    with pytest.raises(SchemaMismatchError):
        diff_snapshots({"slides": [1]}, {"slides": []})


def test_format_truncates(base):
    pred = copy.deepcopy(base)
    for s in pred["slides"]:
        s["notes"] += "!"
    text = format_diff_report(diff_snapshots(base, pred), max_entries=1)
    assert "(3 differences" in text and "2 more differences omitted" in text


def test_ratios_zero_for_identical(deck, base):
    assert xml_change_ratio(deck, deck) == 0.0
    assert json_change_ratio(base, base) == 0.0
    assert xml_diff_text(deck, deck) == "No differences"


def test_text_edit_moves_json_more_than_xml(deck, base):
    out = apply_edit_program(deck, EditProgram([{"op": "replace_text_all", "find": "Second Quarter", "replace": "Q2"}]))
    edited = snapshot(parse_deck(out.package))
    j, x = json_change_ratio(base, edited), xml_change_ratio(deck, out.package)
    assert 0 < x < j < 1
    text = xml_diff_text(deck, out.package)
    assert "+++ prediction/ppt/slides/slide1.xml" in text and "Q2" in text


lines = st.lists(st.sampled_from(["<a>", "<b/>", "</a>", "x", "y", "z"]), max_size=25)


@settings(max_examples=300)
@given(lines, lines)
def test_line_change_counts(a, b):
    removed, added = line_changes(a, b)
    assert removed - added == len(a) - len(b)
    assert 0 <= removed <= len(a) and 0 <= added <= len(b)
    # the kept lines form a common subsequence no longer than the LCS
    assert len(a) - removed <= lcs(a, b)
    if a == b:
        assert (removed, added) == (0, 0)


def lcs(a, b):
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


leaf = st.one_of(st.integers(-5, 5), st.text(max_size=4), st.booleans(), st.none())
shape_doc = st.fixed_dictionaries({"name": st.text(max_size=3), "kind": st.sampled_from(["textbox", "picture"]),
                                   "x": st.floats(0, 100), "text": leaf})


@settings(max_examples=150, deadline=None)
@given(st.lists(st.lists(shape_doc, max_size=4), min_size=1, max_size=3),
       st.lists(st.lists(shape_doc, max_size=4), min_size=1, max_size=3))
def test_diff_properties(gt_slides, pred_slides):
    def doc(slides):
        return {"slides": [{"shapes": [{**s, "shape_id": i + 1, "z_index": i} for i, s in enumerate(sh)]}
                           for sh in slides]}

    gt, pred = doc(gt_slides), doc(pred_slides)
    report = diff_snapshots(gt, pred)
    assert diff_snapshots(gt, gt).total_differences == 0
    assert 0.0 < report.similarity_score <= 1.0
    assert report.total_differences == diff_snapshots(pred, gt).total_differences
    assert diff_snapshots(gt, pred).to_dict() == report.to_dict()  # deterministic order
