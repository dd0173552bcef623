import hashlib

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from deckforge.deck import parse_deck, snapshot
from deckforge.edit import EditProgram, PatchSet, apply_edit_program, apply_xml_patch
from deckforge.edit.ops import OPS
from deckforge.edit.schemas import OP_SCHEMAS, edit_program_schema, patch_set_schema
from deckforge.fixtures import multi_shape_deck
from deckforge.package import package_bytes, validate_package
from patchsuite import invalid_patch_sets, valid_patch_sets

T1 = {"slide": 1, "shape": {"name": "Title 1"}}
RECT = {"slide": 3, "shape": {"name": "Rectangle 2"}}
PIC = {"slide": 3, "shape": {"name": "Picture 3"}}
TABLE = {"slide": 2, "shape": {"name": "Table 2"}}


def apply(pkg, *ops):
    outcome = apply_edit_program(pkg, EditProgram(list(ops)))
    assert outcome.ok, outcome.failed_step
    assert validate_package(outcome.package).ok
    return snapshot(parse_deck(outcome.package))


def shapes(doc, slide):
    return {s["name"]: s for s in doc["slides"][slide - 1]["shapes"]}


def run0(shape):
    return shape["text"]["paragraphs"][0]["runs"][0]


def texts(shape):
    return ["".join(r["text"] for r in p["runs"]) for p in shape["text"]["paragraphs"]]


def test_every_op_has_a_schema():
    assert set(OPS) == set(OP_SCHEMAS)
    assert len(OPS) == 24


def test_set_text(deck):
    doc = apply(deck, {"op": "set_text", "target": T1, "text": "Year in review\nDraft"})
    assert texts(shapes(doc, 1)["Title 1"]) == ["Year in review", "Draft"]
    assert run0(shapes(doc, 1)["Title 1"])["size_pt"] == 40.0  # formatting of the first run survives
    doc = apply(deck, {"op": "set_text", "target": {**TABLE, "cell": [1, 0]}, "text": "West"})
    assert shapes(doc, 2)["Table 2"]["table"]["cells"][1] == ["West", "12"]


def test_replace_text_all(deck):
    doc = apply(deck, {"op": "replace_text_all", "find": "Second Quarter", "replace": "Q2"})
    assert texts(shapes(doc, 1)["Content Placeholder 2"])[0] == "Q2 outcomes"
    assert texts(shapes(doc, 3)["TextBox 1"])[0] == "Q2 summary"


def test_set_font(deck):
    doc = apply(deck, {"op": "set_font", "target": T1, "name": "Arial", "size": 32, "italic": True, "color": "112233"})
    r = run0(shapes(doc, 1)["Title 1"])
    assert (r["font_name"], r["size_pt"], r["italic"], r["color"], r["bold"]) == ("Arial", 32.0, True, "112233", True)


def test_fill_and_line(deck):
    doc = apply(deck, {"op": "set_fill", "target": RECT, "color": "00B050"},
                {"op": "set_line", "target": RECT, "color": "none"})
    rect = shapes(doc, 3)["Rectangle 2"]
    assert rect["fill"] == {"type": "solid", "color": "00B050"}
    assert rect["line"]["type"] == "none"


def test_move_and_resize(deck):
    doc = apply(deck, {"op": "move", "target": PIC, "x": 10, "y": 20},
                {"op": "resize", "target": PIC, "w": 230.4, "h": 172.8})
    pic = shapes(doc, 3)["Picture 3"]
    assert (pic["x"], pic["y"], pic["width"], pic["height"]) == (10.0, 20.0, 230.4, 172.8)


def test_resize_placeholder_materializes_inherited_geometry(deck):
    doc = apply(deck, {"op": "resize", "target": T1, "w": 300, "h": 50})
    title = shapes(doc, 1)["Title 1"]
    assert (title["x"], title["y"], title["width"], title["height"]) == (120.0, 135.0, 300.0, 50.0)


def test_move_group_member_lands_in_slide_space(deck):
    doc = apply(deck, {"op": "move", "target": {"slide": 3, "shape": {"name": "Rectangle 6"}}, "x": 700, "y": 300})
    child = shapes(doc, 3)["Badges"]["children"][1]
    assert (child["x"], child["y"]) == (700.0, 300.0)


def test_z_order(deck):
    doc = apply(deck, {"op": "set_z_order", "target": PIC, "position": "back"})
    assert [s["name"] for s in doc["slides"][2]["shapes"]][0] == "Picture 3"
    doc = apply(deck, {"op": "set_z_order", "target": {"slide": 3, "shape": {"zindex": 0}}, "position": "front"})
    assert doc["slides"][2]["shapes"][-1]["name"] == "TextBox 1"


def test_add_and_delete_shape(deck):
    doc = apply(deck, {"op": "add_shape", "slide": 2, "kind": "ellipse", "x": 10, "y": 10, "w": 50, "h": 40,
                       "text": "New", "fill": "FF0000", "name": "Dot"})
    dot = shapes(doc, 2)["Dot"]
    assert dot["z_index"] == 3 and dot["fill"]["color"] == "FF0000" and texts(dot) == ["New"]
    doc = apply(deck, {"op": "add_shape", "slide": 1, "kind": "table", "x": 0, "y": 0, "w": 200, "h": 80,
                       "rows": [["a", "b"], ["c", "d"]]})
    assert any(s["table"] == {"rows": 2, "cols": 2, "cells": [["a", "b"], ["c", "d"]]} for s in doc["slides"][0]["shapes"])
    doc = apply(deck, {"op": "delete_shape", "target": PIC})
    assert "Picture 3" not in shapes(doc, 3)


def test_group_and_ungroup(deck):
    doc = apply(deck, {"op": "group", "slide": 3, "shapes": [{"name": "TextBox 1"}, {"name": "Rectangle 2"}],
                       "name": "Pair"})
    pair = shapes(doc, 3)["Pair"]
    assert [c["name"] for c in pair["children"]] == ["TextBox 1", "Rectangle 2"]
    assert (pair["x"], pair["y"], pair["width"], pair["height"]) == (60.0, 60.0, 640.0, 100.0)
    doc = apply(deck, {"op": "ungroup", "target": {"slide": 3, "shape": {"name": "Badges"}}})
    s3 = shapes(doc, 3)
    assert "Badges" not in s3 and (s3["Rectangle 6"]["x"], s3["Rectangle 6"]["y"]) == (620.0, 250.0)


def test_slides_add_delete_reorder(deck):
    doc = apply(deck, {"op": "add_slide", "layout": "Title and Content", "position": 2, "title": "Inserted",
                       "body": ["one", "two"]})
    assert len(doc["slides"]) == 4 and doc["slides"][1]["slide_layout"] == "Title and Content"
    assert texts(shapes(doc, 2)["Title 1"]) == ["Inserted"]
    doc = apply(deck, {"op": "delete_slide", "slide": 2})
    assert [s["slide_layout"] for s in doc["slides"]] == ["Title Slide", "Blank"]
    doc = apply(deck, {"op": "reorder_slides", "order": [3, 1, 2]})
    assert [s["notes"] for s in doc["slides"]] == ["hello", "Welcome notes", ""]


def test_notes(deck):
    doc = apply(deck, {"op": "set_notes", "slide": 2, "text": "Speak slowly"},
                {"op": "set_notes", "slide": 1, "text": "Replaced"})
    assert [s["notes"] for s in doc["slides"]] == ["Replaced", "Speak slowly", "hello"]


def test_background_and_theme(deck):
    doc = apply(deck, {"op": "set_background", "slides": [1, 2], "color": "000000"},
                {"op": "set_theme_color", "role": "accent1", "color": "FF00FF"},
                {"op": "set_theme_font", "major": "Georgia", "minor": "Verdana"})
    assert doc["slides"][0]["background"] == {"type": "solid", "color": "000000"}
    assert doc["theme_colors"]["accent1"] == "FF00FF"
    body = run0(shapes(doc, 1)["Content Placeholder 2"])
    assert body["effective_font_name"] == "Verdana"


def test_transition_and_animation(deck):
    doc = apply(deck, {"op": "set_transition", "slides": [1, 2], "preset": "push", "duration_ms": 500},
                {"op": "set_animation", "target": RECT, "preset": "fade"})
    assert [s["transition"] for s in doc["slides"]] == ["push", "push", "fade"]
    assert doc["slides"][2]["has_animation"] and doc["slides"][2]["animation_targets"] == [3]
    doc = apply(deck, {"op": "set_transition", "preset": "none"})
    assert [s["transition"] for s in doc["slides"]] == [None, None, None]


def test_hyperlinks_and_alt_text(deck):
    doc = apply(deck, {"op": "set_hyperlink", "target": PIC, "url": "https://example.com"},
                {"op": "set_hyperlink", "target": RECT, "to_slide": 1},
                {"op": "set_alt_text", "target": PIC, "text": "Company logo"})
    s3 = shapes(doc, 3)
    assert s3["Picture 3"]["hyperlink"] == "https://example.com"
    assert s3["Picture 3"]["alt_text"] == "Company logo"
    assert s3["Rectangle 2"]["hyperlink"] == "#slide=1"


def test_header_footer(deck):
    doc = apply(deck, {"op": "set_header_footer", "slides": [2], "footer": "Confidential", "slide_number": True})
    names = {s["placeholder"]["type"] for s in doc["slides"][1]["shapes"] if s["placeholder"]}
    assert {"ftr", "sldNum"} <= names
    footer = next(s for s in doc["slides"][1]["shapes"] if (s["placeholder"] or {}).get("type") == "ftr")
    assert texts(footer) == ["Confidential"]


@pytest.mark.parametrize("op,kind", [
    ({"op": "set_text", "target": {"slide": 9, "shape": {"name": "Title 1"}}, "text": "x"}, "not-found"),
    ({"op": "set_text", "target": {"slide": 1, "shape": {"name": "Nope"}}, "text": "x"}, "not-found"),
    ({"op": "set_fill", "target": RECT, "color": "red"}, "invalid-parameter"),
    ({"op": "resize", "target": RECT, "w": -1, "h": 5}, "invalid-parameter"),
    ({"op": "reorder_slides", "order": [1, 1, 2]}, "invalid-parameter"),
    ({"op": "teleport"}, "invalid-parameter"),
    ({"op": "delete_slide", "slide": 4}, "invalid-parameter"),
])
def test_failures_roll_back(deck, op, kind):
    before = package_bytes(deck)
    outcome = apply_edit_program(deck, EditProgram([{"op": "set_notes", "slide": 1, "text": "first"}, op]))
    assert not outcome.ok
    assert outcome.failed_step["index"] == 1
    assert outcome.failed_step["kind"] == kind
    assert package_bytes(outcome.package) == before


def test_duplicate_names_are_ambiguous():
    from deckforge.fixtures import DeckBuilder

    b = DeckBuilder()
    b.slide("Blank").textbox("a", 0, 0, 10, 10, name="Twin").textbox("b", 20, 0, 10, 10, name="Twin")
    outcome = apply_edit_program(b.build(), EditProgram([{"op": "set_text", "target": {"slide": 1, "shape": {"name": "Twin"}},
                                                          "text": "c"}]))
    assert outcome.failed_step["kind"] == "ambiguous"


def test_empty_program_is_identity(deck):
    outcome = apply_edit_program(deck, EditProgram([]))
    assert outcome.ok and outcome.package is deck


def test_program_json_round_trip(tmp_path):
    prog = EditProgram([{"op": "set_notes", "slide": 1, "text": "x"}], "test")
    path = tmp_path / "p.json"
    import json

    path.write_text(json.dumps(prog.to_dict()))
    assert EditProgram.load(path) == prog
    assert EditProgram.from_dict([{"op": "delete_slide", "slide": 1}]).ops[0]["op"] == "delete_slide"
    assert EditProgram([{"op": "move"}]).check()


def test_published_schemas_are_valid():
    from jsonschema import Draft202012Validator

    Draft202012Validator.check_schema(edit_program_schema())
    Draft202012Validator.check_schema(patch_set_schema())


def test_patch_suite(deck):
    before = hashlib.sha256(package_bytes(deck)).hexdigest()
    for ps in valid_patch_sets():
        assert apply_xml_patch(deck, PatchSet.from_dict(ps)).ok
    for ps in invalid_patch_sets():
        out = apply_xml_patch(deck, ps)
        assert not out.ok and out.failed_step["kind"]
        assert hashlib.sha256(package_bytes(out.package)).hexdigest() == before


def test_patch_failure_index(deck):
    ps = invalid_patch_sets()[12]  # second patch fails after the first applied
    assert apply_xml_patch(deck, ps).failed_step["index"] == 1
    dangling = invalid_patch_sets()[11]
    out = apply_xml_patch(deck, dangling)
    assert out.failed_step == {"index": 1, "kind": "validation-failed", "message": out.failed_step["message"]}
    assert not out.report.ok


junk = st.recursive(st.one_of(st.none(), st.booleans(), st.integers(-3, 3), st.text(max_size=5)),
                    lambda c: st.one_of(st.lists(c, max_size=3), st.dictionaries(st.text(max_size=6), c, max_size=3)),
                    max_leaves=8)
op_names = st.sampled_from(sorted(OPS))


@settings(max_examples=120, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(op_names, st.dictionaries(st.sampled_from(["target", "slide", "slides", "text", "color", "x", "w", "find"]),
                                 junk, max_size=3))
def test_random_ops_never_corrupt(op, params):
    pkg = multi_shape_deck().build()
    before = package_bytes(pkg)
    outcome = apply_edit_program(pkg, EditProgram([{"op": op, **params}]))
    if outcome.ok:
        assert validate_package(outcome.package).ok
        parse_deck(outcome.package)
    else:
        assert package_bytes(outcome.package) == before
