"""Twenty valid and twenty invalid patch sets against ``multi_shape_deck``."""

from deckforge.fixtures import _theme_flip_builder

S1, S2, S3 = "ppt/slides/slide1.xml", "ppt/slides/slide2.xml", "ppt/slides/slide3.xml"
PRES = "ppt/presentation.xml"

TITLE_T = [0, 0, 2, 2, 2, 0, 1]  # cSld/spTree/sp[Title]/txBody/p/r/t on slide 1
SUBTITLE_P2 = [0, 0, 3, 2, 3]
NORTH_T = [0, 0, 3, 2, 0, 0, 3, 0, 0, 2, 0, 1]  # table cell text on slide 2

NEW_SP = ('<p:sp><p:nvSpPr><p:cNvPr id="{id}" name="{name}"/><p:cNvSpPr txBox="1"/><p:nvPr/></p:nvSpPr>'
          '<p:spPr><a:xfrm><a:off x="762000" y="762000"/><a:ext cx="2540000" cy="508000"/></a:xfrm>'
          '<a:prstGeom prst="rect"><a:avLst/></a:prstGeom></p:spPr>'
          '<p:txBody><a:bodyPr/><a:lstStyle/><a:p><a:r><a:rPr lang="en-US"/><a:t>{text}</a:t></a:r></a:p></p:txBody>'
          '</p:sp>')


def attr(part, tag, name, value, new):
    return {"part": part, "action": "set-attribute", "address": {"tag": tag, "attribute": name, "value": value},
            "payload": {"name": name, "value": new}}


def at(part, path, action, payload=None):
    p = {"part": part, "action": action, "address": {"path": path}}
    if payload is not None:
        p["payload"] = payload
    return p


def dark_theme() -> str:
    return _theme_flip_builder(True).build().parts["ppt/theme/theme1.xml"].decode("utf-8")


def valid_patch_sets() -> list[dict]:
    rpr = '<a:p><a:r><a:rPr lang="en-US"/><a:t>Extra line</a:t></a:r></a:p>'
    return [{"patches": p} for p in (
        [attr(S1, "a:rPr", "sz", "4000", "3600")],
        [attr(S1, "a:rPr", "b", "1", None)],
        [at(S1, TITLE_T, "replace-element", "<a:t>Annual Review</a:t>")],
        [at(S1, SUBTITLE_P2, "insert-after", rpr)],
        [at(S1, SUBTITLE_P2, "delete-element")],
        [attr(S2, "a:off", "x", "1016000", "2032000")],
        [attr(S2, "a:ext", "cx", "4826000", "3000000")],
        [at(S1, [0, 0, 2, 1], "insert-first-child", '<a:solidFill><a:srgbClr val="FF0000"/></a:solidFill>')],
        [{"part": "ppt/theme/theme1.xml", "action": "replace-part", "payload": dark_theme()}],
        [at(S1, [1], "insert-after", "<p:transition><p:fade/></p:transition>")],
        [{**attr(S2, "p:cNvPr", "name", "Table 2", None), "payload": {"name": "descr", "value": "Sales table"}}],
        [attr(S2, "p:cNvPr", "name", "Chart 3", "Revenue chart")],
        [at(S2, NORTH_T, "replace-element", "<a:t>South</a:t>")],
        [at(S2, [0, 0, 3, 2, 0, 0, 1, 0], "set-attribute", {"name": "w", "value": "3000000"}),
         at(S2, [0, 0, 3, 2, 0, 0, 2], "set-attribute", {"name": "h", "value": "800000"})],
        [attr(S3, "a:srgbClr", "val", "F2F2F2", "DDDDDD")],
        [attr(PRES, "p:sldSz", "cx", "12192000", "9144000")],
        [at(S3, [2], "delete-element")],
        [{"part": S3, "action": "replace-element",
          "address": {"tag": "p:cNvPr", "attribute": "name", "value": "TextBox 1", "up": 2},
          "payload": NEW_SP.format(id=2, name="TextBox 1", text="Replaced")}],
        [at(S1, [0, 0, 2], "insert-after", NEW_SP.format(id=10, name="TextBox 9", text="Added"))],
        [attr("ppt/charts/chart_s2_1.xml", "c:barDir", "val", "col", "bar"),
         attr(PRES, "p:notesSz", "cx", "6858000", "7000000")],
    )]


def invalid_patch_sets() -> list:
    good = attr(S1, "a:rPr", "sz", "4000", "3600")
    return [
        {"patches": [attr("ppt/slides/slide9.xml", "a:rPr", "sz", "4000", "3600")]},
        {"patches": [attr(S1, "a:rPr", "sz", "9999", "3600")]},
        {"patches": [attr(S1, "a:rPr", "lang", "en-US", "fr-FR")]},  # ambiguous
        {"patches": [at(S1, [0, 0, 99], "delete-element")]},
        {"patches": [at(S1, TITLE_T, "replace-element", "<a:t>oops")]},
        {"patches": [{"part": S1, "action": "rename-part", "address": {"path": []}}]},
        {"patches": [{"part": S1, "action": "set-attribute", "payload": {"name": "x", "value": "1"}}]},
        {"patches": [at(S1, [], "delete-element")]},
        {"patches": [at(S1, [], "insert-after", "<p:sld/>")]},
        {"patches": [{"part": S2, "action": "replace-part", "payload": "<p:sld><unclosed></p:sld>"}]},
        {"patches": [{"part": "ppt/media/image_s3_2.png", "action": "replace-part", "payload": "<x/>"}]},
        {"patches": [{"part": "ppt/slides/_rels/slide1.xml.rels", "action": "replace-part", "payload":
                      '<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">'
                      '<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/'
                      'relationships/slideLayout" Target="../slideLayouts/slideLayout42.xml"/></Relationships>'}]},
        {"patches": [good, attr(S1, "a:rPr", "sz", "4000", "2000")]},  # second no longer matches
        {"patches": [at(S1, TITLE_T, "set-attribute", {"name": "zz:foo", "value": "1"})]},
        {"patches": [at(S1, TITLE_T, "replace-element", "stray <a:t>x</a:t>")]},
        {"patches": [at(S1, TITLE_T, "replace-element", "")]},
        {"patches": "not a list"},
        {"patches": [{"part": S1, "action": "delete-element",
                      "address": {"tag": "p:cNvPr", "attribute": "name", "value": "Title 1", "up": 50}}]},
        {"patches": [at(S1, TITLE_T, "set-attribute", {"name": "x"})]},
        {"patches": [at(S1, [], "replace-element", "<p:sld/><p:sld/>")]},
    ]
