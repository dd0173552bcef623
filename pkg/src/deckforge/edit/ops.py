"""Interpreters for the declarative edit operations.

Each op function takes the in-flight :class:`Workspace` and the op's
parameter dict. Geometry parameters are points, colours are 6-digit RGB hex,
slide numbers are 1-based positions in the current (possibly already edited)
deck.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from typing import Callable

from lxml import etree

from .. import ooxml as ox
from ..deck import _Context, _to_parent, _xfrm
from ..errors import InvalidParameterError, TargetNotFoundError
from ..ooxml import NS, q
from .target import TargetSelector, find_shape, shape_elements, shape_identity
from .workspace import Workspace, cnvpr

TRANSITIONS = ("none", "cut", "fade", "push", "wipe", "split", "cover", "dissolve", "random", "zoom")
ANIMATIONS = ("none",) + tuple(ox.ANIMATION_PRESETS)
SHAPE_KINDS = {"textbox": "rect", "rect": "rect", "roundRect": "roundRect", "ellipse": "ellipse",
               "triangle": "triangle", "rightArrow": "rightArrow", "table": None}
KIND_NAMES = {"textbox": "TextBox", "rect": "Rectangle", "roundRect": "Rounded Rectangle", "ellipse": "Oval",
              "triangle": "Isosceles Triangle", "rightArrow": "Right Arrow", "table": "Table"}
Z_POSITIONS = ("front", "back", "forward", "backward")
HEADER_FOOTER_PH = {"date": ("dt", 10), "footer": ("ftr", 11), "slide_number": ("sldNum", 12)}

FILL_TAGS = ("noFill", "solidFill", "gradFill", "blipFill", "pattFill", "grpFill")
SPPR_ORDER = ("xfrm", "custGeom", "prstGeom") + FILL_TAGS + ("ln", "effectLst", "effectDag", "scene3d", "sp3d", "extLst")
RPR_ORDER = ("ln",) + FILL_TAGS + ("effectLst", "effectDag", "highlight", "uLnTx", "uLn", "uFillTx", "uFill",
                                   "latin", "ea", "cs", "sym", "hlinkClick", "hlinkMouseOver", "rtl", "extLst")
LN_ORDER = ("noFill", "solidFill", "gradFill", "pattFill", "prstDash", "custDash", "round", "bevel", "miter",
            "headEnd", "tailEnd", "extLst")
SLD_ORDER = ("cSld", "clrMapOvr", "transition", "timing", "extLst")
CSLD_ORDER = ("bg", "spTree", "custDataLst", "controls", "extLst")
PRES_ORDER = ("sldMasterIdLst", "notesMasterIdLst", "handoutMasterIdLst", "sldIdLst", "sldSz", "notesSz")

SLIDE_LINK_ACTION = "ppaction://hlinksldjump"


@dataclass(frozen=True)
class OpSpec:
    run: Callable
    category: str
    edit_type: int
    idempotent: bool = False


# -- small helpers -----------------------------------------------------------

def local(el) -> str:
    return etree.QName(el).localname if isinstance(el.tag, str) else ""


def fragment(xml: str):
    """Parse snippet XML written with the usual a:/p:/r: prefixes."""
    root = etree.fromstring(f"<w {ox.XMLNS_PAR}>{xml}</w>".encode())
    return list(root)


def insert_ordered(parent, child, order):
    """Insert ``child`` among ``parent``'s children respecting a schema sequence."""
    rank = order.index(local(child)) if local(child) in order else len(order)
    for i, sib in enumerate(parent):
        if local(sib) in order and order.index(local(sib)) > rank:
            parent.insert(i, child)
            return child
    parent.append(child)
    return child


def get_or_add(parent, name: str, order):
    prefix, tag = name.split(":")
    found = parent.find(name, NS)
    if found is not None:
        return found
    return insert_ordered(parent, etree.Element(q(prefix, tag)), order)


def color_param(value, name="color", allow_none=False) -> str | None:
    if allow_none and value == "none":
        return "none"
    if not isinstance(value, str) or len(value) != 6 or any(c not in "0123456789abcdefABCDEF" for c in value):
        raise InvalidParameterError(f"{name} must be 6-digit RGB hex, got {value!r}")
    return value.upper()


def points_param(value, name, minimum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be a finite number of points, got {value!r}")
    if minimum is not None and value < minimum:
        raise InvalidParameterError(f"{name} must be >= {minimum}, got {value!r}")
    return ox.emu(value)


def require(params, *keys):
    missing = [k for k in keys if k not in params]
    if missing:
        raise InvalidParameterError(f"missing parameter(s): {', '.join(missing)}")


def slides_param(ws: Workspace, params, key="slides") -> list[int]:
    value = params.get(key)
    if value is None:
        return list(range(1, ws.slide_count() + 1))
    if not isinstance(value, list) or not value:
        raise InvalidParameterError(f"{key} must be a non-empty list of slide numbers")
    for n in value:
        ws.slide_part(n)
    return sorted(set(value))


def solid_fill(color: str):
    if color == "none":
        return etree.Element(q("a", "noFill"))
    el = etree.Element(q("a", "solidFill"))
    etree.SubElement(el, q("a", "srgbClr")).set("val", color)
    return el


def replace_fill(parent, color: str, order):
    for child in list(parent):
        if local(child) in FILL_TAGS:
            parent.remove(child)
    insert_ordered(parent, solid_fill(color), order)


def next_shape_id(slide_root) -> int:
    ids = [int(c.get("id")) for c in slide_root.iter(q("p", "cNvPr")) if (c.get("id") or "").isdigit()]
    return max(ids, default=1) + 1


# -- targets and text ------------------------------------------------------

def target_of(ws: Workspace, params):
    require(params, "target")
    sel = TargetSelector.from_dict(params["target"])
    if sel.slide_number > ws.slide_count():  # a selector that misses is not-found, as in resolve_target
        raise TargetNotFoundError(f"slide {sel.slide_number} does not exist (deck has {ws.slide_count()})")
    part, root = ws.slide(sel.slide_number)
    el = find_shape(root, sel.shape_ref, f"slide {sel.slide_number}")
    return sel, part, root, el


def text_runs(p):
    return [c for c in p if local(c) in ("r", "fld", "br")]


def table_cell_body(el, cell):
    tbl = el.find("a:graphic/a:graphicData/a:tbl", NS)
    if tbl is None:
        raise InvalidParameterError("target.cell given but the shape is not a table")
    rows = tbl.findall("a:tr", NS)
    r, c = cell
    if not 0 <= r < len(rows):
        raise TargetNotFoundError(f"table has no row {r}")
    cells = rows[r].findall("a:tc", NS)
    if not 0 <= c < len(cells):
        raise TargetNotFoundError(f"table row {r} has no column {c}")
    body = cells[c].find("a:txBody", NS)
    if body is None:
        body = fragment(ox.txbody_xml([], tag="a:txBody"))[0]
        cells[c].insert(0, body)
    return body


def text_bodies(el, sel: TargetSelector, create=False):
    """Text bodies addressed by ``sel`` on shape ``el``."""
    if sel.cell is not None:
        return [table_cell_body(el, sel.cell)]
    kind = local(el)
    if kind == "sp":
        body = el.find("p:txBody", NS)
        if body is None and create:
            body = fragment(ox.txbody_xml([]))[0]
            el.append(body)
        return [body] if body is not None else []
    if kind == "graphicFrame":
        return [b for b in el.iterfind("a:graphic/a:graphicData/a:tbl/a:tr/a:tc/a:txBody", NS)]
    if kind == "grpSp":
        return [b for sp in el.iter(q("p", "sp")) for b in sp.findall("p:txBody", NS)]
    return []


def addressed_runs(el, sel: TargetSelector):
    bodies = text_bodies(el, sel)
    if not bodies:
        raise InvalidParameterError("target shape has no text")
    runs = []
    for body in bodies:
        paras = body.findall("a:p", NS)
        if sel.paragraph is not None:
            if sel.paragraph >= len(paras):
                raise TargetNotFoundError(f"no paragraph {sel.paragraph} (shape has {len(paras)})")
            paras = [paras[sel.paragraph]]
        for p in paras:
            rs = [r for r in text_runs(p) if local(r) != "br"]
            if sel.run is not None:
                all_runs = text_runs(p)
                if sel.run >= len(all_runs):
                    raise TargetNotFoundError(f"no run {sel.run} in paragraph {sel.paragraph}")
                rs = [all_runs[sel.run]]
            runs.extend(rs)
    return runs


def set_body_text(body, text: str):
    """Replace every paragraph, keeping the first paragraph/run formatting."""
    paras = body.findall("a:p", NS)
    ppr = rpr = None
    if paras:
        ppr = paras[0].find("a:pPr", NS)
        first = next((r for p in paras for r in p if local(r) in ("r", "fld")), None)
        if first is not None:
            rpr = first.find("a:rPr", NS)
    for p in paras:
        body.remove(p)
    for line in text.split("\n"):
        p = etree.SubElement(body, q("a", "p"))
        if ppr is not None:
            p.append(copy.deepcopy(ppr))
        if line:
            r = etree.SubElement(p, q("a", "r"))
            if rpr is not None:
                r.append(copy.deepcopy(rpr))
            etree.SubElement(r, q("a", "t")).text = line
        else:
            end = etree.SubElement(p, q("a", "endParaRPr"))
            end.set("lang", "en-US")


def set_paragraph_text(p, text: str):
    runs = text_runs(p)
    first = next((r for r in runs if local(r) in ("r", "fld")), None)
    rpr = first.find("a:rPr", NS) if first is not None else None
    insert_at = p.index(runs[0]) if runs else len([c for c in p if local(c) == "pPr"])
    for r in runs:
        p.remove(r)
    r = etree.Element(q("a", "r"))
    if rpr is not None:
        r.append(copy.deepcopy(rpr))
    etree.SubElement(r, q("a", "t")).text = text
    p.insert(insert_at, r)


def op_set_text(ws, params):
    require(params, "text")
    if not isinstance(params["text"], str):
        raise InvalidParameterError("text must be a string")
    sel, part, _, el = target_of(ws, params)
    bodies = text_bodies(el, sel, create=True)
    if not bodies:
        raise InvalidParameterError(f"shape kind {local(el)!r} cannot hold text")
    body = bodies[0]
    if sel.paragraph is None:
        set_body_text(body, params["text"])
    else:
        paras = body.findall("a:p", NS)
        if sel.paragraph >= len(paras):
            raise TargetNotFoundError(f"no paragraph {sel.paragraph} (shape has {len(paras)})")
        p = paras[sel.paragraph]
        if sel.run is None:
            set_paragraph_text(p, params["text"])
        else:
            runs = text_runs(p)
            if sel.run >= len(runs) or local(runs[sel.run]) == "br":
                raise TargetNotFoundError(f"no text run {sel.run} in paragraph {sel.paragraph}")
            t = runs[sel.run].find("a:t", NS)
            if t is None:
                t = etree.SubElement(runs[sel.run], q("a", "t"))
            t.text = params["text"]
    ws.touch(part)


def replace_in_paragraph(p, find: str, repl: str) -> int:
    """Replace ``find`` even when it spans several runs; returns the count."""
    ts = []
    for r in p:
        if local(r) == "r":
            t = r.find("a:t", NS)
            if t is not None:
                ts.append(t)
    texts = [t.text or "" for t in ts]
    full = "".join(texts)
    if find not in full:
        return 0
    owner = [i for i, s in enumerate(texts) for _ in s]
    out = [""] * len(ts)
    pos = count = 0
    while pos < len(full):
        if full.startswith(find, pos):
            out[owner[pos]] += repl
            pos += len(find)
            count += 1
        else:
            out[owner[pos]] += full[pos]
            pos += 1
    for t, s in zip(ts, out):
        t.text = s
    return count


def op_replace_text_all(ws, params):
    require(params, "find", "replace")
    find, repl = params["find"], params["replace"]
    if not isinstance(find, str) or not find or not isinstance(repl, str):
        raise InvalidParameterError("find must be a non-empty string and replace a string")
    total = 0
    for n in slides_param(ws, params):
        part, root = ws.slide(n)
        parts = [(part, root)]
        if params.get("include_notes"):
            parts += [(np, ws.xml(np)) for np in ws.related(part, "notesSlide")]
        for name, tree in parts:
            hits = sum(replace_in_paragraph(p, find, repl) for p in tree.iter(q("a", "p")))
            if hits:
                ws.touch(name)
                total += hits
    return total


def op_set_font(ws, params):
    keys = [k for k in ("name", "size", "bold", "italic", "color") if params.get(k) is not None]
    if not keys:
        raise InvalidParameterError("set_font needs at least one of name, size, bold, italic, color")
    if "size" in keys:
        size = params["size"]
        if isinstance(size, bool) or not isinstance(size, (int, float)) or not 1 <= size <= 4000:
            raise InvalidParameterError(f"size must be between 1 and 4000 points, got {size!r}")
    for k in ("bold", "italic"):
        if k in keys and not isinstance(params[k], bool):
            raise InvalidParameterError(f"{k} must be a boolean")
    if "name" in keys and (not isinstance(params["name"], str) or not params["name"].strip()):
        raise InvalidParameterError("name must be a non-empty font name")
    color = color_param(params["color"]) if "color" in keys else None
    sel, part, _, el = target_of(ws, params)
    for r in addressed_runs(el, sel):
        rpr = r.find("a:rPr", NS)
        if rpr is None:
            rpr = etree.Element(q("a", "rPr"))
            rpr.set("lang", "en-US")
            r.insert(0, rpr)
        if "size" in keys:
            rpr.set("sz", str(int(round(params["size"] * 100))))
        if "bold" in keys:
            rpr.set("b", "1" if params["bold"] else "0")
        if "italic" in keys:
            rpr.set("i", "1" if params["italic"] else "0")
        if color:
            replace_fill(rpr, color, RPR_ORDER)
        if "name" in keys:
            get_or_add(rpr, "a:latin", RPR_ORDER).set("typeface", params["name"])
    ws.touch(part)


def shape_props(el):
    kind = local(el)
    if kind in ("sp", "pic", "cxnSp"):
        return get_or_add(el, "p:spPr", ("nvSpPr", "nvPicPr", "nvCxnSpPr", "blipFill", "spPr", "style", "txBody"))
    if kind == "grpSp":
        return el.find("p:grpSpPr", NS)
    raise InvalidParameterError(f"shape kind {kind!r} has no fill/line properties")


def op_set_fill(ws, params):
    require(params, "color")
    color = color_param(params["color"], allow_none=True)
    _, part, _, el = target_of(ws, params)
    props = shape_props(el)
    if props is None:
        raise InvalidParameterError("group has no properties element")
    replace_fill(props, color, SPPR_ORDER)
    ws.touch(part)


def op_set_line(ws, params):
    if params.get("color") is None and params.get("width") is None:
        raise InvalidParameterError("set_line needs color and/or width")
    color = color_param(params["color"], allow_none=True) if params.get("color") is not None else None
    width = points_param(params["width"], "width", 0) if params.get("width") is not None else None
    _, part, _, el = target_of(ws, params)
    props = shape_props(el)
    if props is None or local(el) == "grpSp":
        raise InvalidParameterError("groups have no outline")
    ln = get_or_add(props, "a:ln", SPPR_ORDER)
    if width is not None:
        ln.set("w", str(width))
    if color is not None:
        replace_fill(ln, color, LN_ORDER)
    ws.touch(part)


# -- geometry -------------------------------------------------------------

def xfrm_element(el):
    kind = local(el)
    if kind == "graphicFrame":
        return el.find("p:xfrm", NS)
    if kind == "grpSp":
        return el.find("p:grpSpPr/a:xfrm", NS)
    return el.find("p:spPr/a:xfrm", NS)


def group_chain(el):
    """Enclosing group transforms, outermost first, as ((x, y, w, h), child_box)."""
    chain = []
    parent = el.getparent()
    while parent is not None and parent.tag == q("p", "grpSp"):
        geo = _xfrm(parent)
        if geo is not None and geo[2] is not None:
            chain.append((tuple(geo[0]), geo[2]))
        parent = parent.getparent()
    return list(reversed(chain))


def to_local(el, box):
    x, y, w, h = box
    for (gx, gy, gw, gh), (cx, cy, cw, ch) in group_chain(el):
        sx = cw / gw if gw else 1.0
        sy = ch / gh if gh else 1.0
        x, y, w, h = cx + (x - gx) * sx, cy + (y - gy) * sy, w * sx, h * sy
    return [int(round(v)) for v in (x, y, w, h)]


def inherited_box(ws: Workspace, slide_part: str, el):
    ph_el = el.find("p:nvSpPr/p:nvPr/p:ph", NS)
    if ph_el is None:
        return None
    idx = ph_el.get("idx")
    ph = {"type": ph_el.get("type"), "idx": int(idx) if idx is not None else None}
    layout = ws.layout_of(slide_part)
    master = ws.master_of(layout)
    roots = [ws.xml(p) for p in (layout, master) if p]
    ctx = _Context(None, None, None, {})  # only placeholder matching is needed
    for root in roots:
        sp = ctx.placeholder_in(root, ph)
        if sp is not None and _xfrm(sp) is not None:
            return list(_xfrm(sp)[0])
    return None


def current_box(ws, slide_part, el, materialize=True):
    """Slide-space (x, y, w, h) EMU; inherited placeholder geometry is copied in."""
    geo = _xfrm(el)
    if geo is not None:
        return _to_parent(geo[0], group_chain(el))
    box = inherited_box(ws, slide_part, el)
    if box is None:
        raise InvalidParameterError("shape has no geometry to move or resize")
    if materialize:
        props = shape_props(el)
        xf = fragment(ox.xfrm_xml(*box))[0]
        insert_ordered(props, xf, SPPR_ORDER)
    return box


def write_box(el, box):
    x, y, w, h = to_local(el, box)
    xf = xfrm_element(el)
    off, ext = xf.find("a:off", NS), xf.find("a:ext", NS)
    off.set("x", str(x))
    off.set("y", str(y))
    ext.set("cx", str(max(w, 0)))
    ext.set("cy", str(max(h, 0)))


def op_move(ws, params):
    require(params, "x", "y")
    x, y = points_param(params["x"], "x"), points_param(params["y"], "y")
    _, part, _, el = target_of(ws, params)
    box = current_box(ws, part, el)
    write_box(el, (x, y, box[2], box[3]))
    ws.touch(part)


def op_resize(ws, params):
    require(params, "w", "h")
    w, h = points_param(params["w"], "w", 0), points_param(params["h"], "h", 0)
    _, part, _, el = target_of(ws, params)
    box = current_box(ws, part, el)
    write_box(el, (box[0], box[1], w, h))
    ws.touch(part)


def op_set_z_order(ws, params):
    require(params, "position")
    pos = params["position"]
    _, part, _, el = target_of(ws, params)
    parent = el.getparent()
    shapes = list(shape_elements(parent))
    current = shapes.index(el)
    if pos in Z_POSITIONS:
        new = {"front": len(shapes) - 1, "back": 0, "forward": min(current + 1, len(shapes) - 1),
               "backward": max(current - 1, 0)}[pos]
    elif isinstance(pos, int) and not isinstance(pos, bool) and 0 <= pos < len(shapes):
        new = pos
    else:
        raise InvalidParameterError(f"position must be one of {Z_POSITIONS} or 0..{len(shapes) - 1}, got {pos!r}")
    if new == current:
        return
    others = [s for s in shapes if s is not el]
    parent.remove(el)
    if new < len(others):
        others[new].addprevious(el)
    else:
        others[-1].addnext(el)
    ws.touch(part)


# -- shapes ------------------------------------------------------------------

def op_add_shape(ws, params):
    require(params, "slide", "kind", "x", "y", "w", "h")
    kind = params["kind"]
    if kind not in SHAPE_KINDS:
        raise InvalidParameterError(f"kind must be one of {sorted(SHAPE_KINDS)}, got {kind!r}")
    box = (points_param(params["x"], "x"), points_param(params["y"], "y"),
           points_param(params["w"], "w", 0), points_param(params["h"], "h", 0))
    part, root = ws.slide(params["slide"])
    sid = next_shape_id(root)
    name = params.get("name") or f"{KIND_NAMES[kind]} {sid - 1}"
    fill = color_param(params["fill"], "fill", allow_none=True) if params.get("fill") is not None else None
    if kind == "table":
        rows = params.get("rows")
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) and r for r in rows):
            raise InvalidParameterError("table shapes need rows: a non-empty list of non-empty lists")
        xml = ox.table_xml(sid, name, box, [[str(c) for c in r] for r in rows])
    else:
        text = params.get("text")
        paras = text.split("\n") if isinstance(text, str) else None
        xml = ox.sp_xml(sid, name, geom=box, paragraphs=paras, txbox=kind == "textbox",
                        prst=SHAPE_KINDS[kind], fill=fill)
    tree = root.find("p:cSld/p:spTree", NS)
    el = fragment(xml)[0]
    last = list(shape_elements(tree))
    if last:
        last[-1].addnext(el)
    else:
        insert_ordered(tree, el, ("nvGrpSpPr", "grpSpPr"))
    ws.touch(part)
    return sid


def drop_animations(root, shape_ids):
    """Remove click effects whose target is one of ``shape_ids``."""
    ids = {str(i) for i in shape_ids}
    for tgt in list(root.iter(q("p", "spTgt"))):
        if tgt.get("spid") not in ids:
            continue
        node = tgt
        while node is not None and not (local(node) == "par" and node.getparent() is not None
                                        and local(node.getparent()) == "childTnLst"
                                        and local(node.getparent().getparent()) == "cTn"
                                        and node.getparent().getparent().get("nodeType") == "mainSeq"):
            node = node.getparent()
        if node is not None:
            node.getparent().remove(node)
    for bld in list(root.iter(q("p", "bldP"))):
        if bld.get("spid") in ids:
            bld.getparent().remove(bld)


def op_delete_shape(ws, params):
    _, part, root, el = target_of(ws, params)
    ids = [shape_identity(s)[0] for s in [el, *shape_elements(el, recursive=True)]]
    el.getparent().remove(el)
    drop_animations(root, [i for i in ids if i is not None])
    ws.touch(part)


def op_group(ws, params):
    require(params, "slide", "shapes")
    refs = params["shapes"]
    if not isinstance(refs, list) or len(refs) < 2:
        raise InvalidParameterError("group needs at least two shapes")
    part, root = ws.slide(params["slide"])
    tree = root.find("p:cSld/p:spTree", NS)
    members = []
    for ref in refs:
        sel = TargetSelector.from_dict({"slide": params["slide"], "shape": ref})
        el = find_shape(root, sel.shape_ref, f"slide {params['slide']}")
        if el.getparent() is not tree:
            raise InvalidParameterError(f"shape {ref} is already inside a group")
        if el.find("p:nvSpPr/p:nvPr/p:ph", NS) is not None:
            raise InvalidParameterError(f"placeholder {ref} cannot be grouped")
        if any(el is m for m in members):
            raise InvalidParameterError(f"shape {ref} listed twice")
        members.append(el)
    boxes = []
    for el in members:
        geo = _xfrm(el)
        if geo is None:
            raise InvalidParameterError("every grouped shape needs explicit geometry")
        boxes.append(geo[0])
    x0, y0 = min(b[0] for b in boxes), min(b[1] for b in boxes)
    x1, y1 = max(b[0] + b[2] for b in boxes), max(b[1] + b[3] for b in boxes)
    sid = next_shape_id(root)
    name = params.get("name") or f"Group {sid - 1}"
    grp = fragment(ox.grp_xml(sid, name, (x0, y0, x1 - x0, y1 - y0), ""))[0]
    order = list(shape_elements(tree))
    members.sort(key=order.index)
    members[0].addprevious(grp)
    for el in members:
        grp.append(el)
    ws.touch(part)
    return sid


def op_ungroup(ws, params):
    _, part, _, el = target_of(ws, params)
    if local(el) != "grpSp":
        raise InvalidParameterError("ungroup target is not a group")
    geo = _xfrm(el)
    transform = [(tuple(geo[0]), geo[2])] if geo is not None and geo[2] is not None else []
    anchor = el
    for child in list(shape_elements(el)):
        xf = xfrm_element(child)
        cgeo = _xfrm(child)
        if xf is not None and cgeo is not None and transform:
            x, y, w, h = _to_parent(cgeo[0], transform)
            xf.find("a:off", NS).set("x", str(x))
            xf.find("a:off", NS).set("y", str(y))
            xf.find("a:ext", NS).set("cx", str(w))
            xf.find("a:ext", NS).set("cy", str(h))
        anchor.addnext(child)
        anchor = child
    el.getparent().remove(el)
    ws.touch(part)


# -- slides -------------------------------------------------------------

def layout_placeholders(layout_root):
    out = []
    for sp in layout_root.iterfind("p:cSld/p:spTree/p:sp", NS):
        ph = sp.find("p:nvSpPr/p:nvPr/p:ph", NS)
        if ph is None or ph.get("type") in ("dt", "ftr", "sldNum"):
            continue
        idx = ph.get("idx")
        out.append((ph.get("type"), int(idx) if idx is not None else None))
    return out


def op_add_slide(ws, params):
    layouts = ws.layouts()
    if not layouts:
        raise InvalidParameterError("deck has no slide layouts")
    wanted = params.get("layout")
    if wanted is None:
        match = next((p for n, p in layouts if n == "Title and Content"), layouts[0][1])
    else:
        match = next((p for n, p in layouts if n.lower() == str(wanted).lower()), None)
        if match is None:
            raise InvalidParameterError(f"no layout named {wanted!r}; available: {[n for n, _ in layouts]}")
    count = ws.slide_count()
    position = params.get("position", count + 1)
    if not isinstance(position, int) or isinstance(position, bool) or not 1 <= position <= count + 1:
        raise InvalidParameterError(f"position must be within 1..{count + 1}")
    body_lines = params.get("body")
    shapes, sid = [], 2
    for ptype, idx in layout_placeholders(ws.xml(match)):
        paras = None
        if ptype in ("title", "ctrTitle") and params.get("title"):
            paras = [params["title"]]
        elif ptype in (None, "body", "obj", "subTitle") and body_lines:
            paras, body_lines = list(body_lines), None
        label = {"title": "Title", "ctrTitle": "Title", "subTitle": "Subtitle"}.get(ptype, "Content Placeholder")
        shapes.append(ox.sp_xml(sid, f"{label} {sid - 1}", paragraphs=paras, ph=(ptype, idx)))
        sid += 1
    part = ws.unused_name("ppt/slides/slide{}.xml")
    ws.put_xml(part, etree.fromstring(ox.slide_xml("".join(shapes)).encode()), ox.CT["slide"])
    ws.add_rel(part, "slideLayout", match)
    pres_part = ws.pres_part
    pres = ws.xml(pres_part)
    lst = pres.find("p:sldIdLst", NS)
    if lst is None:
        lst = insert_ordered(pres, etree.Element(q("p", "sldIdLst")), PRES_ORDER)
    existing = [int(s.get("id")) for s in lst]
    el = etree.Element(q("p", "sldId"))
    el.set("id", str(max(existing + [255]) + 1))
    el.set(q("r", "id"), ws.add_rel(pres_part, "slide", part))
    entries = list(lst)
    if position <= len(entries):
        entries[position - 1].addprevious(el)
    else:
        lst.append(el)
    ws.touch(pres_part)
    return position


def op_delete_slide(ws, params):
    require(params, "slide")
    part = ws.slide_part(params["slide"])
    sid_el = ws.slide_list()[params["slide"] - 1][0]
    pres_part = ws.pres_part
    pres = ws.xml(pres_part)
    rid = sid_el.get(q("r", "id"))
    slide_id = sid_el.get("id")
    lst = sid_el.getparent()
    lst.remove(sid_el)
    if len(lst) == 0:
        pres.remove(lst)
    for el in list(pres.iter()):  # section lists reference slides by id
        if local(el) == "sldId" and el.get("id") == slide_id:
            el.getparent().remove(el)
    ws.drop_rel(pres_part, rid)
    ws.touch(pres_part)
    owned = [t for _, rtype, t, ext in ws.rels(part)
             if not ext and not rtype.endswith(("/slideLayout", "/slide"))]
    for src in ws.referrers(part):
        if src == part:
            continue
        src_root = ws.xml(src)
        for r, _, target, ext in ws.rels(src):
            if target != part or ext:
                continue
            for node in list(src_root.iter()):
                if node.get(q("r", "id")) == r and local(node) in ("hlinkClick", "hlinkHover"):
                    node.getparent().remove(node)
            ws.drop_rel(src, r)
            ws.touch(src)
    ws.remove(part)
    for target in owned:
        if target in ws and not ws.referrers(target):
            ws.remove(target)


def op_reorder_slides(ws, params):
    require(params, "order")
    order = params["order"]
    entries = ws.slide_list()
    n = len(entries)
    if not isinstance(order, list) or sorted(order) != list(range(1, n + 1)):
        raise InvalidParameterError(f"order must be a permutation of 1..{n}")
    if order == list(range(1, n + 1)):
        return
    lst = entries[0][0].getparent()
    els = [e for e, _ in entries]
    for e in els:
        lst.remove(e)
    for k in order:
        lst.append(els[k - 1])
    ws.touch(ws.pres_part)


# -- notes, background, theme -------------------------------------------------

def ensure_notes_master(ws) -> str:
    pres_part = ws.pres_part
    existing = ws.related(pres_part, "notesMaster")
    if existing:
        return existing[0]
    theme = ws.unused_name("ppt/theme/theme{}.xml")
    ws.put_xml(theme, etree.fromstring(ox.theme_xml("Notes Theme").encode()), ox.CT["theme"])
    master = ws.unused_name("ppt/notesMasters/notesMaster{}.xml")
    ws.put_xml(master, etree.fromstring(ox.notes_master_xml().encode()), ox.CT["notesMaster"])
    ws.add_rel(master, "theme", theme)
    pres = ws.xml(pres_part)
    lst = insert_ordered(pres, etree.Element(q("p", "notesMasterIdLst")), PRES_ORDER)
    etree.SubElement(lst, q("p", "notesMasterId")).set(q("r", "id"), ws.add_rel(pres_part, "notesMaster", master))
    ws.touch(pres_part)
    return master


def op_set_notes(ws, params):
    require(params, "slide", "text")
    if not isinstance(params["text"], str):
        raise InvalidParameterError("text must be a string")
    part = ws.slide_part(params["slide"])
    notes = ws.related(part, "notesSlide")
    if notes:
        root = ws.xml(notes[0])
        body_sp = None
        for sp in root.iterfind(".//p:sp", NS):
            ph = sp.find("p:nvSpPr/p:nvPr/p:ph", NS)
            if ph is not None and ph.get("type") == "body":
                body_sp = sp
                break
        if body_sp is None:
            tree = root.find("p:cSld/p:spTree", NS)
            body_sp = fragment(ox.sp_xml(next_shape_id(root), "Notes Placeholder", ph=("body", 1)))[0]
            tree.append(body_sp)
        body = body_sp.find("p:txBody", NS)
        if body is None:
            body = fragment(ox.txbody_xml([]))[0]
            body_sp.append(body)
        set_body_text(body, params["text"])
        ws.touch(notes[0])
        return
    master = ensure_notes_master(ws)
    name = ws.unused_name("ppt/notesSlides/notesSlide{}.xml")
    ws.put_xml(name, etree.fromstring(ox.notes_slide_xml(params["text"]).encode()), ox.CT["notesSlide"])
    ws.add_rel(name, "notesMaster", master)
    ws.add_rel(name, "slide", part)
    ws.add_rel(part, "notesSlide", name)


def op_set_background(ws, params):
    require(params, "color")
    color = color_param(params["color"], allow_none=True)
    numbers = [params["slide"]] if "slide" in params else slides_param(ws, params)
    for n in numbers:
        part, root = ws.slide(n)
        csld = root.find("p:cSld", NS)
        old = csld.find("p:bg", NS)
        if old is not None:
            csld.remove(old)
        if color != "none":
            insert_ordered(csld, fragment(ox.background_xml(color))[0], CSLD_ORDER)
        ws.touch(part)


def themes(ws) -> list[str]:
    out = []
    for master in ws.masters():
        t = ws.theme_of(master)
        if t and t not in out:
            out.append(t)
    if not out:
        raise InvalidParameterError("deck has no theme part")
    return out


def op_set_theme_color(ws, params):
    require(params, "role", "color")
    role = params["role"]
    if role not in ox.THEME_ROLES:
        raise InvalidParameterError(f"role must be one of {ox.THEME_ROLES}, got {role!r}")
    color = color_param(params["color"])
    for part in themes(ws):
        slot = ws.xml(part).find(f"a:themeElements/a:clrScheme/a:{role}", NS)
        if slot is None:
            raise InvalidParameterError(f"theme {part} has no {role} slot")
        for child in list(slot):
            slot.remove(child)
        etree.SubElement(slot, q("a", "srgbClr")).set("val", color)
        ws.touch(part)


def op_set_theme_font(ws, params):
    fonts = {k: params.get(k) for k in ("major", "minor") if params.get(k) is not None}
    if not fonts:
        raise InvalidParameterError("set_theme_font needs major and/or minor")
    for k, v in fonts.items():
        if not isinstance(v, str) or not v.strip():
            raise InvalidParameterError(f"{k} must be a non-empty font name")
    for part in themes(ws):
        scheme = ws.xml(part).find("a:themeElements/a:fontScheme", NS)
        if scheme is None:
            raise InvalidParameterError(f"theme {part} has no font scheme")
        for k, v in fonts.items():
            latin = scheme.find(f"a:{k}Font/a:latin", NS)
            if latin is None:
                raise InvalidParameterError(f"theme {part} has no {k} latin font")
            latin.set("typeface", v)
        ws.touch(part)


# -- accessibility and links -------------------------------------------------

def op_set_alt_text(ws, params):
    require(params, "text")
    if not isinstance(params["text"], str):
        raise InvalidParameterError("text must be a string")
    _, part, _, el = target_of(ws, params)
    c = cnvpr(el)
    if c is None:
        raise InvalidParameterError("shape has no non-visual properties")
    if params["text"]:
        c.set("descr", params["text"])
    elif "descr" in c.attrib:
        del c.attrib["descr"]
    ws.touch(part)


def op_set_hyperlink(ws, params):
    url, to_slide = params.get("url"), params.get("to_slide")
    if url is not None and to_slide is not None:
        raise InvalidParameterError("give url or to_slide, not both")
    if url is not None and (not isinstance(url, str) or not url.strip()):
        raise InvalidParameterError("url must be a non-empty string")
    sel, part, root, el = target_of(ws, params)
    if sel.paragraph is not None:
        holders = []
        for r in addressed_runs(el, sel):
            rpr = r.find("a:rPr", NS)
            if rpr is None:
                rpr = etree.Element(q("a", "rPr"))
                rpr.set("lang", "en-US")
                r.insert(0, rpr)
            holders.append((rpr, RPR_ORDER))
    else:
        c = cnvpr(el)
        if c is None:
            raise InvalidParameterError("shape has no non-visual properties")
        holders = [(c, ("hlinkClick", "hlinkHover", "extLst"))]
    rid = action = None
    if url is not None:
        rid = ws.add_rel(part, "hyperlink", url, external=True)
    elif to_slide is not None:
        rid = ws.add_rel(part, "slide", ws.slide_part(to_slide))
        action = SLIDE_LINK_ACTION
    stale = set()
    for holder, order in holders:
        old = holder.find("a:hlinkClick", NS)
        if old is not None:
            stale.add(old.get(q("r", "id")))
            holder.remove(old)
        if rid is not None:
            link = etree.Element(q("a", "hlinkClick"))
            link.set(q("r", "id"), rid)
            if action:
                link.set("action", action)
            insert_ordered(holder, link, order)
    in_use = {n.get(q("r", "id")) for n in root.iter() if n.get(q("r", "id"))}
    in_use |= {n.get(q("r", "embed")) for n in root.iter() if n.get(q("r", "embed"))}
    for old in stale - in_use - {None}:
        ws.drop_rel(part, old)
    ws.touch(part)


def header_footer_sp(root, ph_type):
    for sp in root.iterfind("p:cSld/p:spTree/p:sp", NS):
        ph = sp.find("p:nvSpPr/p:nvPr/p:ph", NS)
        if ph is not None and ph.get("type") == ph_type:
            return sp
    return None


def op_set_header_footer(ws, params):
    keys = [k for k in HEADER_FOOTER_PH if k in params]
    if not keys:
        raise InvalidParameterError("set_header_footer needs footer, date and/or slide_number")
    if "slide_number" in keys and not isinstance(params["slide_number"], bool):
        raise InvalidParameterError("slide_number must be a boolean")
    for k in ("footer", "date"):
        if k in keys and params[k] is not None and not isinstance(params[k], str):
            raise InvalidParameterError(f"{k} must be a string or null")
    for n in slides_param(ws, params):
        part, root = ws.slide(n)
        tree = root.find("p:cSld/p:spTree", NS)
        for key in keys:
            ph_type, default_idx = HEADER_FOOTER_PH[key]
            value = params[key]
            existing = header_footer_sp(root, ph_type)
            if not value:
                if existing is not None:
                    tree.remove(existing)
                continue
            if existing is None:
                sid = next_shape_id(root)
                label = {"dt": "Date Placeholder", "ftr": "Footer Placeholder", "sldNum": "Slide Number Placeholder"}
                existing = fragment(ox.sp_xml(sid, f"{label[ph_type]} {sid - 1}", paragraphs=[],
                                              ph=(ph_type, default_idx)))[0]
                shapes = list(shape_elements(tree))
                if shapes:
                    shapes[-1].addnext(existing)
                else:
                    tree.append(existing)
            body = existing.find("p:txBody", NS)
            if key == "slide_number":
                for p in body.findall("a:p", NS):
                    body.remove(p)
                body.append(fragment(
                    '<a:p><a:fld id="{B6F15528-21DE-4FAA-801E-634DDDAF4B2B}" type="slidenum">'
                    f'<a:rPr lang="en-US"/><a:t>{n}</a:t></a:fld></a:p>')[0])
            else:
                set_body_text(body, value)
        ws.touch(part)


# -- interactivity -------------------------------------------------------------

def op_set_transition(ws, params):
    require(params, "preset")
    preset = params["preset"]
    if preset not in TRANSITIONS:
        raise InvalidParameterError(f"preset must be one of {TRANSITIONS}, got {preset!r}")
    duration = params.get("duration_ms")
    if duration is not None and (not isinstance(duration, int) or isinstance(duration, bool) or duration <= 0):
        raise InvalidParameterError("duration_ms must be a positive integer")
    for n in slides_param(ws, params):
        part, root = ws.slide(n)
        for child in list(root):
            if local(child) == "transition" or (
                    local(child) == "AlternateContent" and any(local(e) == "transition" for e in child.iter())):
                root.remove(child)
        if preset != "none":
            insert_ordered(root, fragment(ox.transition_xml(preset, duration))[0], SLD_ORDER)
        ws.touch(part)


def op_set_animation(ws, params):
    require(params, "preset")
    preset = params["preset"]
    if preset not in ANIMATIONS:
        raise InvalidParameterError(f"preset must be one of {ANIMATIONS}, got {preset!r}")
    _, part, root, el = target_of(ws, params)
    sid, _ = shape_identity(el)
    if sid is None:
        raise InvalidParameterError("target shape has no id")
    drop_animations(root, [sid])
    timing = root.find("p:timing", NS)
    if preset == "none":
        if timing is not None and not list(timing.iter(q("p", "spTgt"))):
            root.remove(timing)
        ws.touch(part)
        return
    ids = [int(c.get("id")) for c in root.iter(q("p", "cTn")) if (c.get("id") or "").isdigit()]
    if timing is None:
        par = ox.animation_par_xml(3, sid, preset)
        insert_ordered(root, fragment(ox.timing_xml(par))[0], SLD_ORDER)
    else:
        seq = next((c for c in timing.iter(q("p", "cTn")) if c.get("nodeType") == "mainSeq"), None)
        if seq is None:
            raise InvalidParameterError("slide timing has no main sequence to extend")
        lst = get_or_add(seq, "p:childTnLst", ("stCondLst", "endCondLst", "endSync", "iterate", "childTnLst"))
        lst.append(fragment(ox.animation_par_xml(max(ids, default=2) + 1, sid, preset))[0])
    ws.touch(part)


OPS: dict[str, OpSpec] = {
    "set_text": OpSpec(op_set_text, "Content", 1, True),
    "replace_text_all": OpSpec(op_replace_text_all, "Content", 1),
    "set_font": OpSpec(op_set_font, "Content", 1, True),
    "set_fill": OpSpec(op_set_fill, "Content", 2, True),
    "set_line": OpSpec(op_set_line, "Content", 2, True),
    "add_shape": OpSpec(op_add_shape, "Content", 2),
    "delete_shape": OpSpec(op_delete_shape, "Content", 2),
    "move": OpSpec(op_move, "Layout", 8, True),
    "resize": OpSpec(op_resize, "Layout", 8, True),
    "set_z_order": OpSpec(op_set_z_order, "Layout", 8),
    "group": OpSpec(op_group, "Layout", 8),
    "ungroup": OpSpec(op_ungroup, "Layout", 8),
    "set_background": OpSpec(op_set_background, "Styling", 10, True),
    "set_theme_color": OpSpec(op_set_theme_color, "Styling", 10, True),
    "set_theme_font": OpSpec(op_set_theme_font, "Styling", 10, True),
    "set_animation": OpSpec(op_set_animation, "Interactivity", 12, True),
    "set_transition": OpSpec(op_set_transition, "Interactivity", 13, True),
    "set_hyperlink": OpSpec(op_set_hyperlink, "Interactivity", 14, True),
    "add_slide": OpSpec(op_add_slide, "Structure", 15),
    "delete_slide": OpSpec(op_delete_slide, "Structure", 15),
    "reorder_slides": OpSpec(op_reorder_slides, "Structure", 15),
    "set_notes": OpSpec(op_set_notes, "Structure", 15, True),
    "set_header_footer": OpSpec(op_set_header_footer, "Structure", 15, True),
    "set_alt_text": OpSpec(op_set_alt_text, "Structure", 16, True),
}
