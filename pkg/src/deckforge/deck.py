"""Typed slide model parsed from a :class:`~deckforge.package.Package`, and its canonical JSON snapshot.

Geometry is kept as integer EMU on the model and reported in points in the
snapshot. Run formatting is recorded twice: the explicitly set value (or
``None``) and an ``effective_*`` value resolved through the placeholder,
layout, master and theme chain.
"""

from __future__ import annotations

import json
import math
import os
import posixpath
from dataclasses import dataclass, field
from typing import Any

from lxml import etree

from .errors import MalformedDeckError
from .ooxml import EMU_PER_POINT, NS, q
from .package import Package, open_package, parse_xml

SHAPE_KINDS = ("textbox", "placeholder", "picture", "table", "chart", "group", "autoshape", "media", "other")
SHAPE_TAGS = {q("p", t) for t in ("sp", "pic", "graphicFrame", "grpSp", "cxnSp", "contentPart")} | {q("mc", "AlternateContent")}

TITLE_TYPES = {"title", "ctrTitle"}
BODY_TYPES = {"body", "subTitle", "obj", None}

DEFAULT_SIZE_PT = 18.0


def emu_to_points(v: int) -> float:
    """EMU to points; 12700 EMU per point."""
    return v / EMU_PER_POINT


def points_to_emu(p: float) -> int:
    return int(round(p * EMU_PER_POINT))


# -- model ----------------------------------------------------------------

@dataclass
class Run:
    text: str
    font_name: str | None = None
    size_pt: float | None = None
    bold: bool | None = None
    italic: bool | None = None
    color_rgb: str | None = None
    hyperlink: str | None = None
    effective_font_name: str | None = None
    effective_size_pt: float | None = None
    effective_bold: bool = False
    effective_italic: bool = False
    effective_color: str | None = None


@dataclass
class Paragraph:
    alignment: str | None = None
    level: int = 0
    runs: list[Run] = field(default_factory=list)

    @property
    def text(self) -> str:
        return "".join(r.text for r in self.runs)


@dataclass
class TextFrame:
    paragraphs: list[Paragraph] = field(default_factory=list)

    @property
    def text(self) -> str:
        return "\n".join(p.text for p in self.paragraphs)


@dataclass
class TableData:
    rows: int
    cols: int
    cells: list[list[str]]


@dataclass
class ChartSummary:
    chart_type: str
    categories: list[str]
    series: list[dict]  # {"name": str, "values": [float]}


@dataclass
class Shape:
    shape_id: int
    name: str
    kind: str
    x_emu: int = 0
    y_emu: int = 0
    w_emu: int = 0
    h_emu: int = 0
    rotation_deg: float = 0.0
    z_index: int = 0
    text: TextFrame | None = None
    table: TableData | None = None
    chart: ChartSummary | None = None
    picture: dict | None = None  # {"rel_id", "alt_text"}
    children: list["Shape"] = field(default_factory=list)
    fill: dict | None = None
    line: dict | None = None
    hyperlink: str | None = None
    placeholder: dict | None = None  # {"type", "idx"}
    alt_text: str | None = None
    raw_tag: str | None = None
    address: tuple = ()  # element-child index path from the slide part root
    geometry_inherited: bool = False

    @property
    def x_pt(self):
        return emu_to_points(self.x_emu)

    @property
    def y_pt(self):
        return emu_to_points(self.y_emu)

    @property
    def w_pt(self):
        return emu_to_points(self.w_emu)

    @property
    def h_pt(self):
        return emu_to_points(self.h_emu)

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass
class Slide:
    slide_number: int
    slide_id: int
    part: str
    layout_name: str | None
    shapes: list[Shape]
    notes_text: str = ""
    background: dict = field(default_factory=lambda: {"type": "inherit"})
    transition: str | None = None
    animation_targets: list[int] = field(default_factory=list)
    has_animation: bool = False

    def all_shapes(self):
        for s in self.shapes:
            yield from s.walk()


@dataclass
class Deck:
    filename: str
    slide_width_emu: int
    slide_height_emu: int
    slides: list[Slide]
    theme_colors: dict[str, str] = field(default_factory=dict)
    master_names: list[str] = field(default_factory=list)

    @property
    def slide_width_pt(self):
        return emu_to_points(self.slide_width_emu)

    @property
    def slide_height_pt(self):
        return emu_to_points(self.slide_height_emu)


# -- helpers ----------------------------------------------------------------

def _find(el, path):
    return el.find(path, NS) if el is not None else None


def _bool_attr(value):
    if value is None:
        return None
    return value in ("1", "true", "on")


def element_address(el) -> tuple:
    path = []
    while el.getparent() is not None:
        parent = el.getparent()
        siblings = [c for c in parent if isinstance(c.tag, str)]
        path.append(siblings.index(el))
        el = parent
    return tuple(reversed(path))


class _Theme:
    def __init__(self, root):
        self.colors: dict[str, str] = {}
        self.major = self.minor = None
        self.name = None
        if root is None:
            return
        self.name = root.get("name")
        scheme = root.find(".//a:clrScheme", NS)
        if scheme is not None:
            for child in scheme:
                if not isinstance(child.tag, str):
                    continue
                color = child.find("a:srgbClr", NS)
                if color is not None:
                    self.colors[etree.QName(child).localname] = color.get("val", "").upper()
                else:
                    sysc = child.find("a:sysClr", NS)
                    if sysc is not None:
                        self.colors[etree.QName(child).localname] = sysc.get("lastClr", "000000").upper()
        major = root.find(".//a:fontScheme/a:majorFont/a:latin", NS)
        minor = root.find(".//a:fontScheme/a:minorFont/a:latin", NS)
        self.major = major.get("typeface") if major is not None else None
        self.minor = minor.get("typeface") if minor is not None else None


class _Context:
    """Parsed master/layout/theme chain for one slide."""

    def __init__(self, layout, master, theme: _Theme, clr_map: dict):
        self.layout = layout
        self.master = master
        self.theme = theme
        self.clr_map = clr_map

    def scheme_color(self, name: str | None) -> str | None:
        if name is None:
            return None
        role = self.clr_map.get(name, name)
        return self.theme.colors.get(role)

    def font(self, typeface: str | None) -> str | None:
        if typeface is None:
            return None
        if typeface.startswith("+mj"):
            return self.theme.major
        if typeface.startswith("+mn"):
            return self.theme.minor
        return typeface

    def placeholder_in(self, root, ph: dict | None):
        if root is None or ph is None:
            return None
        candidates = []
        for sp in root.iterfind(".//p:cSld/p:spTree//p:sp", NS):
            el = sp.find("p:nvSpPr/p:nvPr/p:ph", NS)
            if el is not None:
                candidates.append((sp, el.get("type"), el.get("idx")))
        if ph.get("idx") is not None:
            for sp, t, idx in candidates:
                if idx == str(ph["idx"]):
                    return sp
        ptype = ph.get("type")
        wanted = {"ctrTitle": {"ctrTitle", "title"}, "title": {"title", "ctrTitle"},
                  "subTitle": {"subTitle", "body"}, None: {"body", None}, "obj": {"obj", "body"}}.get(ptype, {ptype})
        for sp, t, _ in candidates:
            if t in wanted:
                return sp
        return None


def _color_of(fill_parent, ctx: _Context) -> str | None:
    """Colour of the first solidFill under ``fill_parent``."""
    solid = _find(fill_parent, "a:solidFill")
    if solid is None:
        return None
    return _color_value(solid, ctx)


def _color_value(holder, ctx: _Context) -> str | None:
    srgb = holder.find("a:srgbClr", NS)
    if srgb is not None:
        return srgb.get("val", "").upper()
    scheme = holder.find("a:schemeClr", NS)
    if scheme is not None:
        return ctx.scheme_color(scheme.get("val"))
    sysc = holder.find("a:sysClr", NS)
    if sysc is not None:
        return sysc.get("lastClr", "").upper() or None
    prst = holder.find("a:prstClr", NS)
    if prst is not None:
        return prst.get("val")
    return None


def _fill_descriptor(sppr, ctx: _Context) -> dict:
    if sppr is None:
        return {"type": "inherit"}
    for child in sppr:
        if not isinstance(child.tag, str):
            continue
        local = etree.QName(child).localname
        if local == "solidFill":
            return {"type": "solid", "color": _color_value(child, ctx)}
        if local == "noFill":
            return {"type": "none"}
        if local == "gradFill":
            stops = [_color_value(gs, ctx) for gs in child.iterfind("a:gsLst/a:gs", NS)]
            return {"type": "gradient", "colors": stops}
        if local == "blipFill":
            return {"type": "picture"}
        if local == "pattFill":
            return {"type": "pattern"}
        if local == "grpFill":
            return {"type": "group"}
    return {"type": "inherit"}


def _line_descriptor(sppr, ctx: _Context) -> dict | None:
    ln = _find(sppr, "a:ln")
    if ln is None:
        return None
    width = ln.get("w")
    if ln.find("a:noFill", NS) is not None:
        return {"type": "none", "color": None, "width_pt": None}
    return {
        "type": "solid" if ln.find("a:solidFill", NS) is not None else "inherit",
        "color": _color_of(ln, ctx),
        "width_pt": emu_to_points(int(width)) if width is not None else None,
    }


def _xfrm(el):
    """(x, y, w, h, rot, chOff, chExt) of a shape element, or None."""
    local = etree.QName(el).localname
    if local == "graphicFrame":
        xfrm = el.find("p:xfrm", NS)
    elif local == "grpSp":
        xfrm = el.find("p:grpSpPr/a:xfrm", NS)
    else:
        xfrm = el.find("p:spPr/a:xfrm", NS)
    if xfrm is None:
        return None
    off, ext = xfrm.find("a:off", NS), xfrm.find("a:ext", NS)
    if off is None or ext is None:
        return None
    vals = [int(off.get("x", 0)), int(off.get("y", 0)), int(ext.get("cx", 0)), int(ext.get("cy", 0))]
    rot = int(xfrm.get("rot", 0)) / 60000.0
    ch_off, ch_ext = xfrm.find("a:chOff", NS), xfrm.find("a:chExt", NS)
    child = None
    if ch_off is not None and ch_ext is not None:
        child = (int(ch_off.get("x", 0)), int(ch_off.get("y", 0)), int(ch_ext.get("cx", 0)), int(ch_ext.get("cy", 0)))
    return vals, rot, child


def _to_parent(geom, transform):
    """Map child-space (x, y, w, h) into slide space through group transforms."""
    x, y, w, h = geom
    for (gx, gy, gw, gh), (cx, cy, cw, ch) in reversed(transform):
        sx = gw / cw if cw else 1.0
        sy = gh / ch if ch else 1.0
        x, y, w, h = gx + (x - cx) * sx, gy + (y - cy) * sy, w * sx, h * sy
    return [int(round(v)) for v in (x, y, w, h)]


# -- text ---------------------------------------------------------------

def _level_props(lst_style, level: int):
    if lst_style is None:
        return None
    return lst_style.find(f"a:lvl{level + 1}pPr/a:defRPr", NS)


def _rpr_values(rpr, ctx: _Context) -> dict:
    out = {}
    if rpr is None:
        return out
    if rpr.get("sz") is not None:
        out["size_pt"] = int(rpr.get("sz")) / 100.0
    if rpr.get("b") is not None:
        out["bold"] = _bool_attr(rpr.get("b"))
    if rpr.get("i") is not None:
        out["italic"] = _bool_attr(rpr.get("i"))
    latin = rpr.find("a:latin", NS)
    if latin is not None and latin.get("typeface"):
        out["font_name"] = latin.get("typeface")
    color = _color_of(rpr, ctx)
    if color is not None:
        out["color_rgb"] = color
    return out


class _TextStyleChain:
    """Ordered defRPr sources for one shape, most specific first."""

    def __init__(self, shape_el, ph: dict | None, ctx: _Context, in_table: bool = False):
        self.ctx = ctx
        self.sources = []  # callables level -> defRPr element
        own = shape_el.find("p:txBody/a:lstStyle", NS) if shape_el is not None else None
        self.sources.append(own)
        if ph is not None:
            for root in (ctx.layout, ctx.master):
                sp = ctx.placeholder_in(root, ph)
                self.sources.append(sp.find("p:txBody/a:lstStyle", NS) if sp is not None else None)
        styles = ctx.master.find("p:txStyles", NS) if ctx.master is not None else None
        if styles is not None:
            if ph is not None and ph.get("type") in TITLE_TYPES:
                self.sources.append(styles.find("p:titleStyle", NS))
            elif ph is not None and ph.get("type") in BODY_TYPES:
                self.sources.append(styles.find("p:bodyStyle", NS))
            else:
                self.sources.append(styles.find("p:otherStyle", NS))

    def effective(self, level: int, explicit: dict, ppr_def=None) -> dict:
        resolved = dict(explicit)
        chain = [ppr_def] + [_level_props(src, level) for src in self.sources]
        for defrpr in chain:
            for key, value in _rpr_values(defrpr, self.ctx).items():
                resolved.setdefault(key, value)
        font = self.ctx.font(resolved.get("font_name")) or self.ctx.theme.minor
        return {
            "effective_font_name": font,
            "effective_size_pt": resolved.get("size_pt", DEFAULT_SIZE_PT),
            "effective_bold": bool(resolved.get("bold", False)),
            "effective_italic": bool(resolved.get("italic", False)),
            "effective_color": resolved.get("color_rgb", self.ctx.scheme_color("tx1")),
        }


def _parse_text(txbody, chain: _TextStyleChain, rels: dict, resolve_link) -> TextFrame:
    frame = TextFrame()
    for p in txbody.iterfind("a:p", NS):
        ppr = p.find("a:pPr", NS)
        level = int(ppr.get("lvl", 0)) if ppr is not None else 0
        para = Paragraph(alignment=ppr.get("algn") if ppr is not None else None, level=level)
        ppr_def = ppr.find("a:defRPr", NS) if ppr is not None else None
        for child in p:
            if not isinstance(child.tag, str):
                continue
            local = etree.QName(child).localname
            if local in ("r", "fld"):
                t = child.find("a:t", NS)
                text = (t.text or "") if t is not None else ""
                rpr = child.find("a:rPr", NS)
            elif local == "br":
                text, rpr = "\n", child.find("a:rPr", NS)
            else:
                continue
            explicit = _rpr_values(rpr, chain.ctx)
            link = None
            if rpr is not None:
                h = rpr.find("a:hlinkClick", NS)
                if h is not None:
                    link = resolve_link(h)
            run = Run(text=text, font_name=explicit.get("font_name"), size_pt=explicit.get("size_pt"),
                      bold=explicit.get("bold"), italic=explicit.get("italic"), color_rgb=explicit.get("color_rgb"),
                      hyperlink=link, **chain.effective(level, explicit, ppr_def))
            para.runs.append(run)
        frame.paragraphs.append(para)
    return frame


def _plain_text(txbody) -> str:
    lines = []
    for p in txbody.iterfind("a:p", NS):
        parts = []
        for child in p:
            if not isinstance(child.tag, str):
                continue
            local = etree.QName(child).localname
            if local in ("r", "fld"):
                t = child.find("a:t", NS)
                parts.append((t.text or "") if t is not None else "")
            elif local == "br":
                parts.append("\n")
        lines.append("".join(parts))
    return "\n".join(lines)


# -- parsing ------------------------------------------------------------

class _SlideParser:
    def __init__(self, pkg: Package, part: str, ctx: _Context, slide_numbers: dict):
        self.pkg = pkg
        self.part = part
        self.ctx = ctx
        self.rels = pkg.rels_of(part)
        self.slide_numbers = slide_numbers

    def resolve_link(self, el) -> str | None:
        rid = el.get(q("r", "id"))
        action = el.get("action") or ""
        if not rid:
            if action.startswith("ppaction://hlinkshowjump"):
                return action.split("jump=", 1)[-1]
            return action or None
        rel = self.rels.get(rid)
        if rel is None:
            return None
        if rel.external:
            return rel.target
        if rel.target in self.slide_numbers:
            return f"#slide={self.slide_numbers[rel.target]}"
        return rel.target

    def shapes(self, container, transform=()) -> list[Shape]:
        out = []
        z = 0
        for el in container:
            if not isinstance(el.tag, str) or el.tag not in SHAPE_TAGS:
                continue
            out.append(self.shape(el, z, transform))
            z += 1
        return out

    def _nv(self, el):
        for nv in el:
            if isinstance(nv.tag, str) and etree.QName(nv).localname.startswith("nv"):
                return nv
        return None

    def shape(self, el, z: int, transform) -> Shape:
        local = etree.QName(el).localname
        nv = self._nv(el)
        cnv = nv.find("p:cNvPr", NS) if nv is not None else None
        shape_id = int(cnv.get("id", 0)) if cnv is not None else 0
        name = cnv.get("name", "") if cnv is not None else ""
        descr = cnv.get("descr") if cnv is not None else None
        ph_el = nv.find("p:nvPr/p:ph", NS) if nv is not None else None
        ph = None
        if ph_el is not None:
            idx = ph_el.get("idx")
            ph = {"type": ph_el.get("type"), "idx": int(idx) if idx is not None else None}
        hyperlink = None
        if cnv is not None and cnv.find("a:hlinkClick", NS) is not None:
            hyperlink = self.resolve_link(cnv.find("a:hlinkClick", NS))

        shape = Shape(shape_id=shape_id, name=name, kind="other", z_index=z, placeholder=ph,
                      alt_text=descr, hyperlink=hyperlink, address=element_address(el))
        self._geometry(shape, el, ph, transform)

        if local == "sp":
            txbox = nv.find("p:cNvSpPr", NS) if nv is not None else None
            if ph is not None:
                shape.kind = "placeholder"
            elif txbox is not None and _bool_attr(txbox.get("txBox")):
                shape.kind = "textbox"
            else:
                shape.kind = "autoshape"
            sppr = el.find("p:spPr", NS)
            shape.fill = _fill_descriptor(sppr, self.ctx)
            shape.line = _line_descriptor(sppr, self.ctx)
            txbody = el.find("p:txBody", NS)
            if txbody is not None:
                shape.text = _parse_text(txbody, _TextStyleChain(el, ph, self.ctx), self.rels, self.resolve_link)
        elif local == "cxnSp":
            shape.kind = "autoshape"
            sppr = el.find("p:spPr", NS)
            shape.fill = _fill_descriptor(sppr, self.ctx)
            shape.line = _line_descriptor(sppr, self.ctx)
        elif local == "pic":
            media = nv.find("p:nvPr/a:videoFile", NS) is not None or nv.find("p:nvPr/a:audioFile", NS) is not None
            shape.kind = "media" if media else "picture"
            blip = el.find("p:blipFill/a:blip", NS)
            rid = blip.get(q("r", "embed")) if blip is not None else None
            shape.picture = {"rel_id": rid, "alt_text": descr}
            sppr = el.find("p:spPr", NS)
            shape.line = _line_descriptor(sppr, self.ctx)
        elif local == "graphicFrame":
            gdata = el.find("a:graphic/a:graphicData", NS)
            uri = gdata.get("uri", "") if gdata is not None else ""
            if uri.endswith("/table"):
                shape.kind = "table"
                shape.table = self._table(gdata.find("a:tbl", NS))
            elif uri.endswith("/chart"):
                shape.kind = "chart"
                shape.chart = self._chart(gdata)
            else:
                shape.raw_tag = uri.rsplit("/", 1)[-1] or local
        elif local == "grpSp":
            shape.kind = "group"
            geo = _xfrm(el)
            child_transform = transform
            if geo is not None and geo[2] is not None:
                child_transform = transform + ((tuple(geo[0]), geo[2]),)
            shape.children = self.shapes(el, child_transform)
            shape.fill = _fill_descriptor(el.find("p:grpSpPr", NS), self.ctx)
            if not shape.children:
                shape.kind = "other"
                shape.raw_tag = "grpSp"
        else:
            shape.raw_tag = local
            txt = [_plain_text(tb) for tb in el.iterfind(".//p:txBody", NS)]
            if txt:
                shape.text = TextFrame([Paragraph(runs=[Run(text="\n".join(txt))])])
        return shape

    def _geometry(self, shape: Shape, el, ph, transform):
        geo = _xfrm(el)
        if geo is None and ph is not None:
            for root in (self.ctx.layout, self.ctx.master):
                sp = self.ctx.placeholder_in(root, ph)
                if sp is not None and _xfrm(sp) is not None:
                    geo = _xfrm(sp)
                    shape.geometry_inherited = True
                    break
        if geo is None:
            return
        vals, rot, _ = geo
        if transform:
            vals = _to_parent(vals, transform)
        shape.x_emu, shape.y_emu, shape.w_emu, shape.h_emu = vals
        shape.rotation_deg = rot

    def _table(self, tbl) -> TableData:
        if tbl is None:
            return TableData(0, 0, [])
        cells = []
        for tr in tbl.iterfind("a:tr", NS):
            row = []
            for tc in tr.iterfind("a:tc", NS):
                body = tc.find("a:txBody", NS)
                row.append(_plain_text(body) if body is not None else "")
            cells.append(row)
        cols = len(tbl.findall("a:tblGrid/a:gridCol", NS)) or max((len(r) for r in cells), default=0)
        return TableData(rows=len(cells), cols=cols, cells=cells)

    def _chart(self, gdata) -> ChartSummary:
        ref = gdata.find("c:chart", NS)
        rid = ref.get(q("r", "id")) if ref is not None else None
        rel = self.rels.get(rid) if rid else None
        if rel is None or rel.target not in self.pkg:
            return ChartSummary("unknown", [], [])
        root = parse_xml(self.pkg.parts[rel.target])
        plot = root.find(".//c:plotArea", NS)
        chart_type, categories, series = "unknown", [], []
        if plot is not None:
            for child in plot:
                if isinstance(child.tag, str) and etree.QName(child).localname.endswith("Chart"):
                    chart_type = etree.QName(child).localname
                    for ser in child.iterfind("c:ser", NS):
                        name_v = ser.find("c:tx//c:v", NS)
                        values = [float(v.text) for v in _ordered_points(ser.find("c:val", NS)) if v.text]
                        series.append({"name": name_v.text if name_v is not None else "", "values": values})
                        if not categories:
                            categories = [v.text or "" for v in _ordered_points(ser.find("c:cat", NS))]
                    break
        return ChartSummary(chart_type, categories, series)


def _ordered_points(el):
    if el is None:
        return []
    pts = []
    for pt in el.iterfind(".//c:pt", NS):
        v = pt.find("c:v", NS)
        if v is not None:
            pts.append((int(pt.get("idx", 0)), v))
    return [v for _, v in sorted(pts, key=lambda t: t[0])]


def _background(sld, ctx: _Context) -> dict:
    bg = sld.find("p:cSld/p:bg", NS)
    if bg is None:
        return {"type": "inherit"}
    bgpr = bg.find("p:bgPr", NS)
    if bgpr is not None:
        return _fill_descriptor(bgpr, ctx)
    ref = bg.find("p:bgRef", NS)
    if ref is not None:
        return {"type": "ref", "color": _color_value(ref, ctx)}
    return {"type": "inherit"}


def _transition(sld) -> str | None:
    for tr in sld.iter(q("p", "transition")):
        for child in tr:
            if isinstance(child.tag, str) and etree.QName(child).localname not in ("sndAc", "extLst"):
                return etree.QName(child).localname
        return "none"
    return None


def _part_root(pkg: Package, part: str | None):
    if part is None or part not in pkg:
        return None
    return parse_xml(pkg.parts[part])


def parse_deck(pkg: Package, filename: str = "") -> Deck:
    """Build the typed model; slides in ``presentation.xml`` order."""
    root_rels = pkg.rels_of("")
    pres_part = next((r.target for r in root_rels.values() if r.type.endswith("/officeDocument")), None)
    if pres_part is None or pres_part not in pkg:
        raise MalformedDeckError("package has no presentation part")
    pres = parse_xml(pkg.parts[pres_part])
    pres_rels = pkg.rels_of(pres_part)
    size = pres.find("p:sldSz", NS)
    if size is None:
        raise MalformedDeckError("presentation has no slide size")
    width, height = int(size.get("cx", 0)), int(size.get("cy", 0))
    if width <= 0 or height <= 0:
        raise MalformedDeckError("slide dimensions must be positive")

    slide_parts = []
    for sld_id in pres.iterfind("p:sldIdLst/p:sldId", NS):
        rid = sld_id.get(q("r", "id"))
        rel = pres_rels.get(rid)
        if rel is None or rel.target not in pkg:
            raise MalformedDeckError(f"slide relationship {rid} does not resolve")
        slide_parts.append((int(sld_id.get("id", 0)), rel.target))
    slide_numbers = {part: i for i, (_, part) in enumerate(slide_parts, start=1)}

    cache: dict[str, Any] = {}

    def load(part):
        if part not in cache:
            cache[part] = _part_root(pkg, part)
        return cache[part]

    master_names, theme_colors = [], {}
    for mid in pres.iterfind("p:sldMasterIdLst/p:sldMasterId", NS):
        rel = pres_rels.get(mid.get(q("r", "id")))
        if rel is None:
            continue
        master = load(rel.target)
        theme_rel = next(iter(pkg.related(rel.target, "theme")), None)
        theme = _Theme(load(theme_rel.target) if theme_rel else None)
        cs = master.find("p:cSld", NS) if master is not None else None
        master_names.append((cs.get("name") if cs is not None else None) or theme.name or posixpath.basename(rel.target))
        if not theme_colors:
            theme_colors = dict(theme.colors)

    slides = []
    for number, (slide_id, part) in enumerate(slide_parts, start=1):
        sld = load(part)
        layout_rel = next(iter(pkg.related(part, "slideLayout")), None)
        layout = load(layout_rel.target) if layout_rel else None
        master_rel = next(iter(pkg.related(layout_rel.target, "slideMaster")), None) if layout_rel else None
        master = load(master_rel.target) if master_rel else None
        theme_rel = next(iter(pkg.related(master_rel.target, "theme")), None) if master_rel else None
        theme = _Theme(load(theme_rel.target) if theme_rel else None)
        clr_map = {}
        cm = master.find("p:clrMap", NS) if master is not None else None
        if cm is not None:
            clr_map = dict(cm.attrib)
        override = sld.find("p:clrMapOvr/a:overrideClrMapping", NS)
        if override is not None:
            clr_map = dict(override.attrib)
        ctx = _Context(layout, master, theme, clr_map)
        parser = _SlideParser(pkg, part, ctx, slide_numbers)
        tree = sld.find("p:cSld/p:spTree", NS)
        shapes = parser.shapes(tree) if tree is not None else []

        notes = ""
        notes_rel = next(iter(pkg.related(part, "notesSlide")), None)
        if notes_rel is not None and notes_rel.target in pkg:
            nroot = load(notes_rel.target)
            for sp in nroot.iterfind(".//p:sp", NS):
                ph = sp.find("p:nvSpPr/p:nvPr/p:ph", NS)
                body = sp.find("p:txBody", NS)
                if ph is not None and ph.get("type") == "body" and body is not None:
                    notes = _plain_text(body)
                    break

        layout_name = None
        if layout is not None:
            cs = layout.find("p:cSld", NS)
            layout_name = cs.get("name") if cs is not None else None
        targets = sorted({int(t.get("spid")) for t in sld.iter(q("p", "spTgt")) if (t.get("spid") or "").isdigit()})
        slides.append(Slide(
            slide_number=number, slide_id=slide_id, part=part, layout_name=layout_name, shapes=shapes,
            notes_text=notes, background=_background(sld, ctx), transition=_transition(sld),
            animation_targets=targets, has_animation=sld.find("p:timing", NS) is not None,
        ))
    return Deck(filename=filename, slide_width_emu=width, slide_height_emu=height, slides=slides,
                theme_colors=theme_colors, master_names=master_names)


# -- snapshot -------------------------------------------------------------

def _run_doc(run: Run) -> dict:
    return {
        "text": run.text, "font_name": run.font_name, "size_pt": run.size_pt, "bold": run.bold,
        "italic": run.italic, "color": run.color_rgb, "hyperlink": run.hyperlink,
        "effective_font_name": run.effective_font_name, "effective_size_pt": run.effective_size_pt,
        "effective_bold": run.effective_bold, "effective_italic": run.effective_italic,
        "effective_color": run.effective_color,
    }


def _shape_doc(shape: Shape) -> dict:
    doc = {
        "shape_id": shape.shape_id,
        "name": shape.name,
        "kind": shape.kind,
        "x": shape.x_pt,
        "y": shape.y_pt,
        "width": shape.w_pt,
        "height": shape.h_pt,
        "rotation": shape.rotation_deg,
        "z_index": shape.z_index,
        "placeholder": shape.placeholder,
        "alt_text": shape.alt_text,
        "hyperlink": shape.hyperlink,
        "fill": shape.fill,
        "line": shape.line,
        "text": None,
        "table": None,
        "chart": None,
        "picture": shape.picture,
        "children": [_shape_doc(c) for c in shape.children],
    }
    if shape.raw_tag:
        doc["raw_tag"] = shape.raw_tag
    if shape.text is not None:
        doc["text"] = {"paragraphs": [
            {"alignment": p.alignment, "level": p.level, "runs": [_run_doc(r) for r in p.runs]}
            for p in shape.text.paragraphs
        ]}
    if shape.table is not None:
        doc["table"] = {"rows": shape.table.rows, "cols": shape.table.cols, "cells": shape.table.cells}
    if shape.chart is not None:
        doc["chart"] = {"chart_type": shape.chart.chart_type, "categories": shape.chart.categories,
                        "series": shape.chart.series}
    return doc


def snapshot(deck: Deck) -> dict:
    """Canonical JSON tree for a deck."""
    return {
        "filename": deck.filename,
        "slide_width": deck.slide_width_pt,
        "slide_height": deck.slide_height_pt,
        "theme_colors": dict(deck.theme_colors),
        "master_names": list(deck.master_names),
        "slides": [
            {
                "slide_number": s.slide_number,
                "slide_id": s.slide_id,
                "slide_layout": s.layout_name,
                "notes": s.notes_text,
                "background": s.background,
                "transition": s.transition,
                "has_animation": s.has_animation,
                "animation_targets": s.animation_targets,
                "shapes": [_shape_doc(sh) for sh in s.shapes],
            }
            for s in deck.slides
        ],
    }


def _check_finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        raise ValueError("snapshot contains a non-finite number")
    if isinstance(obj, dict):
        for v in obj.values():
            _check_finite(v)
    elif isinstance(obj, list):
        for v in obj:
            _check_finite(v)


def serialize_snapshot(doc: dict, indent: int | None = None) -> bytes:
    """Canonical bytes: sorted keys, shortest round-trip floats, UTF-8.

    ``indent=None`` gives the compact form; the line-oriented form used for
    change ratios passes ``indent=1``.
    """
    _check_finite(doc)
    separators = (",", ":") if indent is None else (",", ": ")
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=indent, separators=separators,
                      allow_nan=False).encode("utf-8")


def load_snapshot(data: bytes | str) -> dict:
    return json.loads(data)


def pptx_to_json(path) -> dict:
    """Snapshot of a ``.pptx`` on disk."""
    return snapshot(parse_deck(open_package(path), filename=os.path.basename(path)))
