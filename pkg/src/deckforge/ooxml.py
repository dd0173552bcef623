"""PresentationML vocabulary: namespaces, relationship/content types, XML snippets."""

from __future__ import annotations

from xml.sax.saxutils import escape, quoteattr

NS = {
    "p": "http://schemas.openxmlformats.org/presentationml/2006/main",
    "a": "http://schemas.openxmlformats.org/drawingml/2006/main",
    "r": "http://schemas.openxmlformats.org/officeDocument/2006/relationships",
    "c": "http://schemas.openxmlformats.org/drawingml/2006/chart",
    "dgm": "http://schemas.openxmlformats.org/drawingml/2006/diagram",
    "mc": "http://schemas.openxmlformats.org/markup-compatibility/2006",
}
P, A, R, C = (NS[k] for k in ("p", "a", "r", "c"))

EMU_PER_POINT = 12700
EMU_PER_INCH = 914400

XMLNS_PAR = f'xmlns:a="{A}" xmlns:r="{R}" xmlns:p="{P}"'

RT_BASE = "http://schemas.openxmlformats.org/officeDocument/2006/relationships/"
RT = {
    name: RT_BASE + name
    for name in (
        "officeDocument", "slide", "slideLayout", "slideMaster", "theme", "notesSlide",
        "notesMaster", "image", "chart", "hyperlink", "video", "audio", "media",
        "presProps", "viewProps", "tableStyles", "diagramData",
    )
}

CT_PREFIX = "application/vnd.openxmlformats-officedocument."
CT = {
    "presentation": CT_PREFIX + "presentationml.presentation.main+xml",
    "slide": CT_PREFIX + "presentationml.slide+xml",
    "slideLayout": CT_PREFIX + "presentationml.slideLayout+xml",
    "slideMaster": CT_PREFIX + "presentationml.slideMaster+xml",
    "notesSlide": CT_PREFIX + "presentationml.notesSlide+xml",
    "notesMaster": CT_PREFIX + "presentationml.notesMaster+xml",
    "theme": CT_PREFIX + "theme+xml",
    "chart": CT_PREFIX + "drawingml.chart+xml",
    "rels": "application/vnd.openxmlformats-package.relationships+xml",
    "xml": "application/xml",
}

THEME_ROLES = ("dk1", "lt1", "dk2", "lt2", "accent1", "accent2", "accent3", "accent4",
               "accent5", "accent6", "hlink", "folHlink")

XML_DECL = '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n'


def q(prefix: str, local: str) -> str:
    """Clark notation, ``q("a", "t")`` -> ``{ns}t``."""
    return f"{{{NS[prefix]}}}{local}"


def emu(points: float) -> int:
    return int(round(points * EMU_PER_POINT))


def rels_xml(rels) -> str:
    """``rels``: iterable of (rid, type_name_or_uri, target, external)."""
    out = [XML_DECL, '<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">']
    for rid, rtype, target, external in rels:
        uri = RT.get(rtype, rtype)
        mode = ' TargetMode="External"' if external else ""
        out.append(f'<Relationship Id="{rid}" Type="{uri}" Target={quoteattr(target)}{mode}/>')
    out.append("</Relationships>")
    return "".join(out)


# -- text ---------------------------------------------------------------

def rpr_xml(run: dict, tag: str = "a:rPr") -> str:
    attrs = ['lang="en-US"']
    if run.get("size") is not None:
        attrs.append(f'sz="{int(round(run["size"] * 100))}"')
    if run.get("bold") is not None:
        attrs.append(f'b="{1 if run["bold"] else 0}"')
    if run.get("italic") is not None:
        attrs.append(f'i="{1 if run["italic"] else 0}"')
    inner = ""
    if run.get("color"):
        inner += f'<a:solidFill><a:srgbClr val="{run["color"].upper()}"/></a:solidFill>'
    if run.get("font"):
        inner += f"<a:latin typeface={quoteattr(run['font'])}/>"
    if run.get("hyperlink_rid"):
        inner += f'<a:hlinkClick r:id="{run["hyperlink_rid"]}"/>'
    if inner:
        return f"<{tag} {' '.join(attrs)}>{inner}</{tag}>"
    return f"<{tag} {' '.join(attrs)}/>"


def paragraph_xml(para) -> str:
    """``para``: a string, or dict(runs=[...], align=, level=)."""
    if isinstance(para, str):
        para = {"runs": [{"text": para}]}
    ppr_attrs = []
    if para.get("align"):
        ppr_attrs.append(f'algn="{para["align"]}"')
    if para.get("level"):
        ppr_attrs.append(f'lvl="{para["level"]}"')
    out = ["<a:p>"]
    if ppr_attrs:
        out.append(f"<a:pPr {' '.join(ppr_attrs)}/>")
    for run in para.get("runs", []):
        if isinstance(run, str):
            run = {"text": run}
        out.append(f"<a:r>{rpr_xml(run)}<a:t>{escape(run['text'])}</a:t></a:r>")
    if not para.get("runs"):
        out.append('<a:endParaRPr lang="en-US"/>')
    out.append("</a:p>")
    return "".join(out)


def txbody_xml(paragraphs, tag: str = "p:txBody", wrap: str | None = None) -> str:
    body_pr = f'<a:bodyPr wrap="{wrap}"/>' if wrap else "<a:bodyPr/>"
    paras = paragraphs or [{"runs": []}]
    return f"<{tag}>{body_pr}<a:lstStyle/>{''.join(paragraph_xml(p) for p in paras)}</{tag}>"


# -- shapes -------------------------------------------------------------

def xfrm_xml(x, y, w, h, rot=0, tag="a:xfrm", child=None) -> str:
    rot_attr = f' rot="{int(rot)}"' if rot else ""
    inner = f'<a:off x="{x}" y="{y}"/><a:ext cx="{w}" cy="{h}"/>'
    if child is not None:
        cx, cy, cw, ch = child
        inner += f'<a:chOff x="{cx}" y="{cy}"/><a:chExt cx="{cw}" cy="{ch}"/>'
    return f"<{tag}{rot_attr}>{inner}</{tag}>"


def fill_xml(color: str | None) -> str:
    if color is None:
        return ""
    if color == "none":
        return "<a:noFill/>"
    return f'<a:solidFill><a:srgbClr val="{color.upper()}"/></a:solidFill>'


def line_xml(color=None, width_pt=None) -> str:
    if color is None and width_pt is None:
        return ""
    w = f' w="{emu(width_pt)}"' if width_pt is not None else ""
    return f"<a:ln{w}>{fill_xml(color)}</a:ln>"


def cnvpr_xml(shape_id, name, descr=None, hyperlink_rid=None, hyperlink_action=None) -> str:
    d = f" descr={quoteattr(descr)}" if descr else ""
    inner = ""
    if hyperlink_rid:
        action = f' action="{hyperlink_action}"' if hyperlink_action else ""
        inner = f'<a:hlinkClick r:id="{hyperlink_rid}"{action}/>'
    if inner:
        return f"<p:cNvPr id=\"{shape_id}\" name={quoteattr(name)}{d}>{inner}</p:cNvPr>"
    return f"<p:cNvPr id=\"{shape_id}\" name={quoteattr(name)}{d}/>"


def ph_xml(ph) -> str:
    if not ph:
        return "<p:nvPr/>"
    ptype, idx = ph
    attrs = []
    if ptype:
        attrs.append(f'type="{ptype}"')
    if idx is not None:
        attrs.append(f'idx="{idx}"')
    return f"<p:nvPr><p:ph {' '.join(attrs)}/></p:nvPr>"


def sp_xml(shape_id, name, geom=None, paragraphs=None, txbox=False, prst="rect", fill=None,
           line=None, ph=None, rot=0, descr=None, hyperlink_rid=None, no_text=False) -> str:
    """An ``p:sp``; ``geom`` is (x, y, w, h) in EMU or None to inherit."""
    cnv = '<p:cNvSpPr txBox="1"/>' if txbox else "<p:cNvSpPr/>"
    if ph:
        cnv = '<p:cNvSpPr><a:spLocks noGrp="1"/></p:cNvSpPr>'
    sppr = ""
    if geom is not None:
        sppr += xfrm_xml(*geom, rot=rot)
        sppr += f'<a:prstGeom prst="{prst}"><a:avLst/></a:prstGeom>'
    sppr += fill_xml(fill)
    sppr += line_xml(*(line or (None, None)))
    body = ""
    if (paragraphs is not None or txbox or ph) and not no_text:
        body = txbody_xml(paragraphs or [], wrap="square" if txbox else None)
    return (
        f"<p:sp><p:nvSpPr>{cnvpr_xml(shape_id, name, descr, hyperlink_rid)}{cnv}{ph_xml(ph)}</p:nvSpPr>"
        f"<p:spPr>{sppr}</p:spPr>{body}</p:sp>"
    )


def pic_xml(shape_id, name, rid, geom, descr=None) -> str:
    return (
        f"<p:pic><p:nvPicPr>{cnvpr_xml(shape_id, name, descr)}"
        '<p:cNvPicPr><a:picLocks noChangeAspect="1"/></p:cNvPicPr><p:nvPr/></p:nvPicPr>'
        f'<p:blipFill><a:blip r:embed="{rid}"/><a:stretch><a:fillRect/></a:stretch></p:blipFill>'
        f'<p:spPr>{xfrm_xml(*geom)}<a:prstGeom prst="rect"><a:avLst/></a:prstGeom></p:spPr></p:pic>'
    )


def table_xml(shape_id, name, geom, rows) -> str:
    x, y, w, h = geom
    n_rows = max(len(rows), 1)
    n_cols = max((len(r) for r in rows), default=1) or 1
    col_w, row_h = w // n_cols, h // n_rows
    grid = "".join(f'<a:gridCol w="{col_w}"/>' for _ in range(n_cols))
    trs = []
    for row in rows:
        cells = "".join(
            f"<a:tc>{txbody_xml([str(cell)] if str(cell) else [], tag='a:txBody')}<a:tcPr/></a:tc>"
            for cell in list(row) + [""] * (n_cols - len(row))
        )
        trs.append(f'<a:tr h="{row_h}">{cells}</a:tr>')
    return (
        f"<p:graphicFrame><p:nvGraphicFramePr>{cnvpr_xml(shape_id, name)}"
        '<p:cNvGraphicFramePr><a:graphicFrameLocks noGrp="1"/></p:cNvGraphicFramePr><p:nvPr/></p:nvGraphicFramePr>'
        f"{xfrm_xml(x, y, w, h, tag='p:xfrm')}"
        '<a:graphic><a:graphicData uri="http://schemas.openxmlformats.org/drawingml/2006/table">'
        f'<a:tbl><a:tblPr firstRow="1" bandRow="1"/><a:tblGrid>{grid}</a:tblGrid>{"".join(trs)}</a:tbl>'
        "</a:graphicData></a:graphic></p:graphicFrame>"
    )


def chart_frame_xml(shape_id, name, rid, geom) -> str:
    return (
        f"<p:graphicFrame><p:nvGraphicFramePr>{cnvpr_xml(shape_id, name)}"
        "<p:cNvGraphicFramePr/><p:nvPr/></p:nvGraphicFramePr>"
        f"{xfrm_xml(*geom, tag='p:xfrm')}"
        f'<a:graphic><a:graphicData uri="{C}">'
        f'<c:chart xmlns:c="{C}" r:id="{rid}"/></a:graphicData></a:graphic></p:graphicFrame>'
    )


def chart_part_xml(chart_type: str, categories, series: dict) -> str:
    cats = "".join(f'<c:pt idx="{i}"><c:v>{escape(str(c))}</c:v></c:pt>' for i, c in enumerate(categories))
    sers = []
    for i, (sname, values) in enumerate(series.items()):
        vals = "".join(f'<c:pt idx="{j}"><c:v>{v!r}</c:v></c:pt>' for j, v in enumerate(values))
        sers.append(
            f'<c:ser><c:idx val="{i}"/><c:order val="{i}"/>'
            f"<c:tx><c:strRef><c:f>Sheet1!$A${i + 2}</c:f><c:strCache><c:ptCount val=\"1\"/>"
            f'<c:pt idx="0"><c:v>{escape(sname)}</c:v></c:pt></c:strCache></c:strRef></c:tx>'
            f'<c:cat><c:strRef><c:f>Sheet1!$B$1</c:f><c:strCache><c:ptCount val="{len(categories)}"/>{cats}</c:strCache></c:strRef></c:cat>'
            f'<c:val><c:numRef><c:f>Sheet1!$B${i + 2}</c:f><c:numCache><c:formatCode>General</c:formatCode>'
            f'<c:ptCount val="{len(values)}"/>{vals}</c:numCache></c:numRef></c:val></c:ser>'
        )
    bar = '<c:barDir val="col"/><c:grouping val="clustered"/>' if chart_type == "bar" else '<c:grouping val="standard"/>'
    tag = {"bar": "barChart", "line": "lineChart", "pie": "pieChart"}.get(chart_type, chart_type)
    axes = "" if tag == "pieChart" else '<c:axId val="1001"/><c:axId val="1002"/>'
    axis_defs = "" if tag == "pieChart" else (
        '<c:catAx><c:axId val="1001"/><c:scaling><c:orientation val="minMax"/></c:scaling><c:delete val="0"/>'
        '<c:axPos val="b"/><c:crossAx val="1002"/></c:catAx>'
        '<c:valAx><c:axId val="1002"/><c:scaling><c:orientation val="minMax"/></c:scaling><c:delete val="0"/>'
        '<c:axPos val="l"/><c:crossAx val="1001"/></c:valAx>'
    )
    return (
        f'{XML_DECL}<c:chartSpace xmlns:c="{C}" xmlns:a="{A}" xmlns:r="{R}">'
        f"<c:chart><c:autoTitleDeleted val=\"0\"/><c:plotArea><c:layout/><c:{tag}>{bar}{''.join(sers)}{axes}</c:{tag}>"
        f'{axis_defs}</c:plotArea><c:legend><c:legendPos val="r"/></c:legend><c:plotVisOnly val="1"/></c:chart></c:chartSpace>'
    )


def grp_xml(shape_id, name, geom, children_xml: str) -> str:
    x, y, w, h = geom
    return (
        f"<p:grpSp><p:nvGrpSpPr>{cnvpr_xml(shape_id, name)}<p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>"
        f"<p:grpSpPr>{xfrm_xml(x, y, w, h, child=(x, y, w, h))}</p:grpSpPr>{children_xml}</p:grpSp>"
    )


SPTREE_HEAD = (
    '<p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>'
    '<p:grpSpPr><a:xfrm><a:off x="0" y="0"/><a:ext cx="0" cy="0"/><a:chOff x="0" y="0"/>'
    '<a:chExt cx="0" cy="0"/></a:xfrm></p:grpSpPr>'
)


def background_xml(color: str | None) -> str:
    if not color:
        return ""
    return f'<p:bg><p:bgPr>{fill_xml(color)}<a:effectLst/></p:bgPr></p:bg>'


def transition_xml(preset: str, duration_ms: int | None = None) -> str:
    if not preset or preset == "none":
        return ""
    dur = f' p14:dur="{duration_ms}" xmlns:p14="http://schemas.microsoft.com/office/powerpoint/2010/main"' if duration_ms else ""
    inner = {
        "cut": "<p:cut/>", "fade": "<p:fade/>", "push": '<p:push dir="u"/>', "wipe": '<p:wipe dir="r"/>',
        "split": '<p:split orient="vert" dir="out"/>', "cover": '<p:cover dir="l"/>', "dissolve": "<p:dissolve/>",
        "random": "<p:random/>", "zoom": "<p:zoom/>",
    }[preset]
    return f'<p:transition spd="med"{dur}>{inner}</p:transition>'


ANIMATION_PRESETS = {
    # name: (presetID, presetClass)
    "appear": (1, "entr"),
    "fade": (10, "entr"),
    "fly-in": (2, "entr"),
    "wipe": (22, "entr"),
    "zoom": (53, "entr"),
    "pulse": (26, "emph"),
    "disappear": (1, "exit"),
    "fade-out": (10, "exit"),
}


def animation_par_xml(ctn_id: int, shape_id: int, preset: str) -> str:
    """One click-triggered effect for the main sequence."""
    preset_id, preset_class = ANIMATION_PRESETS[preset]
    visibility = "hidden" if preset_class == "exit" else "visible"
    return (
        f'<p:par><p:cTn id="{ctn_id}" fill="hold"><p:stCondLst><p:cond delay="indefinite"/></p:stCondLst><p:childTnLst>'
        f'<p:par><p:cTn id="{ctn_id + 1}" fill="hold"><p:stCondLst><p:cond delay="0"/></p:stCondLst><p:childTnLst>'
        f'<p:par><p:cTn id="{ctn_id + 2}" presetID="{preset_id}" presetClass="{preset_class}" presetSubtype="0" '
        f'fill="hold" nodeType="clickEffect"><p:stCondLst><p:cond delay="0"/></p:stCondLst><p:childTnLst>'
        f'<p:set><p:cBhvr><p:cTn id="{ctn_id + 3}" dur="1" fill="hold"><p:stCondLst><p:cond delay="0"/></p:stCondLst></p:cTn>'
        f'<p:tgtEl><p:spTgt spid="{shape_id}"/></p:tgtEl><p:attrNameLst><p:attrName>style.visibility</p:attrName>'
        f'</p:attrNameLst></p:cBhvr><p:to><p:strVal val="{visibility}"/></p:to></p:set>'
        "</p:childTnLst></p:cTn></p:par></p:childTnLst></p:cTn></p:par></p:childTnLst></p:cTn></p:par>"
    )


def timing_xml(effects_xml: str) -> str:
    return (
        '<p:timing><p:tnLst><p:par><p:cTn id="1" dur="indefinite" restart="never" nodeType="tmRoot"><p:childTnLst>'
        '<p:seq concurrent="1" nextAc="seek"><p:cTn id="2" dur="indefinite" nodeType="mainSeq"><p:childTnLst>'
        f"{effects_xml}</p:childTnLst></p:cTn>"
        '<p:prevCondLst><p:cond evt="onPrev" delay="0"><p:tgtEl><p:sldTgt/></p:tgtEl></p:cond></p:prevCondLst>'
        '<p:nextCondLst><p:cond evt="onNext" delay="0"><p:tgtEl><p:sldTgt/></p:tgtEl></p:cond></p:nextCondLst>'
        "</p:seq></p:childTnLst></p:cTn></p:par></p:tnLst></p:timing>"
    )


def slide_xml(shapes_xml: str, background: str | None = None, transition: str | None = None,
              name: str | None = None) -> str:
    name_attr = f" name={quoteattr(name)}" if name else ""
    return (
        f"{XML_DECL}<p:sld {XMLNS_PAR}><p:cSld{name_attr}>{background_xml(background)}"
        f"<p:spTree>{SPTREE_HEAD}{shapes_xml}</p:spTree></p:cSld>"
        f'<p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr>{transition_xml(transition) if transition else ""}</p:sld>'
    )


def notes_slide_xml(text: str) -> str:
    paras = [{"runs": [line]} if line else {"runs": []} for line in text.split("\n")] if text else []
    shapes = (
        sp_xml(2, "Slide Image Placeholder 1", ph=("sldImg", None), no_text=True)
        + sp_xml(3, "Notes Placeholder 2", paragraphs=paras, ph=("body", 1))
    )
    return (
        f"{XML_DECL}<p:notes {XMLNS_PAR}><p:cSld><p:spTree>{SPTREE_HEAD}{shapes}</p:spTree></p:cSld>"
        '<p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:notes>'
    )


CLR_MAP = ('bg1="lt1" tx1="dk1" bg2="lt2" tx2="dk2" accent1="accent1" accent2="accent2" accent3="accent3" '
           'accent4="accent4" accent5="accent5" accent6="accent6" hlink="hlink" folHlink="folHlink"')


def notes_master_xml() -> str:
    shapes = sp_xml(2, "Notes Placeholder 1", geom=(685800, 4400550, 5486400, 3600450), ph=("body", 1))
    return (
        f"{XML_DECL}<p:notesMaster {XMLNS_PAR}><p:cSld><p:spTree>{SPTREE_HEAD}{shapes}</p:spTree></p:cSld>"
        f"<p:clrMap {CLR_MAP}/></p:notesMaster>"
    )


DEFAULT_THEME_COLORS = {
    "dk1": "000000", "lt1": "FFFFFF", "dk2": "44546A", "lt2": "E7E6E6",
    "accent1": "4472C4", "accent2": "ED7D31", "accent3": "A5A5A5", "accent4": "FFC000",
    "accent5": "5B9BD5", "accent6": "70AD47", "hlink": "0563C1", "folHlink": "954F72",
}


def _studio_format_scheme():
    """Gradient fills, dashed lines and shadowed effects, as in richer design themes."""
    def grad(stops, angle):
        gs = "".join(f'<a:gs pos="{pos}"><a:schemeClr val="phClr"><a:lumMod val="{lum}"/><a:satMod val="{sat}"/>'
                     f"</a:schemeClr></a:gs>" for pos, lum, sat in stops)
        return f'<a:gradFill rotWithShape="1"><a:gsLst>{gs}</a:gsLst><a:lin ang="{angle}" scaled="0"/></a:gradFill>'

    fills = (
        '<a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
        + grad([(0, 110000, 105000), (50000, 105000, 103000), (100000, 105000, 109000)], 5400000)
        + grad([(0, 102000, 103000), (50000, 100000, 110000), (100000, 99000, 120000)], 5400000)
    )
    lines = "".join(
        f'<a:ln w="{w}" cap="rnd" cmpd="sng" algn="ctr"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
        f'<a:prstDash val="{dash}"/><a:round/></a:ln>'
        for w, dash in ((9525, "solid"), (25400, "sysDash"), (38100, "solid"))
    )
    effects = "".join(
        f'<a:effectStyle><a:effectLst><a:outerShdw blurRad="{blur}" dist="{dist}" dir="5400000" algn="t" '
        f'rotWithShape="0"><a:srgbClr val="000000"><a:alpha val="{alpha}"/></a:srgbClr></a:outerShdw>'
        f"</a:effectLst></a:effectStyle>"
        for blur, dist, alpha in ((40000, 20000, 38000), (40000, 23000, 35000), (57150, 19050, 63000))
    )
    bg = (
        '<a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
        + grad([(0, 120000, 150000), (100000, 90000, 130000)], 16200000)
        + grad([(0, 95000, 170000), (100000, 60000, 120000)], 16200000)
    )
    return fills, lines, effects, bg


def theme_xml(name="Office Theme", colors=None, major_font="Calibri Light", minor_font="Calibri",
              scheme_name="Office", style="flat") -> str:
    """Theme part; ``style`` picks the format scheme ("flat" or "studio")."""
    colors = {**DEFAULT_THEME_COLORS, **(colors or {})}
    clr = "".join(f'<a:{role}><a:srgbClr val="{colors[role]}"/></a:{role}>' for role in THEME_ROLES)
    if style == "studio":
        fills, lines, effects, bg = _studio_format_scheme()
        return _theme_doc(name, scheme_name, clr, major_font, minor_font, fills, lines, effects, bg)
    fills = (
        '<a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
        '<a:solidFill><a:schemeClr val="phClr"><a:tint val="50000"/></a:schemeClr></a:solidFill>'
        '<a:solidFill><a:schemeClr val="phClr"><a:shade val="80000"/></a:schemeClr></a:solidFill>'
    )
    lines = "".join(
        f'<a:ln w="{w}" cap="flat" cmpd="sng" algn="ctr"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
        '<a:prstDash val="solid"/><a:miter lim="800000"/></a:ln>'
        for w in (6350, 12700, 19050)
    )
    effects = "<a:effectStyle><a:effectLst/></a:effectStyle>" * 3
    return _theme_doc(name, scheme_name, clr, major_font, minor_font, fills, lines, effects, fills)


def _theme_doc(name, scheme_name, clr, major_font, minor_font, fills, lines, effects, bg) -> str:
    return (
        f'{XML_DECL}<a:theme xmlns:a="{A}" name={quoteattr(name)}><a:themeElements>'
        f"<a:clrScheme name={quoteattr(scheme_name)}>{clr}</a:clrScheme>"
        f"<a:fontScheme name={quoteattr(scheme_name)}>"
        f'<a:majorFont><a:latin typeface={quoteattr(major_font)}/><a:ea typeface=""/><a:cs typeface=""/></a:majorFont>'
        f'<a:minorFont><a:latin typeface={quoteattr(minor_font)}/><a:ea typeface=""/><a:cs typeface=""/></a:minorFont>'
        "</a:fontScheme>"
        f"<a:fmtScheme name={quoteattr(scheme_name)}><a:fillStyleLst>{fills}</a:fillStyleLst>"
        f"<a:lnStyleLst>{lines}</a:lnStyleLst><a:effectStyleLst>{effects}</a:effectStyleLst>"
        f"<a:bgFillStyleLst>{bg}</a:bgFillStyleLst></a:fmtScheme>"
        "</a:themeElements><a:objectDefaults/><a:extraClrSchemeLst/></a:theme>"
    )


def _level_styles(sizes, font_ref) -> str:
    out = []
    for i, size in enumerate(sizes, start=1):
        out.append(
            f'<a:lvl{i}pPr marL="{(i - 1) * 457200}" algn="l"><a:defRPr sz="{size}">'
            f'<a:solidFill><a:schemeClr val="tx1"/></a:solidFill><a:latin typeface="{font_ref}"/>'
            f"</a:defRPr></a:lvl{i}pPr>"
        )
    return "".join(out)


def slide_master_xml(width: int, height: int, layout_rids) -> str:
    tw, th = width - 2 * 838200, height // 6
    shapes = (
        sp_xml(2, "Title Placeholder 1", geom=(838200, 365125, tw, th), ph=("title", None))
        + sp_xml(3, "Text Placeholder 2", geom=(838200, 365125 + th + 200000, tw, height // 2), ph=("body", 1))
        + sp_xml(4, "Date Placeholder 3", geom=(838200, height - 600000, tw // 4, 365125), ph=("dt", 10))
        + sp_xml(5, "Footer Placeholder 4", geom=(838200 + tw // 3, height - 600000, tw // 3, 365125), ph=("ftr", 11))
        + sp_xml(6, "Slide Number Placeholder 5", geom=(838200 + 3 * tw // 4, height - 600000, tw // 4, 365125),
                 ph=("sldNum", 12))
    )
    ids = "".join(f'<p:sldLayoutId id="{2147483649 + i}" r:id="{rid}"/>' for i, rid in enumerate(layout_rids))
    return (
        f"{XML_DECL}<p:sldMaster {XMLNS_PAR}><p:cSld><p:bg><p:bgRef idx=\"1001\"><a:schemeClr val=\"bg1\"/></p:bgRef></p:bg>"
        f"<p:spTree>{SPTREE_HEAD}{shapes}</p:spTree></p:cSld>"
        f"<p:clrMap {CLR_MAP}/><p:sldLayoutIdLst>{ids}</p:sldLayoutIdLst>"
        f"<p:txStyles><p:titleStyle>{_level_styles([4400], '+mj-lt')}</p:titleStyle>"
        f"<p:bodyStyle>{_level_styles([2800, 2400, 2000], '+mn-lt')}</p:bodyStyle>"
        f"<p:otherStyle>{_level_styles([1800], '+mn-lt')}</p:otherStyle></p:txStyles></p:sldMaster>"
    )


def slide_layout_xml(name: str, layout_type: str, placeholders_xml: str) -> str:
    return (
        f'{XML_DECL}<p:sldLayout {XMLNS_PAR} type="{layout_type}" preserve="1"><p:cSld name={quoteattr(name)}>'
        f"<p:spTree>{SPTREE_HEAD}{placeholders_xml}</p:spTree></p:cSld>"
        '<p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sldLayout>'
    )
