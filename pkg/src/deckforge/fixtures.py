"""Deterministic synthetic decks and benchmark cases.

:class:`DeckBuilder` writes a complete, minimal PresentationML package from
scratch (master, three layouts, theme, notes master) so tests and demos never
need a binary corpus. :func:`generate_cases` lays out one small case per
taxonomy category in the case-directory format read by :mod:`deckforge.bench`.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

from . import ooxml as ox
from .ooxml import emu
from .package import CONTENT_TYPES_PART, Package, save_package

LAYOUTS = ("Title Slide", "Title and Content", "Blank")


def solid_png(width: int, height: int, rgb=(200, 60, 60)) -> bytes:
    """A tiny single-colour PNG, written without Pillow so bytes never drift."""
    raw = b"".join(b"\x00" + bytes(rgb) * width for _ in range(height))

    def chunk(tag, data):
        return struct.pack(">I", len(data)) + tag + data + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)

    header = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    return b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", header) + chunk(b"IDAT", zlib.compress(raw, 9)) + chunk(b"IEND", b"")


@dataclass
class SlideSpec:
    layout: str = "Title and Content"
    shapes: list = field(default_factory=list)
    notes: str | None = None
    background: str | None = None
    transition: str | None = None
    _next_id: int = 2

    def _id(self):
        sid = self._next_id
        self._next_id += 1
        return sid

    # All geometry arguments are points.
    def title(self, text, geom=None, **run):
        ptype = "ctrTitle" if self.layout == "Title Slide" else "title"
        self.shapes.append(dict(kind="sp", id=self._id(), name="Title 1", ph=(ptype, None),
                                paragraphs=[{"runs": [dict(text=text, **run)]}], geom=geom))
        return self

    def body(self, lines, geom=None):
        ptype = "subTitle" if self.layout == "Title Slide" else None
        self.shapes.append(dict(kind="sp", id=self._id(), name="Content Placeholder 2", ph=(ptype, 1),
                                paragraphs=[{"runs": [ln]} for ln in lines], geom=geom))
        return self

    def textbox(self, text, x, y, w, h, name=None, **run):
        sid = self._id()
        paras = [{"runs": [dict(text=line, **run)]} for line in text.split("\n")]
        self.shapes.append(dict(kind="sp", id=sid, name=name or f"TextBox {sid - 1}", txbox=True,
                                paragraphs=paras, geom=(x, y, w, h)))
        return self

    def rect(self, x, y, w, h, fill=None, text=None, name=None, prst="rect", line=None):
        sid = self._id()
        self.shapes.append(dict(kind="sp", id=sid, name=name or f"Rectangle {sid - 1}", prst=prst, fill=fill,
                                line=line, paragraphs=[text] if text else None, geom=(x, y, w, h)))
        return self

    def picture(self, x, y, w, h, png=None, alt=None, name=None, color=(200, 60, 60)):
        sid = self._id()
        self.shapes.append(dict(kind="pic", id=sid, name=name or f"Picture {sid - 1}", alt=alt,
                                png=png or solid_png(4, 3, color), geom=(x, y, w, h)))
        return self

    def table(self, rows, x, y, w, h, name=None):
        sid = self._id()
        self.shapes.append(dict(kind="table", id=sid, name=name or f"Table {sid - 1}", rows=rows, geom=(x, y, w, h)))
        return self

    def chart(self, categories, series, x, y, w, h, chart_type="bar", name=None):
        sid = self._id()
        self.shapes.append(dict(kind="chart", id=sid, name=name or f"Chart {sid - 1}", chart_type=chart_type,
                                categories=list(categories), series=dict(series), geom=(x, y, w, h)))
        return self

    def group(self, build, name=None):
        """``build`` receives a fresh SlideSpec whose shapes become the group's members."""
        sid = self._id()
        inner = SlideSpec(layout=self.layout, _next_id=self._next_id)
        build(inner)
        self._next_id = inner._next_id
        self.shapes.append(dict(kind="group", id=sid, name=name or f"Group {sid - 1}", members=inner.shapes))
        return self


class DeckBuilder:
    def __init__(self, width_pt=960.0, height_pt=540.0, theme_colors=None, major_font="Calibri Light",
                 minor_font="Calibri", theme_name="Office Theme", theme_style="flat"):
        self.width = emu(width_pt)
        self.height = emu(height_pt)
        self.theme_colors = theme_colors
        self.fonts = (major_font, minor_font)
        self.theme_name = theme_name
        self.theme_style = theme_style
        self.slides: list[SlideSpec] = []

    def slide(self, layout="Title and Content", notes=None, background=None, transition=None) -> SlideSpec:
        if layout not in LAYOUTS:
            raise ValueError(f"unknown layout {layout!r}")
        spec = SlideSpec(layout=layout, notes=notes, background=background, transition=transition)
        self.slides.append(spec)
        return spec

    # -- emission ------------------------------------------------------
    def _shape_xml(self, shape, slide_rels, extra_parts, slide_no):
        geom = tuple(emu(v) for v in shape["geom"]) if shape.get("geom") else None
        kind = shape["kind"]
        if kind == "sp":
            return ox.sp_xml(shape["id"], shape["name"], geom=geom, paragraphs=shape.get("paragraphs"),
                             txbox=shape.get("txbox", False), prst=shape.get("prst", "rect"), fill=shape.get("fill"),
                             line=shape.get("line"), ph=shape.get("ph"))
        if kind == "pic":
            n = len(extra_parts) + 1
            media = f"ppt/media/image_s{slide_no}_{n}.png"
            extra_parts[media] = (shape["png"], None)
            rid = f"rId{len(slide_rels) + 1}"
            slide_rels.append((rid, "image", f"../media/{media.rsplit('/', 1)[1]}", False))
            return ox.pic_xml(shape["id"], shape["name"], rid, geom, descr=shape.get("alt"))
        if kind == "table":
            return ox.table_xml(shape["id"], shape["name"], geom, shape["rows"])
        if kind == "chart":
            n = sum(1 for p in extra_parts if p.startswith("ppt/charts/")) + 1
            part = f"ppt/charts/chart_s{slide_no}_{n}.xml"
            xml = ox.chart_part_xml(shape["chart_type"], shape["categories"], shape["series"])
            extra_parts[part] = (xml.encode(), ox.CT["chart"])
            rid = f"rId{len(slide_rels) + 1}"
            slide_rels.append((rid, "chart", f"../charts/{part.rsplit('/', 1)[1]}", False))
            return ox.chart_frame_xml(shape["id"], shape["name"], rid, geom)
        if kind == "group":
            members = [self._shape_xml(m, slide_rels, extra_parts, slide_no) for m in shape["members"]]
            boxes = [tuple(emu(v) for v in m["geom"]) for m in shape["members"] if m.get("geom")]
            x0 = min(b[0] for b in boxes)
            y0 = min(b[1] for b in boxes)
            x1 = max(b[0] + b[2] for b in boxes)
            y1 = max(b[1] + b[3] for b in boxes)
            return ox.grp_xml(shape["id"], shape["name"], (x0, y0, x1 - x0, y1 - y0), "".join(members))
        raise ValueError(kind)

    def _layout_parts(self):
        w, h = self.width, self.height
        tw = w - 2 * 838200
        title_slide = (
            ox.sp_xml(2, "Title 1", geom=(1524000, h // 4, w - 3048000, h // 4), ph=("ctrTitle", None))
            + ox.sp_xml(3, "Subtitle 2", geom=(1524000, h // 2 + 200000, w - 3048000, h // 5), ph=("subTitle", 1))
        )
        title_content = (
            ox.sp_xml(2, "Title 1", ph=("title", None))
            + ox.sp_xml(3, "Content Placeholder 2", geom=(838200, 1825625, tw, h - 2600000), ph=(None, 1))
            + ox.sp_xml(4, "Footer Placeholder 3", ph=("ftr", 11))
            + ox.sp_xml(5, "Slide Number Placeholder 4", ph=("sldNum", 12))
        )
        return [
            ("Title Slide", "title", title_slide),
            ("Title and Content", "obj", title_content),
            ("Blank", "blank", ""),
        ]

    def build(self) -> Package:
        parts: dict[str, tuple[bytes, str | None]] = {}
        overrides: list[tuple[str, str]] = []

        def add(name, data, ctype=None):
            parts[name] = (data.encode() if isinstance(data, str) else data, ctype)
            if ctype and not name.endswith(".rels"):
                overrides.append((name, ctype))

        add("_rels/.rels", ox.rels_xml([("rId1", "officeDocument", "ppt/presentation.xml", False)]))

        pres_rels = [("rId1", "slideMaster", "slideMasters/slideMaster1.xml", False),
                     ("rId2", "theme", "theme/theme1.xml", False),
                     ("rId3", "notesMaster", "notesMasters/notesMaster1.xml", False)]
        sld_ids = []
        for i, _ in enumerate(self.slides, start=1):
            rid = f"rId{len(pres_rels) + 1}"
            pres_rels.append((rid, "slide", f"slides/slide{i}.xml", False))
            sld_ids.append(f'<p:sldId id="{255 + i}" r:id="{rid}"/>')
        presentation = (
            f"{ox.XML_DECL}<p:presentation {ox.XMLNS_PAR} saveSubsetFonts=\"1\">"
            '<p:sldMasterIdLst><p:sldMasterId id="2147483648" r:id="rId1"/></p:sldMasterIdLst>'
            '<p:notesMasterIdLst><p:notesMasterId r:id="rId3"/></p:notesMasterIdLst>'
            f"<p:sldIdLst>{''.join(sld_ids)}</p:sldIdLst>"
            f'<p:sldSz cx="{self.width}" cy="{self.height}"/><p:notesSz cx="6858000" cy="9144000"/>'
            "</p:presentation>"
        )
        if not sld_ids:
            presentation = presentation.replace("<p:sldIdLst></p:sldIdLst>", "")
        add("ppt/presentation.xml", presentation, ox.CT["presentation"])
        add("ppt/_rels/presentation.xml.rels", ox.rels_xml(pres_rels))

        layouts = self._layout_parts()
        layout_rids = [f"rId{i}" for i in range(1, len(layouts) + 1)]
        add("ppt/slideMasters/slideMaster1.xml", ox.slide_master_xml(self.width, self.height, layout_rids),
            ox.CT["slideMaster"])
        add("ppt/slideMasters/_rels/slideMaster1.xml.rels", ox.rels_xml(
            [(rid, "slideLayout", f"../slideLayouts/slideLayout{i}.xml", False) for i, rid in enumerate(layout_rids, 1)]
            + [(f"rId{len(layouts) + 1}", "theme", "../theme/theme1.xml", False)]))
        for i, (name, ltype, phs) in enumerate(layouts, start=1):
            add(f"ppt/slideLayouts/slideLayout{i}.xml", ox.slide_layout_xml(name, ltype, phs), ox.CT["slideLayout"])
            add(f"ppt/slideLayouts/_rels/slideLayout{i}.xml.rels",
                ox.rels_xml([("rId1", "slideMaster", "../slideMasters/slideMaster1.xml", False)]))
        add("ppt/theme/theme1.xml", ox.theme_xml(self.theme_name, self.theme_colors, *self.fonts,
                                                 scheme_name=self.theme_name, style=self.theme_style), ox.CT["theme"])
        add("ppt/theme/theme2.xml", ox.theme_xml("Notes Theme"), ox.CT["theme"])
        add("ppt/notesMasters/notesMaster1.xml", ox.notes_master_xml(), ox.CT["notesMaster"])
        add("ppt/notesMasters/_rels/notesMaster1.xml.rels",
            ox.rels_xml([("rId1", "theme", "../theme/theme2.xml", False)]))

        media: dict[str, tuple[bytes, str | None]] = {}
        for i, spec in enumerate(self.slides, start=1):
            layout_no = LAYOUTS.index(spec.layout) + 1
            rels = [("rId1", "slideLayout", f"../slideLayouts/slideLayout{layout_no}.xml", False)]
            shapes = "".join(self._shape_xml(s, rels, media, i) for s in spec.shapes)
            if spec.notes is not None:
                rels.append((f"rId{len(rels) + 1}", "notesSlide", f"../notesSlides/notesSlide{i}.xml", False))
                add(f"ppt/notesSlides/notesSlide{i}.xml", ox.notes_slide_xml(spec.notes), ox.CT["notesSlide"])
                add(f"ppt/notesSlides/_rels/notesSlide{i}.xml.rels", ox.rels_xml([
                    ("rId1", "notesMaster", "../notesMasters/notesMaster1.xml", False),
                    ("rId2", "slide", f"../slides/slide{i}.xml", False)]))
            add(f"ppt/slides/slide{i}.xml", ox.slide_xml(shapes, spec.background, spec.transition), ox.CT["slide"])
            add(f"ppt/slides/_rels/slide{i}.xml.rels", ox.rels_xml(rels))
        for name, (data, ctype) in media.items():
            add(name, data, ctype)

        defaults = {"rels": ox.CT["rels"], "xml": ox.CT["xml"]}
        if any(n.endswith(".png") for n in parts):
            defaults["png"] = "image/png"
        ct = [ox.XML_DECL, '<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">']
        ct += [f'<Default Extension="{e}" ContentType="{t}"/>' for e, t in defaults.items()]
        ct += [f'<Override PartName="/{n}" ContentType="{t}"/>' for n, t in overrides]
        ct.append("</Types>")
        ordered = {CONTENT_TYPES_PART: "".join(ct).encode()}
        ordered.update({n: d for n, (d, _) in parts.items()})
        return Package(ordered)

    def save(self, path):
        save_package(self.build(), path)


# -- canned decks -----------------------------------------------------

def sample_deck(seed: int = 0, n_slides: int | None = None) -> DeckBuilder:
    """A varied deck; ``seed`` perturbs text, colours, geometry and slide count."""
    n = n_slides if n_slides is not None else 3 + seed % 4
    palette = ["1F4E79", "C00000", "548235", "7030A0", "BF9000", "2E75B6"]
    b = DeckBuilder()
    first = b.slide("Title Slide", notes=f"Opening remarks {seed}")
    first.title(f"Quarterly Review {2020 + seed}")
    first.body([f"Prepared by team {seed}"])
    for k in range(1, n):
        color = palette[(seed + k) % len(palette)]
        kind = (seed + k) % 5
        s = b.slide("Title and Content", notes=f"Talking points for slide {k + 1}" if k % 2 else None)
        s.title(f"Topic {k}: Second Quarter results")
        if kind == 0:
            s.body([f"Revenue grew {seed + k} percent in the Second Quarter", "Costs held flat", "Outlook stable"])
        elif kind == 1:
            s.textbox(f"Note {seed}-{k}", 60 + 5 * k, 150, 300, 40, font="Arial", size=18, color=color)
            s.rect(420, 150, 200, 120, fill=color, text="Highlight")
        elif kind == 2:
            s.picture(100, 140, 160 + 10 * seed, 120, alt=f"Photo {k}")
            s.picture(400, 140, 180, 135, alt=None, color=(40, 90, 160))
        elif kind == 3:
            s.table([["Region", "Q1", "Q2"], ["North", str(10 + seed), str(12 + k)], ["South", "7", "9"]],
                    80, 140, 500, 150)
        else:
            s.chart(["Q1", "Q2", "Q3"], {"Sales": [1.0 + seed, 2.5, 3.25], "Costs": [0.5, 1.5, 2.0]}, 80, 140, 480, 300)
            s.group(lambda g: g.rect(600, 150, 100, 60, fill=color).textbox("Legend", 600, 220, 100, 30))
    return b


def multi_shape_deck() -> DeckBuilder:
    """Every shape kind on one or more slides; used by model and diff tests."""
    b = DeckBuilder()
    s1 = b.slide("Title Slide", notes="Welcome notes")
    s1.title("Annual Report", font="Georgia", size=40, bold=True, color="1F4E79")
    s1.body(["Second Quarter outcomes", "Prepared for the board"])
    s2 = b.slide("Title and Content")
    s2.title("Sales by Region")
    s2.table([["Region", "Q1"], ["North", "12"]], 80, 140, 400, 120)
    s2.chart(["Q1", "Q2"], {"Sales": [3.0, 4.5]}, 500, 140, 380, 300)
    s3 = b.slide("Blank", notes="hello", background="F2F2F2", transition="fade")
    s3.textbox("Second Quarter summary\nDetails follow", 60, 60, 400, 80, font="Arial", size=20, italic=True)
    s3.rect(500, 60, 200, 100, fill="C00000", text="Alert", line=("000000", 2.0))
    s3.picture(60, 200, 240, 180, alt="Team photo")
    s3.group(lambda g: g.rect(500, 250, 100, 50, fill="548235").rect(620, 250, 100, 50, fill="7030A0"), name="Badges")
    return b


def generate_corpus(count: int = 10):
    """``count`` distinct deck packages."""
    decks = [multi_shape_deck().build()]
    decks += [sample_deck(seed).build() for seed in range(count - 1)]
    return decks


# -- benchmark cases ----------------------------------------------------

def _theme_flip_builder(dark: bool) -> DeckBuilder:
    colors = {"dk1": "FFFFFF", "lt1": "1E1E1E", "dk2": "D0D0D0", "lt2": "303030",
              "accent1": "F4B183", "accent2": "9DC3E6"} if dark else None
    fonts = ("Segoe UI Semibold", "Segoe UI") if dark else ("Calibri Light", "Calibri")
    b = DeckBuilder(theme_colors=colors, major_font=fonts[0], minor_font=fonts[1],
                    theme_name="Midnight" if dark else "Office Theme", theme_style="studio" if dark else "flat")
    s = b.slide("Title Slide")
    s.title("Design Review")
    s.body(["Theme refresh"])
    s = b.slide("Title and Content")
    s.title("Agenda")
    s.body(["Goals", "Timeline", "Risks"])
    return b


def case_definitions():
    """(case_id, categories, edit_types, tags, instruction, original_builder, edit_program)."""
    from .edit import EditProgram  # local import keeps fixtures importable on its own

    cases = []

    def quarter_deck():
        b = DeckBuilder()
        for k in range(1, 5):
            s = b.slide("Title and Content")
            s.title(f"Second Quarter update {k}")
            s.body([f"Second Quarter revenue line {k}", "Unchanged line"])
        return b

    cases.append(("content-q2", ["Content"], [1], {"cross_slide": True, "high_diff": False},
                  'Replace "Second Quarter" with "Q2" on every slide.', quarter_deck,
                  EditProgram([{"op": "replace_text_all", "find": "Second Quarter", "replace": "Q2"}])))

    def photo_deck():
        b = DeckBuilder()
        s = b.slide("Title and Content")
        s.title("Field photos")
        s.picture(60, 150, 300, 200, alt="Heron")
        s.picture(500, 150, 150, 100, alt="Egret")
        return b

    cases.append(("layout-resize", ["Layout"], [3, 8], {"cross_slide": False, "high_diff": False},
                  "Make all images the same size, 3.2 inches wide by 2.4 inches high.", photo_deck,
                  EditProgram([
                      {"op": "resize", "target": {"slide": 1, "shape": {"name": "Picture 2"}}, "w": 230.4, "h": 172.8},
                      {"op": "resize", "target": {"slide": 1, "shape": {"name": "Picture 3"}}, "w": 230.4, "h": 172.8},
                  ])))

    cases.append(("styling-theme", ["Styling"], [10, 11], {"cross_slide": True, "high_diff": True},
                  "Switch the deck to a dark theme.", lambda: _theme_flip_builder(False), None))

    def talk_deck():
        b = DeckBuilder()
        for k in range(1, 4):
            s = b.slide("Title and Content")
            s.title(f"Section {k}")
            s.body([f"Point {k}"])
        return b

    cases.append(("interactivity-fade", ["Interactivity"], [13], {"cross_slide": True, "high_diff": False},
                  "Add a fade transition to every slide.", talk_deck,
                  EditProgram([{"op": "set_transition", "slides": [1, 2, 3], "preset": "fade"}])))

    def notes_deck():
        b = DeckBuilder()
        s = b.slide("Title and Content")
        s.title("Intro")
        s = b.slide("Title and Content")
        s.title("Staging")
        s.textbox("Welcome everyone", 60, 150, 400, 40)
        s = b.slide("Title and Content")
        s.title("Wrap-up")
        return b

    cases.append(("structure-notes", ["Content", "Structure"], [1, 15], {"cross_slide": True, "high_diff": False},
                  "Move the text box on slide 2 into the speaker notes of slide 1, then delete slide 2.", notes_deck,
                  EditProgram([
                      {"op": "set_notes", "slide": 1, "text": "Welcome everyone"},
                      {"op": "delete_slide", "slide": 2},
                  ])))

    def link_deck():
        b = DeckBuilder()
        s = b.slide("Title and Content")
        s.title("Resources")
        s.picture(100, 150, 200, 150, name="Logo")
        return b

    cases.append(("structure-a11y", ["Interactivity", "Structure"], [14, 16], {"cross_slide": False, "high_diff": False},
                  "Add alt text 'Company logo' to the logo and link it to https://example.com.", link_deck,
                  EditProgram([
                      {"op": "set_alt_text", "target": {"slide": 1, "shape": {"name": "Logo"}}, "text": "Company logo"},
                      {"op": "set_hyperlink", "target": {"slide": 1, "shape": {"name": "Logo"}},
                       "url": "https://example.com"},
                  ])))
    return cases


def generate_cases(outdir) -> list[Path]:
    """Write the six-case fixture suite; returns the case directories in order."""
    from .edit import apply_edit_program

    outdir = Path(outdir)
    dirs = []
    for case_id, cats, types, tags, instruction, make, program in case_definitions():
        d = outdir / case_id
        d.mkdir(parents=True, exist_ok=True)
        original = make().build()
        if program is None:  # theme flip has no op form; rebuild with the dark theme
            truth = _theme_flip_builder(True).build()
        else:
            outcome = apply_edit_program(original, program)
            if not outcome.ok:
                raise RuntimeError(f"fixture case {case_id} failed: {outcome.failed_step}")
            truth = outcome.package
        save_package(original, d / "original.pptx")
        save_package(truth, d / "ground_truth.pptx")
        (d / "prompt.txt").write_text(instruction + "\n", encoding="utf-8")
        meta = {"case_id": case_id, "categories": cats, "edit_types": types, "tags": tags}
        (d / "case.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        dirs.append(d)
    return dirs


def write_corpus(outdir, count: int = 10) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, pkg in enumerate(generate_corpus(count)):
        p = outdir / f"deck_{i:02d}.pptx"
        save_package(pkg, p)
        paths.append(p)
    return paths
