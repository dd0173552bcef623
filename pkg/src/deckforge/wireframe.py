"""Built-in wireframe renderer: one PNG per slide, drawn from the deck model.

It is a stand-in for a real office renderer.  It draws backgrounds, fills,
outlines, embedded pictures, table grids and text with a bitmap font, which
is enough for SSIM screening and for tests.  Output is a pure function of the
package bytes.

    python3 -m deckforge.wireframe deck.pptx outdir/
"""

from __future__ import annotations

import io
import sys
from pathlib import Path

from PIL import Image, ImageDraw, ImageFont

from .deck import Shape, parse_deck
from .package import Package, open_package

_FONT = ImageFont.load_default_imagefont() if hasattr(ImageFont, "load_default_imagefont") else ImageFont.load_default()
_BASE_PX = 11  # nominal height of the bitmap font


def _rgb(hex6: str | None, default=(255, 255, 255)):
    if not hex6 or len(hex6) != 6:
        return default
    try:
        return tuple(int(hex6[i:i + 2], 16) for i in (0, 2, 4))
    except ValueError:
        return default


def _text_image(text: str, size_pt: float, scale: float, color) -> Image.Image | None:
    if not text.strip():
        return None
    left, top, right, bottom = _FONT.getbbox(text)
    w, h = max(1, right), max(1, bottom)
    tile = Image.new("L", (w, h), 0)
    ImageDraw.Draw(tile).text((0, 0), text, fill=255, font=_FONT)
    factor = max(0.25, size_pt * scale / _BASE_PX)
    tile = tile.resize((max(1, round(w * factor)), max(1, round(h * factor))), Image.NEAREST)
    ink = Image.new("RGB", tile.size, color)
    ink.putalpha(tile)
    return ink


class _Painter:
    def __init__(self, pkg: Package, part: str, canvas: Image.Image, scale: float, theme: dict):
        self.pkg = pkg
        self.rels = pkg.rels_of(part)
        self.canvas = canvas
        self.draw = ImageDraw.Draw(canvas)
        self.scale = scale
        self.theme = theme

    def box(self, s: Shape):
        k = self.scale / 12700
        x0, y0 = round(s.x_emu * k), round(s.y_emu * k)
        return x0, y0, x0 + max(1, round(s.w_emu * k)), y0 + max(1, round(s.h_emu * k))

    def shape(self, s: Shape):
        if s.kind == "group":
            for child in s.children:
                self.shape(child)
            return
        box = self.box(s)
        fill = s.fill or {}
        if fill.get("type") == "solid":
            self.draw.rectangle(box, fill=_rgb(fill.get("color")))
        elif fill.get("type") == "gradient" and fill.get("colors"):
            self.draw.rectangle(box, fill=_rgb(fill["colors"][0]))
        line = s.line or {}
        if line.get("type") == "solid":
            width = max(1, round((line.get("width_pt") or 1) * self.scale))
            self.draw.rectangle(box, outline=_rgb(line.get("color"), (0, 0, 0)), width=width)
        if s.kind in ("picture", "media") and s.picture:
            self.picture(s, box)
        if s.table is not None:
            self.table(s, box)
        if s.chart is not None:
            self.chart(s, box)
        if s.text is not None:
            self.text(s, box)

    def picture(self, s: Shape, box):
        rel = self.rels.get(s.picture.get("rel_id"))
        data = self.pkg.parts.get(rel.target) if rel is not None and not rel.external else None
        size = (max(1, box[2] - box[0]), max(1, box[3] - box[1]))
        try:
            with Image.open(io.BytesIO(data)) as im:
                self.canvas.paste(im.convert("RGB").resize(size, Image.BILINEAR), box[:2])
        except Exception:  # missing or undecodable media: draw a crossed frame
            self.draw.rectangle(box, outline=(128, 128, 128))
            self.draw.line(box, fill=(128, 128, 128))

    def table(self, s: Shape, box):
        rows, cols = max(1, s.table.rows), max(1, s.table.cols)
        x0, y0, x1, y1 = box
        for r in range(rows + 1):
            y = y0 + (y1 - y0) * r // rows
            self.draw.line((x0, y, x1, y), fill=(90, 90, 90))
        for c in range(cols + 1):
            x = x0 + (x1 - x0) * c // cols
            self.draw.line((x, y0, x, y1), fill=(90, 90, 90))
        for r, row in enumerate(s.table.cells):
            for c, text in enumerate(row):
                tile = _text_image(str(text), 12, self.scale, (0, 0, 0))
                if tile is not None:
                    self.canvas.paste(tile, (x0 + (x1 - x0) * c // cols + 3, y0 + (y1 - y0) * r // rows + 3), tile)

    def chart(self, s: Shape, box):
        values = [v for series in s.chart.series[:1] for v in series.get("values", [])]
        if not values:
            return
        x0, y0, x1, y1 = box
        top = max(max(values), 1e-9)
        step = (x1 - x0) / len(values)
        accent = _rgb(self.theme.get("accent1"), (68, 114, 196))
        for i, v in enumerate(values):
            h = (y1 - y0) * max(v, 0) / top
            self.draw.rectangle((round(x0 + i * step + step * 0.15), round(y1 - h), round(x0 + (i + 0.85) * step), y1),
                                fill=accent)

    def text(self, s: Shape, box):
        x0, y0, x1, y1 = box
        y = y0 + round(4 * self.scale)
        for para in s.text.paragraphs:
            x = x0 + round((6 + 18 * para.level) * self.scale)
            line_h = 0
            for run in para.runs:
                size = run.effective_size_pt or 18.0
                tile = _text_image(run.text, size, self.scale, _rgb(run.effective_color, (0, 0, 0)))
                line_h = max(line_h, round(size * 1.2 * self.scale))
                if tile is None:
                    continue
                if x < x1 and y < y1:
                    self.canvas.paste(tile, (x, y), tile)
                x += tile.width
            y += line_h or round(18 * self.scale)


def render_package(pkg: Package, scale: float = 1.0) -> list[Image.Image]:
    """One RGB image per slide; ``scale`` is pixels per point."""
    deck = parse_deck(pkg)
    size = (max(1, round(deck.slide_width_pt * scale)), max(1, round(deck.slide_height_pt * scale)))
    images = []
    for slide in deck.slides:
        bg = slide.background or {}
        color = bg.get("color") if bg.get("type") in ("solid", "ref") else None
        if bg.get("type") == "gradient" and bg.get("colors"):
            color = bg["colors"][0]
        canvas = Image.new("RGB", size, _rgb(color or deck.theme_colors.get("lt1")))
        painter = _Painter(pkg, slide.part, canvas, scale, deck.theme_colors)
        for shape in slide.shapes:
            painter.shape(shape)
        images.append(canvas)
    return images


def render_to_dir(src, outdir, scale: float = 1.0) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, im in enumerate(render_package(open_package(src), scale), start=1):
        path = outdir / f"slide-{i:03d}.png"
        im.save(path, format="PNG")
        paths.append(path)
    return paths


def main(argv=None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    if len(args) not in (2, 3):
        print("usage: python3 -m deckforge.wireframe <deck.pptx> <outdir> [scale]", file=sys.stderr)
        return 2
    render_to_dir(args[0], args[1], float(args[2]) if len(args) == 3 else 1.0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
