"""Target selectors: which slide, which shape, and optionally which text run or cell."""

from __future__ import annotations

from dataclasses import dataclass

from ..deck import Deck, Shape
from ..errors import AmbiguousTargetError, InvalidParameterError, TargetNotFoundError
from ..ooxml import NS
from .workspace import cnvpr, is_shape

SHAPE_REF_KINDS = ("id", "name", "zindex")


@dataclass(frozen=True)
class TargetSelector:
    slide_number: int
    shape_ref: tuple  # ("id", 7) | ("name", "Title 1") | ("zindex", 0)
    paragraph: int | None = None
    run: int | None = None
    cell: tuple | None = None  # (row, col)

    @classmethod
    def from_dict(cls, data) -> "TargetSelector":
        if not isinstance(data, dict):
            raise InvalidParameterError("target must be an object")
        slide = data.get("slide")
        if not isinstance(slide, int) or isinstance(slide, bool) or slide < 1:
            raise InvalidParameterError(f"target.slide must be a positive integer, got {slide!r}")
        ref = data.get("shape")
        if not isinstance(ref, dict) or len(ref) != 1 or next(iter(ref)) not in SHAPE_REF_KINDS:
            raise InvalidParameterError("target.shape must have exactly one of 'id', 'name', 'zindex'")
        kind, value = next(iter(ref.items()))
        if kind == "name" and not isinstance(value, str):
            raise InvalidParameterError("target.shape.name must be a string")
        if kind != "name" and (not isinstance(value, int) or isinstance(value, bool) or value < 0):
            raise InvalidParameterError(f"target.shape.{kind} must be a non-negative integer")
        cell = data.get("cell")
        if cell is not None:
            if not (isinstance(cell, (list, tuple)) and len(cell) == 2 and all(isinstance(v, int) for v in cell)):
                raise InvalidParameterError("target.cell must be [row, col]")
            cell = tuple(cell)
        for key in ("paragraph", "run"):
            v = data.get(key)
            if v is not None and (not isinstance(v, int) or isinstance(v, bool) or v < 0):
                raise InvalidParameterError(f"target.{key} must be a non-negative integer")
        if data.get("run") is not None and data.get("paragraph") is None:
            raise InvalidParameterError("target.run requires target.paragraph")
        return cls(slide, (kind, value), data.get("paragraph"), data.get("run"), cell)

    def to_dict(self) -> dict:
        out = {"slide": self.slide_number, "shape": {self.shape_ref[0]: self.shape_ref[1]}}
        if self.paragraph is not None:
            out["paragraph"] = self.paragraph
        if self.run is not None:
            out["run"] = self.run
        if self.cell is not None:
            out["cell"] = list(self.cell)
        return out


@dataclass(frozen=True)
class ElementAddress:
    slide_number: int
    part: str
    path: tuple  # element-child index path from the slide root
    shape_id: int


def _pick(candidates, ref, describe):
    """Unique match among (id, name, payload) triples; ``ref`` as in TargetSelector."""
    kind, value = ref
    if kind == "id":
        hits = [c for c in candidates if c[0] == value]
    else:
        hits = [c for c in candidates if c[1] == value]
    if not hits:
        raise TargetNotFoundError(f"no shape with {kind} {value!r} on {describe}", ref={kind: value})
    if len(hits) > 1:
        raise AmbiguousTargetError(f"{len(hits)} shapes with {kind} {value!r} on {describe}", ref={kind: value})
    return hits[0][2]


def resolve_target(deck: Deck, sel: TargetSelector) -> ElementAddress:
    """Unique shape address for ``sel``; duplicate names are an error, never a guess."""
    if not 1 <= sel.slide_number <= len(deck.slides):
        raise TargetNotFoundError(f"slide {sel.slide_number} does not exist (deck has {len(deck.slides)})")
    slide = deck.slides[sel.slide_number - 1]
    where = f"slide {sel.slide_number}"
    if sel.shape_ref[0] == "zindex":
        z = sel.shape_ref[1]
        if z >= len(slide.shapes):
            raise TargetNotFoundError(f"no shape at z-index {z} on {where}", ref={"zindex": z})
        shape: Shape = slide.shapes[z]
    else:
        shape = _pick([(s.shape_id, s.name, s) for s in slide.all_shapes()], sel.shape_ref, where)
    return ElementAddress(sel.slide_number, slide.part, shape.address, shape.shape_id)


def shape_elements(container, recursive: bool = False):
    for el in container:
        if is_shape(el):
            yield el
            if recursive and el.tag.endswith("}grpSp"):
                yield from shape_elements(el, True)


def shape_identity(el):
    c = cnvpr(el)
    if c is None:
        return None, None
    try:
        sid = int(c.get("id"))
    except (TypeError, ValueError):
        sid = None
    return sid, c.get("name")


def find_shape(slide_root, ref, describe="slide"):
    """Locate a shape element in a live slide tree."""
    tree = slide_root.find("p:cSld/p:spTree", NS)
    if tree is None:
        raise TargetNotFoundError(f"{describe} has no shape tree")
    if ref[0] == "zindex":
        top = list(shape_elements(tree))
        if ref[1] >= len(top):
            raise TargetNotFoundError(f"no shape at z-index {ref[1]} on {describe}", ref={"zindex": ref[1]})
        return top[ref[1]]
    cands = [(*shape_identity(el), el) for el in shape_elements(tree, recursive=True)]
    return _pick(cands, ref, describe)
