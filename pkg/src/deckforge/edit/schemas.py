"""JSON schemas for EditProgram and PatchSet.

These are the normative contract for programs and patches, and the
structured-output schemas handed to models.
"""

from __future__ import annotations

from functools import lru_cache

from jsonschema import Draft202012Validator

from .. import ooxml as ox

SCHEMA_DIALECT = "https://json-schema.org/draft/2020-12/schema"

_INT0 = {"type": "integer", "minimum": 0}
_SLIDE = {"type": "integer", "minimum": 1}
_SLIDES = {"type": "array", "items": _SLIDE, "minItems": 1}
_POINTS = {"type": "number"}
_LENGTH = {"type": "number", "minimum": 0}
_COLOR = {"type": "string", "pattern": "^[0-9A-Fa-f]{6}$"}
_COLOR_OR_NONE = {"anyOf": [_COLOR, {"const": "none"}]}
_TARGET = {"$ref": "#/$defs/target"}
_SHAPE_REF = {"$ref": "#/$defs/shape_ref"}

DEFS = {
    "shape_ref": {
        "description": "Exactly one of id, name, or zindex (0 = bottom-most top-level shape).",
        "oneOf": [
            {"type": "object", "properties": {"id": _INT0}, "required": ["id"], "additionalProperties": False},
            {"type": "object", "properties": {"name": {"type": "string"}}, "required": ["name"],
             "additionalProperties": False},
            {"type": "object", "properties": {"zindex": _INT0}, "required": ["zindex"], "additionalProperties": False},
        ],
    },
    "target": {
        "type": "object",
        "properties": {
            "slide": _SLIDE,
            "shape": _SHAPE_REF,
            "paragraph": _INT0,
            "run": _INT0,
            "cell": {"type": "array", "items": _INT0, "minItems": 2, "maxItems": 2},
        },
        "required": ["slide", "shape"],
        "additionalProperties": False,
    },
}


def _op(op_name, required=(), any_of=None, /, doc="", **props):
    schema = {
        "type": "object",
        "description": doc,
        "properties": {"op": {"const": op_name}, **props},
        "required": ["op", *required],
        "additionalProperties": False,
    }
    if any_of:
        schema["anyOf"] = [{"required": [k]} for k in any_of]
    return schema


OP_SCHEMAS = {
    "set_text": _op("set_text", ["target", "text"], target=_TARGET, text={"type": "string"},
                    doc="Replace the text of a shape, paragraph, run or table cell; newlines start paragraphs."),
    "replace_text_all": _op("replace_text_all", ["find", "replace"], find={"type": "string", "minLength": 1},
                            replace={"type": "string"}, slides=_SLIDES, include_notes={"type": "boolean"},
                            doc="Replace every occurrence of a phrase, also across run boundaries."),
    "set_font": _op("set_font", ["target"], ["name", "size", "bold", "italic", "color"], target=_TARGET,
                    name={"type": "string", "minLength": 1}, size={"type": "number", "minimum": 1, "maximum": 4000},
                    bold={"type": "boolean"}, italic={"type": "boolean"}, color=_COLOR,
                    doc="Set explicit run formatting; size in points."),
    "set_fill": _op("set_fill", ["target", "color"], target=_TARGET, color=_COLOR_OR_NONE),
    "set_line": _op("set_line", ["target"], ["color", "width"], target=_TARGET, color=_COLOR_OR_NONE, width=_LENGTH),
    "add_shape": _op("add_shape", ["slide", "kind", "x", "y", "w", "h"], slide=_SLIDE,
                     kind={"enum": ["textbox", "rect", "roundRect", "ellipse", "triangle", "rightArrow", "table"]},
                     x=_POINTS, y=_POINTS, w=_LENGTH, h=_LENGTH, text={"type": "string"}, name={"type": "string"},
                     fill=_COLOR_OR_NONE,
                     rows={"type": "array", "items": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                           "minItems": 1},
                     doc="Add a shape on top of the slide; geometry in points."),
    "delete_shape": _op("delete_shape", ["target"], target=_TARGET),
    "move": _op("move", ["target", "x", "y"], target=_TARGET, x=_POINTS, y=_POINTS,
                doc="Move the shape's top-left corner to (x, y) points in slide space."),
    "resize": _op("resize", ["target", "w", "h"], target=_TARGET, w=_LENGTH, h=_LENGTH,
                  doc="Set width and height in points, keeping the top-left corner."),
    "set_z_order": _op("set_z_order", ["target", "position"], target=_TARGET,
                       position={"anyOf": [{"enum": ["front", "back", "forward", "backward"]}, _INT0]}),
    "group": _op("group", ["slide", "shapes"], slide=_SLIDE,
                 shapes={"type": "array", "items": _SHAPE_REF, "minItems": 2}, name={"type": "string"}),
    "ungroup": _op("ungroup", ["target"], target=_TARGET),
    "set_background": _op("set_background", ["color"], slide=_SLIDE, slides=_SLIDES, color=_COLOR_OR_NONE),
    "set_theme_color": _op("set_theme_color", ["role", "color"], role={"enum": list(ox.THEME_ROLES)}, color=_COLOR),
    "set_theme_font": _op("set_theme_font", [], ["major", "minor"], major={"type": "string", "minLength": 1},
                          minor={"type": "string", "minLength": 1}),
    "set_animation": _op("set_animation", ["target", "preset"], target=_TARGET,
                         preset={"enum": ["none", *ox.ANIMATION_PRESETS]}),
    "set_transition": _op("set_transition", ["preset"], slides=_SLIDES,
                          preset={"enum": ["none", "cut", "fade", "push", "wipe", "split", "cover", "dissolve",
                                           "random", "zoom"]},
                          duration_ms={"type": "integer", "minimum": 1}),
    "set_hyperlink": _op("set_hyperlink", ["target"], target=_TARGET, url={"type": "string", "minLength": 1},
                         to_slide=_SLIDE, doc="Link to a URL or a slide; neither removes the link."),
    "add_slide": _op("add_slide", [], layout={"type": "string"}, position=_SLIDE, title={"type": "string"},
                     body={"type": "array", "items": {"type": "string"}}),
    "delete_slide": _op("delete_slide", ["slide"], slide=_SLIDE),
    "reorder_slides": _op("reorder_slides", ["order"], order={"type": "array", "items": _SLIDE, "minItems": 1},
                          doc="New order as a permutation of current slide numbers."),
    "set_notes": _op("set_notes", ["slide", "text"], slide=_SLIDE, text={"type": "string"}),
    "set_header_footer": _op("set_header_footer", [], ["footer", "date", "slide_number"], slides=_SLIDES,
                             footer={"type": ["string", "null"]}, date={"type": ["string", "null"]},
                             slide_number={"type": "boolean"}),
    "set_alt_text": _op("set_alt_text", ["target", "text"], target=_TARGET, text={"type": "string"}),
}


def edit_program_schema() -> dict:
    return {
        "$schema": SCHEMA_DIALECT,
        "$id": "deckforge/edit-program.schema.json",
        "title": "EditProgram",
        "type": "object",
        "properties": {
            "provenance": {"type": "string"},
            "ops": {"type": "array", "items": {"oneOf": [OP_SCHEMAS[k] for k in sorted(OP_SCHEMAS)]}},
        },
        "required": ["ops"],
        "additionalProperties": False,
        "$defs": DEFS,
    }


_ADDRESS = {
    "oneOf": [
        {"type": "object", "properties": {"path": {"type": "array", "items": _INT0}}, "required": ["path"],
         "additionalProperties": False},
        {"type": "object",
         "properties": {
             "attribute": {"type": "string", "minLength": 1},
             "value": {"type": "string"},
             "tag": {"type": "string"},
             "up": _INT0,
             "child_path": {"type": "array", "items": _INT0},
         },
         "required": ["attribute", "value"], "additionalProperties": False},
    ]
}


def patch_set_schema() -> dict:
    fragment = {"type": "string", "minLength": 1}
    return {
        "$schema": SCHEMA_DIALECT,
        "$id": "deckforge/patch-set.schema.json",
        "title": "PatchSet",
        "type": "object",
        "properties": {
            "provenance": {"type": "string"},
            "patches": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "part": {"type": "string", "minLength": 1},
                        "action": {"enum": ["replace-part", "replace-element", "set-attribute", "insert-after",
                                            "insert-first-child", "delete-element"]},
                        "address": _ADDRESS,
                        "payload": {"anyOf": [fragment, {
                            "type": "object",
                            "properties": {"name": {"type": "string", "minLength": 1},
                                           "value": {"type": ["string", "null"]}},
                            "required": ["name", "value"], "additionalProperties": False}]},
                        "content_type": {"type": "string"},
                    },
                    "required": ["part", "action"],
                    "additionalProperties": False,
                    "allOf": [
                        {"if": {"properties": {"action": {"const": "replace-part"}}},
                         "then": {"required": ["payload"], "properties": {"payload": fragment}}},
                        {"if": {"properties": {"action": {"const": "set-attribute"}}},
                         "then": {"required": ["address", "payload"], "properties": {"payload": {"type": "object"}}}},
                        {"if": {"properties": {"action": {"enum": ["replace-element", "insert-after",
                                                                   "insert-first-child"]}}},
                         "then": {"required": ["address", "payload"], "properties": {"payload": fragment}}},
                        {"if": {"properties": {"action": {"const": "delete-element"}}},
                         "then": {"required": ["address"]}},
                    ],
                },
            },
        },
        "required": ["patches"],
        "additionalProperties": False,
    }


@lru_cache(maxsize=None)
def op_validator(name: str) -> Draft202012Validator:
    return Draft202012Validator({"$schema": SCHEMA_DIALECT, **OP_SCHEMAS[name], "$defs": DEFS})


@lru_cache(maxsize=None)
def patch_validator() -> Draft202012Validator:
    return Draft202012Validator(patch_set_schema())


def first_error(validator: Draft202012Validator, instance) -> str | None:
    errors = sorted(validator.iter_errors(instance), key=lambda e: list(e.absolute_path))
    if not errors:
        return None
    err = errors[0]
    where = "/".join(str(p) for p in err.absolute_path) or "(root)"
    return f"{where}: {err.message}"
