"""Edits either apply completely or leave the deck untouched.

Run:  python3 demos/02_transactional_edits.py
"""

from deckforge.edit import apply_edit_program, apply_xml_patch
from deckforge.fixtures import multi_shape_deck
from deckforge.package import package_bytes

deck = multi_shape_deck().build()
original = package_bytes(deck)

good = apply_edit_program(deck, {"ops": [
    {"op": "set_notes", "slide": 2, "text": "Mention the North region first."},
    {"op": "set_transition", "slides": [2], "preset": "fade"},
]})
print("valid program:", "ok" if good.ok else good.failed_step)

# the second op points at a slide that does not exist, so the first one is rolled back too
bad = apply_edit_program(deck, {"ops": [
    {"op": "set_notes", "slide": 1, "text": "never saved"},
    {"op": "set_background", "slide": 9, "color": "000000"},
]})
print("broken program:", bad.failed_step["kind"], "at step", bad.failed_step["index"])
print("input unchanged:", package_bytes(bad.package) == original)

# XML patches get the same guarantee, including post-apply package validation
patch = apply_xml_patch(deck, {"patches": [
    {"part": "ppt/slides/slide1.xml", "action": "delete-element", "address": {"path": [0, 0, 2]}},
    {"part": "ppt/slides/slide1.xml", "action": "delete-element",
     "address": {"tag": "p:cNvPr", "attribute": "name", "value": "No Such Shape"}},
]})
print("broken patch:", patch.failed_step["kind"], "at patch", patch.failed_step["index"])
print("input unchanged:", package_bytes(patch.package) == original)
