"""Snapshot a deck, edit one title, and look at the semantic diff.

Run:  python3 demos/01_snapshot_and_diff.py
"""

from deckforge.deck import parse_deck, snapshot
from deckforge.diff import diff_snapshots, format_diff_report, json_change_ratio, select_modality, xml_change_ratio
from deckforge.edit import EditProgram, apply_edit_program
from deckforge.fixtures import multi_shape_deck

deck = multi_shape_deck().build()
before = snapshot(parse_deck(deck))
print(f"{len(before['slides'])} slides, {before['slide_width']:.0f}x{before['slide_height']:.0f} pt")
for s in before["slides"]:
    print(f"  slide {s['slide_number']} ({s['slide_layout']}): {[sh['name'] for sh in s['shapes']]}")

# a tiny programmatic edit gives us a second deck to compare against
edited = apply_edit_program(deck, EditProgram([
    {"op": "replace_text_all", "find": "Second Quarter", "replace": "Q2"},
    {"op": "set_background", "slide": 1, "color": "1F1F1F"},
])).package
after = snapshot(parse_deck(edited))

report = diff_snapshots(after, before)
print()
print(format_diff_report(report))

j, x = json_change_ratio(before, after), xml_change_ratio(deck, edited)
print(f"\njson ratio {j:.4f}, xml ratio {x:.4f} -> judge sees {select_modality(j, x)}")
