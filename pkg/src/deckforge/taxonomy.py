"""Edit-task vocabulary: five parent categories and sixteen edit types."""

CATEGORIES = ("Content", "Layout", "Styling", "Interactivity", "Structure")

EDIT_TYPES = {
    1: ("Content", "Text & Typography"),
    2: ("Content", "Shapes & Drawing"),
    3: ("Content", "Images & Pictures"),
    4: ("Content", "Tables"),
    5: ("Content", "Charts"),
    6: ("Content", "SmartArt & Diagrams"),
    7: ("Content", "Audio & Video"),
    8: ("Layout", "Alignment, Distribution, Grid, Grouping, Z-order"),
    9: ("Layout", "Slide Layouts & Placeholders"),
    10: ("Styling", "Themes (colors, fonts, effects), Background"),
    11: ("Styling", "Master-level edits (Slide/Notes Masters)"),
    12: ("Interactivity", "Animations (entrance, emphasis, exit, paths, timing)"),
    13: ("Interactivity", "Slide Transitions"),
    14: ("Interactivity", "Hyperlinks"),
    15: ("Structure", "Slide/Section/Order Mgmt., Slide Numbers, Headers/Footers, Notes"),
    16: ("Structure", "Comments/Review, Accessibility (alt text, reading order, contrast)"),
}


def category_of(edit_type: int) -> str:
    return EDIT_TYPES[edit_type][0]
