"""Semantic snapshot diff, similarity score, and XML/JSON change ratios.

One :class:`DiffEntry` is produced per differing leaf property. A whole
shape or slide present on only one side counts once per shape. Shapes are
paired by ``shape_id``, then by ``(name, kind)``, then by z-index.
"""

from __future__ import annotations

import difflib
import json
import unicodedata
from dataclasses import dataclass, field
from typing import Any

from lxml import etree

from .deck import serialize_snapshot
from .errors import SchemaMismatchError
from .package import Package, is_xml_part

ENTRY_KINDS = ("changed", "missing-in-prediction", "extra-in-prediction", "slide-count-mismatch")
MODALITIES = ("json-diff", "xml-diff")

SIMILARITY_BASELINE = 100

# Identity keys are used for pairing, never compared as values.
DECK_SKIP = {"filename", "slides"}
SLIDE_SKIP = {"slide_number", "slide_id", "shapes"}
SHAPE_SKIP = {"shape_id", "children"}
COLOR_KEYS = {"color", "effective_color"}
LENGTH_KEYS = {"x", "y", "width", "height", "size_pt", "effective_size_pt", "width_pt", "slide_width", "slide_height"}

_MISSING = object()


@dataclass
class DiffEntry:
    slide_number: int
    path: tuple
    kind: str
    expected: Any = None
    actual: Any = None
    initial_status: str | None = None

    def to_dict(self) -> dict:
        out = {"slide_number": self.slide_number, "path": list(self.path), "kind": self.kind,
               "expected": self.expected, "actual": self.actual}
        if self.initial_status is not None:
            out["initial_status"] = self.initial_status
        return out

    def path_str(self) -> str:
        return "/".join(str(p) for p in self.path) or "(slide)"


@dataclass
class DiffReport:
    differences: list[DiffEntry] = field(default_factory=list)

    @property
    def total_differences(self) -> int:
        return len(self.differences)

    @property
    def has_differences(self) -> bool:
        return self.total_differences > 0

    @property
    def similarity_score(self) -> float:
        return similarity(self.total_differences)

    def to_dict(self) -> dict:
        return {
            "has_differences": self.has_differences,
            "similarity_score": self.similarity_score,
            "total_differences": self.total_differences,
            "differences": [d.to_dict() for d in self.differences],
        }


def similarity(total_differences: int) -> float:
    """``1 - n/(n + 100)``, clamped to [0, 1]."""
    if total_differences < 0:
        raise ValueError("total_differences must be non-negative")
    total_properties = total_differences + SIMILARITY_BASELINE
    score = 1.0 - (total_differences / total_properties)
    return max(0.0, min(1.0, score))


# -- normalisation ---------------------------------------------------------

def normalize(value, key=None):
    if isinstance(value, bool):
        return ("bool", value)
    if isinstance(value, str):
        s = unicodedata.normalize("NFC", value).strip()
        if key in COLOR_KEYS:
            s = s.upper()
        return ("str", s)
    if isinstance(value, (int, float)):
        if key in LENGTH_KEYS:
            return ("len", round(value * 100))
        return ("num", float(value))
    return ("raw", json.dumps(value, sort_keys=True))


def values_match(a, b, key=None) -> bool:
    if a is _MISSING or b is _MISSING:
        return a is b
    return normalize(a, key) == normalize(b, key)


def _path_key(entry: DiffEntry):
    return (entry.slide_number, tuple((0, p, "") if isinstance(p, int) else (1, 0, str(p)) for p in entry.path))


# -- pairing -------------------------------------------------------------

def shape_key(shape: dict) -> str:
    return f"shape:{shape.get('shape_id')}"


def pair_shapes(gt: list, pred: list):
    """Pair shapes; returns (pairs, unmatched_gt, unmatched_pred), all in gt/pred order."""
    pairs = []
    free_gt = list(range(len(gt)))
    free_pred = list(range(len(pred)))

    def match(keyfn):
        buckets: dict = {}
        for j in free_pred:
            buckets.setdefault(keyfn(pred[j]), []).append(j)
        for i in list(free_gt):
            k = keyfn(gt[i])
            if k is None or not buckets.get(k):
                continue
            j = buckets[k].pop(0)
            pairs.append((i, j))
            free_gt.remove(i)
            free_pred.remove(j)

    match(lambda s: s.get("shape_id"))
    match(lambda s: (s.get("name"), s.get("kind")))
    match(lambda s: s.get("z_index"))
    pairs.sort()
    return pairs, free_gt, free_pred


# -- comparison ------------------------------------------------------------

class _Differ:
    def __init__(self):
        self.entries: list[DiffEntry] = []

    def add(self, slide, path, kind, expected=None, actual=None):
        self.entries.append(DiffEntry(slide, tuple(path), kind, expected, actual))

    def value(self, slide, path, a, b, key=None):
        if isinstance(a, dict) and isinstance(b, dict):
            for k in sorted(set(a) | set(b)):
                if k not in b:
                    self.add(slide, path + [k], "missing-in-prediction", a[k], None)
                elif k not in a:
                    self.add(slide, path + [k], "extra-in-prediction", None, b[k])
                else:
                    self.value(slide, path + [k], a[k], b[k], k)
        elif isinstance(a, list) and isinstance(b, list):
            for i in range(max(len(a), len(b))):
                if i >= len(b):
                    self.add(slide, path + [i], "missing-in-prediction", a[i], None)
                elif i >= len(a):
                    self.add(slide, path + [i], "extra-in-prediction", None, b[i])
                else:
                    self.value(slide, path + [i], a[i], b[i], key)
        elif not values_match(a, b, key):
            self.add(slide, path, "changed", a, b)

    def shapes(self, slide, path, gt: list, pred: list):
        pairs, only_gt, only_pred = pair_shapes(gt, pred)
        for i, j in pairs:
            self.shape(slide, path + [shape_key(gt[i])], gt[i], pred[j])
        for i in only_gt:
            self.add(slide, path + [shape_key(gt[i])], "missing-in-prediction", gt[i], None)
        for j in only_pred:
            self.add(slide, path + [shape_key(pred[j])], "extra-in-prediction", None, pred[j])

    def shape(self, slide, path, a: dict, b: dict):
        for k in sorted((set(a) | set(b)) - SHAPE_SKIP):
            if k not in b:
                self.add(slide, path + [k], "missing-in-prediction", a[k], None)
            elif k not in a:
                self.add(slide, path + [k], "extra-in-prediction", None, b[k])
            else:
                self.value(slide, path + [k], a[k], b[k], k)
        self.shapes(slide, path + ["children"], a.get("children") or [], b.get("children") or [])

    def slide(self, number, a: dict, b: dict):
        for k in sorted((set(a) | set(b)) - SLIDE_SKIP):
            if k not in b:
                self.add(number, [k], "missing-in-prediction", a[k], None)
            elif k not in a:
                self.add(number, [k], "extra-in-prediction", None, b[k])
            else:
                self.value(number, [k], a[k], b[k], k)
        self.shapes(number, ["shapes"], a.get("shapes") or [], b.get("shapes") or [])

    def whole_slide(self, number, slide: dict, kind):
        shapes = slide.get("shapes") or []
        if not shapes:
            exp, act = (slide, None) if kind == "missing-in-prediction" else (None, slide)
            self.add(number, [], kind, exp, act)
        for s in shapes:
            exp, act = (s, None) if kind == "missing-in-prediction" else (None, s)
            self.add(number, ["shapes", shape_key(s)], kind, exp, act)


def _check_schema(doc, role):
    if not isinstance(doc, dict) or not isinstance(doc.get("slides"), list):
        raise SchemaMismatchError(f"{role} is not a deck snapshot (needs a 'slides' list)")
    for s in doc["slides"]:
        if not isinstance(s, dict) or not isinstance(s.get("shapes", []), list):
            raise SchemaMismatchError(f"{role} has a malformed slide entry")


def _resolve(doc, slide_number: int, path: tuple):
    """Value at ``path`` in ``doc`` (shape segments resolved by id), or _MISSING."""
    if slide_number == 0:
        node = doc
    else:
        slides = doc.get("slides", [])
        if slide_number > len(slides):
            return _MISSING
        node = slides[slide_number - 1]
    for seg in path:
        if isinstance(seg, str) and seg.startswith("shape:") and isinstance(node, list):
            sid = seg[len("shape:"):]
            node = next((s for s in node if str(s.get("shape_id")) == sid), _MISSING)
        elif isinstance(node, dict) and not isinstance(seg, int):
            node = node.get(seg, _MISSING)
        elif isinstance(node, list) and isinstance(seg, int):
            node = node[seg] if seg < len(node) else _MISSING
        else:
            return _MISSING
        if node is _MISSING:
            return _MISSING
    return node


def _annotate(entry: DiffEntry, initial: dict):
    if entry.kind == "slide-count-mismatch":
        init = len(initial.get("slides", []))
        entry.initial_status = "unchanged-from-initial" if init == entry.actual else (
            "regressed" if init == entry.expected else "divergent")
        return
    key = entry.path[-1] if entry.path and isinstance(entry.path[-1], str) else None
    init = _resolve(initial, entry.slide_number, entry.path)
    pred = _MISSING if entry.kind == "missing-in-prediction" else entry.actual
    gt = _MISSING if entry.kind == "extra-in-prediction" else entry.expected
    if values_match(pred, init, key):
        entry.initial_status = "unchanged-from-initial"
    elif values_match(gt, init, key):
        entry.initial_status = "regressed"
    else:
        entry.initial_status = "divergent"


def diff_snapshots(ground_truth: dict, prediction: dict, initial: dict | None = None) -> DiffReport:
    """Leaf-level differences of ``prediction`` against ``ground_truth``."""
    _check_schema(ground_truth, "ground truth")
    _check_schema(prediction, "prediction")
    if initial is not None:
        _check_schema(initial, "initial")
    d = _Differ()
    for k in sorted((set(ground_truth) | set(prediction)) - DECK_SKIP):
        if k not in prediction:
            d.add(0, [k], "missing-in-prediction", ground_truth[k], None)
        elif k not in ground_truth:
            d.add(0, [k], "extra-in-prediction", None, prediction[k])
        else:
            d.value(0, [k], ground_truth[k], prediction[k], k)
    gt_slides, pred_slides = ground_truth["slides"], prediction["slides"]
    if len(gt_slides) != len(pred_slides):
        d.add(0, ["slides"], "slide-count-mismatch", len(gt_slides), len(pred_slides))
    for idx in range(max(len(gt_slides), len(pred_slides))):
        number = idx + 1
        if idx >= len(pred_slides):
            d.whole_slide(number, gt_slides[idx], "missing-in-prediction")
        elif idx >= len(gt_slides):
            d.whole_slide(number, pred_slides[idx], "extra-in-prediction")
        else:
            d.slide(number, gt_slides[idx], pred_slides[idx])
    entries = sorted(d.entries, key=_path_key)
    if initial is not None:
        for e in entries:
            _annotate(e, initial)
    return DiffReport(entries)


def _short(value, limit=120) -> str:
    text = json.dumps(value, sort_keys=True, ensure_ascii=False)
    return text if len(text) <= limit else text[: limit - 3] + "..."


def format_diff_report(report: DiffReport, max_entries: int | None = 400) -> str:
    """Plain-text rendering for judge prompts and the CLI."""
    if not report.has_differences:
        return "No differences"
    lines = [f"Similarity score: {report.similarity_score:.4f} "
             f"({report.total_differences} differences; prediction vs ground truth)"]
    current = None
    shown = report.differences if max_entries is None else report.differences[:max_entries]
    for e in shown:
        if e.slide_number != current:
            current = e.slide_number
            lines.append("Deck:" if current == 0 else f"Slide {current}:")
        note = f" [{e.initial_status}]" if e.initial_status else ""
        if e.kind == "changed":
            lines.append(f"  {e.path_str()}: expected {_short(e.expected)}, got {_short(e.actual)}{note}")
        elif e.kind == "slide-count-mismatch":
            lines.append(f"  slide count: expected {e.expected}, got {e.actual}{note}")
        elif e.kind == "missing-in-prediction":
            lines.append(f"  {e.path_str()}: missing in prediction (expected {_short(e.expected)}){note}")
        else:
            lines.append(f"  {e.path_str()}: extra in prediction ({_short(e.actual)}){note}")
    if len(shown) < report.total_differences:
        lines.append(f"... {report.total_differences - len(shown)} more differences omitted")
    return "\n".join(lines)


# -- change ratios -----------------------------------------------------------

def pretty_xml_lines(data: bytes) -> list[str]:
    parser = etree.XMLParser(remove_blank_text=True, resolve_entities=False, no_network=True, huge_tree=True)
    try:
        root = etree.fromstring(data, parser)
    except etree.XMLSyntaxError:
        return data.decode("utf-8", "replace").splitlines()
    return etree.tostring(root, pretty_print=True, encoding="unicode").splitlines()


def line_changes(a: list[str], b: list[str]) -> tuple[int, int]:
    """(removed, added) line counts of a line diff from ``a`` to ``b``."""
    removed = added = 0
    for tag, i1, i2, j1, j2 in difflib.SequenceMatcher(None, a, b, autojunk=False).get_opcodes():
        if tag in ("replace", "delete"):
            removed += i2 - i1
        if tag in ("replace", "insert"):
            added += j2 - j1
    return removed, added


def _ratio(pairs) -> float:
    total_a = total_b = removed = added = 0
    for a_lines, b_lines in pairs:
        total_a += len(a_lines)
        total_b += len(b_lines)
        r, ad = line_changes(a_lines, b_lines)
        removed += r
        added += ad
    denom = max(total_a, total_b)
    if denom == 0:
        return 0.0
    return max(0.0, min(1.0, max(removed, added) / denom))


def xml_parts(pkg: Package) -> list[str]:
    return [n for n in pkg.part_names() if is_xml_part(n, pkg.content_type(n))]


def xml_change_ratio(a: Package, b: Package) -> float:
    """Changed-line ratio over all XML parts, pretty-printed."""
    names = sorted(set(xml_parts(a)) | set(xml_parts(b)))
    pairs = []
    for n in names:
        la = pretty_xml_lines(a.parts[n]) if n in a else []
        lb = pretty_xml_lines(b.parts[n]) if n in b else []
        pairs.append((la, lb))
    return _ratio(pairs)


def snapshot_lines(doc: dict) -> list[str]:
    return serialize_snapshot(doc, indent=1).decode("utf-8").splitlines()


def json_change_ratio(a: dict, b: dict) -> float:
    """Changed-line ratio over the line-oriented canonical snapshots."""
    return _ratio([(snapshot_lines(a), snapshot_lines(b))])


def select_modality(json_ratio: float, xml_ratio: float) -> str:
    """``xml-diff`` only when the XML ratio is strictly larger."""
    return "xml-diff" if xml_ratio > json_ratio else "json-diff"


def xml_diff_text(ground_truth: Package, prediction: Package, context: int = 2, max_chars: int | None = 60000) -> str:
    """Unified diff of pretty-printed XML parts, ground truth -> prediction."""
    chunks = []
    names = sorted(set(xml_parts(ground_truth)) | set(xml_parts(prediction)))
    for n in names:
        la = pretty_xml_lines(ground_truth.parts[n]) if n in ground_truth else []
        lb = pretty_xml_lines(prediction.parts[n]) if n in prediction else []
        if la == lb:
            continue
        chunks.extend(difflib.unified_diff(la, lb, fromfile=f"ground_truth/{n}", tofile=f"prediction/{n}",
                                           n=context, lineterm=""))
    if not chunks:
        return "No differences"
    text = "\n".join(chunks)
    if max_chars is not None and len(text) > max_chars:
        text = text[:max_chars] + "\n... [diff truncated]"
    return text
