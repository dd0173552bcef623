"""Prompt-context helpers: whole-slide snapshot truncation."""

from __future__ import annotations

from .deck import serialize_snapshot

DEFAULT_SNAPSHOT_CHARS = 60000


def truncate_snapshot(doc: dict, keep: int) -> dict:
    """Copy of ``doc`` with only the first ``keep`` slides; notes how many were dropped."""
    slides = doc.get("slides", [])
    if keep >= len(slides):
        return doc
    out = dict(doc)
    out["slides"] = slides[:keep]
    out["omitted_slides"] = len(slides) - keep
    return out


def _size(doc: dict) -> int:
    return len(serialize_snapshot(doc, indent=1).decode("utf-8"))


def common_cut(docs: list[dict], max_chars: int | None) -> int:
    """Largest slide count at which every doc fits in ``max_chars``.

    The same cut is applied to all documents so that a before/after pair is
    always compared over the same slides.
    """
    longest = max((len(d.get("slides", [])) for d in docs), default=0)
    if max_chars is None or all(_size(d) <= max_chars for d in docs):
        return longest
    lo, hi = 0, longest
    while lo < hi:  # size grows with the slide count, so bisect
        mid = (lo + hi + 1) // 2
        if all(_size(truncate_snapshot(d, mid)) <= max_chars for d in docs):
            lo = mid
        else:
            hi = mid - 1
    return lo


def snapshot_text(doc: dict, max_chars: int | None = DEFAULT_SNAPSHOT_CHARS) -> str:
    keep = common_cut([doc], max_chars)
    return serialize_snapshot(truncate_snapshot(doc, keep), indent=1).decode("utf-8")
