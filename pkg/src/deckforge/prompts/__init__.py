"""Prompt templates shipped as text assets.

``style_prompt``, ``if_prompt`` and ``vq_prompt`` are protocol assets kept
verbatim; only their ``{placeholder}`` fields are substituted.
"""

from __future__ import annotations

import hashlib
import re
from functools import lru_cache
from importlib import resources

TEMPLATES = ("style_prompt", "if_prompt", "vq_prompt", "router", "plan", "synth_program", "synth_xml",
             "verify", "retry")

_FIELD = re.compile(r"\{([a-z_]+)\}")


@lru_cache(maxsize=None)
def load(name: str) -> str:
    if name not in TEMPLATES:
        raise KeyError(f"unknown prompt template {name!r}")
    return resources.files(__name__).joinpath(f"{name}.txt").read_text(encoding="utf-8")


def fields(name: str) -> set[str]:
    return set(_FIELD.findall(load(name)))


def render(name: str, **values) -> str:
    """Substitute exactly the template's fields; nothing else is touched."""
    text = load(name)
    expected = fields(name)
    missing = expected - set(values)
    extra = set(values) - expected
    if missing or extra:
        raise KeyError(f"template {name}: missing {sorted(missing)}, unexpected {sorted(extra)}")
    return _FIELD.sub(lambda m: str(values[m.group(1)]) if m.group(1) in values else m.group(0), text)


def version(name: str) -> str:
    """Short content hash, recorded with results for auditability."""
    return hashlib.sha256(load(name).encode("utf-8")).hexdigest()[:12]
