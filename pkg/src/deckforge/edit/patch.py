"""PatchSet: raw XML patches addressed by child-index path or unique attribute."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from lxml import etree

from ..errors import AddressNotFoundError, DeckforgeError, InvalidParameterError, MalformedFragmentError
from ..ooxml import NS
from ..package import Package, is_xml_part
from .program import ApplyOutcome, failure, finish
from .schemas import first_error, patch_validator
from .workspace import Workspace

ACTIONS = ("replace-part", "replace-element", "set-attribute", "insert-after", "insert-first-child", "delete-element")


@dataclass
class PatchSet:
    patches: list[dict] = field(default_factory=list)
    provenance: str = ""

    @classmethod
    def from_dict(cls, data) -> "PatchSet":
        if isinstance(data, list):
            data = {"patches": data}
        if not isinstance(data, dict) or not isinstance(data.get("patches"), list):
            raise InvalidParameterError("a patch set is an object with a 'patches' list")
        return cls(list(data["patches"]), str(data.get("provenance", "")))

    @classmethod
    def from_json(cls, text) -> "PatchSet":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "PatchSet":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def to_dict(self) -> dict:
        out = {"patches": self.patches}
        if self.provenance:
            out["provenance"] = self.provenance
        return out

    def parts(self) -> list[str]:
        return sorted({p.get("part") for p in self.patches if isinstance(p, dict)})


def clark(name: str, el) -> str:
    """``r:id`` -> ``{uri}id`` using the element's scope, then the standard prefixes."""
    if ":" not in name:
        return name
    prefix, localname = name.split(":", 1)
    uri = (el.nsmap or {}).get(prefix) or NS.get(prefix)
    if uri is None:
        raise InvalidParameterError(f"unknown namespace prefix {prefix!r}")
    return f"{{{uri}}}{localname}"


def element_children(el):
    return [c for c in el if isinstance(c.tag, str)]


def follow_path(root, path, part):
    el = root
    for depth, i in enumerate(path):
        kids = element_children(el)
        if not isinstance(i, int) or not 0 <= i < len(kids):
            raise AddressNotFoundError(f"{part}: no child {i} at depth {depth} of path {list(path)}",
                                       part=part, path=list(path))
        el = kids[i]
    return el


def locate(root, address: dict, part: str):
    if "path" in address:
        return follow_path(root, address["path"], part)
    attr, value = address["attribute"], address["value"]
    tag = address.get("tag")
    hits = []
    for el in root.iter():
        if not isinstance(el.tag, str):
            continue
        if tag is not None and el.tag != clark(tag, el):
            continue
        if el.get(clark(attr, el)) == value:
            hits.append(el)
    if len(hits) != 1:
        what = "no element" if not hits else f"{len(hits)} elements"
        raise AddressNotFoundError(f"{part}: {what} with {attr}={value!r}" + (f" ({tag})" if tag else ""),
                                   part=part, attribute=attr, value=value)
    el = hits[0]
    for _ in range(address.get("up", 0)):
        el = el.getparent()
        if el is None:
            raise AddressNotFoundError(f"{part}: 'up' climbs above the root")
    return follow_path(el, address.get("child_path", []), part)


def parse_fragment(text: str, context) -> list:
    """Parse one or more sibling elements, inheriting ``context``'s namespaces."""
    nsmap = dict(NS)
    for prefix, uri in (context.nsmap if context is not None else {}).items():
        if prefix:
            nsmap[prefix] = uri
    decls = " ".join(f'xmlns:{p}="{u}"' for p, u in sorted(nsmap.items()))
    try:
        wrapper = etree.fromstring(f"<deckforge-fragment {decls}>{text}</deckforge-fragment>".encode("utf-8"),
                                   etree.XMLParser(resolve_entities=False, no_network=True))
    except etree.XMLSyntaxError as err:
        raise MalformedFragmentError(f"payload is not well-formed XML: {err}") from None
    if (wrapper.text or "").strip() or any((c.tail or "").strip() for c in wrapper):
        raise MalformedFragmentError("payload has text outside of elements")
    kids = element_children(wrapper)
    if not kids:
        raise MalformedFragmentError("payload contains no element")
    return kids


def apply_one(ws: Workspace, patch: dict):
    part, action = patch["part"], patch["action"]
    if action == "replace-part":
        if not is_xml_part(part, patch.get("content_type")):
            raise InvalidParameterError(f"replace-part only handles XML parts, not {part!r}")
        try:
            root = etree.fromstring(patch["payload"].encode("utf-8"),
                                    etree.XMLParser(resolve_entities=False, no_network=True))
        except etree.XMLSyntaxError as err:
            raise MalformedFragmentError(f"replacement for {part} is not well-formed XML: {err}") from None
        ws.put_xml(part, root, patch.get("content_type"))
        return
    if part not in ws:
        raise AddressNotFoundError(f"no part named {part!r}", part=part)
    root = ws.xml(part)
    el = locate(root, patch["address"], part)
    if action == "set-attribute":
        name, value = patch["payload"]["name"], patch["payload"]["value"]
        key = clark(name, el)
        if value is None:
            el.attrib.pop(key, None)
        else:
            el.set(key, value)
    elif action == "delete-element":
        if el is root:
            raise InvalidParameterError("cannot delete the root element; use replace-part")
        el.getparent().remove(el)
    elif action == "replace-element":
        new = parse_fragment(patch["payload"], el.getparent() if el is not root else el)
        if el is root:
            if len(new) != 1:
                raise MalformedFragmentError("replacing the root needs exactly one element")
            ws.put_xml(part, new[0])
            return
        anchor = el
        for n in new:
            anchor.addnext(n)
            anchor = n
        el.getparent().remove(el)
    elif action == "insert-after":
        if el is root:
            raise InvalidParameterError("cannot insert a sibling after the root element")
        anchor = el
        for n in parse_fragment(patch["payload"], el.getparent()):
            anchor.addnext(n)
            anchor = n
    elif action == "insert-first-child":
        for i, n in enumerate(parse_fragment(patch["payload"], el)):
            el.insert(i, n)
    else:
        raise InvalidParameterError(f"unknown action {action!r}; expected one of {ACTIONS}")
    ws.touch(part)


def apply_xml_patch(pkg: Package, patch) -> ApplyOutcome:
    """Apply patches in order; any failure returns the input package untouched."""
    if not isinstance(patch, PatchSet):
        try:
            patch = PatchSet.from_dict(patch)
        except DeckforgeError as err:
            return failure(pkg, 0, err)
    msg = first_error(patch_validator(), patch.to_dict())
    if msg:
        m = re.match(r"patches/(\d+)", msg)
        index = int(m.group(1)) if m else 0
        return failure(pkg, index, InvalidParameterError(msg))
    ws = Workspace(pkg)
    for i, p in enumerate(patch.patches):
        try:
            apply_one(ws, p)
        except DeckforgeError as err:
            return failure(pkg, i, err)
    return finish(pkg, ws.commit(), len(patch.patches))
