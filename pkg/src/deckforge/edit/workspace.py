"""Mutable, parse-once view over a Package used while an edit is in flight.

Parts are parsed lazily and re-serialized only when touched, so untouched
parts keep their exact bytes.
"""

from __future__ import annotations

import posixpath

from lxml import etree

from ..errors import InvalidParameterError, MalformedDeckError, UnknownPartError
from ..ooxml import NS, RT, q
from ..package import (
    CONTENT_TYPES_PART,
    CT_NS,
    MEDIA_TYPES,
    PR_NS,
    Package,
    extension,
    parse_xml,
    rels_path_for,
    relative_target,
    resolve_target,
    serialize_xml,
    source_for_rels,
)

SHAPE_LOCALS = ("sp", "pic", "graphicFrame", "grpSp", "cxnSp", "contentPart")


def is_shape(el) -> bool:
    return isinstance(el.tag, str) and el.tag in {q("p", t) for t in SHAPE_LOCALS}


def cnvpr(el):
    """The ``p:cNvPr`` of a shape element (or None)."""
    for nv in el:
        if isinstance(nv.tag, str) and etree.QName(nv).localname.startswith("nv"):
            return nv.find("p:cNvPr", NS)
    return None


class Workspace:
    def __init__(self, pkg: Package):
        self.base = pkg
        self.parts: dict[str, bytes] = dict(pkg.parts)
        self._trees: dict[str, etree._Element] = {}
        self._dirty: set[str] = set()

    # -- raw parts ------------------------------------------------------

    def __contains__(self, part):
        return part in self.parts

    def xml(self, part: str):
        if part not in self._trees:
            if part not in self.parts:
                raise UnknownPartError(f"no part named {part!r}", part=part)
            self._trees[part] = parse_xml(self.parts[part])
        return self._trees[part]

    def touch(self, part: str):
        self._dirty.add(part)

    def put_xml(self, part: str, root, content_type: str | None = None):
        self._trees[part] = root
        self.parts.setdefault(part, b"")
        self._dirty.add(part)
        self._register(part, content_type)

    def put_bytes(self, part: str, data: bytes, content_type: str | None = None):
        self._trees.pop(part, None)
        self._dirty.discard(part)
        self.parts[part] = data
        self._register(part, content_type)

    def remove(self, part: str):
        for name in (part, rels_path_for(part)):
            self.parts.pop(name, None)
            self._trees.pop(name, None)
            self._dirty.discard(name)
        ct = self.xml(CONTENT_TYPES_PART)
        for o in ct.findall(f"{{{CT_NS}}}Override"):
            if o.get("PartName", "").lstrip("/") == part:
                ct.remove(o)
                self.touch(CONTENT_TYPES_PART)

    def _register(self, part: str, content_type: str | None):
        ct = self.xml(CONTENT_TYPES_PART)
        ext = extension(part)
        has_override = any(o.get("PartName", "").lstrip("/") == part for o in ct.iter(f"{{{CT_NS}}}Override"))
        has_default = any(d.get("Extension", "").lower() == ext for d in ct.iter(f"{{{CT_NS}}}Default"))
        if content_type and not has_override:
            el = etree.SubElement(ct, f"{{{CT_NS}}}Override")
            el.set("PartName", "/" + part)
            el.set("ContentType", content_type)
            self.touch(CONTENT_TYPES_PART)
        elif not content_type and not has_override and not has_default and ext in MEDIA_TYPES:
            el = etree.Element(f"{{{CT_NS}}}Default")
            el.set("Extension", ext)
            el.set("ContentType", MEDIA_TYPES[ext])
            ct.insert(0, el)
            self.touch(CONTENT_TYPES_PART)

    def commit(self) -> Package:
        if not self._dirty and set(self.parts) == set(self.base.parts):
            return self.base
        out = {}
        for name, data in self.parts.items():
            out[name] = serialize_xml(self._trees[name]) if name in self._dirty else data
        infos = {n: self.base.zip_info(n) for n in out if self.base.zip_info(n) is not None}
        return Package(out, infos)

    # -- relationships --------------------------------------------------

    def rels_root(self, source: str, create: bool = False):
        path = rels_path_for(source)
        if path not in self.parts:
            if not create:
                return None
            self.put_xml(path, etree.Element(f"{{{PR_NS}}}Relationships", nsmap={None: PR_NS}))
        return self.xml(path)

    def rels(self, source: str) -> list[tuple[str, str, str, bool]]:
        """(rid, type, resolved target, external) for ``source``."""
        root = self.rels_root(source)
        if root is None:
            return []
        out = []
        for r in root.iterfind(f"{{{PR_NS}}}Relationship"):
            external = r.get("TargetMode") == "External"
            target = r.get("Target", "")
            out.append((r.get("Id"), r.get("Type", ""), target if external else resolve_target(source, target),
                        external))
        return out

    def rel_target(self, source: str, rid: str):
        for r, _, target, external in self.rels(source):
            if r == rid:
                return target, external
        return None, False

    def related(self, source: str, type_name: str) -> list[str]:
        return [t for _, rtype, t, ext in self.rels(source) if rtype.endswith("/" + type_name) and not ext]

    def add_rel(self, source: str, type_name: str, target: str, external: bool = False) -> str:
        """Relationship id from ``source`` to ``target``, reusing an identical one."""
        rtype = RT.get(type_name, type_name)
        for rid, t, resolved, ext in self.rels(source):
            if t == rtype and resolved == target and ext == external:
                return rid
        root = self.rels_root(source, create=True)
        used = {r.get("Id") for r in root}
        n = 1
        while f"rId{n}" in used:
            n += 1
        el = etree.SubElement(root, f"{{{PR_NS}}}Relationship")
        el.set("Id", f"rId{n}")
        el.set("Type", rtype)
        el.set("Target", target if external else relative_target(source, target))
        if external:
            el.set("TargetMode", "External")
        self.touch(rels_path_for(source))
        return f"rId{n}"

    def drop_rel(self, source: str, rid: str):
        root = self.rels_root(source)
        if root is None:
            return
        for r in root.findall(f"{{{PR_NS}}}Relationship"):
            if r.get("Id") == rid:
                root.remove(r)
                self.touch(rels_path_for(source))

    def referrers(self, part: str) -> list[str]:
        """Source parts holding an internal relationship to ``part``."""
        out = []
        for name in list(self.parts):
            src = source_for_rels(name)
            if src is None:
                continue
            if any(t == part and not ext for _, _, t, ext in self.rels(src)):
                out.append(src)
        return out

    # -- presentation structure -----------------------------------------

    @property
    def pres_part(self) -> str:
        targets = self.related("", "officeDocument")
        if not targets or targets[0] not in self.parts:
            raise MalformedDeckError("package has no presentation part")
        return targets[0]

    def slide_list(self):
        """(sldId element, slide part) pairs in presentation order."""
        pres = self.xml(self.pres_part)
        out = []
        for sid in pres.iterfind("p:sldIdLst/p:sldId", NS):
            target, _ = self.rel_target(self.pres_part, sid.get(q("r", "id")))
            out.append((sid, target))
        return out

    def slide_count(self) -> int:
        return len(self.slide_list())

    def slide_part(self, number) -> str:
        slides = self.slide_list()
        if not isinstance(number, int) or isinstance(number, bool) or not 1 <= number <= len(slides):
            raise InvalidParameterError(f"slide {number!r} is out of range (deck has {len(slides)} slides)",
                                        slide=number)
        return slides[number - 1][1]

    def slide(self, number):
        part = self.slide_part(number)
        return part, self.xml(part)

    def layout_of(self, slide_part: str) -> str | None:
        return next(iter(self.related(slide_part, "slideLayout")), None)

    def master_of(self, layout_part: str | None) -> str | None:
        if layout_part is None:
            return None
        return next(iter(self.related(layout_part, "slideMaster")), None)

    def theme_of(self, master_part: str | None) -> str | None:
        if master_part is None:
            return None
        return next(iter(self.related(master_part, "theme")), None)

    def masters(self) -> list[str]:
        pres = self.xml(self.pres_part)
        out = []
        for mid in pres.iterfind("p:sldMasterIdLst/p:sldMasterId", NS):
            target, _ = self.rel_target(self.pres_part, mid.get(q("r", "id")))
            if target:
                out.append(target)
        return out

    def layouts(self) -> list[tuple[str, str]]:
        """(layout name, part) across all masters, in master order."""
        out = []
        for master in self.masters():
            for part in self.related(master, "slideLayout"):
                root = self.xml(part)
                cs = root.find("p:cSld", NS)
                out.append(((cs.get("name") if cs is not None else "") or posixpath.basename(part), part))
        return out

    def unused_name(self, pattern: str) -> str:
        """First ``pattern.format(n)`` (n >= 1) not already a part."""
        n = 1
        while pattern.format(n) in self.parts:
            n += 1
        return pattern.format(n)
