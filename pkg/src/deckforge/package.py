"""OOXML package container: ZIP of named parts plus content types and relationships.

A :class:`Package` is immutable. ``write_part`` and ``delete_part`` return new
packages sharing the unchanged part bytes, so a program that touches one part
can be checked against its input with a per-part byte comparison.
"""

from __future__ import annotations

import io
import mimetypes
import os
import posixpath
import zipfile
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping
from urllib.parse import unquote

from lxml import etree

from .errors import (
    MissingContentTypesError,
    PackageInvalidError,
    PackageIOError,
    UnknownPartError,
    UnreadableZipError,
)

CONTENT_TYPES_PART = "[Content_Types].xml"
CT_NS = "http://schemas.openxmlformats.org/package/2006/content-types"
PR_NS = "http://schemas.openxmlformats.org/package/2006/relationships"

ISSUE_KINDS = ("malformed-xml", "dangling-relationship", "missing-content-type", "unreadable-zip")

# Fixed timestamp for entries that have no source ZipInfo.
_EPOCH = (1980, 1, 1, 0, 0, 0)

MEDIA_TYPES = {
    "png": "image/png",
    "jpg": "image/jpeg",
    "jpeg": "image/jpeg",
    "gif": "image/gif",
    "bmp": "image/bmp",
    "tif": "image/tiff",
    "tiff": "image/tiff",
    "emf": "image/x-emf",
    "wmf": "image/x-wmf",
    "svg": "image/svg+xml",
    "mp4": "video/mp4",
    "mp3": "audio/mpeg",
    "wav": "audio/wav",
    "xlsx": "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet",
    "bin": "application/vnd.openxmlformats-officedocument.oleObject",
    "rels": "application/vnd.openxmlformats-package.relationships+xml",
    "xml": "application/xml",
}


@dataclass(frozen=True)
class Relationship:
    rid: str
    type: str
    target: str  # resolved part path, or the raw URI when external
    external: bool = False


@dataclass(frozen=True)
class Issue:
    part: str
    kind: str
    message: str

    def to_dict(self):
        return {"part": self.part, "kind": self.kind, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.issues

    def to_dict(self):
        return {"ok": self.ok, "issues": [i.to_dict() for i in self.issues]}

    def summary(self) -> str:
        if self.ok:
            return "package valid"
        return "; ".join(f"{i.part}: {i.kind}: {i.message}" for i in self.issues)


def rels_path_for(part: str) -> str:
    """``ppt/slides/slide1.xml`` -> ``ppt/slides/_rels/slide1.xml.rels``; ``""`` -> ``_rels/.rels``."""
    directory, name = posixpath.split(part)
    return posixpath.join(directory, "_rels", name + ".rels")


def source_for_rels(rels_part: str) -> str | None:
    directory, name = posixpath.split(rels_part)
    if posixpath.basename(directory) != "_rels" or not name.endswith(".rels"):
        return None
    return posixpath.join(posixpath.dirname(directory), name[: -len(".rels")])


def resolve_target(source: str, target: str) -> str:
    target = unquote(target)
    if target.startswith("/"):
        return posixpath.normpath(target.lstrip("/"))
    base = posixpath.dirname(source)
    return posixpath.normpath(posixpath.join(base, target))


def relative_target(source: str, part: str) -> str:
    """Relationship target string for ``part`` as seen from ``source``."""
    return posixpath.relpath(part, posixpath.dirname(source) or ".")


def extension(part: str) -> str:
    base = posixpath.basename(part)
    return base.rsplit(".", 1)[1].lower() if "." in base else ""


def is_xml_part(name: str, content_type: str | None = None) -> bool:
    if name.endswith((".xml", ".rels", ".vml")):
        return True
    return bool(content_type) and (content_type.endswith("+xml") or content_type.endswith("/xml"))


def parse_xml(data: bytes) -> etree._Element:
    parser = etree.XMLParser(resolve_entities=False, no_network=True, huge_tree=True)
    return etree.fromstring(data, parser)


class Package:
    """Immutable mapping of part path to bytes, in archive order."""

    def __init__(self, parts: Mapping[str, bytes], zip_infos: Mapping[str, zipfile.ZipInfo] | None = None):
        self._parts = dict(parts)
        self._zip_infos = dict(zip_infos or {})

    @property
    def parts(self) -> Mapping[str, bytes]:
        return MappingProxyType(self._parts)

    def part_names(self) -> list[str]:
        return list(self._parts)

    def __contains__(self, part: str) -> bool:
        return part in self._parts

    def __eq__(self, other):
        if not isinstance(other, Package):
            return NotImplemented
        return list(self._parts.items()) == list(other._parts.items())

    def __hash__(self):
        return hash(tuple(self._parts.items()))

    def __repr__(self):
        return f"Package({len(self._parts)} parts)"

    @cached_property
    def content_types(self) -> dict:
        """``{"defaults": {ext: mime}, "overrides": {part: mime}}``."""
        defaults, overrides = {}, {}
        data = self._parts.get(CONTENT_TYPES_PART)
        if data is None:
            return {"defaults": defaults, "overrides": overrides}
        try:
            root = parse_xml(data)
        except etree.XMLSyntaxError:
            return {"defaults": defaults, "overrides": overrides}
        for el in root:
            if not isinstance(el.tag, str):
                continue
            local = etree.QName(el).localname
            if local == "Default":
                defaults[el.get("Extension", "").lower()] = el.get("ContentType", "")
            elif local == "Override":
                overrides[el.get("PartName", "").lstrip("/")] = el.get("ContentType", "")
        return {"defaults": defaults, "overrides": overrides}

    def content_type(self, part: str) -> str | None:
        ct = self.content_types
        if part in ct["overrides"]:
            return ct["overrides"][part]
        return ct["defaults"].get(extension(part))

    @cached_property
    def relationships(self) -> dict[str, dict[str, Relationship]]:
        """Per source part (``""`` for the package root): rId -> Relationship."""
        graph: dict[str, dict[str, Relationship]] = {}
        for name, data in self._parts.items():
            source = source_for_rels(name)
            if source is None:
                continue
            try:
                root = parse_xml(data)
            except etree.XMLSyntaxError:
                continue
            rels = {}
            for el in root:
                if not isinstance(el.tag, str) or etree.QName(el).localname != "Relationship":
                    continue
                external = el.get("TargetMode") == "External"
                raw = el.get("Target", "")
                target = raw if external else resolve_target(source, raw)
                rels[el.get("Id", "")] = Relationship(el.get("Id", ""), el.get("Type", ""), target, external)
            graph[source if source != "." else ""] = rels
        return graph

    def rels_of(self, part: str) -> dict[str, Relationship]:
        return self.relationships.get(part, {})

    def related(self, part: str, rel_type_suffix: str) -> list[Relationship]:
        return [r for r in self.rels_of(part).values() if r.type.endswith("/" + rel_type_suffix)]

    def zip_info(self, part: str) -> zipfile.ZipInfo | None:
        return self._zip_infos.get(part)

    # Internal constructors used by write/delete.
    def _replace(self, parts: dict[str, bytes]) -> "Package":
        infos = {k: v for k, v in self._zip_infos.items() if k in parts}
        return Package(parts, infos)


def open_package(source) -> Package:
    """Load every ZIP entry of a ``.pptx`` file (path, bytes, or binary file object)."""
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    try:
        with zipfile.ZipFile(source) as zf:
            parts, infos = {}, {}
            for info in zf.infolist():
                if info.is_dir():
                    continue
                parts[info.filename] = zf.read(info)
                infos[info.filename] = info
    except FileNotFoundError:
        raise
    except (zipfile.BadZipFile, zipfile.LargeZipFile, EOFError, OSError, ValueError) as exc:
        raise UnreadableZipError(f"cannot read ZIP archive: {exc}") from exc
    if CONTENT_TYPES_PART not in parts:
        raise MissingContentTypesError(f"archive has no {CONTENT_TYPES_PART}")
    return Package(parts, infos)


def read_part(pkg: Package, part_path: str) -> bytes:
    try:
        return pkg.parts[part_path]
    except KeyError:
        raise UnknownPartError(f"no part named {part_path!r}", part=part_path) from None


def _content_types_with(ct_bytes: bytes, part: str, content_type: str | None) -> bytes | None:
    """Return updated ``[Content_Types].xml`` bytes, or None when nothing changes."""
    root = parse_xml(ct_bytes)
    ext = extension(part)
    defaults = {el.get("Extension", "").lower(): el for el in root.findall(f"{{{CT_NS}}}Default")}
    overrides = {el.get("PartName", "").lstrip("/"): el for el in root.findall(f"{{{CT_NS}}}Override")}
    if content_type is None:
        if part in overrides or ext in defaults:
            return None
        guess = MEDIA_TYPES.get(ext) or mimetypes.guess_type(part)[0]
        if guess is None or ext in ("xml",):
            return None
        el = etree.Element(f"{{{CT_NS}}}Default", Extension=ext, ContentType=guess)
        last_default = root.findall(f"{{{CT_NS}}}Default")
        if last_default:
            last_default[-1].addnext(el)
        else:
            root.insert(0, el)
    else:
        if part in overrides:
            if overrides[part].get("ContentType") == content_type:
                return None
            overrides[part].set("ContentType", content_type)
        elif ext in defaults and defaults[ext].get("ContentType") == content_type:
            return None
        elif ext in MEDIA_TYPES and MEDIA_TYPES[ext] == content_type and ext not in defaults:
            el = etree.Element(f"{{{CT_NS}}}Default", Extension=ext, ContentType=content_type)
            last_default = root.findall(f"{{{CT_NS}}}Default")
            if last_default:
                last_default[-1].addnext(el)
            else:
                root.insert(0, el)
        else:
            root.append(etree.Element(f"{{{CT_NS}}}Override", PartName="/" + part, ContentType=content_type))
    return serialize_xml(root)


def serialize_xml(root: etree._Element, standalone: bool | None = True) -> bytes:
    return etree.tostring(root, xml_declaration=True, encoding="UTF-8", standalone=standalone)


def write_part(pkg: Package, part_path: str, data: bytes, content_type: str | None = None) -> Package:
    """Create or replace one part.

    A new part whose type is not yet declared gets a content-type entry:
    ``content_type`` as an override when given, else a Default for a known
    media extension.
    """
    parts = dict(pkg.parts)
    parts[part_path] = bytes(data)
    if part_path != CONTENT_TYPES_PART and CONTENT_TYPES_PART in parts:
        needs_type = content_type is not None or pkg.content_type(part_path) is None
        if needs_type:
            updated = _content_types_with(parts[CONTENT_TYPES_PART], part_path, content_type)
            if updated is not None:
                parts[CONTENT_TYPES_PART] = updated
    return pkg._replace(parts)


def delete_part(pkg: Package, part_path: str) -> Package:
    """Remove a part, its relationship part, and its content-type override."""
    if part_path not in pkg:
        raise UnknownPartError(f"no part named {part_path!r}", part=part_path)
    parts = dict(pkg.parts)
    del parts[part_path]
    parts.pop(rels_path_for(part_path), None)
    ct = parts.get(CONTENT_TYPES_PART)
    if ct is not None:
        root = parse_xml(ct)
        hit = [el for el in root.findall(f"{{{CT_NS}}}Override") if el.get("PartName", "").lstrip("/") == part_path]
        for el in hit:
            root.remove(el)
        if hit:
            parts[CONTENT_TYPES_PART] = serialize_xml(root)
    return pkg._replace(parts)


def validate_package(pkg: Package) -> ValidationReport:
    """Check well-formedness, relationship targets and content-type coverage."""
    issues = []
    for name, data in pkg.parts.items():
        ctype = pkg.content_type(name)
        if ctype is None and name != CONTENT_TYPES_PART:
            issues.append(Issue(name, "missing-content-type", "no Default or Override declares a type"))
        if is_xml_part(name, ctype):
            try:
                parse_xml(data)
            except etree.XMLSyntaxError as exc:
                issues.append(Issue(name, "malformed-xml", str(exc)))
    for source, rels in pkg.relationships.items():
        rels_name = rels_path_for(source) if source else "_rels/.rels"
        if source and source not in pkg:
            issues.append(Issue(rels_name, "dangling-relationship", f"source part {source} does not exist"))
        for rel in rels.values():
            if not rel.external and rel.target not in pkg:
                issues.append(Issue(rels_name, "dangling-relationship", f"{rel.rid} -> {rel.target} (missing)"))
    order = {k: i for i, k in enumerate(ISSUE_KINDS)}
    issues.sort(key=lambda i: (i.part, order[i.kind], i.message))
    return ValidationReport(tuple(issues))


def validate_file(path) -> ValidationReport:
    """Like :func:`validate_package` but reports unreadable archives as issues."""
    try:
        pkg = open_package(path)
    except UnreadableZipError as exc:
        return ValidationReport((Issue("", "unreadable-zip", exc.message),))
    except MissingContentTypesError as exc:
        return ValidationReport((Issue(CONTENT_TYPES_PART, "missing-content-type", exc.message),))
    return validate_package(pkg)


def package_bytes(pkg: Package) -> bytes:
    buf = io.BytesIO()
    _write_zip(pkg, buf)
    return buf.getvalue()


def _write_zip(pkg: Package, fileobj):
    with zipfile.ZipFile(fileobj, "w") as zf:
        for name, data in pkg.parts.items():
            src = pkg.zip_info(name)
            info = zipfile.ZipInfo(name, date_time=src.date_time if src else _EPOCH)
            info.compress_type = src.compress_type if src else zipfile.ZIP_DEFLATED
            if src is not None:
                info.external_attr = src.external_attr
                info.create_system = src.create_system
            zf.writestr(info, data)


def save_package(pkg: Package, path, force: bool = False) -> None:
    """Write ``pkg`` to ``path``; refuses invalid packages unless ``force``."""
    if not force:
        report = validate_package(pkg)
        if not report.ok:
            raise PackageInvalidError(f"refusing to save invalid package: {report.summary()}", report)
    try:
        with open(path, "wb") as fh:
            _write_zip(pkg, fh)
    except OSError as exc:
        raise PackageIOError(f"cannot write {path}: {exc}", path=os.fspath(path)) from exc


def changed_parts(a: Package, b: Package) -> list[str]:
    """Names of parts added, removed, or whose bytes differ."""
    names: Iterable[str] = list(dict.fromkeys(list(a.parts) + list(b.parts)))
    return [n for n in names if a.parts.get(n) != b.parts.get(n)]
