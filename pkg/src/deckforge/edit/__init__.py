"""Transactional editing: declarative edit programs and raw XML patch sets."""

from .ops import OPS
from .patch import PatchSet, apply_xml_patch
from .program import ApplyOutcome, EditProgram, apply_edit_program
from .schemas import edit_program_schema, patch_set_schema
from .target import ElementAddress, TargetSelector, resolve_target

__all__ = [
    "OPS", "ApplyOutcome", "EditProgram", "ElementAddress", "PatchSet", "TargetSelector",
    "apply_edit_program", "apply_xml_patch", "edit_program_schema", "patch_set_schema", "resolve_target",
]
