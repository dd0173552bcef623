"""EditProgram: an ordered list of declarative ops applied as one transaction."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..deck import parse_deck
from ..errors import DeckforgeError, InvalidParameterError
from ..package import Package, ValidationReport, validate_package
from .ops import OPS
from .schemas import first_error, op_validator
from .workspace import Workspace


@dataclass
class ApplyOutcome:
    ok: bool
    package: Package
    report: ValidationReport
    failed_step: dict | None = None  # {"index", "kind", "message"}

    def to_dict(self) -> dict:
        return {"ok": self.ok, "report": self.report.to_dict(), "failed_step": self.failed_step}


@dataclass
class EditProgram:
    ops: list[dict] = field(default_factory=list)
    provenance: str = ""

    @classmethod
    def from_dict(cls, data) -> "EditProgram":
        if isinstance(data, list):
            data = {"ops": data}
        if not isinstance(data, dict) or not isinstance(data.get("ops"), list):
            raise InvalidParameterError("an edit program is an object with an 'ops' list")
        return cls(list(data["ops"]), str(data.get("provenance", "")))

    @classmethod
    def from_json(cls, text) -> "EditProgram":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "EditProgram":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def to_dict(self) -> dict:
        out = {"ops": self.ops}
        if self.provenance:
            out["provenance"] = self.provenance
        return out

    def categories(self) -> list[str]:
        return sorted({OPS[o["op"]].category for o in self.ops if isinstance(o, dict) and o.get("op") in OPS})

    def check(self) -> list[str]:
        """Schema problems, one message per failing op (empty when valid)."""
        problems = []
        for i, op in enumerate(self.ops):
            msg = check_op(op)
            if msg:
                problems.append(f"ops/{i}: {msg}")
        return problems


def check_op(op) -> str | None:
    if not isinstance(op, dict) or op.get("op") not in OPS:
        name = op.get("op") if isinstance(op, dict) else op
        return f"unknown op {name!r}; expected one of {sorted(OPS)}"
    return first_error(op_validator(op["op"]), op)


def failure(pkg: Package, index: int, err, report: ValidationReport | None = None) -> ApplyOutcome:
    if isinstance(err, DeckforgeError):
        step = {"index": index, "kind": err.kind, "message": err.message}
    else:
        step = {"index": index, "kind": "error", "message": str(err)}
    return ApplyOutcome(False, pkg, report if report is not None else ValidationReport(), step)


def finish(original: Package, edited: Package, n_steps: int) -> ApplyOutcome:
    """Validate and re-parse the edited package; roll back on any problem."""
    if edited is original:
        return ApplyOutcome(True, original, validate_package(original))
    report = validate_package(edited)
    if not report.ok:
        step = {"index": n_steps, "kind": "validation-failed", "message": report.summary()}
        return ApplyOutcome(False, original, report, step)
    try:
        parse_deck(edited)
    except DeckforgeError as err:
        return failure(original, n_steps, err, report)
    return ApplyOutcome(True, edited, report)


def apply_edit_program(pkg: Package, prog) -> ApplyOutcome:
    """Apply every op in order; any failure returns the input package untouched."""
    if not isinstance(prog, EditProgram):
        try:
            prog = EditProgram.from_dict(prog)
        except DeckforgeError as err:
            return failure(pkg, 0, err)
    ws = Workspace(pkg)
    for i, op in enumerate(prog.ops):
        msg = check_op(op)
        if msg:
            return failure(pkg, i, InvalidParameterError(msg))
        try:
            OPS[op["op"]].run(ws, {k: v for k, v in op.items() if k != "op"})
        except DeckforgeError as err:
            return failure(pkg, i, err)
        except (ValueError, TypeError, KeyError, IndexError, AttributeError) as err:
            # Defensive: a malformed deck can surface as a plain lookup error.
            return failure(pkg, i, err)
    return finish(pkg, ws.commit(), len(prog.ops))
