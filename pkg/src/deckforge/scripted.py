"""Deterministic stand-in models for offline demos and cassette recording.

``OracleEditor`` answers agent calls with known-good edits for the fixture
cases.  ``HeuristicJudge`` scores from the evidence in the judge prompt (diff
size for IF, SSIM of the attached screenshot pairs for VQ).  Neither is meant
to approximate a real model's judgement; they exist so the whole pipeline can
be exercised, recorded and replayed without network access.
"""

from __future__ import annotations

import io
import json
import re

from PIL import Image

from .agent import heuristic_route
from .edit import EditProgram, PatchSet
from .gateway import ModelRequest
from .visual import ssim

_FENCED = re.compile(r"```json\n(.*?)\n```", re.S)


def fixture_references() -> dict[str, EditProgram | PatchSet]:
    """Instruction -> reference edit for the six fixture cases."""
    from .fixtures import _theme_flip_builder, case_definitions

    refs = {}
    for _cid, _cats, _types, _tags, instruction, _make, program in case_definitions():
        if program is None:
            dark = _theme_flip_builder(True).build()
            part = "ppt/theme/theme1.xml"
            program = PatchSet([{"part": part, "action": "replace-part",
                                 "payload": dark.parts[part].decode("utf-8")}], "theme swap")
        refs[instruction] = program
    return refs


def _snapshot_from_prompt(text: str) -> dict:
    for block in _FENCED.findall(text):
        try:
            doc = json.loads(block)
        except json.JSONDecodeError:
            continue
        if isinstance(doc, dict) and "slides" in doc:
            return doc
    return {"slides": []}


class OracleEditor:
    """Router, planner, synthesizer and verifier answers for known instructions.

    ``verdict`` is "pass", "fail", or "fail-then-pass" (fails the first
    verification this instance answers, passes afterwards).
    """

    def __init__(self, references: dict | None = None, verdict: str = "pass"):
        self.references = references if references is not None else fixture_references()
        self.verdict = verdict
        self.verifications = 0

    def reference(self, req: ModelRequest):
        hits = [(len(k), v) for k, v in self.references.items() if k in req.user_prompt]
        return max(hits, key=lambda t: t[0])[1] if hits else None

    def __call__(self, req: ModelRequest, turns: list[dict]) -> str:
        ref = self.reference(req)
        if req.tag == "router":
            doc = _snapshot_from_prompt(req.user_prompt)
            instr = req.user_prompt.rsplit("Edit request:\n", 1)[-1].split("\n\nReply", 1)[0]
            decision = heuristic_route(instr, doc)
            path = "xml" if isinstance(ref, PatchSet) else "programmatic" if ref is not None else decision.path
            return json.dumps({"path": path, "target_slides": decision.target_slides or [1],
                               "rationale": "reference edit path"})
        if req.tag == "plan":
            n = max(1, len(_snapshot_from_prompt(req.user_prompt).get("slides", [])))
            return json.dumps({"rewritten_instruction": "Apply the request exactly as written.",
                               "objectives": [{"slide": s, "objective": "apply the request"} for s in range(1, n + 1)]})
        if req.tag in ("synthesize-program", "synthesize-xml"):
            if ref is None:
                return json.dumps({"ops": []} if req.tag == "synthesize-program" else {"patches": []})
            return json.dumps(ref.to_dict(), sort_keys=True)
        if req.tag == "verify":
            failing = self.verdict == "fail" or (self.verdict == "fail-then-pass" and not self.verifications)
            self.verifications += 1
            if failing:
                return json.dumps({"pass": False, "issues": [{"slide": 1, "description": "the request is not met"}],
                                   "suggestions": "revisit the edit"})
            return json.dumps({"pass": True, "issues": [], "suggestions": ""})
        raise KeyError(f"OracleEditor has no answer for {req.tag!r}")


def _if_score(diff_text: str) -> tuple[int, str]:
    diff_text = diff_text.strip()
    if diff_text.startswith("No differences"):
        return 5, "The diff shows no differences from the ground truth."
    m = re.search(r"\((\d+) differences", diff_text)
    if m:
        n = int(m.group(1))
    else:  # unified xml diff: count changed lines
        n = sum(1 for line in diff_text.splitlines()
                if line[:1] in "+-" and not line.startswith(("+++", "---")))
    score = 4 if n <= 1 else 3 if n <= 5 else 2 if n <= 20 else 1
    return score, f"The prediction still differs from the ground truth in {n} places."


def _vq_score(value: float) -> int:
    for bound, score in ((0.995, 5), (0.98, 4), (0.95, 3), (0.9, 2), (0.8, 1)):
        if value >= bound:
            return score
    return 0


class HeuristicJudge:
    """Style-target, IF and VQ answers computed from the request contents."""

    def __call__(self, req: ModelRequest, turns: list[dict]) -> str:
        if req.tag == "style-target":
            blocks = _FENCED.findall(req.user_prompt)
            if len(blocks) >= 2 and blocks[0] == blocks[1]:
                text = "No changes are required; the ground truth matches the original."
            else:
                text = "Edit the original deck until it matches the ground truth summary field by field."
            return json.dumps({"overview_instructions": text, "notes": None})
        if req.tag == "judge-if":
            diff = req.user_prompt.split("--- SMART DIFF ANALYSIS (Prediction vs Ground Truth) ---", 1)[-1]
            diff = diff.split("CRITICAL COMPARISON INSTRUCTIONS:", 1)[0]
            score, reason = _if_score(diff)
            return json.dumps({"instruction_following_score": score, "instruction_following_reason": reason})
        if req.tag == "judge-vq":
            gt = {im.label.split("Slide ")[-1]: im for im in req.images if im.label.startswith("Ground Truth")}
            pred = {im.label.split("Slide ")[-1]: im for im in req.images if im.label.startswith("Prediction")}
            values = []
            for k in sorted(set(gt) | set(pred), key=int):
                if k in gt and k in pred:
                    with Image.open(io.BytesIO(gt[k].data)) as a, Image.open(io.BytesIO(pred[k].data)) as b:
                        values.append(ssim(a, b))
                else:
                    values.append(0.0)
            worst = min(values) if values else 1.0
            return json.dumps({"visual_quality_score": _vq_score(worst),
                               "visual_quality_reason": f"Lowest slide similarity in this batch is {worst:.3f}."})
        raise KeyError(f"HeuristicJudge has no answer for {req.tag!r}")


class ScriptedModels:
    """Dispatch judge tags to ``judge`` and everything else to ``editor``."""

    JUDGE_TAGS = ("style-target", "judge-if", "judge-vq")

    def __init__(self, editor=None, judge=None):
        self.editor = editor or OracleEditor()
        self.judge = judge or HeuristicJudge()

    def __call__(self, req: ModelRequest, turns: list[dict]) -> str:
        return (self.judge if req.tag in self.JUDGE_TAGS else self.editor)(req, turns)
