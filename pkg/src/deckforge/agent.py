"""Route, synthesize, apply, verify: the bounded editing loop.

All model traffic goes through a :class:`~deckforge.gateway.ModelGateway`, so
a replay cassette makes a run fully deterministic.  When no gateway is given
(or the router call fails) routing falls back to a keyword heuristic.
"""

from __future__ import annotations

import hashlib
import json
import re
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import prompts
from .context import DEFAULT_SNAPSHOT_CHARS, snapshot_text
from .deck import parse_deck, snapshot
from .edit import EditProgram, PatchSet, apply_edit_program, apply_xml_patch, edit_program_schema, patch_set_schema
from .edit.program import ApplyOutcome
from .errors import DeckforgeError, GatewayError, InvalidParameterError, SchemaViolationError
from .gateway import ImageInput, ModelGateway, ModelRequest
from .package import Package, is_xml_part, open_package, package_bytes, save_package, validate_package
from .visual import DEFAULT_THRESHOLD, RenderConfig, render_deck, screen

PATHS = ("programmatic", "xml")

# Keyword classes for the fallback router.  Matching any of them sends the
# edit down the xml path regardless of how many slides it touches.
LAYOUT_WORDS = ("layout", "align", "overlap", "position", "resize", "spacing", "margin", "legend", "chart",
                "table", "arrange", "distribute", "size", "inch", "grid")
STYLE_WORDS = ("theme", "master", "font", "color", "colour", "background", "style", "dark", "light",
               "palette", "bold", "italic")
STRUCTURE_WORDS = ("reorder", "duplicate", "delete slide", "add slide", "insert slide", "section", "group",
                   "notes", "footer", "header", "transition", "animation", "hyperlink", "link")
THEME_CONTEXT_WORDS = ("theme", "master", "font", "color", "colour", "background", "style", "dark", "palette")
ALL_SLIDES = re.compile(r"\b(every|all|each|entire|whole|throughout)\b", re.I)
SLIDE_REF = re.compile(r"\bslides?\s+(\d+)(?:\s*(?:-|–|to|through)\s*(\d+))?((?:\s*(?:,|and)\s*\d+)*)", re.I)


@dataclass
class RoutingDecision:
    path: str
    target_slides: list[int]
    rationale: str
    source: str = "model"  # model | heuristic | forced

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ContentPlan:
    rewritten_instruction: str
    objectives: list[dict]  # [{"slide": int, "objective": str}]

    def slides(self) -> list[int]:
        return sorted({o["slide"] for o in self.objectives})

    def render(self) -> str:
        lines = [self.rewritten_instruction]
        lines += [f"- slide {o['slide']}: {o['objective']}" for o in self.objectives]
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class VerifierFeedback:
    passed: bool
    issues: list[tuple[int, str]] = field(default_factory=list)
    suggestions: str = ""
    source: str = "model"  # model | validation | synthesis

    def __post_init__(self):
        if self.passed and self.issues:
            raise ValueError("passing feedback cannot carry issues")

    def render(self) -> str:
        lines = ["Problems found in the previous attempt:"]
        lines += [f"- slide {s}: {d}" if s else f"- {d}" for s, d in self.issues]
        if self.suggestions:
            lines.append(f"Suggestions: {self.suggestions}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"pass": self.passed, "issues": [{"slide": s, "description": d} for s, d in self.issues],
                "suggestions": self.suggestions, "source": self.source}


@dataclass
class AgentConfig:
    router_model: str = "router"
    editor_model: str = "editor"
    verifier_model: str = "editor"
    max_iterations: int = 3
    reflection_enabled: bool = True
    forced_path: str | None = None  # "xml" | "programmatic"; None lets the router decide
    allow_reroute: bool = False
    bulk_slide_threshold: int = 5
    snapshot_chars: int = DEFAULT_SNAPSHOT_CHARS
    xml_context_chars: int = 120000
    render: RenderConfig | None = field(default_factory=RenderConfig)  # None sends the verifier no screenshots
    screen_threshold: float = DEFAULT_THRESHOLD
    max_retries: int = 2

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.forced_path in ("prog", "program"):
            self.forced_path = "programmatic"
        if self.forced_path == "hybrid":
            self.forced_path = None
        if self.forced_path not in (None, *PATHS):
            raise ValueError(f"forced_path must be one of {PATHS} or None")

    @classmethod
    def from_dict(cls, data: dict | None) -> "AgentConfig":
        data = dict(data or {})
        if isinstance(data.get("render"), dict):
            data["render"] = RenderConfig.from_dict(data["render"])
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)

    def call_bound(self) -> int:
        """Upper bound on model calls for one run: router and plan once, then synth and verify per iteration."""
        per_call = 1 + self.max_retries
        route_calls = self.max_iterations if self.allow_reroute else 1
        return per_call * (route_calls + 1 + 2 * self.max_iterations)


@dataclass
class Trace:
    instruction: str = ""
    steps: list[dict] = field(default_factory=list)
    result: dict = field(default_factory=dict)

    def add(self, kind: str, started: float, **data):
        self.steps.append({"step": kind, **data, "elapsed_s": round(time.perf_counter() - started, 6)})

    def attempts(self) -> int:
        return sum(1 for s in self.steps if s["step"] == "synthesize")

    def to_dict(self, timing: bool = True) -> dict:
        steps = self.steps if timing else [{k: v for k, v in s.items() if k != "elapsed_s"} for s in self.steps]
        return {"instruction": self.instruction, "steps": steps, "result": self.result}


@dataclass
class AgentResult:
    package: Package
    trace: Trace
    ok: bool  # some iteration produced a validating edit


def _sha(pkg: Package) -> str:
    return hashlib.sha256(package_bytes(pkg)).hexdigest()


# -- routing --------------------------------------------------------------

def mentioned_slides(instruction: str, n_slides: int) -> list[int]:
    found = set()
    for m in SLIDE_REF.finditer(instruction):
        a = int(m.group(1))
        b = int(m.group(2)) if m.group(2) else a
        found.update(range(min(a, b), max(a, b) + 1))
        found.update(int(x) for x in re.findall(r"\d+", m.group(3) or ""))
    return sorted(s for s in found if 1 <= s <= n_slides)


def heuristic_route(instruction: str, snapshot_doc: dict, cfg: AgentConfig | None = None) -> RoutingDecision:
    cfg = cfg or AgentConfig()
    n = len(snapshot_doc.get("slides", []))
    text = instruction.lower()
    named = mentioned_slides(instruction, n)
    targets = named if named and not ALL_SLIDES.search(instruction) else list(range(1, n + 1))
    if not targets:
        targets = [1] if n else []
    hits = [w for w in (*LAYOUT_WORDS, *STYLE_WORDS, *STRUCTURE_WORDS) if re.search(rf"\b{re.escape(w)}", text)]
    if hits:
        return RoutingDecision("xml", targets, f"layout/style/structure keywords: {', '.join(hits[:4])}",
                               "heuristic")
    if len(targets) > cfg.bulk_slide_threshold:
        return RoutingDecision("programmatic", targets,
                               f"content edit over {len(targets)} slides (> {cfg.bulk_slide_threshold})", "heuristic")
    return RoutingDecision("xml", targets, f"content edit over {len(targets)} slide(s)", "heuristic")


def _slide_range_check(n: int, key: str):
    def check(value):
        bad = [s for s in value.get(key, []) if not 1 <= s <= n]
        if bad:
            raise SchemaViolationError(f"{key} refers to slides {bad}, but the deck has slides 1 to {n}", path=key)
    return check


ROUTE_SCHEMA = {
    "type": "object",
    "properties": {
        "path": {"enum": list(PATHS)},
        "target_slides": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "rationale": {"type": "string"},
    },
    "required": ["path", "target_slides", "rationale"],
}

PLAN_SCHEMA = {
    "type": "object",
    "properties": {
        "rewritten_instruction": {"type": "string", "minLength": 1},
        "objectives": {
            "type": "array", "minItems": 1,
            "items": {"type": "object",
                      "properties": {"slide": {"type": "integer", "minimum": 1}, "objective": {"type": "string"}},
                      "required": ["slide", "objective"]},
        },
    },
    "required": ["rewritten_instruction", "objectives"],
}

VERIFY_SCHEMA = {
    "type": "object",
    "properties": {
        "pass": {"type": "boolean"},
        "issues": {"type": "array", "items": {
            "type": "object",
            "properties": {"slide": {"type": "integer", "minimum": 0}, "description": {"type": "string"}},
            "required": ["slide", "description"]}},
        "suggestions": {"type": "string"},
    },
    "required": ["pass", "issues"],
}

SYSTEM = "You are a careful presentation-editing assistant. Answer with JSON only."


def _request(model: str, tag: str, user: str, schema: dict, schema_id: str, cfg: AgentConfig,
             images=()) -> ModelRequest:
    return ModelRequest(model, SYSTEM, user, list(images), schema, schema_id, max_retries=cfg.max_retries, tag=tag)


def route(instruction: str, snapshot_doc: dict, gateway: ModelGateway | None = None, cfg: AgentConfig | None = None,
          screenshots=(), trace: Trace | None = None) -> RoutingDecision:
    """Model routing with a deterministic fallback; never raises."""
    cfg = cfg or AgentConfig()
    started = time.perf_counter()
    if not snapshot_doc.get("slides"):
        raise InvalidParameterError("cannot route an edit on a deck without slides")
    if cfg.forced_path:
        decision = heuristic_route(instruction, snapshot_doc, cfg)
        decision = RoutingDecision(cfg.forced_path, decision.target_slides, "path forced by configuration", "forced")
        if trace is not None:
            trace.add("route", started, decision=decision.to_dict())
        return decision
    n = len(snapshot_doc["slides"])
    fps, error = [], None
    if gateway is not None:
        user = prompts.render("router", snapshot_json=snapshot_text(snapshot_doc, cfg.snapshot_chars),
                              instruction=instruction)
        req = _request(cfg.router_model, "router", user, ROUTE_SCHEMA, "route-v1", cfg, screenshots)
        try:
            resp = gateway.complete(req, _slide_range_check(n, "target_slides"))
            v = resp.parsed
            decision = RoutingDecision(v["path"], sorted(set(v["target_slides"])), v["rationale"], "model")
            if trace is not None:
                trace.add("route", started, decision=decision.to_dict(), fingerprints=resp.fingerprints)
            return decision
        except GatewayError as err:
            error = err.to_dict()
    decision = heuristic_route(instruction, snapshot_doc, cfg)
    if trace is not None:
        trace.add("route", started, decision=decision.to_dict(), fingerprints=fps, model_error=error)
    return decision


def plan_content(instruction: str, snapshot_doc: dict, gateway: ModelGateway, cfg: AgentConfig | None = None,
                 trace: Trace | None = None) -> ContentPlan:
    cfg = cfg or AgentConfig()
    started = time.perf_counter()
    n = len(snapshot_doc.get("slides", []))
    user = prompts.render("plan", snapshot_json=snapshot_text(snapshot_doc, cfg.snapshot_chars),
                          instruction=instruction, slide_count=n)
    check = _slide_range_check(n, "slide")

    def validator(value):
        for o in value["objectives"]:
            check({"slide": [o["slide"]]})

    resp = gateway.complete(_request(cfg.editor_model, "plan", user, PLAN_SCHEMA, "plan-v1", cfg), validator)
    plan = ContentPlan(resp.parsed["rewritten_instruction"], list(resp.parsed["objectives"]))
    if trace is not None:
        trace.add("plan", started, plan=plan.to_dict(), fingerprints=resp.fingerprints, attempts=resp.attempts)
    return plan


# -- synthesis ------------------------------------------------------------

def relevant_parts(pkg: Package, target_slides: list[int], instruction: str) -> list[str]:
    """Slide parts for the targets, plus layout/master/theme when styling words appear."""
    deck = parse_deck(pkg)
    parts: list[str] = []

    def add(p):
        if p and p in pkg and p not in parts and is_xml_part(p, pkg.content_type(p)):
            parts.append(p)

    styling = any(w in instruction.lower() for w in THEME_CONTEXT_WORDS)
    for s in deck.slides:
        if s.slide_number in target_slides:
            add(s.part)
    if styling:
        for s in deck.slides:
            if s.slide_number not in target_slides:
                continue
            for lay in pkg.related(s.part, "slideLayout"):
                for master in pkg.related(lay.target, "slideMaster"):
                    for theme in pkg.related(master.target, "theme"):
                        add(theme.target)
                    add(master.target)
                add(lay.target)
    return parts


def xml_context(pkg: Package, parts: list[str], budget: int) -> str:
    blocks, used, omitted = [], 0, []
    for p in parts:
        text = pkg.parts[p].decode("utf-8", "replace")
        if used + len(text) > budget:
            omitted.append(p)
            continue
        used += len(text)
        blocks.append(f"=== {p} ===\n{text}")
    header = "All parts: " + ", ".join(pkg.part_names())
    if omitted:
        header += "\nOmitted for length: " + ", ".join(omitted)
    return header + "\n\n" + "\n\n".join(blocks)


def _program_validator(value):
    problems = EditProgram.from_dict(value).check()
    if problems:
        raise SchemaViolationError(problems[0], path=problems[0].split(":")[0])


def synthesize_edit(instruction: str, path: str, snapshot_doc: dict, pkg: Package, gateway: ModelGateway,
                    cfg: AgentConfig | None = None, plan: ContentPlan | None = None,
                    feedback: VerifierFeedback | None = None, target_slides: list[int] | None = None,
                    trace: Trace | None = None) -> EditProgram | PatchSet:
    cfg = cfg or AgentConfig()
    if not instruction or not instruction.strip():
        raise InvalidParameterError("empty instruction")
    if path not in PATHS:
        raise InvalidParameterError(f"unknown path {path!r}")
    started = time.perf_counter()
    fb = ("\n" + feedback.render() + "\n") if feedback is not None and not feedback.passed else ""
    snap = snapshot_text(snapshot_doc, cfg.snapshot_chars)
    if path == "programmatic":
        user = prompts.render("synth_program", program_schema=json.dumps(edit_program_schema(), sort_keys=True),
                              snapshot_json=snap, plan=plan.render() if plan else "(no plan)",
                              instruction=instruction, feedback=fb)
        req = _request(cfg.editor_model, "synthesize-program", user, edit_program_schema(), "edit-program-v1", cfg)
        resp = gateway.complete(req, _program_validator)
        edit = EditProgram.from_dict(resp.parsed)
    else:
        targets = target_slides or list(range(1, len(snapshot_doc.get("slides", [])) + 1))
        ctx = xml_context(pkg, relevant_parts(pkg, targets, instruction), cfg.xml_context_chars)
        user = prompts.render("synth_xml", patch_schema=json.dumps(patch_set_schema(), sort_keys=True),
                              snapshot_json=snap, xml_parts=ctx, instruction=instruction, feedback=fb)
        req = _request(cfg.editor_model, "synthesize-xml", user, patch_set_schema(), "patch-set-v1", cfg)
        resp = gateway.complete(req)
        edit = PatchSet.from_dict(resp.parsed)
    if trace is not None:
        trace.add("synthesize", started, path=path, edit=edit.to_dict(), fingerprints=resp.fingerprints,
                  attempts=resp.attempts)
    return edit


# -- verification ---------------------------------------------------------

def _render(pkg: Package, cfg: RenderConfig, workdir: Path, name: str) -> list[Path]:
    src = workdir / f"{name}.pptx"
    save_package(pkg, src, force=True)
    return render_deck(src, cfg, workdir / name)


def verify(instruction: str, outcome: ApplyOutcome, gateway: ModelGateway, cfg: AgentConfig | None = None,
           screenshots=(), trace: Trace | None = None) -> VerifierFeedback:
    """Model check of an applied edit; failed applications short-circuit without a call."""
    cfg = cfg or AgentConfig()
    started = time.perf_counter()
    if not outcome.ok:
        step = outcome.failed_step or {}
        msg = step.get("message") or outcome.report.summary()
        fb = VerifierFeedback(False, [(0, f"edit rejected ({step.get('kind', 'validation-failed')}) at step "
                                         f"{step.get('index', '?')}: {msg}")],
                              "Fix the failing step; the deck was left unchanged.", "validation")
        if trace is not None:
            trace.add("verify", started, feedback=fb.to_dict())
        return fb
    doc = snapshot(parse_deck(outcome.package))
    shots = list(screenshots)
    note = ("Screenshots of the slides that changed are attached." if shots
            else "No screenshots are attached; judge from the summary.")
    user = prompts.render("verify", instruction=instruction, snapshot_json=snapshot_text(doc, cfg.snapshot_chars),
                          image_note=note)

    def validator(value):
        if value["pass"] and value["issues"]:
            raise SchemaViolationError("'issues' must be empty when 'pass' is true", path="issues")

    resp = gateway.complete(_request(cfg.verifier_model, "verify", user, VERIFY_SCHEMA, "verify-v1", cfg, shots),
                            validator)
    v = resp.parsed
    fb = VerifierFeedback(v["pass"], [(i["slide"], i["description"]) for i in v["issues"]],
                          v.get("suggestions", ""), "model")
    if trace is not None:
        trace.add("verify", started, feedback=fb.to_dict(), fingerprints=resp.fingerprints, images=len(shots))
    return fb


def changed_slide_images(before: list[Path], after: list[Path], threshold: float) -> list[ImageInput]:
    result = screen(after, before, threshold)
    return [ImageInput(f"Slide {i + 1} after the edit", Path(after[i]).read_bytes())
            for i in result.kept if i < len(after)]


# -- loop -----------------------------------------------------------------

def run_agent(deck, instruction: str, cfg: AgentConfig | None = None,
              gateway: ModelGateway | None = None) -> AgentResult:
    """Route, then synthesize/apply/verify up to ``cfg.max_iterations`` times.

    Each iteration edits the latest validating package.  The returned package
    is the last one that validated, or the input when none did.
    """
    cfg = cfg or AgentConfig()
    original = deck if isinstance(deck, Package) else open_package(deck)
    trace = Trace(instruction=instruction)
    started = time.perf_counter()
    report = validate_package(original)
    if not report.ok:
        trace.add("precheck", started, report=report.to_dict())
        trace.result = {"ok": False, "reason": "input deck does not validate", "sha256": _sha(original)}
        return AgentResult(original, trace, False)
    if not instruction or not instruction.strip():
        trace.result = {"ok": False, "reason": "empty instruction", "sha256": _sha(original)}
        return AgentResult(original, trace, False)

    current = original
    doc = snapshot(parse_deck(current))
    decision = route(instruction, doc, gateway, cfg, trace=trace)
    if gateway is None:
        trace.result = {"ok": False, "reason": "no model gateway configured", "sha256": _sha(original)}
        return AgentResult(original, trace, False)

    plan = None
    if decision.path == "programmatic":
        try:
            plan = plan_content(instruction, doc, gateway, cfg, trace)
        except GatewayError as err:
            trace.add("plan", time.perf_counter(), error=err.to_dict())

    best: Package | None = None
    feedback: VerifierFeedback | None = None
    with tempfile.TemporaryDirectory(prefix="deckforge-agent-") as tmp:
        workdir = Path(tmp)
        before_imgs = None
        for it in range(cfg.max_iterations):
            t0 = time.perf_counter()
            if it and cfg.allow_reroute:
                decision = route(instruction + ("\n\n" + feedback.render() if feedback else ""), doc, gateway, cfg,
                                 trace=trace)
            try:
                edit = synthesize_edit(instruction, decision.path, doc, current, gateway, cfg, plan, feedback,
                                       decision.target_slides, trace)
            except (GatewayError, DeckforgeError) as err:
                trace.add("synthesize", t0, path=decision.path, error=err.to_dict())
                feedback = VerifierFeedback(False, [(0, f"no usable edit was produced: {err.message}")], "",
                                            "synthesis")
                if not cfg.reflection_enabled:
                    break
                continue
            t1 = time.perf_counter()
            if isinstance(edit, EditProgram):
                outcome = apply_edit_program(current, edit)
            else:
                outcome = apply_xml_patch(current, edit)
            trace.add("apply", t1, ok=outcome.ok, failed_step=outcome.failed_step,
                      report=outcome.report.to_dict() if not outcome.ok else None,
                      sha256=_sha(outcome.package) if outcome.ok else None)
            shots = []
            if outcome.ok:
                best = current = outcome.package
                if cfg.render is not None:
                    try:
                        if before_imgs is None:
                            before_imgs = _render(original, cfg.render, workdir, "before")
                        after_imgs = _render(current, cfg.render, workdir, f"iter{it + 1}")
                        shots = changed_slide_images(before_imgs, after_imgs, cfg.screen_threshold)
                    except DeckforgeError as err:
                        trace.add("render", t1, error=err.to_dict())
            try:
                feedback = verify(instruction, outcome, gateway, cfg, shots, trace)
            except GatewayError as err:
                trace.add("verify", t1, error=err.to_dict())
                feedback = VerifierFeedback(False, [(0, f"verifier unavailable: {err.message}")], "", "validation")
            if outcome.ok:
                doc = snapshot(parse_deck(current))
            if feedback.passed or not cfg.reflection_enabled:
                break

    final = best if best is not None else original
    trace.result = {
        "ok": best is not None,
        "verified": bool(feedback and feedback.passed),
        "attempts": trace.attempts(),
        "path": decision.path,
        "sha256": _sha(final),
    }
    return AgentResult(final, trace, best is not None)
