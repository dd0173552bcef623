"""Dual-judge evaluation: style targets, the IF judge, the VQ judge, aggregation.

The IF judge reads structured diffs and never sees images.  The VQ judge
reads screenshot pairs and never sees diff text.  Both use the shipped prompt
assets with placeholder substitution only.
"""

from __future__ import annotations

import json
import math
import tempfile
import time
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from . import prompts
from .context import DEFAULT_SNAPSHOT_CHARS, common_cut, truncate_snapshot
from .deck import parse_deck, serialize_snapshot, snapshot
from .diff import (
    diff_snapshots,
    format_diff_report,
    json_change_ratio,
    select_modality,
    xml_change_ratio,
    xml_diff_text,
)
from .errors import DeckforgeError, GatewayError, JudgeFailedError, UnknownCategoryError
from .gateway import ImageInput, ModelGateway, ModelRequest
from .package import Package, save_package
from .taxonomy import CATEGORIES
from .visual import DEFAULT_THRESHOLD, RenderConfig, SsimParams, render_deck, screen

JUDGE_SYSTEM = "You are an evaluation judge. Reply with a single JSON object and nothing else."
AGGREGATIONS = ("min", "mean", "floor-of-mean")
ALL_CASES = "All Cases"

STYLE_SCHEMA = {
    "type": "object",
    "properties": {
        "overview_instructions": {"type": "string", "minLength": 1},
        "notes": {"type": ["string", "null"]},
    },
    "required": ["overview_instructions"],
}

IF_SCHEMA = {
    "type": "object",
    "properties": {
        "instruction_following_score": {"type": "integer", "minimum": 0, "maximum": 5},
        "instruction_following_reason": {"type": "string"},
    },
    "required": ["instruction_following_score", "instruction_following_reason"],
}

VQ_SCHEMA = {
    "type": "object",
    "properties": {
        "visual_quality_score": {"type": "integer", "minimum": 0, "maximum": 5},
        "visual_quality_reason": {"type": "string"},
    },
    "required": ["visual_quality_score", "visual_quality_reason"],
}


@dataclass
class JudgeConfig:
    judge_model: str = "judge"
    style_model: str | None = None  # defaults to judge_model
    batch_size: int = 5
    vq_aggregation: str = "min"
    screen_threshold: float = DEFAULT_THRESHOLD
    ssim: SsimParams = field(default_factory=SsimParams)
    render: RenderConfig = field(default_factory=RenderConfig)
    max_retries: int = 1  # one re-prompt, then the case is judge-failed
    snapshot_chars: int = DEFAULT_SNAPSHOT_CHARS
    diff_max_entries: int = 400
    xml_diff_chars: int = 60000

    def __post_init__(self):
        if self.vq_aggregation not in AGGREGATIONS:
            raise ValueError(f"vq_aggregation must be one of {AGGREGATIONS}")
        if not 1 <= self.batch_size <= 5:
            raise ValueError("batch_size must be between 1 and 5")

    @classmethod
    def from_dict(cls, data: dict | None) -> "JudgeConfig":
        data = dict(data or {})
        if isinstance(data.get("render"), dict):
            data["render"] = RenderConfig.from_dict(data["render"])
        if isinstance(data.get("ssim"), dict):
            data["ssim"] = SsimParams(**data["ssim"])
        return cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})

    def snapshot(self) -> dict:
        d = asdict(self)
        d["render"] = asdict(self.render)
        d["ssim"] = asdict(self.ssim)
        return d


@dataclass
class StyleTarget:
    overview_instructions: str
    notes: str | None = None
    verified: bool = False  # set by a human reviewer, never by the generator

    def __post_init__(self):
        if not self.overview_instructions or not self.overview_instructions.strip():
            raise ValueError("overview_instructions must be nonempty")

    def to_dict(self) -> dict:
        return {"overview_instructions": self.overview_instructions, "notes": self.notes, "verified": self.verified}

    @classmethod
    def from_dict(cls, data: dict) -> "StyleTarget":
        return cls(data["overview_instructions"], data.get("notes"), bool(data.get("verified", False)))

    @classmethod
    def load(cls, path) -> "StyleTarget":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def block(self) -> str:
        text = self.overview_instructions.strip()
        if self.notes:
            text += f"\n\nNotes: {self.notes.strip()}"
        return text


@dataclass
class Verdict:
    score: int
    reason: str
    judge_kind: str  # IF | VQ
    modality: str | None = None
    batch_scores: list[int] = field(default_factory=list)
    fingerprints: list[str] = field(default_factory=list)

    def __post_init__(self):
        if isinstance(self.score, bool) or not isinstance(self.score, int) or not 0 <= self.score <= 5:
            raise ValueError(f"score must be an integer in 0..5, got {self.score!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict | None) -> "Verdict | None":
        return cls(**d) if d else None


@dataclass
class CaseResult:
    case_id: str
    categories: list[str]
    if_verdict: Verdict | None
    vq_verdict: Verdict | None
    screened_slide_indices: list[int] = field(default_factory=list)
    count_mismatch: bool = False
    modality: str | None = None
    json_ratio: float | None = None
    xml_ratio: float | None = None
    total_differences: int | None = None
    similarity_score: float | None = None
    screen_threshold: float = DEFAULT_THRESHOLD
    errors: list[dict] = field(default_factory=list)
    artifacts: str | None = None
    wall_time_s: float = 0.0

    @property
    def judge_failed(self) -> bool:
        return self.if_verdict is None or self.vq_verdict is None

    @property
    def if_score(self) -> int:
        return self.if_verdict.score if self.if_verdict else 0

    @property
    def vq_score(self) -> int:
        return self.vq_verdict.score if self.vq_verdict else 0

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        d["judge_failed"] = self.judge_failed
        if not timing:
            d.pop("wall_time_s")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CaseResult":
        d = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        d["if_verdict"] = Verdict.from_dict(d.get("if_verdict"))
        d["vq_verdict"] = Verdict.from_dict(d.get("vq_verdict"))
        return cls(**d)


# -- style target ---------------------------------------------------------

def truncate_pair(original_doc: dict, ground_truth_doc: dict, max_chars: int | None) -> tuple[dict, dict, int]:
    """Both snapshots cut after the same slide so they stay comparable."""
    keep = common_cut([original_doc, ground_truth_doc], max_chars)
    return truncate_snapshot(original_doc, keep), truncate_snapshot(ground_truth_doc, keep), keep


def style_request(original_doc: dict, ground_truth_doc: dict, cfg: JudgeConfig) -> ModelRequest:
    a, b, _ = truncate_pair(original_doc, ground_truth_doc, cfg.snapshot_chars)
    user = prompts.render("style_prompt",
                          original_ppt_json_truncated=serialize_snapshot(a, indent=1).decode("utf-8"),
                          ground_truth_ppt_json_truncated=serialize_snapshot(b, indent=1).decode("utf-8"))
    return ModelRequest.for_judge(cfg.style_model or cfg.judge_model, JUDGE_SYSTEM, user, output_schema=STYLE_SCHEMA,
                                  schema_id="style-target-v1", max_retries=cfg.max_retries, tag="style-target")


def build_style_target(original_doc: dict, ground_truth_doc: dict, gateway: ModelGateway,
                       cfg: JudgeConfig | None = None) -> StyleTarget:
    cfg = cfg or JudgeConfig()
    resp = gateway.complete(style_request(original_doc, ground_truth_doc, cfg))
    return StyleTarget(resp.parsed["overview_instructions"], resp.parsed.get("notes"), verified=False)


# -- IF judge -------------------------------------------------------------

def if_request(instruction: str, style_target: StyleTarget | None, diff_text: str, cfg: JudgeConfig) -> ModelRequest:
    user = prompts.render("if_prompt", instruction_part=instruction.strip(),
                          style_target_part=style_target.block() if style_target else "(none provided)",
                          formatted_diff=diff_text)
    return ModelRequest.for_judge(cfg.judge_model, JUDGE_SYSTEM, user, output_schema=IF_SCHEMA, schema_id="if-v1",
                                  max_retries=cfg.max_retries, tag="judge-if")


def judge_if(instruction: str, style_target: StyleTarget | None, diff_context: tuple[str, str],
             gateway: ModelGateway, cfg: JudgeConfig | None = None) -> Verdict:
    """``diff_context`` is (modality, diff text).  No images are ever attached."""
    cfg = cfg or JudgeConfig()
    modality, diff_text = diff_context
    try:
        resp = gateway.complete(if_request(instruction, style_target, diff_text, cfg))
    except GatewayError as err:
        raise JudgeFailedError(f"IF judge failed: {err.message}", judge="IF", cause=err.kind) from None
    v = resp.parsed
    return Verdict(int(v["instruction_following_score"]), v["instruction_following_reason"], "IF", modality,
                   fingerprints=resp.fingerprints)


# -- VQ judge -------------------------------------------------------------

def make_batches(kept: list[int], size: int = 5) -> list[list[int]]:
    """Order-preserving partition of ``kept`` into chunks of at most ``size``."""
    return [kept[i:i + size] for i in range(0, len(kept), size)]


def vq_request(instruction: str, style_target: StyleTarget | None, gt_images: list, pred_images: list,
               batch: list[int], cfg: JudgeConfig) -> ModelRequest:
    user = prompts.render("vq_prompt", instruction_text=instruction.strip(),
                          style_block=style_target.block() if style_target else "(none provided)")
    images = [ImageInput(f"Ground Truth - Slide {i + 1}", Path(gt_images[i]).read_bytes())
              for i in batch if i < len(gt_images)]
    images += [ImageInput(f"Prediction - Slide {i + 1}", Path(pred_images[i]).read_bytes())
               for i in batch if i < len(pred_images)]
    return ModelRequest.for_judge(cfg.judge_model, JUDGE_SYSTEM, user, images=images, output_schema=VQ_SCHEMA,
                                  schema_id="vq-v1", max_retries=cfg.max_retries, tag="judge-vq")


def aggregate_batch_scores(scores: list[int], how: str = "min") -> int:
    if how == "min":
        return min(scores)
    if how == "mean":
        return int((Decimal(sum(scores)) / Decimal(len(scores))).quantize(Decimal(1), ROUND_HALF_UP))
    if how == "floor-of-mean":
        return math.floor(sum(scores) / len(scores))
    raise ValueError(f"unknown aggregation {how!r}")


def judge_vq(instruction: str, style_target: StyleTarget | None, gt_images: list, pred_images: list,
             kept: list[int], gateway: ModelGateway, cfg: JudgeConfig | None = None) -> Verdict:
    """One call per batch of at most five kept slides; zero kept slides scores 5 without a call."""
    cfg = cfg or JudgeConfig()
    batches = make_batches(list(kept), cfg.batch_size)
    if not batches:
        return Verdict(5, "All slides match the ground truth after SSIM screening.", "VQ")
    scores, reasons, fps = [], [], []
    for batch in batches:
        try:
            resp = gateway.complete(vq_request(instruction, style_target, gt_images, pred_images, batch, cfg))
        except GatewayError as err:
            raise JudgeFailedError(f"VQ judge failed: {err.message}", judge="VQ", cause=err.kind) from None
        scores.append(int(resp.parsed["visual_quality_score"]))
        reasons.append(resp.parsed["visual_quality_reason"])
        fps.extend(resp.fingerprints)
    final = aggregate_batch_scores(scores, cfg.vq_aggregation)
    # the reason comes from the lowest-scoring batch (first one on ties)
    reason = reasons[scores.index(min(scores))]
    return Verdict(final, reason, "VQ", batch_scores=scores, fingerprints=fps)


# -- one case -------------------------------------------------------------

def diff_context(original: Package, ground_truth: Package, prediction: Package, docs: dict,
                 cfg: JudgeConfig) -> dict:
    """Diff report plus modality choice.

    The modality reflects the kind of edit requested, so the ratios compare
    the original deck with the ground truth; the text shown to the judge is
    always prediction vs ground truth.
    """
    report = diff_snapshots(docs["ground_truth"], docs["prediction"], initial=docs["original"])
    j = json_change_ratio(docs["original"], docs["ground_truth"])
    x = xml_change_ratio(original, ground_truth)
    modality = select_modality(j, x)
    if modality == "json-diff":
        text = format_diff_report(report, cfg.diff_max_entries)
    else:
        text = xml_diff_text(ground_truth, prediction, max_chars=cfg.xml_diff_chars)
    return {"report": report, "json_ratio": j, "xml_ratio": x, "modality": modality, "text": text}


def evaluate_case(case, prediction: Package, gateway: ModelGateway, cfg: JudgeConfig | None = None,
                  artifacts_dir=None) -> CaseResult:
    """Full pipeline for one case; stage failures are recorded, never raised."""
    cfg = cfg or JudgeConfig()
    started = time.perf_counter()
    result = CaseResult(case.case_id, list(case.categories), None, None, screen_threshold=cfg.screen_threshold)
    tmp = None
    if artifacts_dir is None:
        tmp = tempfile.TemporaryDirectory(prefix="deckforge-judge-")
        out = Path(tmp.name)
    else:
        out = Path(artifacts_dir)
        out.mkdir(parents=True, exist_ok=True)
        result.artifacts = str(out)
    try:
        _evaluate(case, prediction, gateway, cfg, out, result)
    finally:
        if tmp is not None:
            tmp.cleanup()
    result.wall_time_s = round(time.perf_counter() - started, 6)
    return result


def _evaluate(case, prediction: Package, gateway, cfg: JudgeConfig, out: Path, result: CaseResult):
    def fail(stage, err):
        info = err.to_dict() if isinstance(err, DeckforgeError) else {"kind": "error", "message": str(err)}
        result.errors.append({"stage": stage, **info})

    try:
        docs = {
            "original": snapshot(parse_deck(case.original)),
            "ground_truth": snapshot(parse_deck(case.ground_truth)),
            "prediction": snapshot(parse_deck(prediction)),
        }
        ctx = diff_context(case.original, case.ground_truth, prediction, docs, cfg)
    except Exception as err:  # unparseable prediction: nothing can be judged
        fail("diff", err)
        return
    result.modality, result.json_ratio, result.xml_ratio = ctx["modality"], ctx["json_ratio"], ctx["xml_ratio"]
    result.total_differences = ctx["report"].total_differences
    result.similarity_score = ctx["report"].similarity_score
    (out / "diff.json").write_text(json.dumps(ctx["report"].to_dict(), sort_keys=True, indent=1) + "\n",
                                   encoding="utf-8")
    (out / "judge_diff.txt").write_text(ctx["text"] + "\n", encoding="utf-8")

    style = case.style_target
    if style is None:
        try:
            style = build_style_target(docs["original"], docs["ground_truth"], gateway, cfg)
        except GatewayError as err:
            fail("style-target", err)
    if style is not None:
        style.save(out / "style_target.json")

    try:
        result.if_verdict = judge_if(case.instruction, style, (ctx["modality"], ctx["text"]), gateway, cfg)
    except DeckforgeError as err:
        fail("judge-if", err)

    try:
        save_package(case.ground_truth, out / "ground_truth.pptx", force=True)
        save_package(prediction, out / "prediction.pptx", force=True)
        gt_images = render_deck(out / "ground_truth.pptx", cfg.render, out / "render" / "ground_truth")
        pred_images = render_deck(out / "prediction.pptx", cfg.render, out / "render" / "prediction")
        screening = screen(pred_images, gt_images, cfg.screen_threshold, cfg.ssim)
    except DeckforgeError as err:
        fail("render", err)
        return
    result.screened_slide_indices = screening.kept
    result.count_mismatch = screening.count_mismatch
    try:
        result.vq_verdict = judge_vq(case.instruction, style, gt_images, pred_images, screening.kept, gateway, cfg)
    except DeckforgeError as err:
        fail("judge-vq", err)


# -- aggregation ----------------------------------------------------------

def half_up(value: float, places: int = 2) -> str:
    return str(Decimal(repr(value)).quantize(Decimal(1).scaleb(-places), ROUND_HALF_UP))


@dataclass
class CategoryRow:
    name: str
    cases: int
    if_mean: float | None
    vq_mean: float | None
    judge_failed: int
    expected: int | None = None  # cases selected for this row, known when the run is partial

    def to_dict(self) -> dict:
        return {"name": self.name, "cases": self.cases, "expected": self.expected, "if_mean": self.if_mean, "vq_mean": self.vq_mean,
                "if_display": half_up(self.if_mean) if self.if_mean is not None else None,
                "vq_display": half_up(self.vq_mean) if self.vq_mean is not None else None,
                "judge_failed": self.judge_failed}


@dataclass
class CategoryReport:
    rows: list[CategoryRow]
    completed: int = 0
    total: int | None = None

    def row(self, name: str) -> CategoryRow | None:
        return next((r for r in self.rows if r.name == name), None)

    def to_dict(self) -> dict:
        return {"rows": [r.to_dict() for r in self.rows], "completed": self.completed,
                "total": self.total if self.total is not None else self.completed}


def _mean(values: list[int]) -> float | None:
    return sum(values) / len(values) if values else None


def aggregate(results: list[CaseResult], case_categories: dict[str, list[str]] | None = None,
              total: int | None = None, expected: dict[str, int] | None = None) -> CategoryReport:
    """Per-category and All Cases means; failed verdicts count as 0 and are flagged.

    ``expected`` maps row names to the number of selected cases, so partial
    runs can show completed/total per row.
    """
    if not results:
        return CategoryReport([], 0, total)
    buckets: dict[str, list[CaseResult]] = {c: [] for c in CATEGORIES}
    for r in results:
        cats = (case_categories or {}).get(r.case_id, r.categories)
        for c in cats:
            if c not in buckets:
                raise UnknownCategoryError(f"case {r.case_id}: unknown category {c!r}", category=c)
        for c in dict.fromkeys(cats):
            buckets[c].append(r)
    rows = []
    for name, group in [*buckets.items(), (ALL_CASES, list(results))]:
        if not group and name != ALL_CASES:
            continue
        rows.append(CategoryRow(name, len(group), _mean([r.if_score for r in group]),
                                _mean([r.vq_score for r in group]), sum(1 for r in group if r.judge_failed),
                                (expected or {}).get(name)))
    return CategoryReport(rows, len(results), total)
