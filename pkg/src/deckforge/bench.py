"""Benchmark cases, suite manifests, resumable suite runs and reports.

A case directory holds::

    case.json            {"case_id", "categories", "edit_types", "tags"}
    original.pptx
    ground_truth.pptx
    prompt.txt           the instruction
    style_target.json    optional judge rubric
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

from .agent import AgentConfig, run_agent
from .config import read_structured
from .deck import parse_deck
from .errors import BadMetadataError, DeckforgeError, InvalidDeckError, MissingCaseFileError
from .gateway import ModelGateway
from .judge import ALL_CASES, CaseResult, CategoryReport, JudgeConfig, StyleTarget, aggregate, evaluate_case, half_up
from .package import Package, open_package, save_package, validate_package
from .taxonomy import CATEGORIES, EDIT_TYPES

CASE_FILES = ("case.json", "original.pptx", "ground_truth.pptx", "prompt.txt")
MODES = ("agent", "identity", "external")
RESULTS_FILE = "results.jsonl"
TAG_KEYS = ("cross_slide", "high_diff")


@dataclass
class Case:
    case_id: str
    root: Path
    original: Package
    ground_truth: Package
    instruction: str
    categories: list[str]
    edit_types: list[int] = field(default_factory=list)
    tags: dict = field(default_factory=dict)
    style_target: StyleTarget | None = None

    def file_hashes(self) -> dict:
        return {n: hashlib.sha256((self.root / n).read_bytes()).hexdigest()
                for n in (*CASE_FILES, "style_target.json") if (self.root / n).exists()}


def _open_valid(path: Path, role: str) -> Package:
    try:
        pkg = open_package(path)
        report = validate_package(pkg)
        if not report.ok:
            raise InvalidDeckError(f"{role} deck {path} does not validate: {report.summary()}", file=str(path))
        parse_deck(pkg)
    except InvalidDeckError:
        raise
    except DeckforgeError as err:
        raise InvalidDeckError(f"{role} deck {path} is unusable: {err.message}", file=str(path)) from None
    return pkg


def parse_metadata(meta, default_id: str) -> tuple[str, list[str], list[int], dict]:
    if not isinstance(meta, dict):
        raise BadMetadataError("case.json must hold an object")
    case_id = meta.get("case_id", default_id)
    if not isinstance(case_id, str) or not case_id:
        raise BadMetadataError("case_id must be a nonempty string")
    cats = meta.get("categories")
    if not isinstance(cats, list) or not cats:
        raise BadMetadataError(f"{case_id}: categories must be a nonempty list")
    unknown = [c for c in cats if c not in CATEGORIES]
    if unknown:
        raise BadMetadataError(f"{case_id}: unknown categories {unknown}; expected a subset of {list(CATEGORIES)}")
    types = meta.get("edit_types", [])
    if not isinstance(types, list) or any(isinstance(t, bool) or t not in EDIT_TYPES for t in types):
        raise BadMetadataError(f"{case_id}: edit_types must be a list of integers 1 to 16")
    tags = meta.get("tags", {})
    if not isinstance(tags, dict) or any(not isinstance(v, bool) for v in tags.values()):
        raise BadMetadataError(f"{case_id}: tags must map names to booleans")
    return case_id, list(dict.fromkeys(cats)), list(types), dict(tags)


def load_case(directory) -> Case:
    root = Path(directory)
    for name in CASE_FILES:
        if not (root / name).is_file():
            raise MissingCaseFileError(f"{root}: missing {name}", file=name)
    try:
        meta = json.loads((root / "case.json").read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise BadMetadataError(f"{root}/case.json is not valid JSON: {err}") from None
    case_id, cats, types, tags = parse_metadata(meta, root.name)
    instruction = (root / "prompt.txt").read_text(encoding="utf-8").strip()
    if not instruction:
        raise BadMetadataError(f"{case_id}: prompt.txt is empty")
    style = None
    if (root / "style_target.json").exists():
        try:
            style = StyleTarget.load(root / "style_target.json")
        except (ValueError, KeyError, TypeError) as err:
            raise BadMetadataError(f"{case_id}: bad style_target.json: {err}") from None
    return Case(case_id, root, _open_valid(root / "original.pptx", "original"),
                _open_valid(root / "ground_truth.pptx", "ground-truth"), instruction, cats, types, tags, style)


# -- manifests ------------------------------------------------------------

@dataclass
class SuiteManifest:
    cases: list[Path]
    output_dir: Path
    mode: str = "agent"
    predictions_dir: Path | None = None  # external mode: <predictions_dir>/<case_id>.pptx or <case_id>/out.pptx
    ids: list[str] | None = None
    categories: list[str] | None = None
    tags: list[str] | None = None
    agent: AgentConfig = field(default_factory=AgentConfig)
    judge: JudgeConfig = field(default_factory=JudgeConfig)
    workers: int = 1
    cassette: str | None = None
    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "external" and self.predictions_dir is None:
            raise ValueError("external mode needs predictions_dir")

    @classmethod
    def from_dict(cls, data: dict, base: Path = Path(".")) -> "SuiteManifest":
        def rel(p):
            return None if p is None else (Path(p) if Path(p).is_absolute() else base / p)

        entries = data.get("cases")
        if isinstance(entries, str):  # a directory whose subdirectories are cases
            root = rel(entries)
            entries = sorted(str(p.resolve()) for p in root.iterdir() if (p / "case.json").exists())
        if not isinstance(entries, list) or not entries:
            raise ValueError("manifest needs a nonempty 'cases' list")
        select = data.get("select") or {}
        models = data.get("models") or {}
        agent = {**{k: v for k, v in models.items() if k in ("router_model", "editor_model", "verifier_model")},
                 **(data.get("agent") or {})}
        judge = {**{k: v for k, v in models.items() if k in ("judge_model", "style_model")},
                 **(data.get("judge") or {})}
        return cls(
            cases=[rel(c) for c in entries],
            output_dir=rel(data.get("output_dir", "runs/latest")),
            mode=data.get("mode", "agent"),
            predictions_dir=rel(data.get("predictions_dir")),
            ids=select.get("ids"), categories=select.get("categories"), tags=select.get("tags"),
            agent=AgentConfig.from_dict(agent), judge=JudgeConfig.from_dict(judge),
            workers=int(data.get("workers", 1)),
            cassette=str(rel(data["cassette"])) if data.get("cassette") else None,
            raw=data,
        )

    @classmethod
    def load(cls, path) -> "SuiteManifest":
        return cls.from_dict(read_structured(path), Path(path).parent)

    def select(self, cases: list[Case]) -> list[Case]:
        seen = set()
        for c in cases:
            if c.case_id in seen:
                raise BadMetadataError(f"duplicate case_id {c.case_id!r} in suite")
            seen.add(c.case_id)
        out = cases
        if self.ids is not None:
            out = [c for c in out if c.case_id in self.ids]
        if self.categories is not None:
            out = [c for c in out if set(c.categories) & set(self.categories)]
        if self.tags is not None:
            out = [c for c in out if all(c.tags.get(t) for t in self.tags)]
        return out


def suite_hash(manifest: SuiteManifest, cases: list[Case]) -> str:
    h = hashlib.sha256()
    cfg = {"mode": manifest.mode, "ids": manifest.ids, "categories": manifest.categories, "tags": manifest.tags,
           "judge": manifest.judge.snapshot()}
    cfg["judge"]["render"]["command"] = "<renderer>"  # interpreter paths differ across machines
    h.update(json.dumps(cfg, sort_keys=True, default=str).encode())
    for c in cases:
        h.update(json.dumps({"case_id": c.case_id, "files": c.file_hashes()}, sort_keys=True).encode())
    return h.hexdigest()


# -- running --------------------------------------------------------------

@dataclass
class RunRecord:
    suite_hash: str
    results: list[CaseResult]
    report: CategoryReport
    config: dict
    versions: dict
    cassettes: list[str]
    expected_cases: list[str]

    def to_dict(self) -> dict:
        return {
            "suite_hash": self.suite_hash,
            "results": [r.to_dict(timing=False) for r in self.results],
            "report": self.report.to_dict(),
            "config": self.config,
            "versions": self.versions,
            "cassettes": self.cassettes,
            "expected_cases": self.expected_cases,
        }


def tool_versions() -> dict:
    out = {}
    for pkg in ("artifact", "lxml", "numpy", "Pillow", "jsonschema"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


def read_results(path) -> dict[str, CaseResult]:
    done = {}
    path = Path(path)
    if not path.exists():
        return done
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        try:
            r = CaseResult.from_dict(json.loads(line))
        except (json.JSONDecodeError, TypeError, KeyError, ValueError):
            continue  # a torn final line from an interrupted run
        done[r.case_id] = r
    return done


def external_prediction(manifest: SuiteManifest, case: Case) -> Package:
    base = manifest.predictions_dir
    for candidate in (base / f"{case.case_id}.pptx", base / case.case_id / "out.pptx"):
        if candidate.exists():
            return open_package(candidate)
    raise MissingCaseFileError(f"no prediction deck for {case.case_id} under {base}", case_id=case.case_id)


def run_case(case: Case, manifest: SuiteManifest, gateway: ModelGateway) -> CaseResult:
    out = manifest.output_dir / "cases" / case.case_id
    out.mkdir(parents=True, exist_ok=True)
    errors = []
    try:
        if manifest.mode == "identity":
            prediction = case.original
        elif manifest.mode == "external":
            prediction = external_prediction(manifest, case)
        else:
            res = run_agent(case.original, case.instruction, manifest.agent, gateway)
            prediction = res.package
            (out / "trace.json").write_text(json.dumps(res.trace.to_dict(timing=False), indent=1, sort_keys=True,
                                                       default=str) + "\n", encoding="utf-8")
        save_package(prediction, out / "out.pptx", force=True)
    except DeckforgeError as err:
        errors.append({"stage": "prediction", **err.to_dict()})
        return CaseResult(case.case_id, list(case.categories), None, None, errors=errors,
                          screen_threshold=manifest.judge.screen_threshold)
    result = evaluate_case(case, prediction, gateway, manifest.judge, out / "judge")
    result.artifacts = str(Path("cases") / case.case_id / "judge")
    return result


def run_suite(manifest: SuiteManifest, gateway: ModelGateway) -> RunRecord:
    """Run every selected case, appending to ``results.jsonl`` as cases finish.

    Cases already present in ``results.jsonl`` are not recomputed.
    """
    cases = manifest.select([load_case(p) for p in manifest.cases])
    manifest.output_dir.mkdir(parents=True, exist_ok=True)
    results_path = manifest.output_dir / RESULTS_FILE
    done = read_results(results_path)
    lock = threading.Lock()

    def work(case: Case):
        try:
            result = run_case(case, manifest, gateway)
        except Exception as err:  # isolation: one broken case never stops the suite
            result = CaseResult(case.case_id, list(case.categories), None, None,
                                errors=[{"stage": "case", "kind": "error", "message": str(err)}])
        with lock:
            with results_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(result.to_dict(), sort_keys=True) + "\n")
            done[case.case_id] = result
        return result

    todo = [c for c in cases if c.case_id not in done]
    if manifest.workers > 1:
        with ThreadPoolExecutor(manifest.workers) as pool:
            list(pool.map(work, todo))
    else:
        for c in todo:
            work(c)

    results = [done[c.case_id] for c in cases if c.case_id in done]
    record = make_record(manifest, cases, results)
    write_record(record, manifest.output_dir)
    return record


def expected_counts(cases: list[Case]) -> dict[str, int]:
    counts = {c: 0 for c in CATEGORIES}
    for case in cases:
        for cat in case.categories:
            counts[cat] += 1
    counts = {k: v for k, v in counts.items() if v}
    counts[ALL_CASES] = len(cases)
    return counts


def make_record(manifest: SuiteManifest, cases: list[Case], results: list[CaseResult]) -> RunRecord:
    report = aggregate(results, total=len(cases), expected=expected_counts(cases))
    config = {"mode": manifest.mode, "judge": manifest.judge.snapshot(), "workers": manifest.workers}
    config["judge"]["render"]["command"] = "<renderer>"
    config["agent"] = {k: v for k, v in manifest.agent.__dict__.items() if k != "render"}
    cassettes = [Path(manifest.cassette).name] if manifest.cassette else []
    return RunRecord(suite_hash(manifest, cases), results, report, config, tool_versions(), cassettes,
                     [c.case_id for c in cases])


def write_record(record: RunRecord, outdir: Path):
    outdir = Path(outdir)
    (outdir / "run_record.json").write_text(json.dumps(record.to_dict(), indent=1, sort_keys=True) + "\n",
                                            encoding="utf-8")
    for fmt, name in (("text", "report.txt"), ("csv", "report.csv"), ("json", "report.json")):
        (outdir / name).write_text(render_report(record.report, fmt), encoding="utf-8")


# -- reports --------------------------------------------------------------

def _fmt(v):
    return "-" if v is None else half_up(v)


def render_report(report: CategoryReport, fmt: str = "text") -> str:
    """Text, CSV or JSON rendering of one CategoryReport; all share the same rounding."""
    rows = [r.to_dict() for r in report.rows]
    total = report.total if report.total is not None else report.completed
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["category", "cases", "expected", "if_mean", "vq_mean", "judge_failed"])
        for r in rows:
            w.writerow([r["name"], r["cases"], r["expected"] if r["expected"] is not None else "",
                        r["if_display"] or "", r["vq_display"] or "", r["judge_failed"]])
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    header = ["Category", "Cases", "IF", "VQ", "Judge-failed"]
    body = []
    for r in rows:
        cases = f"{r['cases']}/{r['expected']}" if r["expected"] is not None else str(r["cases"])
        body.append([r["name"], cases, r["if_display"] or "-", r["vq_display"] or "-", str(r["judge_failed"])])
    widths = [max(len(x) for x in col) for col in zip(header, *body)]
    lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(line, widths))).rstrip()
             for line in [header, *body]]
    lines.insert(1, "  ".join("-" * w for w in widths))
    lines.append(f"Completed {report.completed}/{total} cases")
    return "\n".join(lines) + "\n"


def report_from_results(results_path, case_dirs: list | None = None) -> CategoryReport:
    """Rebuild a CategoryReport straight from ``results.jsonl``."""
    results = list(read_results(results_path).values())
    results.sort(key=lambda r: r.case_id)
    if case_dirs:
        cases = [load_case(d) for d in case_dirs]
        return aggregate(results, total=len(cases), expected=expected_counts(cases))
    return aggregate(results)
