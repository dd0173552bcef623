"""``deckforge`` command line."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import DeckforgeError

RUN_MODES = ("live", "record", "replay")


def _print_json(obj):
    print(json.dumps(obj, indent=1, sort_keys=True, ensure_ascii=False, default=str))


def _gateway(args, harness=None):
    from .config import HarnessConfig

    harness = harness or HarnessConfig()
    if getattr(args, "cassette", None):
        harness.cassette_path = args.cassette
        harness.cassette_mode = args.mode or "replay"
    elif getattr(args, "mode", None):
        harness.cassette_mode = args.mode
    return harness.gateway()


def _harness(args):
    from .config import HarnessConfig

    return HarnessConfig.load(args.config) if getattr(args, "config", None) else HarnessConfig()


def cmd_validate(args) -> int:
    from .package import validate_file

    report = validate_file(args.file)
    if args.json:
        _print_json(report.to_dict())
    else:
        print("ok" if report.ok else report.summary())
    return 0 if report.ok else 1


def cmd_snapshot(args) -> int:
    from .deck import pptx_to_json, serialize_snapshot

    data = serialize_snapshot(pptx_to_json(args.file), indent=args.indent)
    if args.output:
        Path(args.output).write_bytes(data + b"\n")
    else:
        sys.stdout.write(data.decode("utf-8") + "\n")
    return 0


def cmd_diff(args) -> int:
    from .deck import parse_deck, snapshot
    from .diff import diff_snapshots, format_diff_report, json_change_ratio, select_modality, xml_change_ratio
    from .package import open_package

    gt, pred = open_package(args.ground_truth), open_package(args.prediction)
    docs = [snapshot(parse_deck(p)) for p in (gt, pred)]
    initial = snapshot(parse_deck(open_package(args.initial))) if args.initial else None
    report = diff_snapshots(docs[0], docs[1], initial)
    j, x = json_change_ratio(docs[0], docs[1]), xml_change_ratio(gt, pred)
    if args.json:
        _print_json({**report.to_dict(), "json_ratio": j, "xml_ratio": x, "modality": select_modality(j, x)})
    else:
        print(format_diff_report(report, None))
        print(f"json_ratio={j:.6f} xml_ratio={x:.6f} modality={select_modality(j, x)}")
    return 0


def _apply(args, load, apply) -> int:
    from .package import open_package, save_package

    if Path(args.output).exists() and not args.force:
        raise FileExistsError(f"{args.output} exists; pass --force to overwrite it")
    pkg = open_package(args.file)
    outcome = apply(pkg, load(args.edit))
    _print_json(outcome.to_dict())
    if not outcome.ok:
        return 1
    save_package(outcome.package, args.output, force=args.force)
    return 0


def cmd_edit(args) -> int:
    from .edit import EditProgram, apply_edit_program

    return _apply(args, EditProgram.load, apply_edit_program)


def cmd_patch(args) -> int:
    from .edit import PatchSet, apply_xml_patch

    return _apply(args, PatchSet.load, apply_xml_patch)


def cmd_agent(args) -> int:
    from .agent import run_agent
    from .package import save_package

    harness = _harness(args)
    cfg = harness.agent
    if args.path:
        cfg.forced_path = {"prog": "programmatic", "programmatic": "programmatic", "xml": "xml", "hybrid": None}[args.path]
    if args.loop:
        cfg.max_iterations = args.loop
    if args.instruction_file:
        instruction = Path(args.instruction_file).read_text(encoding="utf-8").strip()
    else:
        instruction = args.instruction or ""
    result = run_agent(args.file, instruction, cfg, _gateway(args, harness))
    save_package(result.package, args.output, force=True)
    if args.trace:
        Path(args.trace).write_text(json.dumps(result.trace.to_dict(), indent=1, sort_keys=True, default=str) + "\n",
                                    encoding="utf-8")
    _print_json(result.trace.result)
    return 0 if result.ok else 1


def cmd_judge(args) -> int:
    from .bench import load_case
    from .judge import evaluate_case
    from .package import open_package

    harness = _harness(args)
    case = load_case(args.case)
    result = evaluate_case(case, open_package(args.prediction), _gateway(args, harness), harness.judge, args.output)
    _print_json(result.to_dict())
    return 1 if result.judge_failed else 0


def cmd_run_suite(args) -> int:
    from .bench import SuiteManifest, render_report, run_suite
    from .config import HarnessConfig

    manifest = SuiteManifest.load(args.manifest)
    if args.workers:
        manifest.workers = args.workers
    if args.output_dir:
        manifest.output_dir = Path(args.output_dir)
    harness = HarnessConfig.load(args.config) if args.config else HarnessConfig()
    if manifest.cassette and not args.cassette:
        harness.cassette_path, harness.cassette_mode = manifest.cassette, args.mode or "replay"
    record = run_suite(manifest, _gateway(args, harness))
    sys.stdout.write(render_report(record.report, "text"))
    return 0


def cmd_report(args) -> int:
    from .bench import RESULTS_FILE, render_report, report_from_results

    src = Path(args.source)
    results = src / RESULTS_FILE if src.is_dir() else src
    report = report_from_results(results, args.cases or None)
    sys.stdout.write(render_report(report, args.format))
    return 0


def cmd_render(args) -> int:
    from .visual import RenderConfig, render_deck

    cfg = RenderConfig(command=args.command) if args.command else RenderConfig()
    for p in render_deck(args.file, cfg, args.outdir):
        print(p)
    return 0


def cmd_gen_fixtures(args) -> int:
    from .fixtures import generate_cases, write_corpus

    out = Path(args.outdir)
    if not args.no_cases:
        for d in generate_cases(out / "cases"):
            print(d)
    if args.corpus:
        for p in write_corpus(out / "corpus", args.corpus):
            print(p)
    return 0


def _model_flags(p):
    p.add_argument("--config", help="harness config file (YAML or JSON)")
    p.add_argument("--cassette", help="JSON-lines cassette of model calls")
    p.add_argument("--mode", choices=RUN_MODES, help="cassette mode (default replay when --cassette is given)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deckforge", description="Inspect, diff, edit and evaluate .pptx decks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check package integrity")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("snapshot", help="canonical JSON snapshot of a deck")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.add_argument("--indent", type=int, default=1)
    p.set_defaults(func=cmd_snapshot)

    p = sub.add_parser("diff", help="semantic diff, ground truth vs prediction")
    p.add_argument("ground_truth")
    p.add_argument("prediction")
    p.add_argument("--initial", help="original deck, to annotate each difference")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_diff)

    for name, func, what in (("edit", cmd_edit, "edit program"), ("patch", cmd_patch, "patch set")):
        p = sub.add_parser(name, help=f"apply a JSON {what} transactionally")
        p.add_argument("file")
        p.add_argument("edit", metavar=name.upper(), help=f"{what} JSON file")
        p.add_argument("-o", "--output", required=True)
        p.add_argument("--force", action="store_true", help="overwrite an existing output file")
        p.set_defaults(func=func)

    p = sub.add_parser("agent", help="run the route/edit/verify loop on one deck")
    p.add_argument("file")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--instruction-file")
    g.add_argument("--instruction")
    p.add_argument("--path", choices=("xml", "prog", "programmatic", "hybrid"))
    p.add_argument("--loop", type=int, help="maximum iterations")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--trace")
    _model_flags(p)
    p.set_defaults(func=cmd_agent)

    p = sub.add_parser("judge", help="evaluate one prediction against a case")
    p.add_argument("--case", required=True)
    p.add_argument("--prediction", required=True)
    p.add_argument("-o", "--output", help="artifact directory")
    _model_flags(p)
    p.set_defaults(func=cmd_judge)

    p = sub.add_parser("run-suite", help="run and judge every case of a suite manifest")
    p.add_argument("manifest")
    p.add_argument("--workers", type=int)
    p.add_argument("--output-dir")
    _model_flags(p)
    p.set_defaults(func=cmd_run_suite)

    p = sub.add_parser("report", help="category table from a run directory or results.jsonl")
    p.add_argument("source")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--cases", nargs="*", help="case directories, for completed/total counts")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("render", help="render slide images")
    p.add_argument("file")
    p.add_argument("outdir")
    p.add_argument("--command", help="renderer command template with {input} and {outdir}")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("gen-fixtures", help="write the fixture case suite and an optional deck corpus")
    p.add_argument("outdir")
    p.add_argument("--corpus", type=int, default=0, help="also write this many corpus decks")
    p.add_argument("--no-cases", action="store_true")
    p.set_defaults(func=cmd_gen_fixtures)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DeckforgeError as err:
        print(f"error [{err.kind}]: {err.message}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
