"""Regenerate the frozen test data in this directory.

Writes the six fixture cases, the external predictions, the suite manifest and
three cassettes recorded against the scripted stand-in models::

    python3 tests/data/record.py

Only rerun this when the fixture builders or prompt templates change; the
expected values in the tests are frozen against its output.
"""

import shutil
import sys
from pathlib import Path

from deckforge.agent import AgentConfig, run_agent
from deckforge.bench import SuiteManifest, load_case, run_suite
from deckforge.edit import EditProgram, apply_edit_program
from deckforge.fixtures import generate_cases
from deckforge.gateway import Cassette, ModelGateway, ScriptedTransport
from deckforge.package import save_package
from deckforge.scripted import OracleEditor, ScriptedModels

HERE = Path(__file__).resolve().parent

MANIFEST = """\
cases: cases
mode: external
predictions_dir: predictions
output_dir: run
cassette: suite.cassette.jsonl
workers: 1
"""

# how far each external prediction got
PARTIAL = {
    "interactivity-fade": [{"op": "set_transition", "slides": [1], "preset": "fade"}],
    "structure-notes": [{"op": "set_notes", "slide": 1, "text": "Welcome everyone"}],
}
IDENTITY = ("content-q2", "structure-a11y")


def write_predictions(case_dirs):
    out = HERE / "predictions"
    shutil.rmtree(out, ignore_errors=True)
    out.mkdir()
    for d in case_dirs:
        case = load_case(d)
        if case.case_id in IDENTITY:
            pkg = case.ground_truth
        elif case.case_id in PARTIAL:
            outcome = apply_edit_program(case.original, EditProgram(PARTIAL[case.case_id]))
            assert outcome.ok, outcome.to_dict()
            pkg = outcome.package
        else:
            pkg = case.original
        save_package(pkg, out / f"{case.case_id}.pptx")


def recording_gateway(path, models):
    return ModelGateway(Cassette(path, "record", ScriptedTransport(models)))


def main():
    shutil.rmtree(HERE / "cases", ignore_errors=True)
    dirs = generate_cases(HERE / "cases")
    write_predictions(dirs)
    (HERE / "suite.yaml").write_text(MANIFEST, encoding="utf-8")

    manifest = SuiteManifest.load(HERE / "suite.yaml")
    manifest.output_dir = HERE / "_scratch"
    run_suite(manifest, recording_gateway(HERE / "suite.cassette.jsonl", ScriptedModels()))
    shutil.rmtree(HERE / "_scratch")

    case = load_case(HERE / "cases" / "content-q2")
    for name, verdict in (("agent_fail", "fail"), ("agent_pass", "pass")):
        gw = recording_gateway(HERE / f"{name}.cassette.jsonl", ScriptedModels(OracleEditor(verdict=verdict)))
        result = run_agent(case.root / "original.pptx", case.instruction, AgentConfig(), gw)
        print(name, result.trace.attempts(), result.ok, file=sys.stderr)


if __name__ == "__main__":
    main()
