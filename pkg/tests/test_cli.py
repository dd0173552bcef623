import json
import shutil
import subprocess

import pytest

from conftest import CASES, DATA
from deckforge.cli import main
from deckforge.package import save_package


@pytest.fixture
def deck_file(deck, tmp_path):
    path = tmp_path / "deck.pptx"
    save_package(deck, path)
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_console_script_is_installed():
    exe = shutil.which("deckforge")
    assert exe is not None
    out = subprocess.run([exe, "--help"], capture_output=True, text=True, check=True).stdout
    for name in ("validate", "snapshot", "diff", "edit", "patch", "agent", "judge", "run-suite", "report",
                 "render", "gen-fixtures"):
        assert name in out


def test_validate(capsys, deck_file, tmp_path):
    assert run(capsys, "validate", deck_file) == (0, "ok\n", "")
    broken = tmp_path / "broken.pptx"
    broken.write_bytes(b"PK nope")
    code, _, err = run(capsys, "validate", broken)
    assert code == 1


def test_snapshot(capsys, deck_file, tmp_path):
    code, out, _ = run(capsys, "snapshot", deck_file)
    assert code == 0 and json.loads(out)["filename"] == "deck.pptx"
    run(capsys, "snapshot", deck_file, "-o", tmp_path / "s.json", "--indent", "0")
    assert json.loads((tmp_path / "s.json").read_text()) == json.loads(out)


def test_diff(capsys):
    case = CASES / "content-q2"
    code, out, _ = run(capsys, "diff", case / "ground_truth.pptx", case / "original.pptx", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["total_differences"] > 0 and doc["modality"] == "json-diff"
    code, out, _ = run(capsys, "diff", case / "ground_truth.pptx", case / "ground_truth.pptx")
    assert out.startswith("No differences")


def test_edit_and_patch(capsys, deck_file, tmp_path):
    prog = tmp_path / "p.json"
    prog.write_text(json.dumps({"ops": [{"op": "set_background", "slide": 1, "color": "112233"}]}))
    code, out, _ = run(capsys, "edit", deck_file, prog, "-o", tmp_path / "out.pptx")
    assert code == 0 and json.loads(out)["ok"]
    code, _, err = run(capsys, "edit", deck_file, prog, "-o", tmp_path / "out.pptx")
    assert code == 1 and "exists" in err

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"patches": [{"part": "ppt/slides/slide9.xml", "action": "delete",
                                            "address": {"tag": "p:sp"}}]}))
    code, out, _ = run(capsys, "patch", deck_file, bad, "-o", tmp_path / "never.pptx")
    assert code == 1 and not json.loads(out)["ok"]
    assert not (tmp_path / "never.pptx").exists()


def test_agent_replay(capsys, tmp_path):
    case = CASES / "content-q2"
    code, out, _ = run(capsys, "agent", case / "original.pptx", "--instruction-file", case / "prompt.txt",
                       "-o", tmp_path / "out.pptx", "--trace", tmp_path / "trace.json",
                       "--cassette", DATA / "agent_pass.cassette.jsonl")
    assert code == 0 and json.loads(out)["verified"]
    assert json.loads((tmp_path / "trace.json").read_text())["result"]["attempts"] == 1


def test_agent_replay_miss_is_reported(capsys, tmp_path):
    case = CASES / "content-q2"
    code, out, _ = run(capsys, "agent", case / "original.pptx", "--instruction", "something unrecorded",
                       "-o", tmp_path / "out.pptx", "--cassette", DATA / "agent_pass.cassette.jsonl")
    assert code == 1 and not json.loads(out)["ok"]


def test_judge_run_suite_and_report(capsys, tmp_path):
    code, out, _ = run(capsys, "judge", "--case", CASES / "content-q2",
                       "--prediction", DATA / "predictions" / "content-q2.pptx",
                       "--cassette", DATA / "suite.cassette.jsonl", "-o", tmp_path / "j")
    assert code == 0 and json.loads(out)["if_verdict"]["score"] == 5

    expected = (DATA / "expected_report.txt").read_text()
    code, out, _ = run(capsys, "run-suite", DATA / "suite.yaml", "--output-dir", tmp_path / "run", "--workers", 2)
    assert code == 0 and out == expected
    code, out, _ = run(capsys, "report", tmp_path / "run", "--cases", *sorted(CASES.iterdir()))
    assert out == expected
    code, out, _ = run(capsys, "report", tmp_path / "run" / "results.jsonl", "--format", "csv")
    assert out.splitlines()[0] == "category,cases,expected,if_mean,vq_mean,judge_failed"


def test_render(capsys, deck_file, tmp_path):
    code, out, _ = run(capsys, "render", deck_file, tmp_path / "png", "--command", "builtin")
    assert code == 0 and len(out.split()) == 3


def test_gen_fixtures(capsys, tmp_path):
    code, out, _ = run(capsys, "gen-fixtures", tmp_path / "fx", "--corpus", 2)
    assert code == 0
    assert len(list((tmp_path / "fx" / "cases").iterdir())) == 6
    assert len(list((tmp_path / "fx" / "corpus").glob("*.pptx"))) == 2
