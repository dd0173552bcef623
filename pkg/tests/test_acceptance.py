"""The nine acceptance criteria, one test each.

Each test records its outcome in ``conftest.ACCEPTANCE``; the terminal summary
prints one PASS/FAIL line per criterion.  Run on its own with::

    pytest tests/test_acceptance.py -v
"""

import copy
import hashlib
import json
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

import conftest
from conftest import CASES, DATA
from deckforge.agent import AgentConfig, run_agent
from deckforge.bench import SuiteManifest, load_case, run_suite
from deckforge.deck import emu_to_points, parse_deck, pptx_to_json, serialize_snapshot, snapshot
from deckforge.diff import diff_snapshots, json_change_ratio, select_modality, xml_change_ratio
from deckforge.edit import EditProgram, apply_edit_program, apply_xml_patch
from deckforge.fixtures import multi_shape_deck, sample_deck, write_corpus
from deckforge.gateway import JUDGE_TEMPERATURE, JUDGE_TOP_K, Cassette, ModelGateway, ModelRequest
from deckforge.judge import JudgeConfig, half_up, make_batches
from deckforge.package import open_package, package_bytes, save_package, validate_package
from deckforge.visual import RenderConfig, render_deck, screen
from patchsuite import invalid_patch_sets, valid_patch_sets


@contextmanager
def criterion(n: int, title: str):
    conftest.ACCEPTANCE[n] = (title, False)
    yield
    conftest.ACCEPTANCE[n] = (title, True)


def replay(name: str) -> ModelGateway:
    return ModelGateway(Cassette(DATA / name, "replay"))


# -- 1 ---------------------------------------------------------------------

def test_round_trip_fidelity(tmp_path):
    with criterion(1, "round-trip fidelity over 10 fixture decks"):
        start = time.perf_counter()
        paths = write_corpus(tmp_path / "corpus", 10)
        assert len(paths) >= 10
        for path in paths:
            pkg = open_package(path)
            out = tmp_path / ("rt-" + path.name)
            save_package(pkg, out)
            again = open_package(out)
            assert again.part_names() == pkg.part_names()
            for name in pkg.part_names():
                assert again.parts[name] == pkg.parts[name], f"{path.name}:{name}"
            runs = {serialize_snapshot(pptx_to_json(path)) for _ in range(3)}
            assert len(runs) == 1
        assert time.perf_counter() - start < 10


# -- 2 ---------------------------------------------------------------------

IDENTITY_KEYS = {"filename", "slide_number", "slide_id", "shape_id"}


def leaf_paths(node, path=()):
    """Every scalar leaf, skipping identity keys.  Independent of the diff engine."""
    if isinstance(node, dict):
        for k, v in node.items():
            if k not in IDENTITY_KEYS:
                yield from leaf_paths(v, path + (k,))
    elif isinstance(node, list):
        for i, v in enumerate(node):
            yield from leaf_paths(v, path + (i,))
    else:
        yield path


def mutate(value):
    if isinstance(value, bool):
        return not value
    if isinstance(value, (int, float)):
        return value + 1000
    if isinstance(value, str):
        return value + " (changed)"
    return "was-null"


def inject(doc, k, seed=0):
    doc = copy.deepcopy(doc)
    leaves = list(leaf_paths(doc))
    assert len(leaves) >= k
    rng = np.random.default_rng(seed)
    for i in rng.choice(len(leaves), size=k, replace=False):
        *head, last = leaves[i]
        node = doc
        for seg in head:
            node = node[seg]
        node[last] = mutate(node[last])
    return doc


def test_diff_oracle():
    with criterion(2, "diff counts k injected leaf mutations, similarity 1-k/(k+100)"):
        start = time.perf_counter()
        base = snapshot(parse_deck(multi_shape_deck().build()))
        for k in (0, 1, 5, 50):
            for seed in range(3):
                report = diff_snapshots(base, inject(base, k, seed))
                assert report.total_differences == k
                assert abs(report.similarity_score - (1 - k / (k + 100))) < 1e-9
        assert time.perf_counter() - start < 5


# -- 3 ---------------------------------------------------------------------

def test_transactional_editing():
    with criterion(3, "20 invalid patch sets leave bytes unchanged, 20 valid ones validate"):
        start = time.perf_counter()
        pkg = multi_shape_deck().build()
        before = hashlib.sha256(package_bytes(pkg)).hexdigest()
        valid, invalid = valid_patch_sets(), invalid_patch_sets()
        assert len(valid) == len(invalid) == 20
        for i, ps in enumerate(invalid):
            outcome = apply_xml_patch(pkg, ps)
            assert not outcome.ok, i
            assert hashlib.sha256(package_bytes(outcome.package)).hexdigest() == before, i
        for i, ps in enumerate(valid):
            outcome = apply_xml_patch(pkg, ps)
            assert outcome.ok, (i, outcome.failed_step)
            assert validate_package(outcome.package).ok
            parse_deck(outcome.package)
            assert package_bytes(outcome.package) != package_bytes(pkg)
        assert hashlib.sha256(package_bytes(pkg)).hexdigest() == before
        assert time.perf_counter() - start < 10


# -- 4 ---------------------------------------------------------------------

def ratios(case_id):
    case = load_case(CASES / case_id)
    docs = [snapshot(parse_deck(p)) for p in (case.original, case.ground_truth)]
    return json_change_ratio(*docs), xml_change_ratio(case.original, case.ground_truth)


def test_modality_selection():
    with criterion(4, "theme rewrite picks xml-diff, bulk text picks json-diff, tie picks json-diff"):
        j, x = ratios("styling-theme")
        assert x > j and select_modality(j, x) == "xml-diff"
        j, x = ratios("content-q2")
        assert j > x and select_modality(j, x) == "json-diff"
        assert select_modality(0.25, 0.25) == "json-diff"
        assert select_modality(0.0, 0.0) == "json-diff"


# -- 5 ---------------------------------------------------------------------

def test_ssim_numerics(tmp_path):
    from deckforge.visual import ssim

    with criterion(5, "SSIM identity, black/white closed form, screening keeps the one edited slide"):
        rng = np.random.default_rng(3)
        img = Image.fromarray(rng.integers(0, 256, (64, 96, 3), dtype=np.uint8))
        assert abs(ssim(img, img.copy()) - 1.0) < 1e-6
        black = Image.new("RGB", (64, 64), (0, 0, 0))
        white = Image.new("RGB", (64, 64), (255, 255, 255))
        c1 = (0.01 * 255) ** 2
        assert abs(ssim(black, white) - c1 / (255 ** 2 + c1)) < 1e-6

        original = sample_deck(seed=0, n_slides=10).build()
        edited = apply_edit_program(original, EditProgram([{"op": "set_background", "slides": [5], "color": "FFC000"}]))
        assert edited.ok
        save_package(original, tmp_path / "gt.pptx")
        save_package(edited.package, tmp_path / "pred.pptx")
        cfg = RenderConfig(command="builtin")
        gt = render_deck(tmp_path / "gt.pptx", cfg, tmp_path / "gt")
        pred = render_deck(tmp_path / "pred.pptx", cfg, tmp_path / "pred")
        assert len(gt) == len(pred) == 10
        result = screen(pred, gt, 0.995)
        assert result.kept == [4]
        assert not result.count_mismatch


# -- 6 ---------------------------------------------------------------------

def test_loop_bounds():
    with criterion(6, "always-failing verifier gives 3 attempts, first-pass gives 1"):
        case = load_case(CASES / "content-q2")
        deck = case.root / "original.pptx"
        cfg = AgentConfig()
        assert cfg.max_iterations == 3

        failing = run_agent(deck, case.instruction, cfg, replay("agent_fail.cassette.jsonl"))
        assert failing.trace.attempts() == 3
        assert failing.ok and not failing.trace.result["verified"]
        assert validate_package(failing.package).ok
        parse_deck(failing.package)

        passing = run_agent(deck, case.instruction, AgentConfig(), replay("agent_pass.cassette.jsonl"))
        assert passing.trace.attempts() == 1
        assert passing.ok and passing.trace.result["verified"]
        assert passing.package == failing.package


# -- 7 ---------------------------------------------------------------------

def cassette_entries(name):
    return [json.loads(line) for line in (DATA / name).read_text(encoding="utf-8").splitlines() if line.strip()]


def test_judge_context_separation(tmp_path):
    with criterion(7, "IF requests carry no images, VQ requests carry no diff text, judge sampling 0.2/1, batches <= 5"):
        entries = cassette_entries("suite.cassette.jsonl")
        if_reqs = [e["request"] for e in entries if e["request"]["tag"] == "judge-if"]
        vq_reqs = [e["request"] for e in entries if e["request"]["tag"] == "judge-vq"]
        assert len(if_reqs) == 6 and vq_reqs
        assert all(r["images"] == [] for r in if_reqs)
        for r in if_reqs + vq_reqs:
            assert r["role"] == "judge"
            assert r["temperature"] == 0.2 and r["top_k"] == 1

        # replay the suite to get the exact diff text each IF judge saw
        manifest = SuiteManifest.load(DATA / "suite.yaml")
        manifest.output_dir = tmp_path / "run"
        run_suite(manifest, replay("suite.cassette.jsonl"))
        diff_lines = set()
        for f in (tmp_path / "run").rglob("judge_diff.txt"):
            diff_lines |= {ln.strip() for ln in f.read_text(encoding="utf-8").splitlines() if len(ln.strip()) > 12}
        assert diff_lines
        for r in vq_reqs:
            text = r["system_prompt"] + r["user_prompt"]
            assert "SMART DIFF" not in text
            assert not any(line in text for line in diff_lines)
            assert len(r["images"]) <= 10  # five ground-truth/prediction pairs

        judge = ModelRequest.for_judge("m", "s", "u")
        assert (judge.temperature, judge.top_k) == (JUDGE_TEMPERATURE, JUDGE_TOP_K) == (0.2, 1)
        assert JudgeConfig().batch_size == 5
        assert [len(b) for b in make_batches(list(range(12)), 5)] == [5, 5, 2]


# -- 8 ---------------------------------------------------------------------

# hand-computed from the recorded verdicts (IF, VQ) per case:
#   content-q2 (5, 5)  layout-resize (3, 3)  styling-theme (1, 0)
#   interactivity-fade (2, 5)  structure-notes (3, 0)  structure-a11y (5, 5)
EXPECTED = {
    "Content": ((5 + 3) / 2, (5 + 0) / 2, "4.00", "2.50"),
    "Layout": (3.0, 3.0, "3.00", "3.00"),
    "Styling": (1.0, 0.0, "1.00", "0.00"),
    "Interactivity": ((2 + 5) / 2, (5 + 5) / 2, "3.50", "5.00"),
    "Structure": ((3 + 5) / 2, (0 + 5) / 2, "4.00", "2.50"),
    "All Cases": ((5 + 3 + 1 + 2 + 3 + 5) / 6, (5 + 3 + 0 + 5 + 0 + 5) / 6, "3.17", "3.00"),
}


def test_end_to_end_replay(tmp_path):
    with criterion(8, "6-case suite replays to a byte-identical report with hand-computed means"):
        outputs = []
        for run, workers in (("a", 1), ("b", 3)):
            manifest = SuiteManifest.load(DATA / "suite.yaml")
            manifest.output_dir = tmp_path / run
            manifest.workers = workers
            record = run_suite(manifest, replay("suite.cassette.jsonl"))
            outputs.append({f: (tmp_path / run / f).read_bytes() for f in ("report.txt", "report.csv", "report.json")})
        assert outputs[0] == outputs[1]
        assert outputs[0]["report.txt"] == (DATA / "expected_report.txt").read_bytes()

        rows = {r.name: r for r in record.report.rows}
        for name, (if_mean, vq_mean, if_shown, vq_shown) in EXPECTED.items():
            assert rows[name].if_mean == pytest.approx(if_mean), name
            assert rows[name].vq_mean == pytest.approx(vq_mean), name
            assert (half_up(rows[name].if_mean), half_up(rows[name].vq_mean)) == (if_shown, vq_shown), name
        by_case = {r.case_id: r for r in record.results}
        assert (by_case["content-q2"].if_score, by_case["content-q2"].vq_score) == (5, 5)
        for untouched in ("layout-resize", "styling-theme"):
            assert by_case[untouched].if_score <= 3 and by_case[untouched].vq_score <= 3


# -- 9 ---------------------------------------------------------------------

def test_unit_exactness():
    with criterion(9, "EMU conversions exact, 3.2x2.4 inch resize lands at 230.4x172.8 pt"):
        assert emu_to_points(914400) == 72.0
        assert emu_to_points(12700) == 1.0
        doc = pptx_to_json(CASES / "layout-resize" / "ground_truth.pptx")
        pics = [s for s in doc["slides"][0]["shapes"] if s["kind"] == "picture"]
        assert len(pics) == 2
        for p in pics:
            assert (p["width"], p["height"]) == (230.4, 172.8)


if __name__ == "__main__":
    raise SystemExit(pytest.main([str(Path(__file__)), "-v"]))
