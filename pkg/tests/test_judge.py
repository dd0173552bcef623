import json

import pytest
from hypothesis import given
from hypothesis import strategies as st
from PIL import Image

from conftest import CASES
from deckforge.bench import load_case
from deckforge.errors import JudgeFailedError, UnknownCategoryError
from deckforge.gateway import ModelGateway, ScriptedTransport
from deckforge.judge import (
    CaseResult,
    JudgeConfig,
    StyleTarget,
    Verdict,
    aggregate,
    aggregate_batch_scores,
    evaluate_case,
    half_up,
    judge_if,
    judge_vq,
    make_batches,
)


def vq_answer(score):
    return json.dumps({"visual_quality_score": score, "visual_quality_reason": f"score {score}"})


def if_answer(score):
    return json.dumps({"instruction_following_score": score, "instruction_following_reason": "ok"})


@pytest.fixture
def slides(tmp_path):
    """Twelve tiny slide images for ground truth and prediction."""
    gt, pred = [], []
    for i in range(12):
        for kind, store in (("gt", gt), ("pred", pred)):
            path = tmp_path / f"{kind}-{i}.png"
            Image.new("RGB", (8, 8), (i, 0, 0) if kind == "gt" else (0, i, 0)).save(path)
            store.append(path)
    return gt, pred


def test_if_request_carries_no_images():
    transport = ScriptedTransport(lambda r, t: if_answer(4))
    verdict = judge_if("do it", StyleTarget("keep it blue"), ("json-diff", "No differences"), ModelGateway(transport))
    req = transport.calls[0][0]
    assert req.images == [] and req.temperature == 0.2 and req.top_k == 1
    assert "keep it blue" in req.user_prompt and "No differences" in req.user_prompt
    assert (verdict.score, verdict.modality) == (4, "json-diff")


def test_vq_batches_and_labels(slides):
    gt, pred = slides
    scores = iter([4, 2, 3])
    transport = ScriptedTransport(lambda r, t: vq_answer(next(scores)))
    kept = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 11]
    verdict = judge_vq("do it", None, gt, pred, kept, ModelGateway(transport))
    assert [len(req.images) for req, _ in transport.calls] == [10, 10, 2]
    labels = [img.label for img in transport.calls[2][0].images]
    assert labels == ["Ground Truth - Slide 12", "Prediction - Slide 12"]
    first = [img.label for img in transport.calls[0][0].images]
    assert first[0] == "Ground Truth - Slide 1" and first[5] == "Prediction - Slide 1"
    assert verdict.score == 2 and verdict.batch_scores == [4, 2, 3] and verdict.reason == "score 2"


def test_no_kept_slides_scores_five_without_a_call(slides):
    transport = ScriptedTransport(lambda r, t: vq_answer(0))
    verdict = judge_vq("x", None, *slides, [], ModelGateway(transport))
    assert verdict.score == 5 and transport.calls == []


def test_judge_fails_after_one_retry(slides):
    transport = ScriptedTransport(lambda r, t: "I'd give it a four")
    gw = ModelGateway(transport)
    with pytest.raises(JudgeFailedError):
        judge_if("x", None, ("json-diff", "diff"), gw)
    assert len(transport.calls) == 2
    with pytest.raises(JudgeFailedError):
        judge_vq("x", None, *slides, [0], gw)
    assert len(transport.calls) == 4


@pytest.mark.parametrize("how,scores,expected", [
    ("min", [4, 2, 5], 2),
    ("mean", [4, 5], 5),
    ("mean", [2, 3, 3], 3),
    ("floor-of-mean", [4, 5], 4),
])
def test_batch_aggregation(how, scores, expected):
    assert aggregate_batch_scores(scores, how) == expected


def test_batch_aggregation_rejects_unknown():
    with pytest.raises(ValueError):
        aggregate_batch_scores([1], "max")
    with pytest.raises(ValueError):
        JudgeConfig(vq_aggregation="max")
    with pytest.raises(ValueError):
        JudgeConfig(batch_size=6)


@given(st.lists(st.integers(0, 100), max_size=40), st.integers(1, 5))
def test_make_batches_partition(kept, size):
    batches = make_batches(kept, size)
    assert [i for b in batches for i in b] == kept
    assert all(1 <= len(b) <= size for b in batches)
    assert len(batches) == -(-len(kept) // size)


@pytest.mark.parametrize("value,text", [(3.165, "3.17"), (3.125, "3.13"), (2.5, "2.50"), (19 / 6, "3.17"),
                                        (0.005, "0.01"), (4.0, "4.00")])
def test_half_up(value, text):
    assert half_up(value) == text


def result(cid, cats, if_s, vq_s):
    return CaseResult(cid, cats, Verdict(if_s, "r", "IF") if if_s is not None else None,
                      Verdict(vq_s, "r", "VQ") if vq_s is not None else None)


def test_aggregate_counts_failures_as_zero():
    report = aggregate([result("a", ["Content"], 5, 4), result("b", ["Content", "Layout"], None, 3),
                        result("c", ["Layout", "Layout"], 2, 2)])
    content, layout, total = report.row("Content"), report.row("Layout"), report.row("All Cases")
    assert (content.cases, content.if_mean, content.vq_mean, content.judge_failed) == (2, 2.5, 3.5, 1)
    assert (layout.cases, layout.if_mean) == (2, 1.0)
    assert (total.cases, total.if_mean, total.vq_mean) == (3, 7 / 3, 3.0)
    assert [r.name for r in report.rows] == ["Content", "Layout", "All Cases"]


def test_aggregate_unknown_category():
    with pytest.raises(UnknownCategoryError):
        aggregate([result("a", ["Sound"], 1, 1)])
    assert aggregate([]).rows == []


def test_verdict_and_result_round_trip():
    r = result("a", ["Styling"], 3, None)
    assert r.judge_failed and r.vq_score == 0
    assert CaseResult.from_dict(json.loads(json.dumps(r.to_dict()))) == r
    with pytest.raises(ValueError):
        Verdict(6, "r", "IF")
    with pytest.raises(ValueError):
        Verdict(True, "r", "IF")


def test_style_target_save_load(tmp_path):
    target = StyleTarget("Dark background, white text", notes="keep logo")
    target.save(tmp_path / "s.json")
    loaded = StyleTarget.load(tmp_path / "s.json")
    assert loaded == target and not loaded.verified
    assert loaded.block().endswith("Notes: keep logo")
    with pytest.raises(ValueError):
        StyleTarget("  ")


def test_evaluate_case_records_failures(tmp_path):
    case = load_case(CASES / "content-q2")
    transport = ScriptedTransport(lambda r, t: "no json today")
    res = evaluate_case(case, case.original, ModelGateway(transport), artifacts_dir=tmp_path / "a")
    assert res.judge_failed and res.if_score == 0
    stages = [e["stage"] for e in res.errors]
    assert "judge-if" in stages and "judge-vq" in stages
    assert (tmp_path / "a" / "judge_diff.txt").is_file()
    assert res.total_differences > 0


def test_evaluate_identity_prediction(tmp_path):
    case = load_case(CASES / "content-q2")
    answers = {"judge-if": if_answer(5), "judge-vq": vq_answer(1),
               "style-target": json.dumps({"overview_instructions": "match the deck"})}
    transport = ScriptedTransport(lambda r, t: answers[r.tag])
    res = evaluate_case(case, case.ground_truth, ModelGateway(transport))
    assert res.if_score == 5 and res.vq_score == 5  # nothing survives screening
    assert res.screened_slide_indices == [] and res.total_differences == 0
    assert "judge-vq" not in [r.tag for r, _ in transport.calls]
