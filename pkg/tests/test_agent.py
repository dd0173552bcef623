import json

import pytest

from deckforge.agent import (
    AgentConfig,
    VerifierFeedback,
    heuristic_route,
    mentioned_slides,
    plan_content,
    route,
    run_agent,
    synthesize_edit,
    verify,
)
from deckforge.deck import parse_deck, snapshot
from deckforge.edit import EditProgram, apply_edit_program
from deckforge.errors import InvalidParameterError, SchemaInvalidError
from deckforge.gateway import ModelGateway, ScriptedTransport
from deckforge.package import validate_package

RENAME = {"ops": [{"op": "replace_text_all", "find": "Second Quarter", "replace": "Q2"}]}
PASS = {"pass": True, "issues": [], "suggestions": ""}
FAIL = {"pass": False, "issues": [{"slide": 1, "description": "still wrong"}], "suggestions": "try again"}


def doc_with(n):
    return {"slides": [{"shapes": []} for _ in range(n)]}


def scripted(answers: dict):
    """Gateway answering by request tag; values may be lists consumed in order."""
    def respond(req, turns):
        value = answers[req.tag]
        if isinstance(value, list):
            value = value.pop(0) if len(value) > 1 else value[0]
        return value if isinstance(value, str) else json.dumps(value)
    transport = ScriptedTransport(respond)
    return ModelGateway(transport), transport


def tags(transport):
    return [req.tag for req, _ in transport.calls]


def quiet(**kw):
    return AgentConfig(render=None, **kw)


def test_mentioned_slides():
    assert mentioned_slides("fix slides 2-4 and 7", 10) == [2, 3, 4, 7]
    assert mentioned_slides("on slide 12", 10) == []
    assert mentioned_slides("nothing here", 3) == []


@pytest.mark.parametrize("instruction,n,path,targets", [
    ("Replace 'FY23' with 'FY24' in every slide", 22, "programmatic", list(range(1, 23))),
    ("Move the chart legend on slide 2 to the bottom", 6, "xml", [2]),
    ("Fix the typo on slide 3", 6, "xml", [3]),
    ("Switch every slide to a dark theme", 8, "xml", list(range(1, 9))),
    ("Rewrite the bullet text on all slides", 4, "xml", [1, 2, 3, 4]),
])
def test_heuristic_route(instruction, n, path, targets):
    decision = heuristic_route(instruction, doc_with(n))
    assert (decision.path, decision.target_slides, decision.source) == (path, targets, "heuristic")


def test_forced_path_skips_the_model():
    gw, transport = scripted({})
    decision = route("Fix the typo", doc_with(2), gw, AgentConfig(forced_path="prog"))
    assert decision.path == "programmatic" and decision.source == "forced"
    assert transport.calls == []
    with pytest.raises(ValueError):
        AgentConfig(forced_path="sideways")


def test_router_failure_falls_back_to_heuristic():
    gw, transport = scripted({"router": {"path": "xml", "target_slides": [9], "rationale": "r"}})
    decision = route("Fix the typo on slide 2", doc_with(3), gw, AgentConfig(max_retries=1))
    assert decision.source == "heuristic" and decision.target_slides == [2]
    assert len(transport.calls) == 2


def test_router_decision_from_model():
    gw, _ = scripted({"router": {"path": "programmatic", "target_slides": [3, 1, 3], "rationale": "bulk"}})
    decision = route("anything", doc_with(3), gw)
    assert (decision.path, decision.target_slides, decision.source) == ("programmatic", [1, 3], "model")


def test_route_needs_slides():
    with pytest.raises(InvalidParameterError):
        route("x", {"slides": []})


def test_plan_rejects_out_of_range_slides():
    bad = {"rewritten_instruction": "r", "objectives": [{"slide": 5, "objective": "o"}]}
    gw, transport = scripted({"plan": bad})
    with pytest.raises(SchemaInvalidError):
        plan_content("x", doc_with(2), gw, AgentConfig(max_retries=1))
    assert "slides 1 to 2" in transport.calls[-1][1][-1]["content"]


def test_empty_instruction_makes_no_call(deck):
    gw, transport = scripted({})
    doc = snapshot(parse_deck(deck))
    with pytest.raises(InvalidParameterError):
        synthesize_edit("   ", "xml", doc, deck, gw)
    result = run_agent(deck, "", quiet(), gw)
    assert not result.ok and result.package is deck
    assert transport.calls == []


def test_synthesized_program_is_checked(deck):
    doc = snapshot(parse_deck(deck))
    gw, transport = scripted({"synthesize-program": [{"ops": [{"op": "no_such_op"}]}, RENAME]})
    edit = synthesize_edit("rename", "programmatic", doc, deck, gw)
    assert isinstance(edit, EditProgram) and len(transport.calls) == 2


def test_verify_short_circuits_on_failed_apply(deck):
    outcome = apply_edit_program(deck, {"ops": [{"op": "delete_slide", "slide_number": 9}]})
    assert not outcome.ok
    gw, transport = scripted({})
    fb = verify("delete slide 9", outcome, gw)
    assert not fb.passed and fb.source == "validation"
    assert "invalid-parameter" in fb.issues[0][1]
    assert transport.calls == []


def test_verifier_cannot_pass_with_issues(deck):
    outcome = apply_edit_program(deck, RENAME)
    bogus = {"pass": True, "issues": [{"slide": 1, "description": "x"}]}
    gw, transport = scripted({"verify": [bogus, PASS]})
    assert verify("rename", outcome, gw).passed
    assert len(transport.calls) == 2
    with pytest.raises(ValueError):
        VerifierFeedback(True, [(1, "x")])


def test_loop_stops_on_first_pass(deck):
    gw, transport = scripted({"router": {"path": "programmatic", "target_slides": [1], "rationale": "r"},
                              "plan": {"rewritten_instruction": "r", "objectives": [{"slide": 1, "objective": "o"}]},
                              "synthesize-program": RENAME, "verify": PASS})
    result = run_agent(deck, "rename the title", quiet(), gw)
    assert result.ok and result.trace.result["verified"]
    assert tags(transport) == ["router", "plan", "synthesize-program", "verify"]
    titles = [s["text"]["paragraphs"][0]["runs"][0]["text"]
              for s in snapshot(parse_deck(result.package))["slides"][1]["shapes"][:1]]
    assert titles and "Second Quarter" not in titles[0]


def test_loop_is_bounded_and_feeds_back(deck):
    gw, transport = scripted({"router": {"path": "xml", "target_slides": [1], "rationale": "r"},
                              "synthesize-xml": {"patches": []}, "verify": FAIL})
    result = run_agent(deck, "do something", quiet(max_iterations=2), gw)
    assert tags(transport) == ["router", "synthesize-xml", "verify", "synthesize-xml", "verify"]
    assert result.trace.attempts() == 2 and not result.trace.result["verified"]
    second_synth = transport.calls[3][0]
    assert "still wrong" in second_synth.user_prompt
    assert len(transport.calls) <= quiet(max_iterations=2).call_bound()


def test_reflection_disabled_stops_after_one(deck):
    gw, transport = scripted({"router": {"path": "xml", "target_slides": [1], "rationale": "r"},
                              "synthesize-xml": {"patches": []}, "verify": FAIL})
    result = run_agent(deck, "do something", quiet(reflection_enabled=False), gw)
    assert result.trace.attempts() == 1


def test_failed_edits_leave_input_untouched(deck):
    bad = {"ops": [{"op": "set_background", "slide": 7, "color": "000000"}]}
    gw, _ = scripted({"router": {"path": "programmatic", "target_slides": [1], "rationale": "r"},
                      "plan": {"rewritten_instruction": "r", "objectives": [{"slide": 1, "objective": "o"}]},
                      "synthesize-program": bad, "verify": PASS})
    result = run_agent(deck, "paint slide 7", quiet(), gw)
    assert not result.ok and result.package is deck
    assert result.trace.attempts() == 3
    assert validate_package(result.package).ok


def test_no_gateway_routes_then_stops(deck):
    result = run_agent(deck, "Fix the typo on slide 2", quiet())
    assert not result.ok and result.trace.steps[0]["decision"]["source"] == "heuristic"


def test_verifier_gets_changed_slides_only(deck):
    seen = []

    def respond(req, turns):
        if req.tag == "verify":
            seen.append([img.label for img in req.images])
            return json.dumps(PASS)
        if req.tag == "router":
            return json.dumps({"path": "programmatic", "target_slides": [3], "rationale": "r"})
        if req.tag == "plan":
            return json.dumps({"rewritten_instruction": "r", "objectives": [{"slide": 3, "objective": "o"}]})
        return json.dumps({"ops": [{"op": "set_background", "slide": 3, "color": "000000"}]})

    result = run_agent(deck, "darken slide 3", AgentConfig(), ModelGateway(ScriptedTransport(respond)))
    assert result.ok
    assert seen == [["Slide 3 after the edit"]]


def test_trace_is_deterministic(deck):
    def once():
        gw, _ = scripted({"router": {"path": "xml", "target_slides": [1], "rationale": "r"},
                          "synthesize-xml": {"patches": []}, "verify": FAIL})
        return run_agent(deck, "do something", quiet(), gw).trace.to_dict(timing=False)
    assert once() == once()


def test_oracle_fail_then_pass_needs_two_attempts(cases_copy):
    from deckforge.bench import load_case
    from deckforge.scripted import OracleEditor

    case = load_case(cases_copy / "interactivity-fade")
    gw = ModelGateway(ScriptedTransport(OracleEditor(verdict="fail-then-pass")))
    result = run_agent(case.original, case.instruction, quiet(), gw)
    assert result.trace.attempts() == 2 and result.trace.result["verified"]
