import io
import json

import pytest
from PIL import Image

from deckforge.errors import NoJSONFoundError, ReplayMissError, SchemaInvalidError, SchemaViolationError, TransportError
from deckforge.gateway import (
    API_KEY_ENV,
    Cassette,
    ImageInput,
    LiveTransport,
    ModelGateway,
    ModelRequest,
    ScriptedTransport,
    downscale_png,
    extract_json,
    fingerprint,
    parse_structured,
)

SCHEMA = {"type": "object", "properties": {"score": {"type": "integer", "minimum": 0, "maximum": 5}},
          "required": ["score"]}


def png(w, h, color=(10, 200, 30), **save):
    buf = io.BytesIO()
    Image.new("RGB", (w, h), color).save(buf, format="PNG", **save)
    return buf.getvalue()


def request(**kw):
    return ModelRequest("test-model", "system", "user prompt", output_schema=SCHEMA, **kw)


def test_extract_json_skips_prose_and_fences():
    assert extract_json('Sure! ```json\n{"score": 3}\n``` done') == {"score": 3}
    assert extract_json('{bad} then {"a": {"b": 1}}') == {"a": {"b": 1}}
    with pytest.raises(NoJSONFoundError):
        extract_json("no braces here")
    with pytest.raises(NoJSONFoundError):
        extract_json("[1, 2, 3]")


def test_parse_structured_reports_path():
    assert parse_structured('{"score": 4}', SCHEMA) == {"score": 4}
    with pytest.raises(SchemaViolationError) as err:
        parse_structured('{"score": 9}', SCHEMA)
    assert err.value.details["path"] == "score"


def test_retry_appends_turns_then_succeeds():
    answers = iter(["I think it's good", '{"score": 7}', '{"score": 2}'])
    transport = ScriptedTransport(lambda req, turns: next(answers))
    resp = ModelGateway(transport).complete(request())
    assert resp.ok and resp.parsed == {"score": 2} and resp.attempts == 3
    turns = transport.calls[-1][1]
    assert [t["role"] for t in turns] == ["assistant", "user", "assistant", "user"]
    assert turns[0]["content"] == "I think it's good"
    assert "maximum" in turns[3]["content"]
    assert len(set(resp.fingerprints)) == 3


def test_retries_exhausted():
    transport = ScriptedTransport(lambda req, turns: "nope")
    with pytest.raises(SchemaInvalidError) as err:
        ModelGateway(transport).complete(request(max_retries=1))
    assert len(transport.calls) == 2
    assert err.value.details["response"] == "nope"


def test_validator_hook_counts_as_schema_failure():
    answers = iter(['{"score": 1}', '{"score": 5}'])

    def only_five(value):
        if value["score"] != 5:
            raise SchemaViolationError("score must be 5 here", path="score")

    resp = ModelGateway(ScriptedTransport(lambda r, t: next(answers))).complete(request(), only_five)
    assert resp.parsed == {"score": 5} and resp.attempts == 2


def test_plain_text_without_schema():
    resp = ModelGateway(ScriptedTransport(lambda r, t: "free text")).complete(ModelRequest("m", "s", "u"))
    assert resp.parsed == "free text"


def test_judge_defaults():
    req = ModelRequest.for_judge("judge", "s", "u")
    assert (req.temperature, req.top_k, req.role) == (0.2, 1, "judge")
    assert ModelRequest("m", "s", "u").temperature == 0.0


def test_fingerprint_sensitivity():
    base = request()
    assert fingerprint(base) == fingerprint(request())
    assert fingerprint(base) != fingerprint(ModelRequest("other", "system", "user prompt", output_schema=SCHEMA))
    assert fingerprint(base) != fingerprint(base, [{"role": "user", "content": "retry"}])
    with_img = request(images=[ImageInput("Slide 1", png(8, 8))])
    assert fingerprint(base) != fingerprint(with_img)


def test_image_hash_ignores_png_encoding():
    a = ImageInput("x", png(16, 16, compress_level=0))
    b = ImageInput("x", png(16, 16, compress_level=9))
    assert a.data != b.data and a.sha256 == b.sha256
    assert a.sha256 != ImageInput("x", png(16, 16, color=(0, 0, 0))).sha256


def test_downscale():
    big = png(3000, 1500)
    with Image.open(io.BytesIO(downscale_png(big, 1536))) as im:
        assert im.size == (1536, 768)
    small = png(100, 50)
    assert downscale_png(small, 1536) is small
    assert downscale_png(big, None) is big


def test_gateway_downscales_before_sending():
    seen = []
    transport = ScriptedTransport(lambda req, turns: seen.append(req) or '{"score": 1}')
    ModelGateway(transport, long_edge=64).complete(request(images=[ImageInput("s", png(640, 320))]))
    with Image.open(io.BytesIO(seen[0].images[0].data)) as im:
        assert im.size == (64, 32)


def test_cassette_record_then_replay(tmp_path):
    path = tmp_path / "c.jsonl"
    answers = iter(["oops", '{"score": 3}'])
    rec = ModelGateway(Cassette(path, "record", ScriptedTransport(lambda r, t: next(answers))))
    first = rec.complete(request(tag="judge-if"))
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    entry = json.loads(lines[0])
    assert entry["request"]["tag"] == "judge-if" and entry["response"]["raw_text"] == "oops"

    replayed = ModelGateway(Cassette(path, "replay")).complete(request(tag="judge-if"))
    assert replayed.parsed == first.parsed and replayed.fingerprints == first.fingerprints
    with pytest.raises(ReplayMissError):
        ModelGateway(Cassette(path, "replay")).complete(ModelRequest("m", "s", "unseen", output_schema=SCHEMA))


def test_replay_repeats_last_entry_for_repeated_requests(tmp_path):
    path = tmp_path / "c.jsonl"
    answers = iter(['{"score": 1}', '{"score": 2}'])
    rec = ModelGateway(Cassette(path, "record", ScriptedTransport(lambda r, t: next(answers))))
    rec.complete(request())
    rec.complete(request())
    gw = ModelGateway(Cassette(path, "replay"))
    assert [gw.complete(request()).parsed["score"] for _ in range(3)] == [1, 2, 2]


def test_cassette_has_no_secrets(tmp_path, monkeypatch):
    monkeypatch.setenv(API_KEY_ENV, "sk-very-secret")
    path = tmp_path / "c.jsonl"
    ModelGateway(Cassette(path, "record", ScriptedTransport(lambda r, t: '{"score": 0}'))).complete(request())
    assert "sk-very-secret" not in path.read_text()


def test_cassette_mode_checks():
    with pytest.raises(ValueError):
        Cassette(None, "record")
    with pytest.raises(ValueError):
        Cassette(None, "fast-forward")


def test_live_transport_requires_endpoint(monkeypatch):
    monkeypatch.delenv("DECKFORGE_API_BASE", raising=False)
    with pytest.raises(TransportError):
        LiveTransport()


def test_live_transport_body():
    t = LiveTransport(base_url="http://localhost:9", api_key="k")
    req = ModelRequest.for_judge("m", "sys", "usr", images=[ImageInput("Ground Truth - Slide 1", png(4, 4))],
                                 output_schema=SCHEMA)
    body = t.body(req, [{"role": "assistant", "content": "x"}])
    assert body["temperature"] == 0.2 and "top_k" not in body
    assert body["messages"][0] == {"role": "system", "content": "sys"}
    parts = body["messages"][1]["content"]
    assert parts[1]["text"] == "Ground Truth - Slide 1"
    assert parts[2]["image_url"]["url"].startswith("data:image/png;base64,")
    assert body["messages"][-1]["role"] == "assistant"
    assert LiveTransport(base_url="http://x", send_top_k=True).body(req, [])["top_k"] == 1


def test_live_transport_network_error():
    t = LiveTransport(base_url="http://127.0.0.1:9", timeout=0.5)
    with pytest.raises(TransportError):
        t.send(ModelRequest("m", "s", "u"), [])


def test_gateway_log():
    gw = ModelGateway(ScriptedTransport(lambda r, t: '{"score": 5}'))
    gw.complete(request(tag="router"))
    assert gw.log[0]["tag"] == "router" and gw.log[0]["attempts"] == 1 and gw.log[0]["ok"]
