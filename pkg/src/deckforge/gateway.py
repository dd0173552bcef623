"""Chat-completion client with structured outputs and record/replay cassettes.

Every model-dependent behaviour in the package goes through
:meth:`ModelGateway.complete`, so swapping the transport for a cassette in
replay mode makes the whole pipeline deterministic and offline.
"""

from __future__ import annotations

import base64
import hashlib
import io
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

from jsonschema import Draft202012Validator
from PIL import Image

from . import prompts
from .errors import (
    NoJSONFoundError,
    ReplayMissError,
    SchemaInvalidError,
    SchemaViolationError,
    TransportError,
)

JUDGE_TEMPERATURE = 0.2
JUDGE_TOP_K = 1
DEFAULT_TEMPERATURE = 0.0
DEFAULT_MAX_RETRIES = 2
DEFAULT_LONG_EDGE = 1536
CASSETTE_MODES = ("live", "record", "replay")
API_BASE_ENV = "DECKFORGE_API_BASE"
API_KEY_ENV = "DECKFORGE_API_KEY"


@dataclass(frozen=True)
class ImageInput:
    label: str
    data: bytes  # PNG bytes

    @property
    def sha256(self) -> str:
        """Hash of decoded pixels, so re-encoding the same image keeps fingerprints stable."""
        try:
            with Image.open(io.BytesIO(self.data)) as im:
                rgb = im.convert("RGB")
                return hashlib.sha256(f"{rgb.width}x{rgb.height}:".encode() + rgb.tobytes()).hexdigest()
        except Exception:
            return hashlib.sha256(self.data).hexdigest()

    @classmethod
    def from_file(cls, label: str, path) -> "ImageInput":
        return cls(label, Path(path).read_bytes())


@dataclass
class ModelRequest:
    model_id: str
    system_prompt: str
    user_prompt: str
    images: list[ImageInput] = field(default_factory=list)
    output_schema: dict | None = None
    schema_id: str | None = None
    temperature: float = DEFAULT_TEMPERATURE
    top_k: int | None = None
    max_retries: int = DEFAULT_MAX_RETRIES
    role: str = "agent"
    tag: str = ""  # free label for traces (e.g. "router", "judge-if")

    @classmethod
    def for_judge(cls, model_id: str, system_prompt: str, user_prompt: str, **kw) -> "ModelRequest":
        kw.setdefault("temperature", JUDGE_TEMPERATURE)
        kw.setdefault("top_k", JUDGE_TOP_K)
        return cls(model_id, system_prompt, user_prompt, role="judge", **kw)

    def schema_ref(self) -> str | None:
        if self.schema_id:
            return self.schema_id
        if self.output_schema is None:
            return None
        blob = json.dumps(self.output_schema, sort_keys=True).encode()
        return "sha256:" + hashlib.sha256(blob).hexdigest()[:16]


def fingerprint(req: ModelRequest, turns: list[dict] = ()) -> str:
    """Hash of model, prompts (including retry turns), image hashes and schema id."""
    doc = {
        "model_id": req.model_id,
        "system": req.system_prompt,
        "user": req.user_prompt,
        "turns": list(turns),
        "images": [[im.label, im.sha256] for im in req.images],
        "schema": req.schema_ref(),
    }
    return hashlib.sha256(json.dumps(doc, sort_keys=True, ensure_ascii=False).encode()).hexdigest()


@dataclass
class ModelResponse:
    raw_text: str
    parsed: object = None
    error: str | None = None
    usage: dict = field(default_factory=dict)
    latency_s: float = 0.0
    attempts: int = 1
    fingerprints: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.error is None


# -- parsing ---------------------------------------------------------------

def extract_json(raw: str):
    """First complete JSON object in ``raw`` (prose and code fences are skipped)."""
    decoder = json.JSONDecoder()
    pos = raw.find("{")
    while pos != -1:
        try:
            value, _ = decoder.raw_decode(raw, pos)
        except json.JSONDecodeError:
            pos = raw.find("{", pos + 1)
            continue
        if isinstance(value, dict):
            return value
        pos = raw.find("{", pos + 1)
    raise NoJSONFoundError("no JSON object found in model output")


def parse_structured(raw: str, schema: dict | None):
    value = extract_json(raw)
    if schema is not None:
        errors = sorted(Draft202012Validator(schema).iter_errors(value), key=lambda e: list(e.absolute_path))
        if errors:
            err = errors[0]
            path = "/".join(str(p) for p in err.absolute_path) or "(root)"
            raise SchemaViolationError(f"schema violation at {path}: {err.message}", path=path)
    return value


# -- images ---------------------------------------------------------------

def downscale_png(data: bytes, long_edge: int | None = DEFAULT_LONG_EDGE) -> bytes:
    """Shrink so the longer side is at most ``long_edge`` pixels; small images pass through."""
    if not long_edge:
        return data
    with Image.open(io.BytesIO(data)) as im:
        if max(im.size) <= long_edge:
            return data
        scale = long_edge / max(im.size)
        size = (max(1, round(im.width * scale)), max(1, round(im.height * scale)))
        out = io.BytesIO()
        im.convert("RGB").resize(size, Image.LANCZOS).save(out, format="PNG", optimize=False)
        return out.getvalue()


# -- transports -----------------------------------------------------------

class Transport(Protocol):
    def send(self, req: ModelRequest, turns: list[dict]) -> tuple[str, dict]:
        """Raw completion text and usage counters for one attempt."""


class ScriptedTransport:
    """Answers from a Python callable; used to script tests and record cassettes."""

    def __init__(self, responder: Callable[[ModelRequest, list[dict]], str]):
        self.responder = responder
        self.calls: list[tuple[ModelRequest, list[dict]]] = []

    def send(self, req, turns):
        self.calls.append((req, list(turns)))
        text = self.responder(req, turns)
        return text, {"prompt_chars": len(req.user_prompt), "completion_chars": len(text)}


class LiveTransport:
    """OpenAI-compatible ``/chat/completions`` endpoint; URL and key from the environment."""

    def __init__(self, base_url: str | None = None, api_key: str | None = None, timeout: float = 120.0,
                 send_top_k: bool = False):
        self.base_url = (base_url or os.environ.get(API_BASE_ENV) or "").rstrip("/")
        self.api_key = api_key or os.environ.get(API_KEY_ENV)
        self.timeout = timeout
        self.send_top_k = send_top_k
        if not self.base_url:
            raise TransportError(f"no endpoint configured; set {API_BASE_ENV}")

    def body(self, req: ModelRequest, turns: list[dict]) -> dict:
        content = [{"type": "text", "text": req.user_prompt}]
        for im in req.images:
            content.append({"type": "text", "text": im.label})
            url = "data:image/png;base64," + base64.b64encode(im.data).decode()
            content.append({"type": "image_url", "image_url": {"url": url}})
        messages = [{"role": "system", "content": req.system_prompt}, {"role": "user", "content": content}]
        messages += [{"role": t["role"], "content": t["content"]} for t in turns]
        body = {"model": req.model_id, "messages": messages, "temperature": req.temperature}
        if req.top_k is not None and self.send_top_k:
            body["top_k"] = req.top_k
        if req.output_schema is not None:
            body["response_format"] = {"type": "json_object"}
        return body

    def send(self, req, turns):
        import httpx

        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        try:
            resp = httpx.post(f"{self.base_url}/chat/completions", json=self.body(req, turns), headers=headers,
                              timeout=self.timeout)
            resp.raise_for_status()
            data = resp.json()
            text = data["choices"][0]["message"]["content"] or ""
        except (httpx.HTTPError, KeyError, IndexError, ValueError) as err:
            raise TransportError(f"model call failed: {err}") from None
        return text, dict(data.get("usage") or {})


class Cassette:
    """JSON-lines log of (fingerprint, request summary, response) entries.

    ``replay`` never touches a transport; ``record`` forwards to the transport
    and appends one entry per call; ``live`` forwards without recording.
    """

    def __init__(self, path=None, mode: str = "replay", transport: Transport | None = None):
        if mode not in CASSETTE_MODES:
            raise ValueError(f"mode must be one of {CASSETTE_MODES}")
        if mode != "replay" and transport is None:
            raise ValueError(f"{mode} mode needs a transport")
        self.path = Path(path) if path else None
        self.mode = mode
        self.transport = transport
        self.entries: list[dict] = []
        self._cursor: dict[str, int] = {}
        self._lock = threading.Lock()
        if self.path and self.path.exists() and mode == "replay":
            self.entries = self.read(self.path)
        elif self.path and mode == "record":
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text("", encoding="utf-8")

    @staticmethod
    def read(path) -> list[dict]:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return [json.loads(line) for line in lines if line.strip()]

    def lookup(self, fp: str) -> dict:
        """Next stored response for ``fp``; repeated calls past the end reuse the last one."""
        with self._lock:
            hits = [e for e in self.entries if e["fingerprint"] == fp]
            if not hits:
                raise ReplayMissError(f"no recorded response for request {fp[:12]}", fingerprint=fp)
            i = self._cursor.get(fp, 0)
            self._cursor[fp] = i + 1
            return hits[min(i, len(hits) - 1)]

    def send(self, req: ModelRequest, turns: list[dict]) -> tuple[str, dict]:
        fp = fingerprint(req, turns)
        if self.mode == "replay":
            entry = self.lookup(fp)
            return entry["response"]["raw_text"], dict(entry["response"].get("usage", {}))
        text, usage = self.transport.send(req, turns)
        if self.mode == "record":
            entry = {
                "fingerprint": fp,
                "request": {
                    "tag": req.tag,
                    "role": req.role,
                    "model_id": req.model_id,
                    "schema": req.schema_ref(),
                    "temperature": req.temperature,
                    "top_k": req.top_k,
                    "system_prompt": req.system_prompt,
                    "user_prompt": req.user_prompt,
                    "turns": list(turns),
                    "images": [{"label": im.label, "sha256": im.sha256} for im in req.images],
                },
                "response": {"raw_text": text, "usage": usage},
            }
            with self._lock:
                self.entries.append(entry)
                if self.path:
                    with self.path.open("a", encoding="utf-8") as fh:
                        fh.write(json.dumps(entry, sort_keys=True, ensure_ascii=False) + "\n")
        return text, usage


class RateLimiter:
    """Minimum spacing between calls, shared by all threads."""

    def __init__(self, per_minute: float | None = None):
        self.interval = 60.0 / per_minute if per_minute else 0.0
        self._next = 0.0
        self._lock = threading.Lock()

    def wait(self):
        if not self.interval:
            return
        with self._lock:
            now = time.monotonic()
            delay = max(0.0, self._next - now)
            self._next = max(now, self._next) + self.interval
        if delay:
            time.sleep(delay)


class ModelGateway:
    """Thread-safe front door: retries, schema enforcement, request log."""

    def __init__(self, transport: Transport, long_edge: int | None = DEFAULT_LONG_EDGE,
                 rate_limit_per_minute: float | None = None):
        self.transport = transport
        self.long_edge = long_edge
        self.limiter = RateLimiter(rate_limit_per_minute)
        self.log: list[dict] = []
        self._lock = threading.Lock()

    def prepare(self, req: ModelRequest) -> ModelRequest:
        if not req.images or not self.long_edge:
            return req
        images = [ImageInput(im.label, downscale_png(im.data, self.long_edge)) for im in req.images]
        return ModelRequest(**{**req.__dict__, "images": images})

    def complete(self, req: ModelRequest, validator: Callable[[object], None] | None = None) -> ModelResponse:
        """Schema-valid response, re-prompting with the error up to ``max_retries`` times.

        ``validator`` may raise SchemaViolationError for semantic checks the
        JSON schema cannot express.
        """
        req = self.prepare(req)
        turns: list[dict] = []
        fps: list[str] = []
        usage_total: dict = {}
        start = time.perf_counter()
        last = None
        for attempt in range(req.max_retries + 1):
            self.limiter.wait()
            fps.append(fingerprint(req, turns))
            raw, usage = self.transport.send(req, turns)
            for k, v in usage.items():
                if isinstance(v, (int, float)):
                    usage_total[k] = usage_total.get(k, 0) + v
            try:
                parsed = parse_structured(raw, req.output_schema) if req.output_schema is not None else raw
                if validator is not None:
                    validator(parsed)
            except (NoJSONFoundError, SchemaViolationError) as err:
                last = ModelResponse(raw, None, err.message, usage_total, time.perf_counter() - start,
                                     attempt + 1, list(fps))
                turns = turns + [{"role": "assistant", "content": raw},
                                 {"role": "user", "content": prompts.render("retry", error=err.message)}]
                continue
            resp = ModelResponse(raw, parsed, None, usage_total, time.perf_counter() - start, attempt + 1, fps)
            self._record(req, resp)
            return resp
        self._record(req, last)
        raise SchemaInvalidError(f"{req.tag or 'model'} output still invalid after {req.max_retries} retries: "
                                 f"{last.error}", response=last.raw_text)

    def _record(self, req: ModelRequest, resp: ModelResponse):
        with self._lock:
            self.log.append({
                "tag": req.tag, "role": req.role, "model_id": req.model_id, "fingerprints": resp.fingerprints,
                "attempts": resp.attempts, "images": len(req.images), "temperature": req.temperature,
                "top_k": req.top_k, "ok": resp.ok,
            })
