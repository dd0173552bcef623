"""Harness configuration file (YAML or JSON).

Example::

    models:
      router_model: fast-model
      editor_model: strong-model
      judge_model: strong-model
    agent:
      max_iterations: 3
      forced_path: null
    judge:
      vq_aggregation: min
      screen_threshold: 0.995
      render:
        command: "soffice-to-png {input} {outdir}"
        timeout_s: 180
    gateway:
      long_edge: 1536
      rate_limit_per_minute: 60
    cassette:
      path: run.cassette.jsonl
      mode: replay

API keys never live here; see ``DECKFORGE_API_KEY``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .agent import AgentConfig
from .gateway import CASSETTE_MODES, DEFAULT_LONG_EDGE, Cassette, LiveTransport, ModelGateway
from .judge import JudgeConfig


def read_structured(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    data = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a mapping at the top level")
    return data


@dataclass
class HarnessConfig:
    agent: AgentConfig = field(default_factory=AgentConfig)
    judge: JudgeConfig = field(default_factory=JudgeConfig)
    long_edge: int | None = DEFAULT_LONG_EDGE
    rate_limit_per_minute: float | None = None
    cassette_path: str | None = None
    cassette_mode: str = "live"

    @classmethod
    def from_dict(cls, data: dict | None, base: Path | None = None) -> "HarnessConfig":
        data = dict(data or {})
        models = data.get("models") or {}
        agent = {**{k: v for k, v in models.items() if k in ("router_model", "editor_model", "verifier_model")},
                 **(data.get("agent") or {})}
        judge = {**{k: v for k, v in models.items() if k in ("judge_model", "style_model")},
                 **(data.get("judge") or {})}
        gw = data.get("gateway") or {}
        cas = data.get("cassette") or {}
        path = cas.get("path")
        if path and base is not None and not Path(path).is_absolute():
            path = str(base / path)
        mode = cas.get("mode", "replay" if path else "live")
        if mode not in CASSETTE_MODES:
            raise ValueError(f"cassette.mode must be one of {CASSETTE_MODES}")
        return cls(AgentConfig.from_dict(agent), JudgeConfig.from_dict(judge), gw.get("long_edge", DEFAULT_LONG_EDGE),
                   gw.get("rate_limit_per_minute"), path, mode)

    @classmethod
    def load(cls, path) -> "HarnessConfig":
        return cls.from_dict(read_structured(path), Path(path).parent)

    def gateway(self, transport=None) -> ModelGateway:
        """Gateway over the configured cassette; live and record modes need an endpoint."""
        if self.cassette_mode == "replay":
            source = Cassette(self.cassette_path, "replay")
        else:
            source = Cassette(self.cassette_path, self.cassette_mode, transport or LiveTransport())
        return ModelGateway(source, long_edge=self.long_edge, rate_limit_per_minute=self.rate_limit_per_minute)
