"""Run the route/edit/verify loop against scripted stand-in models.

The stand-ins know reference edits for the bundled fixture cases, so this
runs without network access.  Swap the transport for ``LiveTransport`` (and
set DECKFORGE_API_BASE / DECKFORGE_API_KEY) to use a real endpoint.

Run:  python3 demos/03_agent_loop_offline.py
"""

import tempfile
from pathlib import Path

from deckforge.agent import AgentConfig, run_agent
from deckforge.bench import load_case
from deckforge.diff import diff_snapshots
from deckforge.deck import parse_deck, snapshot
from deckforge.fixtures import generate_cases
from deckforge.gateway import ModelGateway, ScriptedTransport
from deckforge.scripted import OracleEditor

with tempfile.TemporaryDirectory() as tmp:
    generate_cases(Path(tmp))
    case = load_case(Path(tmp) / "interactivity-fade")
    print("instruction:", case.instruction)

    for verdict in ("pass", "fail-then-pass", "fail"):
        transport = ScriptedTransport(OracleEditor(verdict=verdict))
        result = run_agent(case.original, case.instruction, AgentConfig(render=None), ModelGateway(transport))
        steps = " -> ".join(s["step"] for s in result.trace.steps)
        gap = diff_snapshots(snapshot(parse_deck(case.ground_truth)), snapshot(parse_deck(result.package)))
        print(f"\nverifier says {verdict!r}: {result.trace.attempts()} attempt(s), "
              f"verified={result.trace.result['verified']}")
        print(f"  {steps}")
        print(f"  remaining differences from ground truth: {gap.total_differences}")
