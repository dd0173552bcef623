"""Replay the recorded six-case suite and print the category table.

Every judge call is served from ``tests/data/suite.cassette.jsonl``, so the
numbers are identical on every machine.

Run:  python3 demos/04_replay_benchmark.py
"""

import tempfile
from pathlib import Path

from deckforge.bench import SuiteManifest, render_report, run_suite
from deckforge.gateway import Cassette, ModelGateway

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"

manifest = SuiteManifest.load(DATA / "suite.yaml")
with tempfile.TemporaryDirectory() as tmp:
    manifest.output_dir = Path(tmp)
    record = run_suite(manifest, ModelGateway(Cassette(manifest.cassette, "replay")))

print(render_report(record.report))
for r in record.results:
    kept = [i + 1 for i in r.screened_slide_indices]
    print(f"{r.case_id:20} IF {r.if_score}  VQ {r.vq_score}  {r.modality:9}  slides judged for VQ: {kept or 'none'}")
print(f"\nsuite hash {record.suite_hash[:16]}")
