import copy
import json
from pathlib import Path

import pytest
from jsonschema import Draft202012Validator

from deckforge.deck import parse_deck, snapshot
from deckforge.diff import diff_snapshots
from deckforge.edit import edit_program_schema, patch_set_schema

SCHEMAS = Path(__file__).resolve().parent.parent / "docs" / "schemas"


def load(name):
    schema = json.loads((SCHEMAS / f"{name}.schema.json").read_text())
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema)


@pytest.mark.parametrize("name,build", [("edit-program", edit_program_schema), ("patch-set", patch_set_schema)])
def test_published_edit_schemas_are_current(name, build):
    assert json.loads((SCHEMAS / f"{name}.schema.json").read_text()) == build()


def test_snapshots_and_diffs_match_published_schemas(corpus, deck):
    snap, report = load("snapshot"), load("diff-report")
    for pkg in [deck, *corpus]:
        doc = snapshot(parse_deck(pkg))
        snap.validate(doc)
        other = copy.deepcopy(doc)
        other["slides"][0]["notes"] += " changed"
        other["slides"].pop()
        report.validate(json.loads(json.dumps(diff_snapshots(doc, other, initial=doc).to_dict())))
