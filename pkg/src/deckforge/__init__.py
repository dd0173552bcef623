"""deckforge: presentation snapshots, semantic diffs, transactional edits, and judging."""

__version__ = "0.1.0"
