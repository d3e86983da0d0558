"""Bundled worked-example data: the sample journal and its network."""

import json
from importlib import resources

from ..ledger import JournalLine, ManyValuedContext, parse_journal


def table1_bytes() -> bytes:
    return resources.files(__package__).joinpath("table1.csv").read_bytes()


def load_table1() -> list[JournalLine]:
    return parse_journal(table1_bytes())


def load_table2() -> ManyValuedContext:
    text = resources.files(__package__).joinpath("table2.json").read_text(encoding="utf-8")
    return ManyValuedContext.from_json(json.loads(text))
